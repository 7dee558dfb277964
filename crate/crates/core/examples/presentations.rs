//! Relation defects and exact witnesses for registered presentations.

use std::collections::BTreeMap;

use opstab::matrix::{ComplexMatrix, Tolerance};
use opstab::presentations::{
    default_modulus, random_exact_representation, relation_defect, stability_witness, Presentation,
    PresentationId, Representation,
};
use opstab::sampling;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> opstab::error::Result<()> {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for id in [
        PresentationId::FreeUnitaries(2),
        PresentationId::Projections(2),
        PresentationId::MatrixUnits(2),
    ] {
        let pres = Presentation::registered(id);
        let table = default_modulus(id)?;
        let exact = random_exact_representation(&pres, 4, &mut rng)?;
        let images: BTreeMap<String, ComplexMatrix> = exact
            .images()
            .iter()
            .map(|(name, m)| {
                (
                    name.clone(),
                    m + &sampling::random_perturbation(4, 1e-6, &mut rng),
                )
            })
            .collect();
        let noisy = Representation::new(4, pres.unit(), images)?;
        let w = stability_witness(&pres, &noisy, 0.125, &tol)?;
        println!(
            "{id}: modulus {}, noisy defect {:.2e}, witness defect {:.2e}, moved {:.2e}",
            table.rule,
            relation_defect(&pres, &noisy)?,
            relation_defect(&pres, &w)?,
            w.distance(&noisy)?,
        );
    }
    Ok(())
}
