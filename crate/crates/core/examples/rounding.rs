//! Rounds near-solutions of operator identities to exact ones.

use opstab::matrix::{ComplexMatrix, Tolerance};
use opstab::perturbation::{
    round_to_povm, round_to_projection, round_to_unitary, stability_modulus, RoundingKind,
};
use opstab::sampling;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> opstab::error::Result<()> {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    for kind in RoundingKind::ALL {
        println!(
            "{:>16}: modulus at eps=1/4 is {:e}",
            kind.name(),
            stability_modulus(kind, 0.25)?.value()
        );
    }

    let u = sampling::random_unitary(4, &mut rng);
    let a = &u + &sampling::random_perturbation(4, 1e-3, &mut rng);
    let (_, r) = round_to_unitary(&a, 0.25, &tol)?;
    println!(
        "unitary:    defect {:.3e} -> moved {:.3e}, residual {:.1e}",
        r.input_defect, r.output_distance, r.exactness_residual
    );

    let p = ComplexMatrix::projector(&[1.0.into(), 0.0.into(), 0.0.into()]);
    let a = &p + &sampling::random_hermitian(3, 5e-3, &mut rng);
    let (_, r) = round_to_projection(&a, 0.5, &tol)?;
    println!(
        "projection: defect {:.3e} -> moved {:.3e}, residual {:.1e}",
        r.input_defect, r.output_distance, r.exactness_residual
    );

    let ops: Vec<_> = sampling::random_povm(3, 3, &mut rng)
        .iter()
        .map(|op| op + &sampling::random_hermitian(3, 1e-4, &mut rng))
        .collect();
    let (_, r) = round_to_povm(&ops, &tol)?;
    println!(
        "povm:       defect {:.3e} -> moved {:.3e}, residual {:.1e}",
        r.input_defect, r.output_distance, r.exactness_residual
    );
    Ok(())
}
