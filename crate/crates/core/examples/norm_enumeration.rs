//! Dyadic lower bounds on the universal norm of g + g* for one unitary.

use opstab::matrix::Tolerance;
use opstab::presentations::{
    default_modulus, norm_lower_enumerate, Presentation, PresentationId, SeededCatalog,
};

fn main() -> opstab::error::Result<()> {
    let id = PresentationId::FreeUnitaries(1);
    let pres = Presentation::registered(id);
    let q = pres.parse_poly("g + g*")?;
    let catalog = SeededCatalog::new(&pres, 0, 128)?;
    let emissions = norm_lower_enumerate(
        &pres,
        &q,
        &catalog,
        &default_modulus(id)?,
        12,
        &Tolerance::default(),
    )?;
    for e in &emissions {
        println!(
            "round {:>2}: ||q|| >= {:<12} = {:.10} (witness dim {})",
            e.round,
            e.bound.to_string(),
            e.bound.value(),
            e.dim
        );
    }
    Ok(())
}
