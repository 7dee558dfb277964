//! Classical and quantum values of the CHSH game.

use opstab::games::{chsh_tensor_strategy, game_value, game_value_by_correlations, NonlocalGame};
use opstab::matrix::Tolerance;
use opstab::search::classical_value;

fn main() -> opstab::error::Result<()> {
    let tol = Tolerance::default();
    let g = NonlocalGame::chsh();

    let cv = classical_value(&g)?;
    println!(
        "classical value {} (alice {:?}, bob {:?})",
        cv.value, cv.alice, cv.bob
    );

    let sigma = chsh_tensor_strategy();
    let v = game_value(&g, &sigma, &tol)?;
    let w = game_value_by_correlations(&g, &sigma, &tol)?;
    let target = (std::f64::consts::PI / 8.0).cos().powi(2);
    println!("tensor strategy: {v:.15} (correlations {w:.15}, cos^2(pi/8) = {target:.15})");
    Ok(())
}
