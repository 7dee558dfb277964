//! Searching for a certified strategy that beats 1/2.

use opstab::games::NonlocalGame;
use opstab::matrix::Tolerance;
use opstab::search::{reverify_witness, semidecide_membership, CandidateStream, GameFamily};

fn main() -> opstab::error::Result<()> {
    let tol = Tolerance::default();
    let stream = CandidateStream::new(vec![1, 2, 3, 4], 8, 0, 500)?;
    for (name, g) in [
        ("chsh", NonlocalGame::chsh()),
        ("always win", NonlocalGame::constant(2, 2, true)),
        ("never win", NonlocalGame::constant(2, 2, false)),
    ] {
        let family = GameFamily::constant(g.clone(), 1.0);
        let v = semidecide_membership(&family, &[], &stream, &tol)?;
        print!(
            "{name:>10}: {} after {} candidates",
            v.outcome.name(),
            v.candidates_tried
        );
        if let Some(w) = &v.witness {
            print!(
                ", certified {:.4}, re-verified {}",
                w.certified_value,
                reverify_witness(&g, 1.0, w, &tol)?
            );
        }
        println!();
    }
    Ok(())
}
