//! The boundary-rate criterion replaces the support count on fitted-zero
//! coordinates with a Monte-Carlo term. On an identity information matrix
//! with one inactive coordinate and level 1 that term has the closed form
//! 2 * Phi_c(1) (a standard normal tail), which this example reproduces.
//!
//! Run with `cargo run --release --example khat_correction`.

use nalgebra::DMatrix;
use penglm::aic::{estimate_k, McOptions};

fn main() -> penglm::Result<()> {
    // E[soft(s, 1) * s] for s standard normal: integrate by parts and the
    // density terms cancel, leaving twice the upper tail at 1.
    let closed_form = 0.31731050786291415;

    println!("draws     estimate    se          gap / se");
    for draws in [1_000usize, 10_000, 100_000, 1_000_000] {
        let est = estimate_k(
            &DMatrix::identity(2, 2),
            &[1],
            1.0,
            &McOptions { draws, seed: 7 },
        )?;
        println!(
            "{draws:<9} {:<11.6} {:<11.6} {:+.2}",
            est.khat,
            est.se,
            (est.khat - closed_form) / est.se
        );
    }
    println!("closed form: {closed_form:.6}");

    // A correlated two-coordinate inactive block has no closed form; the
    // estimate is still cheap because only the inactive block is sampled.
    let j = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.0]);
    let est = estimate_k(&j, &[0], 0.5, &McOptions { draws: 100_000, seed: 7 })?;
    println!(
        "correlated block, level 0.5: khat = {:.4} +- {:.4}",
        est.khat, est.se
    );
    Ok(())
}
