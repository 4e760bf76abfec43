//! Watch sparsity and exact-support recovery sharpen as n grows.
//!
//! The sparsity rate counts replications where every truly-zero coefficient
//! is fitted to exactly zero; the selection rate additionally requires every
//! truly-nonzero coefficient to stay active.
//!
//! Run with `cargo run --release --example oracle_rates`.

use penglm::sim::{selection_consistency_rate, sparsity_rate, SimDesign};
use penglm::{FitOptions, PenaltyKind, PenaltySpec};

fn main() -> penglm::Result<()> {
    let opts = FitOptions::default();
    let reps = 100;

    println!("n      sparsity  exact support");
    for n in [100usize, 400, 1600] {
        let design = SimDesign::reference(n, 11);
        let spec = PenaltySpec::new(PenaltyKind::Scad { a: 3.7 }, 0.3, 1.5, n)?;
        let sparsity = sparsity_rate(&design, &spec, &opts, reps, 1)?;
        let selection = selection_consistency_rate(&design, &spec, &opts, reps, 1)?;
        println!(
            "{n:<6} {:<9.2} {:.2}",
            sparsity.rate, selection.rate
        );
    }
    println!("(scad, a = 3.7, lambda = 0.3, rate exponent 1.5, {reps} replications)");
    Ok(())
}
