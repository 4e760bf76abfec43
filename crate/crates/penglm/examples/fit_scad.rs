//! Fit one SCAD-penalized gaussian model on simulated data and print the
//! recovered support next to the truth.
//!
//! Run with `cargo run --release --example fit_scad`.

use nalgebra::DVector;
use penglm::{fit, FitOptions, PenaltyKind, PenaltySpec};
use penglm::sim::SimDesign;

fn main() -> penglm::Result<()> {
    // Eight coefficients, three of them nonzero, uniform design.
    let n = 400;
    let design = SimDesign::reference(n, 7);
    let data = design.generate()?;

    // lambda is on the tuning-rate scale: the effective per-coefficient
    // level is lambda * n^((gamma0 - 2) / 2).
    let spec = PenaltySpec::new(PenaltyKind::Scad { a: 3.7 }, 0.3, 1.5, n)?;
    let result = fit(&data, &spec, &FitOptions::default())?;

    println!("true beta:   {:?}", design.beta_star().as_slice());
    println!(
        "fitted beta: {:?}",
        result
            .beta_hat
            .iter()
            .map(|b| (b * 1e3).round() / 1e3)
            .collect::<Vec<_>>()
    );
    println!("active set:  {:?}", result.active);
    println!(
        "converged: {} in {} iterations, kkt residual {:.2e}",
        result.converged, result.iterations, result.kkt_residual
    );

    let mle = penglm::newton_mle(&data)?;
    let shrink: DVector<f64> = &mle - &result.beta_hat;
    println!(
        "largest coordinate moved from the unpenalized fit: {:.4}",
        shrink.amax()
    );
    Ok(())
}
