//! Tune the penalty level over a grid with the criterion and print the path.
//!
//! At the boundary tuning exponent (gamma0 = 1) the criterion replaces the
//! support count on the fitted-zero block with a Monte-Carlo estimate, so a
//! draw budget is part of the call.
//!
//! Run with `cargo run --release --example aic_path`.

use penglm::aic::McOptions;
use penglm::sim::SimDesign;
use penglm::{select_lambda, FitOptions, PenaltyKind};

fn main() -> penglm::Result<()> {
    let n = 300;
    let design = SimDesign::reference(n, 21);
    let data = design.generate()?;

    let lambdas: Vec<f64> = (1..=12).map(|k| 0.1 * k as f64).collect();
    let mc = McOptions {
        draws: 2000,
        seed: 5,
    };
    let selection = select_lambda(
        &data,
        PenaltyKind::Mcp { a: 3.0 },
        &lambdas,
        1.0,
        &FitOptions::default(),
        &mc,
    )?;

    println!("lambda   criterion  support  khat");
    for point in &selection.path {
        println!(
            "{:<8.2} {:<10.3} {:<8} {}",
            point.lambda,
            point.report.aic,
            point.fit.active.len(),
            point
                .report
                .correction
                .khat
                .as_ref()
                .map(|k| format!("{:.3} +- {:.3}", k.khat, k.se))
                .unwrap_or_else(|| "-".to_string()),
        );
    }
    println!(
        "\nselected lambda = {:.2} with support {:?}",
        selection.best_point().lambda,
        selection.best_point().fit.active
    );
    println!("true support          {:?}", design.true_support());
    Ok(())
}
