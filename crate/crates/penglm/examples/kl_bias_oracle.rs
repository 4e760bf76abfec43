//! Check the criterion's optimism correction against a brute-force oracle.
//!
//! Each replication fits on one sample and evaluates the fitted model's log
//! likelihood on an independent copy of the same size; the mean gap between
//! in-sample and out-of-sample fit is the optimism the correction term is
//! supposed to estimate. Away from the boundary tuning exponent the two
//! agree; this example shows one such case.
//!
//! Run with `cargo run --release --example kl_bias_oracle`.

use nalgebra::DVector;
use penglm::aic::McOptions;
use penglm::sim::{empirical_kl_bias, DesignKind, SimDesign};
use penglm::{FamilyKind, FitOptions, PenaltyKind, PenaltySpec};

fn main() -> penglm::Result<()> {
    let n = 300;
    let design = SimDesign::new(
        FamilyKind::GaussianUnitVariance,
        DVector::from_vec(vec![2.0, 0.0, 0.0, 1.0]),
        n,
        DesignKind::IidUniform {
            low: -1.0,
            high: 1.0,
        },
        11,
    )?;
    let spec = PenaltySpec::new(PenaltyKind::Scad { a: 3.7 }, 0.3, 1.5, n)?;

    let report = empirical_kl_bias(
        &design,
        &spec,
        &FitOptions::default(),
        &McOptions::default(),
        400,
        1,
        false,
    )?;

    println!(
        "oracle optimism:      {:.4} +- {:.4}  ({} replications, {} kept)",
        report.mean, report.se, report.reps, report.kept
    );
    println!(
        "criterion correction: {:.4} +- {:.4}",
        report.mean_correction, report.se_correction
    );
    let gap = report.mean - report.mean_correction;
    println!(
        "gap: {gap:+.4} = {:+.2} combined se",
        gap / report.combined_se()
    );
    println!(
        "(the true support has 2 coefficients; a consistent correction \
         converges to the support size as n grows)"
    );
    Ok(())
}
