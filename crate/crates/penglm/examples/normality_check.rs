//! Check the distributional claims about the rescaled active-block estimate.
//!
//! Away from the boundary tuning exponent, sqrt(n) times the active-block
//! error should be centered normal with covariance given by the inverse
//! active-block information. At the boundary exponent the bridge acquires a
//! deterministic shift; the check reports the predicted center.
//!
//! Run with `cargo run --release --example normality_check`.

use nalgebra::DVector;
use penglm::sim::{asymptotic_normality_check, DesignKind, SimDesign};
use penglm::{FamilyKind, FitOptions, PenaltyKind, PenaltySpec};

fn main() -> penglm::Result<()> {
    let opts = FitOptions::default();
    let n = 800;

    let design = SimDesign::reference(n, 11);
    let spec = PenaltySpec::new(PenaltyKind::Scad { a: 3.7 }, 0.3, 1.5, n)?;
    let report = asymptotic_normality_check(&design, &spec, &opts, 300, 1)?;
    println!(
        "scad, rate exponent 1.5: kept {} of {} replications",
        report.kept, report.reps
    );
    println!(
        "  covariance vs inverse information: {:.3} relative Frobenius",
        report.cov_rel_frobenius
    );
    println!(
        "  per-coordinate skewness z: {:?}",
        report
            .skew_z
            .iter()
            .map(|z| (z * 100.0).round() / 100.0)
            .collect::<Vec<_>>()
    );

    // Bridge at the boundary exponent: one coefficient, alternating design,
    // predicted center -lambda * J^-1 * gamma |b*|^(gamma-1) sgn(b*).
    let design = SimDesign::new(
        FamilyKind::GaussianUnitVariance,
        DVector::from_vec(vec![2.0]),
        n,
        DesignKind::IidRademacher,
        11,
    )?;
    let spec = PenaltySpec::new(PenaltyKind::Bridge { gamma: 0.5 }, 1.0, 1.0, n)?;
    let report = asymptotic_normality_check(&design, &spec, &opts, 300, 1)?;
    let center = report.center.as_ref().expect("boundary rate has a center");
    println!("\nbridge, boundary exponent: kept {} replications", report.kept);
    println!(
        "  predicted center {:.4}, observed mean {:.4} +- {:.4}",
        center[0], report.mean[0], report.mean_se[0]
    );
    Ok(())
}
