//! Simulation harnesses: data generation from a known truth and empirical
//! verification of the estimator's sparsity, selection, normality, and
//! criterion-bias behaviour.
//!
//! Everything here is deterministic given its seeds. The design matrix is
//! drawn from the design seed (substream 0, or one substream per replication
//! when `redraw_x` is set); response copies for replication `r` come from
//! substreams `1 + 2r` and `2 + 2r` of the harness seed. Replications run in
//! parallel but are collected in index order, so parallel and sequential runs
//! produce identical reports.

use crate::aic::{bias_correction, McOptions};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::family::FamilyKind;
use crate::glm::{log_likelihood, observed_information};
use crate::info::partition_information;
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::solver::{fit, FitOptions, FitResult};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

/// How design-matrix rows are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignKind {
    /// Entries i.i.d. uniform on `[low, high)`.
    IidUniform { low: f64, high: f64 },
    /// Entries i.i.d. +-1 with equal probability.
    IidRademacher,
    /// A caller-supplied matrix, used as-is.
    FixedMatrix { x: DMatrix<f64> },
}

/// A data-generating truth: family, coefficients, sample size, and design.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDesign {
    family: FamilyKind,
    beta_star: DVector<f64>,
    n: usize,
    design: DesignKind,
    seed: u64,
    redraw_x: bool,
}

impl SimDesign {
    pub fn new(
        family: FamilyKind,
        beta_star: DVector<f64>,
        n: usize,
        design: DesignKind,
        seed: u64,
    ) -> Result<Self> {
        if beta_star.is_empty() {
            return Err(Error::InvalidParam(
                "true coefficient vector must have at least one entry".into(),
            ));
        }
        if beta_star.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParam(
                "true coefficient vector must be finite".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidParam("sample size must be positive".into()));
        }
        match &design {
            DesignKind::IidUniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(Error::InvalidParam(format!(
                        "uniform design needs finite low < high, got [{low}, {high})"
                    )));
                }
            }
            DesignKind::IidRademacher => {}
            DesignKind::FixedMatrix { x } => {
                if x.nrows() != n || x.ncols() != beta_star.len() {
                    return Err(Error::InvalidParam(format!(
                        "fixed design is {} x {} but n = {n}, p = {}",
                        x.nrows(),
                        x.ncols(),
                        beta_star.len()
                    )));
                }
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParam("fixed design must be finite".into()));
                }
            }
        }
        Ok(SimDesign {
            family,
            beta_star,
            n,
            design,
            seed,
            redraw_x: false,
        })
    }

    /// The baseline design all harness-calibrated numbers refer to:
    /// `beta* = (3, 1.5, 0, 0, 2, 0, 0, 0)`, rows i.i.d. uniform on `[-1, 1)`,
    /// gaussian responses.
    pub fn reference(n: usize, seed: u64) -> Self {
        SimDesign::new(
            FamilyKind::GaussianUnitVariance,
            DVector::from_vec(vec![3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]),
            n,
            DesignKind::IidUniform {
                low: -1.0,
                high: 1.0,
            },
            seed,
        )
        .expect("reference design parameters are valid")
    }

    /// Redraw the design matrix each replication instead of holding it fixed.
    pub fn with_redraw_x(mut self, redraw: bool) -> Self {
        self.redraw_x = redraw;
        self
    }

    pub fn family(&self) -> FamilyKind {
        self.family
    }

    pub fn beta_star(&self) -> &DVector<f64> {
        &self.beta_star
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.beta_star.len()
    }

    pub fn design(&self) -> &DesignKind {
        &self.design
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn redraw_x(&self) -> bool {
        self.redraw_x
    }

    /// Indices with `beta*_j = 0` (the coordinates sparsity should find).
    pub fn true_zero(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| self.beta_star[j] == 0.0).collect()
    }

    /// Indices with `beta*_j != 0` (the support selection should recover).
    pub fn true_support(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| self.beta_star[j] != 0.0).collect()
    }

    fn draw_x(&self, rng: &mut ChaCha12Rng) -> DMatrix<f64> {
        match &self.design {
            DesignKind::IidUniform { low, high } => {
                DMatrix::from_fn(self.n, self.p(), |_, _| {
                    low + (high - low) * rng.random::<f64>()
                })
            }
            DesignKind::IidRademacher => DMatrix::from_fn(self.n, self.p(), |_, _| {
                if rng.random::<f64>() < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }),
            DesignKind::FixedMatrix { x } => x.clone(),
        }
    }

    fn x_for_rep(&self, rep: usize) -> DMatrix<f64> {
        let stream = if self.redraw_x { 1 + rep as u64 } else { 0 };
        let mut rng = substream(self.seed, stream);
        self.draw_x(&mut rng)
    }

    fn sample_y(&self, x: &DMatrix<f64>, rng: &mut ChaCha12Rng) -> Result<DVector<f64>> {
        let theta = x * &self.beta_star;
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            y[i] = match self.family {
                FamilyKind::GaussianUnitVariance => {
                    let z: f64 = StandardNormal.sample(rng);
                    theta[i] + z
                }
                FamilyKind::BernoulliLogit => {
                    if rng.random::<f64>() < self.family.mean(theta[i]) {
                        1.0
                    } else {
                        0.0
                    }
                }
                FamilyKind::PoissonLog => {
                    let rate = theta[i].exp();
                    if !rate.is_finite() {
                        return Err(Error::Domain(format!(
                            "poisson rate overflowed at observation {i} (linear predictor {})",
                            theta[i]
                        )));
                    }
                    let dist = Poisson::new(rate).map_err(|e| {
                        Error::Domain(format!("poisson rate {rate} rejected: {e}"))
                    })?;
                    dist.sample(rng)
                }
            };
        }
        Ok(y)
    }

    /// One dataset from the truth: X per the design (substream 0 of the design
    /// seed), responses from substream 1.
    pub fn generate(&self) -> Result<Dataset> {
        let x = self.x_for_rep(0);
        let mut rng = substream(self.seed, 1);
        let y = self.sample_y(&x, &mut rng)?;
        Dataset::new(y, x, self.family)
    }
}

fn substream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `reps` replications: draw a response, fit, and reduce kept fits with
/// `per_rep`. Fit errors and uncertified fits are counted as skips, never
/// silently dropped. Returns the kept values in replication order plus the
/// skip count.
fn replicate<T, F>(
    design: &SimDesign,
    spec: &PenaltySpec,
    opts: &FitOptions,
    reps: usize,
    seed: u64,
    swap_copies: bool,
    per_rep: F,
) -> Result<(Vec<T>, usize)>
where
    T: Send,
    F: Fn(usize, &Dataset, &FitResult) -> Result<T> + Sync,
{
    if reps == 0 {
        return Err(Error::InvalidParam("need at least one replication".into()));
    }
    if spec.n() != design.n() {
        return Err(Error::InvalidParam(format!(
            "penalty was configured for n = {} but the design has n = {}",
            spec.n(),
            design.n()
        )));
    }
    let outcomes: Vec<Result<Option<T>>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let x = design.x_for_rep(r);
            let train_stream = if swap_copies { 2 + 2 * r as u64 } else { 1 + 2 * r as u64 };
            let mut rng = substream(seed, train_stream);
            let y = design.sample_y(&x, &mut rng)?;
            let data = Dataset::new(y, x, design.family())?;
            match fit(&data, spec, opts) {
                Err(_) => Ok(None),
                Ok(f) if !f.converged => Ok(None),
                Ok(f) => per_rep(r, &data, &f).map(Some),
            }
        })
        .collect();

    let mut kept = Vec::with_capacity(reps);
    let mut skipped = 0;
    for outcome in outcomes {
        match outcome? {
            Some(v) => kept.push(v),
            None => skipped += 1,
        }
    }
    Ok((kept, skipped))
}

/// Mean/se summary of the Monte-Carlo KL optimism oracle, with the criterion's
/// correction averaged over the same replications for comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct KlBiasReport {
    /// Mean of the per-replication bias evaluations.
    pub mean: f64,
    /// Standard error of that mean.
    pub se: f64,
    /// Replications requested.
    pub reps: usize,
    /// Replications that produced a certified fit.
    pub kept: usize,
    /// Replications dropped (fit failure or no convergence certificate).
    pub skipped: usize,
    /// Average criterion correction (support size plus `K_hat` when the
    /// regime uses it) over kept replications.
    pub mean_correction: f64,
    /// Standard error of `mean_correction`; combine with `se` when comparing
    /// the two means.
    pub se_correction: f64,
    /// Average selected support size over kept replications.
    pub mean_support: f64,
    /// Average `K_hat` over kept replications, when the regime uses it.
    pub mean_khat: Option<f64>,
}

impl KlBiasReport {
    /// Standard error of the oracle-minus-correction gap, treating the two
    /// means as independent (conservative for positively correlated pairs).
    pub fn combined_se(&self) -> f64 {
        (self.se * self.se + self.se_correction * self.se_correction).sqrt()
    }

    pub fn skip_rate(&self) -> f64 {
        self.skipped as f64 / self.reps as f64
    }
}

/// The exact two-copy bias evaluation for one fitted value:
/// `[loglik(bh; train) - loglik(b*; train)] - [loglik(bh; test) - loglik(b*; test)]`.
///
/// Evaluated as literal log-likelihood differences, so `bh = b*` gives exactly
/// zero and base-measure terms cancel within each bracket.
pub(crate) fn kl_bias_term(
    beta_hat: &DVector<f64>,
    beta_star: &DVector<f64>,
    train: &Dataset,
    test: &Dataset,
) -> Result<f64> {
    let train_gap = log_likelihood(beta_hat, train)? - log_likelihood(beta_star, train)?;
    let test_gap = log_likelihood(beta_hat, test)? - log_likelihood(beta_star, test)?;
    Ok(train_gap - test_gap)
}

/// Brute-force oracle for the KL optimism the criterion's correction estimates.
///
/// Each replication draws two independent response copies on the same design
/// matrix, fits on one, and evaluates the exact log-likelihood bracket above.
/// `swap_copies` exchanges which copy is fitted (the estimate's distribution
/// is unchanged; used to check copy independence). The report also carries the
/// average correction `support + K_hat` so callers can compare the two sides
/// directly.
pub fn empirical_kl_bias(
    design: &SimDesign,
    spec: &PenaltySpec,
    opts: &FitOptions,
    mc: &McOptions,
    reps: usize,
    seed: u64,
    swap_copies: bool,
) -> Result<KlBiasReport> {
    if reps < 100 {
        return Err(Error::InvalidParam(format!(
            "the bias oracle needs at least 100 replications, got {reps}"
        )));
    }
    let beta_star = design.beta_star().clone();
    let (values, skipped) = replicate(
        design,
        spec,
        opts,
        reps,
        seed,
        swap_copies,
        |r, data, fitted| {
            let test_stream = if swap_copies { 1 + 2 * r as u64 } else { 2 + 2 * r as u64 };
            let mut rng = substream(seed, test_stream);
            let y_test = design.sample_y(data.x(), &mut rng)?;
            let test = Dataset::new(y_test, data.x().clone(), design.family())?;
            let bias = kl_bias_term(&fitted.beta_hat, &beta_star, data, &test)?;
            let corr = bias_correction(fitted, data, spec, mc)?;
            Ok((bias, corr.value, corr.support_size, corr.khat.map(|k| k.khat)))
        },
    )?;
    let kept = values.len();
    if kept < 2 {
        return Err(Error::InsufficientData(format!(
            "only {kept} of {reps} replications produced a certified fit"
        )));
    }
    let m = kept as f64;
    let mean = values.iter().map(|v| v.0).sum::<f64>() / m;
    let var = values.iter().map(|v| (v.0 - mean) * (v.0 - mean)).sum::<f64>() / (m - 1.0);
    let mean_correction = values.iter().map(|v| v.1).sum::<f64>() / m;
    let var_correction = values
        .iter()
        .map(|v| (v.1 - mean_correction) * (v.1 - mean_correction))
        .sum::<f64>()
        / (m - 1.0);
    let mean_support = values.iter().map(|v| v.2 as f64).sum::<f64>() / m;
    let mean_khat = if values[0].3.is_some() {
        Some(values.iter().map(|v| v.3.unwrap_or(0.0)).sum::<f64>() / m)
    } else {
        None
    };
    Ok(KlBiasReport {
        mean,
        se: (var / m).sqrt(),
        reps,
        kept,
        skipped,
        mean_correction,
        se_correction: (var_correction / m).sqrt(),
        mean_support,
        mean_khat,
    })
}

/// An empirical frequency over replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    /// Fraction of kept replications satisfying the event.
    pub rate: f64,
    /// Replications requested.
    pub reps: usize,
    /// Replications kept (certified fits).
    pub kept: usize,
    /// Replications skipped.
    pub skipped: usize,
}

impl RateReport {
    pub fn skip_rate(&self) -> f64 {
        self.skipped as f64 / self.reps as f64
    }
}

fn rate_over_reps<F>(
    design: &SimDesign,
    spec: &PenaltySpec,
    opts: &FitOptions,
    reps: usize,
    seed: u64,
    event: F,
) -> Result<RateReport>
where
    F: Fn(&FitResult) -> bool + Sync,
{
    let (hits, skipped) = replicate(design, spec, opts, reps, seed, false, |_, _, fitted| {
        Ok(event(fitted))
    })?;
    let kept = hits.len();
    if kept == 0 {
        return Err(Error::InsufficientData(format!(
            "all {reps} replications were skipped; no certified fits to rate"
        )));
    }
    Ok(RateReport {
        rate: hits.iter().filter(|h| **h).count() as f64 / kept as f64,
        reps,
        kept,
        skipped,
    })
}

/// Fraction of replications whose fit zeroes every truly-zero coordinate.
pub fn sparsity_rate(
    design: &SimDesign,
    spec: &PenaltySpec,
    opts: &FitOptions,
    reps: usize,
    seed: u64,
) -> Result<RateReport> {
    let zeros = design.true_zero();
    if zeros.is_empty() {
        return Err(Error::InvalidParam(
            "sparsity rate needs at least one truly-zero coordinate".into(),
        ));
    }
    rate_over_reps(design, spec, opts, reps, seed, |fitted| {
        zeros.iter().all(|&j| fitted.beta_hat[j] == 0.0)
    })
}

/// Fraction of replications whose selected support equals the true support
/// exactly.
pub fn selection_consistency_rate(
    design: &SimDesign,
    spec: &PenaltySpec,
    opts: &FitOptions,
    reps: usize,
    seed: u64,
) -> Result<RateReport> {
    let support = design.true_support();
    rate_over_reps(design, spec, opts, reps, seed, |fitted| {
        fitted.active == support
    })
}

/// Moment comparison of `sqrt(n) (beta_hat_active - beta*_active)` against its
/// limiting normal law, over correctly-selecting replications.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    /// Replications requested.
    pub reps: usize,
    /// Correctly-selecting replications the moments are computed from.
    pub kept: usize,
    /// Replications skipped (failed fits) or selecting the wrong support.
    pub discarded: usize,
    /// True support the moments refer to, ascending.
    pub support: Vec<usize>,
    /// Theoretical center: zero except for bridge at the boundary rate, where
    /// it is `-lambda J22^-1 eta'`. `None` for l1-type penalties at the
    /// boundary rate, whose active-block limit is not a plain normal shift.
    pub center: Option<DVector<f64>>,
    /// Empirical mean of the rescaled deviations.
    pub mean: DVector<f64>,
    /// Componentwise standard error of that mean.
    pub mean_se: DVector<f64>,
    /// Empirical covariance of the rescaled deviations.
    pub cov: DMatrix<f64>,
    /// Limiting covariance: inverse of the active block of the information at
    /// the truth.
    pub cov_target: DMatrix<f64>,
    /// `||cov - cov_target||_F / ||cov_target||_F`.
    pub cov_rel_frobenius: f64,
    /// Componentwise skewness z-scores (`skew / sqrt(6 / kept)`).
    pub skew_z: DVector<f64>,
    /// Componentwise excess-kurtosis z-scores (`kurt / sqrt(24 / kept)`).
    pub kurtosis_z: DVector<f64>,
}

/// Checks the limiting-normal claim for the active coordinates.
///
/// Requires a fixed design (the limit's center and covariance are evaluated at
/// one information matrix) and at least 50 correctly-selecting replications.
pub fn asymptotic_normality_check(
    design: &SimDesign,
    spec: &PenaltySpec,
    opts: &FitOptions,
    reps: usize,
    seed: u64,
) -> Result<NormalityReport> {
    let support = design.true_support();
    if support.is_empty() {
        return Err(Error::InvalidParam(
            "normality check needs a nonempty true support".into(),
        ));
    }
    if design.redraw_x() {
        return Err(Error::InvalidParam(
            "normality check needs a fixed design matrix; the limit is stated for one \
             information matrix"
                .into(),
        ));
    }

    // Information at the truth, on the fixed design. The response values do
    // not enter the information, so any valid placeholder dataset works.
    let probe = {
        let x = design.x_for_rep(0);
        let y = match design.family() {
            FamilyKind::GaussianUnitVariance => DVector::zeros(design.n()),
            FamilyKind::BernoulliLogit => DVector::zeros(design.n()),
            FamilyKind::PoissonLog => DVector::zeros(design.n()),
        };
        Dataset::new(y, x, design.family())?
    };
    let j = observed_information(design.beta_star(), &probe)?;
    let blocks = partition_information(&j, &support)?;
    let j22 = blocks.j22().clone();
    let chol = j22.clone().cholesky().ok_or_else(|| Error::Conditioning {
        context: "active block of the information at the truth is not positive definite".into(),
        rcond: 0.0,
    })?;
    let cov_target = chol.inverse();

    let center: Option<DVector<f64>> = if spec.lambda() == 0.0 {
        Some(DVector::zeros(support.len()))
    } else {
        match spec.kind() {
            PenaltyKind::Scad { .. } | PenaltyKind::Mcp { .. } | PenaltyKind::Lasso => {
                if spec.gamma0() == 1.0 {
                    None
                } else {
                    Some(DVector::zeros(support.len()))
                }
            }
            PenaltyKind::Bridge { gamma } => {
                if spec.gamma0() == 1.0 {
                    let etap = DVector::from_fn(support.len(), |k, _| {
                        let b = design.beta_star()[support[k]];
                        gamma * b.signum() * b.abs().powf(gamma - 1.0)
                    });
                    Some(-(chol.solve(&etap) * spec.root_n_lambda_n()))
                } else {
                    Some(DVector::zeros(support.len()))
                }
            }
        }
    };

    let beta_star = design.beta_star().clone();
    let sqrt_n = (design.n() as f64).sqrt();
    let (devs, _skipped) = replicate(design, spec, opts, reps, seed, false, |_, _, fitted| {
        if fitted.active == support {
            Ok(Some(DVector::from_fn(support.len(), |k, _| {
                sqrt_n * (fitted.beta_hat[support[k]] - beta_star[support[k]])
            })))
        } else {
            Ok(None)
        }
    })?;
    let devs: Vec<DVector<f64>> = devs.into_iter().flatten().collect();
    let kept = devs.len();
    if kept < 50 {
        return Err(Error::InsufficientData(format!(
            "only {kept} of {reps} replications selected the true support; need at least 50 \
             for moment comparisons"
        )));
    }

    let q = support.len();
    let m = kept as f64;
    let mut mean: DVector<f64> = DVector::zeros(q);
    for d in &devs {
        mean += d;
    }
    mean /= m;

    let mut cov: DMatrix<f64> = DMatrix::zeros(q, q);
    let mut m3: DVector<f64> = DVector::zeros(q);
    let mut m4: DVector<f64> = DVector::zeros(q);
    for d in &devs {
        let c = d - &mean;
        cov += &c * c.transpose();
        for k in 0..q {
            m3[k] += c[k].powi(3);
            m4[k] += c[k].powi(4);
        }
    }
    let cov = cov / (m - 1.0);
    let var_pop = DVector::from_fn(q, |k, _| {
        devs.iter().map(|d| (d[k] - mean[k]).powi(2)).sum::<f64>() / m
    });
    let mean_se = DVector::from_fn(q, |k, _| (cov[(k, k)] / m).sqrt());
    let skew_z = DVector::from_fn(q, |k, _| {
        let skew = (m3[k] / m) / var_pop[k].powf(1.5);
        skew / (6.0 / m).sqrt()
    });
    let kurtosis_z = DVector::from_fn(q, |k, _| {
        let kurt = (m4[k] / m) / (var_pop[k] * var_pop[k]) - 3.0;
        kurt / (24.0 / m).sqrt()
    });
    let diff = &cov - &cov_target;
    let cov_rel_frobenius = diff.norm() / cov_target.norm();

    Ok(NormalityReport {
        reps,
        kept,
        discarded: reps - kept,
        support,
        center,
        mean,
        mean_se,
        cov,
        cov_target,
        cov_rel_frobenius,
        skew_z,
        kurtosis_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_spec(kind: PenaltyKind, lambda: f64, gamma0: f64, n: usize) -> PenaltySpec {
        PenaltySpec::new(kind, lambda, gamma0, n).unwrap()
    }

    #[test]
    fn reference_design_shape() {
        let d = SimDesign::reference(100, 0);
        assert_eq!(d.p(), 8);
        assert_eq!(d.n(), 100);
        assert_eq!(d.true_support(), vec![0, 1, 4]);
        assert_eq!(d.true_zero(), vec![2, 3, 5, 6, 7]);
        assert!(!d.redraw_x());
    }

    #[test]
    fn generate_is_deterministic_and_seed_sensitive() {
        let d = SimDesign::reference(50, 7);
        let a = d.generate().unwrap();
        let b = d.generate().unwrap();
        assert_eq!(a.y().as_slice(), b.y().as_slice());
        assert_eq!(a.x().as_slice(), b.x().as_slice());
        let c = SimDesign::reference(50, 8).generate().unwrap();
        assert_ne!(a.y().as_slice(), c.y().as_slice());
    }

    #[test]
    fn gaussian_null_truth_gives_standard_normal_responses() {
        let d = SimDesign::new(
            FamilyKind::GaussianUnitVariance,
            DVector::zeros(1),
            10_000,
            DesignKind::IidUniform {
                low: -1.0,
                high: 1.0,
            },
            3,
        )
        .unwrap();
        let data = d.generate().unwrap();
        let mean = data.y().sum() / 10_000.0;
        assert!(mean.abs() < 4.0 / 100.0, "mean {mean}");
    }

    #[test]
    fn bernoulli_null_truth_gives_half_frequency() {
        let d = SimDesign::new(
            FamilyKind::BernoulliLogit,
            DVector::zeros(1),
            10_000,
            DesignKind::IidRademacher,
            4,
        )
        .unwrap();
        let data = d.generate().unwrap();
        let freq = data.y().sum() / 10_000.0;
        assert!((freq - 0.5).abs() < 4.0 * 0.5 / 100.0, "frequency {freq}");
    }

    #[test]
    fn poisson_intercept_truth_matches_its_rate() {
        let n = 10_000;
        let d = SimDesign::new(
            FamilyKind::PoissonLog,
            DVector::from_vec(vec![3.0f64.ln()]),
            n,
            DesignKind::FixedMatrix {
                x: DMatrix::from_element(n, 1, 1.0),
            },
            5,
        )
        .unwrap();
        let data = d.generate().unwrap();
        let mean = data.y().sum() / n as f64;
        let tol = 4.0 * (3.0f64 / n as f64).sqrt();
        assert!((mean - 3.0).abs() < tol, "mean {mean}, tol {tol}");
    }

    #[test]
    fn bias_term_is_exactly_zero_at_the_truth() {
        let d = SimDesign::reference(40, 1);
        let train = d.generate().unwrap();
        let mut rng = substream(99, 1);
        let y_test = d.sample_y(train.x(), &mut rng).unwrap();
        let test = Dataset::new(y_test, train.x().clone(), d.family()).unwrap();
        let v = kl_bias_term(d.beta_star(), d.beta_star(), &train, &test).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn unpenalized_bias_oracle_recovers_the_parameter_count() {
        // Classical AIC: for gaussian-identity the optimism is the parameter
        // count. Small-scale version of the acceptance run.
        let d = SimDesign::new(
            FamilyKind::GaussianUnitVariance,
            DVector::from_vec(vec![1.0, -0.7, 0.5]),
            200,
            DesignKind::IidUniform {
                low: -1.0,
                high: 1.0,
            },
            11,
        )
        .unwrap();
        let spec = reference_spec(PenaltyKind::Scad { a: 3.7 }, 0.0, 1.5, 200);
        let r = empirical_kl_bias(
            &d,
            &spec,
            &FitOptions::default(),
            &McOptions::default(),
            600,
            21,
            false,
        )
        .unwrap();
        assert!(
            (r.mean - 3.0).abs() <= 3.0 * r.se,
            "oracle mean {} +- {}",
            r.mean,
            r.se
        );
        // lambda = 0 keeps every coordinate, so the correction is exactly p.
        assert_relative_eq!(r.mean_correction, 3.0);
        assert!(r.mean_khat.is_none());
        assert!(r.skip_rate() < 0.02, "skip rate {}", r.skip_rate());
    }

    #[test]
    fn bias_oracle_is_copy_independent() {
        let d = SimDesign::reference(120, 13);
        let spec = reference_spec(PenaltyKind::Scad { a: 3.7 }, 0.8, 1.5, 120);
        let opts = FitOptions::default();
        let mc = McOptions::default();
        let a = empirical_kl_bias(&d, &spec, &opts, &mc, 300, 17, false).unwrap();
        let b = empirical_kl_bias(&d, &spec, &opts, &mc, 300, 17, true).unwrap();
        let combined = (a.se * a.se + b.se * b.se).sqrt();
        assert!(
            (a.mean - b.mean).abs() <= 3.0 * combined,
            "means {} vs {}, combined se {combined}",
            a.mean,
            b.mean
        );
    }

    #[test]
    fn bias_oracle_enforces_replication_floor() {
        let d = SimDesign::reference(40, 1);
        let spec = reference_spec(PenaltyKind::Scad { a: 3.7 }, 0.5, 1.5, 40);
        assert!(matches!(
            empirical_kl_bias(
                &d,
                &spec,
                &FitOptions::default(),
                &McOptions::default(),
                50,
                1,
                false
            )
            .unwrap_err(),
            Error::InvalidParam(_)
        ));
    }

    #[test]
    fn sparsity_rate_is_zero_unpenalized_and_high_when_penalized() {
        let d = SimDesign::reference(200, 23);
        let opts = FitOptions::default();
        // Unpenalized: the MLE almost surely has no exact zeros.
        let spec0 = reference_spec(PenaltyKind::Scad { a: 3.7 }, 0.0, 1.5, 200);
        let r0 = sparsity_rate(&d, &spec0, &opts, 100, 31).unwrap();
        assert_eq!(r0.rate, 0.0);
        // A well-tuned SCAD fit zeroes the null coordinates most of the time.
        let spec = reference_spec(PenaltyKind::Scad { a: 3.7 }, 0.8, 1.5, 200);
        let r = sparsity_rate(&d, &spec, &opts, 100, 31).unwrap();
        assert!(r.rate >= 0.8, "sparsity rate {}", r.rate);
        assert!(r.skip_rate() < 0.02);
    }

    #[test]
    fn sparsity_rate_needs_a_true_zero() {
        let d = SimDesign::new(
            FamilyKind::GaussianUnitVariance,
            DVector::from_vec(vec![1.0, 2.0]),
            50,
            DesignKind::IidRademacher,
            0,
        )
        .unwrap();
        let spec = reference_spec(PenaltyKind::Lasso, 0.5, 1.0, 50);
        assert!(matches!(
            sparsity_rate(&d, &spec, &FitOptions::default(), 100, 0).unwrap_err(),
            Error::InvalidParam(_)
        ));
    }

    #[test]
    fn selection_rate_hits_the_trivial_extremes() {
        let opts = FitOptions::default();
        // Tiny lambda, all coordinates truly active: the MLE support is
        // everything, which is exactly the true support.
        let all_active = SimDesign::new(
            FamilyKind::GaussianUnitVariance,
            DVector::from_vec(vec![2.0, -1.5, 1.0]),
            150,
            DesignKind::IidUniform {
                low: -1.0,
                high: 1.0,
            },
            41,
        )
        .unwrap();
        let tiny = reference_spec(PenaltyKind::Scad { a: 3.7 }, 1e-8, 1.5, 150);
        let r = selection_consistency_rate(&all_active, &tiny, &opts, 100, 43).unwrap();
        assert!(r.rate >= 0.9, "rate {}", r.rate);

        // Huge lambda kills everything; a nonempty true support is never found.
        let d = SimDesign::reference(100, 47);
        let huge = reference_spec(PenaltyKind::Scad { a: 3.7 }, 400.0, 1.5, 100);
        let r = selection_consistency_rate(&d, &huge, &opts, 100, 49).unwrap();
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn rates_are_deterministic() {
        let d = SimDesign::reference(100, 5);
        let spec = reference_spec(PenaltyKind::Mcp { a: 3.0 }, 0.8, 1.5, 100);
        let opts = FitOptions::default();
        let a = sparsity_rate(&d, &spec, &opts, 120, 61).unwrap();
        let b = sparsity_rate(&d, &spec, &opts, 120, 61).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn all_replications_skipped_is_an_error() {
        let d = SimDesign::reference(100, 5);
        let spec = reference_spec(PenaltyKind::Scad { a: 3.7 }, 0.8, 1.5, 100);
        // One outer iteration cannot certify a fit from cold starts.
        let opts = FitOptions {
            max_outer: 1,
            tol: 1e-14,
            restarts: 1,
            ..FitOptions::default()
        };
        let err = sparsity_rate(&d, &spec, &opts, 100, 1).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)), "{err}");
    }

    #[test]
    fn normality_check_matches_the_unpenalized_limit() {
        // All-active truth with lambda = 0: classical MLE normality with
        // center zero and covariance J^-1 on the active block (= everything).
        let n = 400;
        let d = SimDesign::new(
            FamilyKind::GaussianUnitVariance,
            DVector::from_vec(vec![1.0, -0.5]),
            n,
            DesignKind::IidUniform {
                low: -1.0,
                high: 1.0,
            },
            71,
        )
        .unwrap();
        let spec = reference_spec(PenaltyKind::Scad { a: 3.7 }, 0.0, 1.5, n);
        let r =
            asymptotic_normality_check(&d, &spec, &FitOptions::default(), 300, 73).unwrap();
        assert_eq!(r.support, vec![0, 1]);
        assert_eq!(r.kept, 300);
        let center = r.center.as_ref().unwrap();
        for k in 0..2 {
            assert!(
                (r.mean[k] - center[k]).abs() <= 4.0 * r.mean_se[k],
                "component {k}: mean {} se {}",
                r.mean[k],
                r.mean_se[k]
            );
            assert!(r.skew_z[k].abs() < 5.0);
            assert!(r.kurtosis_z[k].abs() < 5.0);
        }
        assert!(
            r.cov_rel_frobenius < 0.25,
            "covariance mismatch {}",
            r.cov_rel_frobenius
        );
    }

    #[test]
    fn normality_check_centers_the_bridge_boundary_bias() {
        // p = 1, X = all ones: J = [1], so the predicted center is
        // -lambda * gamma * |b*|^(gamma-1) * sign(b*) = -1 * 0.5 * 2^(-0.5).
        let n = 900;
        let d = SimDesign::new(
            FamilyKind::GaussianUnitVariance,
            DVector::from_vec(vec![2.0]),
            n,
            DesignKind::FixedMatrix {
                x: DMatrix::from_element(n, 1, 1.0),
            },
            81,
        )
        .unwrap();
        let spec = reference_spec(PenaltyKind::Bridge { gamma: 0.5 }, 1.0, 1.0, n);
        let r =
            asymptotic_normality_check(&d, &spec, &FitOptions::default(), 300, 83).unwrap();
        let predicted = -1.0 * 0.5 * 2.0f64.powf(-0.5);
        let center = r.center.as_ref().unwrap();
        assert_relative_eq!(center[0], predicted, max_relative = 1e-12);
        assert!(
            (r.mean[0] - predicted).abs() <= 4.0 * r.mean_se[0],
            "mean {} vs predicted {predicted} (se {})",
            r.mean[0],
            r.mean_se[0]
        );
    }

    #[test]
    fn normality_check_guards_its_preconditions() {
        let d = SimDesign::reference(100, 5);
        let spec = reference_spec(PenaltyKind::Scad { a: 3.7 }, 0.8, 1.5, 100);
        let opts = FitOptions::default();
        // Redrawn designs have no single information matrix to compare against.
        let redraw = d.clone().with_redraw_x(true);
        assert!(matches!(
            asymptotic_normality_check(&redraw, &spec, &opts, 100, 1).unwrap_err(),
            Error::InvalidParam(_)
        ));
        // A level that kills everything never selects correctly.
        let huge = reference_spec(PenaltyKind::Scad { a: 3.7 }, 400.0, 1.5, 100);
        assert!(matches!(
            asymptotic_normality_check(&d, &huge, &opts, 100, 1).unwrap_err(),
            Error::InsufficientData(_)
        ));
        // l1-type at the boundary rate carries no normal-shift center.
        let boundary = reference_spec(PenaltyKind::Scad { a: 3.7 }, 0.8, 1.0, 100);
        let r = asymptotic_normality_check(&d, &boundary, &opts, 200, 85).unwrap();
        assert!(r.center.is_none());
    }

    #[test]
    fn redrawn_designs_vary_the_matrix_but_stay_deterministic() {
        let d = SimDesign::reference(50, 9).with_redraw_x(true);
        let x0 = d.x_for_rep(0);
        let x1 = d.x_for_rep(1);
        assert_ne!(x0.as_slice(), x1.as_slice());
        let spec = reference_spec(PenaltyKind::Scad { a: 3.7 }, 0.8, 1.5, 50);
        let opts = FitOptions::default();
        let a = sparsity_rate(&d, &spec, &opts, 100, 91).unwrap();
        let b = sparsity_rate(&d, &spec, &opts, 100, 91).unwrap();
        assert_eq!(a, b);
    }
}
