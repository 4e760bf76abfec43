//! AIC-type model selection for the penalized estimator.
//!
//! The criterion is
//!
//! ```text
//!   aic = -2 * loglik(beta_hat) + 2 * correction
//! ```
//!
//! where the correction estimates the optimism of the fitted log likelihood.
//! For penalties that are exactly flat beyond a threshold (SCAD, MCP) the
//! surviving coefficients are asymptotically unpenalized, so for tuning
//! exponents `gamma0` in `(1, 2)` the correction is simply the selected
//! support size. At the boundary rate `gamma0 = 1` the rescaled level
//! `sqrt(n) * lambda_n = lambda` stays fixed and shrinkage leaves a
//! non-vanishing trace; the extra term
//!
//! ```text
//!   K_hat = E[ u_hat(s)' s_cond ],
//!   u_hat(s) = argmin_u  u' J_cond u / 2 - u' s_cond + lambda * ||u||_1,
//! ```
//!
//! with `s ~ N(0, J)` and `(J_cond, s_cond)` the inactive block conditioned on
//! the active one, is estimated by Monte Carlo ([`estimate_k`]). The bridge
//! penalty keeps the plain support count on its whole exponent range; the
//! lasso outside `gamma0 = 1` is rejected because its slope never vanishes and
//! the support count no longer estimates the optimism.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::glm::observed_information;
use crate::info::{conditional_score, partition_information};
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::solver::{fit, solve_quadratic_l1, FitOptions, FitResult};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Eigenvalues of the information matrix below this are lifted to it before
/// sampling, so a rank-deficient plug-in still yields a usable draw.
const EIGEN_CLIP: f64 = 1e-12;

/// Monte-Carlo controls for [`estimate_k`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McOptions {
    /// Number of score draws; at least 100.
    pub draws: usize,
    /// Base seed; draw `d` uses an independent substream derived from it.
    pub seed: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            draws: 10_000,
            seed: 0,
        }
    }
}

/// Monte-Carlo estimate of the boundary-rate correction term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KhatEstimate {
    /// Estimated correction `K_hat`.
    pub khat: f64,
    /// Standard error of the estimate (sample sd / sqrt(draws)).
    pub se: f64,
    /// Draws used.
    pub draws: usize,
    /// Information-matrix eigenvalues lifted to the clip floor.
    pub clipped: usize,
    /// Largest lift applied to a clipped eigenvalue.
    pub max_clip_adjustment: f64,
}

impl KhatEstimate {
    fn exact_zero(draws: usize) -> Self {
        KhatEstimate {
            khat: 0.0,
            se: 0.0,
            draws,
            clipped: 0,
            max_clip_adjustment: 0.0,
        }
    }
}

/// The optimism correction entering the criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasCorrection {
    /// Number of selected (nonzero) coefficients.
    pub support_size: usize,
    /// Boundary-rate Monte-Carlo term, present only when the regime needs it.
    pub khat: Option<KhatEstimate>,
    /// Total correction: `support_size + khat` (when present).
    pub value: f64,
}

/// Criterion value with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AicReport {
    /// `-2 * loglik + 2 * correction.value`.
    pub aic: f64,
    /// Log likelihood of the fit being scored.
    pub loglik: f64,
    /// The optimism correction used.
    pub correction: BiasCorrection,
}

/// The criterion formula itself.
pub fn aic_value(loglik: f64, correction: f64) -> f64 {
    -2.0 * loglik + 2.0 * correction
}

/// Whether this penalty/exponent combination needs the Monte-Carlo term, or an
/// error when the combination has no valid support-count criterion at all.
pub(crate) fn needs_khat(spec: &PenaltySpec) -> Result<bool> {
    if spec.lambda() == 0.0 {
        // Unpenalized fit: classic AIC, correction = parameter count.
        return Ok(false);
    }
    match spec.kind() {
        PenaltyKind::Scad { .. } | PenaltyKind::Mcp { .. } => Ok(spec.gamma0() == 1.0),
        PenaltyKind::Lasso => {
            if spec.gamma0() == 1.0 {
                Ok(true)
            } else {
                Err(Error::UnsupportedRegime(format!(
                    "the lasso penalty keeps slope lambda_n on every nonzero coefficient, so at \
                     tuning exponent gamma0 = {} its shrinkage bias does not vanish and the \
                     support count does not estimate the optimism; use a penalty that is flat \
                     beyond a threshold (SCAD, MCP) or the boundary exponent gamma0 = 1",
                    spec.gamma0()
                )))
            }
        }
        PenaltyKind::Bridge { .. } => Ok(false),
    }
}

/// Monte-Carlo estimate of `K = E[u_hat(s)' s_cond]` for scores `s ~ N(0, j)`.
///
/// `active` indexes the coordinates conditioned on (the fitted support);
/// `lambda` is the fixed-scale level `sqrt(n) * lambda_n`, not `lambda_n`.
/// Draw `d` uses an independent, seeded substream, so results are identical
/// across runs and thread counts.
pub fn estimate_k(
    j: &DMatrix<f64>,
    active: &[usize],
    lambda: f64,
    mc: &McOptions,
) -> Result<KhatEstimate> {
    if mc.draws < 100 {
        return Err(Error::InvalidParam(format!(
            "Monte-Carlo correction needs at least 100 draws, got {}",
            mc.draws
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "lambda must be finite and non-negative, got {lambda}"
        )));
    }
    let blocks = partition_information(j, active)?;
    if blocks.inactive().is_empty() {
        // Every coordinate is conditioned on; the correction is identically 0.
        return Ok(KhatEstimate::exact_zero(mc.draws));
    }

    let p = j.nrows();
    // Sampling factor F with F F' = J, eigenvalues lifted to the clip floor.
    let eigen = j.clone().symmetric_eigen();
    let mut clipped = 0;
    let mut max_adj = 0.0f64;
    let mut scaled = eigen.eigenvectors.clone();
    for (c, ev) in eigen.eigenvalues.iter().enumerate() {
        let lifted = if *ev < EIGEN_CLIP {
            clipped += 1;
            max_adj = max_adj.max(EIGEN_CLIP - *ev);
            EIGEN_CLIP
        } else {
            *ev
        };
        let sd = lifted.sqrt();
        for r in 0..p {
            scaled[(r, c)] *= sd;
        }
    }

    let values: Vec<f64> = (0..mc.draws)
        .into_par_iter()
        .map(|d| -> Result<f64> {
            let mut rng = ChaCha12Rng::seed_from_u64(mc.seed);
            rng.set_stream(1 + d as u64);
            let z = DVector::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
            let s = &scaled * z;
            let s_cond = conditional_score(&s, &blocks)?;
            let u = solve_quadratic_l1(blocks.conditional(), &s_cond, lambda)?;
            Ok(u.dot(&s_cond))
        })
        .collect::<Result<Vec<f64>>>()?;

    let m = mc.draws as f64;
    let khat = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - khat) * (v - khat)).sum::<f64>() / (m - 1.0);
    Ok(KhatEstimate {
        khat,
        se: (var / m).sqrt(),
        draws: mc.draws,
        clipped,
        max_clip_adjustment: max_adj,
    })
}

/// Optimism correction for a fit: support size, plus `K_hat` at the boundary
/// rate for l1-type penalties.
pub fn bias_correction(
    fitted: &FitResult,
    data: &Dataset,
    spec: &PenaltySpec,
    mc: &McOptions,
) -> Result<BiasCorrection> {
    if fitted.beta_hat.len() != data.p() {
        return Err(Error::InvalidParam(format!(
            "fit has {} coefficients but data has {} columns",
            fitted.beta_hat.len(),
            data.p()
        )));
    }
    let support_size = fitted.active.len();
    let khat = if needs_khat(spec)? {
        let j = observed_information(&fitted.beta_hat, data)?;
        Some(estimate_k(&j, &fitted.active, spec.root_n_lambda_n(), mc)?)
    } else {
        None
    };
    let value = support_size as f64 + khat.map_or(0.0, |k| k.khat);
    Ok(BiasCorrection {
        support_size,
        khat,
        value,
    })
}

/// Scores a fit with the AIC-type criterion.
pub fn aic(
    fitted: &FitResult,
    data: &Dataset,
    spec: &PenaltySpec,
    mc: &McOptions,
) -> Result<AicReport> {
    let correction = bias_correction(fitted, data, spec, mc)?;
    Ok(AicReport {
        aic: aic_value(fitted.loglik, correction.value),
        loglik: fitted.loglik,
        correction,
    })
}

/// One evaluated point on a tuning path.
#[derive(Debug, Clone)]
pub struct PathPoint {
    /// Fixed-scale level `lambda` this point was fitted at.
    pub lambda: f64,
    /// The fit at this level.
    pub fit: FitResult,
    /// Its criterion score.
    pub report: AicReport,
}

/// Result of a criterion-minimizing sweep over a lambda grid.
#[derive(Debug, Clone)]
pub struct Selection {
    /// Index of the winning point in `path`.
    pub best: usize,
    /// Successfully fitted points, in the order given.
    pub path: Vec<PathPoint>,
    /// Levels whose fit or score failed, with the failure message.
    pub failures: Vec<(f64, String)>,
}

impl Selection {
    /// The winning path point.
    pub fn best_point(&self) -> &PathPoint {
        &self.path[self.best]
    }
}

/// Fits every level in `lambdas` and picks the criterion minimizer.
///
/// Individual failures are recorded and skipped; every level failing is an
/// error. Ties within `1e-12` of the best criterion value go to the larger
/// lambda (the sparser model).
pub fn select_lambda(
    data: &Dataset,
    kind: PenaltyKind,
    lambdas: &[f64],
    gamma0: f64,
    opts: &FitOptions,
    mc: &McOptions,
) -> Result<Selection> {
    if lambdas.is_empty() {
        return Err(Error::InvalidParam("lambda grid is empty".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::InvalidParam(format!(
            "lambda grid must be finite and non-negative, got {bad}"
        )));
    }

    let mut path = Vec::with_capacity(lambdas.len());
    let mut failures = Vec::new();
    for &lambda in lambdas {
        let attempt = PenaltySpec::new(kind, lambda, gamma0, data.n()).and_then(|spec| {
            let fitted = fit(data, &spec, opts)?;
            let report = aic(&fitted, data, &spec, mc)?;
            Ok(PathPoint {
                lambda,
                fit: fitted,
                report,
            })
        });
        match attempt {
            Ok(point) => path.push(point),
            Err(e) => failures.push((lambda, e.to_string())),
        }
    }
    if path.is_empty() {
        return Err(Error::AllFitsFailed(format!(
            "all {} lambda levels failed; first failure at lambda = {}: {}",
            failures.len(),
            failures[0].0,
            failures[0].1
        )));
    }

    let mut best = 0;
    for (i, point) in path.iter().enumerate().skip(1) {
        let cur = path[best].report.aic;
        let cand = point.report.aic;
        if cand < cur - 1e-12 || ((cand - cur).abs() <= 1e-12 && point.lambda > path[best].lambda) {
            best = i;
        }
    }
    Ok(Selection {
        best,
        path,
        failures,
    })
}
