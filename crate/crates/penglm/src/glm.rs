//! Log likelihood, score, and observed information for GLM fits, plus the
//! unpenalized Newton baseline.

use crate::data::Dataset;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

fn check_beta(beta: &DVector<f64>, data: &Dataset) -> Result<()> {
    if beta.len() != data.p() {
        return Err(Error::InvalidParam(format!(
            "coefficient vector has {} entries but design has {} columns",
            beta.len(),
            data.p()
        )));
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParam(
            "coefficient vector has non-finite entries".into(),
        ));
    }
    Ok(())
}

/// Sum of per-observation log densities `y_i theta_i - a(theta_i) + b(y_i)`.
///
/// Returns `-inf` when the cumulant overflows (e.g. extreme Poisson rates);
/// a NaN is reported as a domain error rather than silently propagated.
pub fn log_likelihood(beta: &DVector<f64>, data: &Dataset) -> Result<f64> {
    check_beta(beta, data)?;
    let fam = data.family();
    let theta = data.linear_predictor(beta);
    let mut total = 0.0;
    for i in 0..data.n() {
        let t = theta[i];
        let y = data.y()[i];
        total += y * t - fam.cumulant(t) + fam.log_base_measure(y);
    }
    if total.is_nan() {
        return Err(Error::Domain(
            "log likelihood evaluated to NaN; the linear predictor left the stable range".into(),
        ));
    }
    Ok(total)
}

/// Score vector `sum_i x_i (y_i - a'(theta_i))`, the log-likelihood gradient.
///
/// Unscaled: callers apply `n^(-1/2)` or `1/n` as their normalization demands.
pub fn score(beta: &DVector<f64>, data: &Dataset) -> Result<DVector<f64>> {
    check_beta(beta, data)?;
    let fam = data.family();
    let theta = data.linear_predictor(beta);
    let mut s: DVector<f64> = DVector::zeros(data.p());
    for i in 0..data.n() {
        let r = data.y()[i] - fam.mean(theta[i]);
        for j in 0..data.p() {
            s[j] += data.x()[(i, j)] * r;
        }
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "score has non-finite entries; the linear predictor left the stable range".into(),
        ));
    }
    Ok(s)
}

/// Observed information `J_n(beta) = n^(-1) sum_i x_i a''(theta_i) x_i'`.
///
/// Symmetric positive semidefinite by construction; the `1/n` scaling makes it
/// the per-observation curvature that the partitioning and sampling routines
/// expect.
pub fn observed_information(beta: &DVector<f64>, data: &Dataset) -> Result<DMatrix<f64>> {
    check_beta(beta, data)?;
    let fam = data.family();
    let theta = data.linear_predictor(beta);
    let n = data.n();
    let p = data.p();
    let mut j: DMatrix<f64> = DMatrix::zeros(p, p);
    for i in 0..n {
        let w = fam.variance(theta[i]) / n as f64;
        for r in 0..p {
            let xr = data.x()[(i, r)];
            if xr == 0.0 {
                continue;
            }
            for c in r..p {
                j[(r, c)] += w * xr * data.x()[(i, c)];
            }
        }
    }
    for r in 0..p {
        for c in 0..r {
            j[(r, c)] = j[(c, r)];
        }
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "observed information has non-finite entries".into(),
        ));
    }
    Ok(j)
}

/// Unpenalized maximum likelihood via damped Newton iteration from zero.
///
/// Used as one of the solver's starting points and as the `lambda = 0`
/// baseline. Fails with a conditioning error when the information matrix is
/// singular at an iterate, and with a no-convergence error when the gradient
/// tolerance is not met within the iteration budget (e.g. separable logistic
/// data, where the MLE diverges).
pub fn newton_mle(data: &Dataset) -> Result<DVector<f64>> {
    let n = data.n() as f64;
    let mut beta = DVector::zeros(data.p());
    let mut ll = log_likelihood(&beta, data)?;
    const MAX_ITER: usize = 100;
    const GRAD_TOL: f64 = 1e-10;

    for _ in 0..MAX_ITER {
        let g = score(&beta, data)?;
        if g.amax() / n <= GRAD_TOL {
            return Ok(beta);
        }
        let j = observed_information(&beta, data)?;
        let chol = j.clone().cholesky().ok_or_else(|| Error::Conditioning {
            context: "Newton step for the unpenalized MLE".into(),
            rcond: reciprocal_condition(&j),
        })?;
        let dir = chol.solve(&(&g / n));
        // Halve the step until the likelihood stops decreasing.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &beta + step * &dir;
            match log_likelihood(&cand, data) {
                Ok(cand_ll) if cand_ll >= ll - 1e-12 && cand_ll.is_finite() => {
                    beta = cand;
                    ll = cand_ll;
                    accepted = true;
                    break;
                }
                _ => step *= 0.5,
            }
        }
        if !accepted {
            return Err(Error::NoConvergence(
                "Newton line search stalled before reaching the MLE gradient tolerance".into(),
            ));
        }
    }
    Err(Error::NoConvergence(format!(
        "unpenalized MLE did not reach gradient tolerance {GRAD_TOL} in {MAX_ITER} iterations \
         (the likelihood may have no interior maximum)"
    )))
}

/// Ratio of smallest to largest eigenvalue magnitude, for error reports.
pub(crate) fn reciprocal_condition(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let min = eig
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &v| a.min(v.abs()));
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}
