//! Natural exponential families with natural link.
//!
//! Densities have the form `exp{y*theta - a(theta) + b(y)}` with natural
//! parameter `theta = x' beta`. The cumulant `a` determines mean and variance:
//! `E[y] = a'(theta)`, `Var[y] = a''(theta)`.

use serde::{Deserialize, Serialize};
use std::fmt;

/// The supported exponential families, each with its canonical link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Normal with unit variance; identity link, `a(theta) = theta^2 / 2`.
    #[serde(alias = "gaussian", alias = "normal")]
    GaussianUnitVariance,
    /// Bernoulli with logit link, `a(theta) = log(1 + e^theta)`.
    #[serde(alias = "bernoulli", alias = "logistic")]
    BernoulliLogit,
    /// Poisson with log link, `a(theta) = e^theta`.
    #[serde(alias = "poisson")]
    PoissonLog,
}

const LN_2PI: f64 = 1.8378770664093453;

impl FamilyKind {
    /// Cumulant function `a(theta)`.
    pub fn cumulant(self, theta: f64) -> f64 {
        match self {
            FamilyKind::GaussianUnitVariance => 0.5 * theta * theta,
            // log(1 + e^theta), computed without overflow on either tail.
            FamilyKind::BernoulliLogit => {
                if theta > 0.0 {
                    theta + (-theta).exp().ln_1p()
                } else {
                    theta.exp().ln_1p()
                }
            }
            FamilyKind::PoissonLog => theta.exp(),
        }
    }

    /// Mean function `a'(theta)`.
    pub fn mean(self, theta: f64) -> f64 {
        match self {
            FamilyKind::GaussianUnitVariance => theta,
            FamilyKind::BernoulliLogit => {
                // Logistic sigmoid, evaluated on the non-overflowing branch.
                if theta >= 0.0 {
                    1.0 / (1.0 + (-theta).exp())
                } else {
                    let e = theta.exp();
                    e / (1.0 + e)
                }
            }
            FamilyKind::PoissonLog => theta.exp(),
        }
    }

    /// Variance function `a''(theta)`.
    pub fn variance(self, theta: f64) -> f64 {
        match self {
            FamilyKind::GaussianUnitVariance => 1.0,
            FamilyKind::BernoulliLogit => {
                let p = self.mean(theta);
                p * (1.0 - p)
            }
            FamilyKind::PoissonLog => theta.exp(),
        }
    }

    /// Carrier term `b(y)` of the log density.
    pub fn log_base_measure(self, y: f64) -> f64 {
        match self {
            FamilyKind::GaussianUnitVariance => -0.5 * y * y - 0.5 * LN_2PI,
            FamilyKind::BernoulliLogit => 0.0,
            // -ln(y!) for integer y >= 0; exact summation is plenty at the
            // count magnitudes these models see.
            FamilyKind::PoissonLog => {
                let k = y.round() as u64;
                -(2..=k).map(|i| (i as f64).ln()).sum::<f64>()
            }
        }
    }

    /// Whether `y` lies in the family's response support.
    pub fn response_ok(self, y: f64) -> bool {
        if !y.is_finite() {
            return false;
        }
        match self {
            FamilyKind::GaussianUnitVariance => true,
            FamilyKind::BernoulliLogit => y == 0.0 || y == 1.0,
            FamilyKind::PoissonLog => y >= 0.0 && y == y.round(),
        }
    }

    /// Human-readable description of the response support, for error messages.
    pub fn support_description(self) -> &'static str {
        match self {
            FamilyKind::GaussianUnitVariance => "any finite real",
            FamilyKind::BernoulliLogit => "0 or 1",
            FamilyKind::PoissonLog => "a non-negative integer",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyKind::GaussianUnitVariance => "gaussian_unit_variance",
            FamilyKind::BernoulliLogit => "bernoulli_logit",
            FamilyKind::PoissonLog => "poisson_log",
        };
        f.write_str(s)
    }
}
