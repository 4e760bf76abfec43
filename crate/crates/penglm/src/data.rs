//! Validated observation container.

use crate::error::{Error, Result};
use crate::family::FamilyKind;
use nalgebra::{DMatrix, DVector};

/// A response vector and design matrix, validated for one family.
///
/// Rows are observations, columns are covariates. Entries of the design are
/// required to be finite and bounded (compact covariate support underlies the
/// large-sample guarantees); responses must lie in the family's support.
#[derive(Debug, Clone)]
pub struct Dataset {
    y: DVector<f64>,
    x: DMatrix<f64>,
    family: FamilyKind,
}

impl Dataset {
    /// Default bound on `|x_ij|`.
    pub const DEFAULT_X_BOUND: f64 = 1e6;

    /// Validates and wraps `(y, x)` for `family` with the default design bound.
    pub fn new(y: DVector<f64>, x: DMatrix<f64>, family: FamilyKind) -> Result<Self> {
        Self::with_x_bound(y, x, family, Self::DEFAULT_X_BOUND)
    }

    /// Validates and wraps `(y, x)` with an explicit bound on `|x_ij|`.
    pub fn with_x_bound(
        y: DVector<f64>,
        x: DMatrix<f64>,
        family: FamilyKind,
        x_bound: f64,
    ) -> Result<Self> {
        if !(x_bound.is_finite() && x_bound > 0.0) {
            return Err(Error::InvalidParam(format!(
                "design bound must be a positive real, got {x_bound}"
            )));
        }
        let n = x.nrows();
        let p = x.ncols();
        if n == 0 || p == 0 {
            return Err(Error::InvalidData(format!(
                "design must be non-empty, got {n} rows x {p} columns"
            )));
        }
        if y.len() != n {
            return Err(Error::InvalidData(format!(
                "response has {} entries but design has {n} rows",
                y.len()
            )));
        }
        for i in 0..n {
            if !family.response_ok(y[i]) {
                return Err(Error::InvalidData(format!(
                    "response entry {i} = {} is invalid for family {family}: expected {}",
                    y[i],
                    family.support_description()
                )));
            }
            for j in 0..p {
                let v = x[(i, j)];
                if !v.is_finite() || v.abs() > x_bound {
                    return Err(Error::InvalidData(format!(
                        "design entry ({i}, {j}) = {v} is not finite within |x| <= {x_bound}"
                    )));
                }
            }
        }
        Ok(Dataset { y, x, family })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn family(&self) -> FamilyKind {
        self.family
    }

    /// Natural parameters `theta_i = x_i' beta` for all observations.
    pub fn linear_predictor(&self, beta: &DVector<f64>) -> DVector<f64> {
        &self.x * beta
    }
}
