//! Shared helpers for unit tests: finite differences and random matrices.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn fd_gradient<F: Fn(&DVector<f64>) -> f64>(
    f: F,
    at: &DVector<f64>,
    h: f64,
) -> DVector<f64> {
    let mut g = DVector::zeros(at.len());
    for j in 0..at.len() {
        let mut up = at.clone();
        let mut dn = at.clone();
        up[j] += h;
        dn[j] -= h;
        g[j] = (f(&up) - f(&dn)) / (2.0 * h);
    }
    g
}

pub fn fd_jacobian<F: Fn(&DVector<f64>) -> DVector<f64>>(
    f: F,
    at: &DVector<f64>,
    h: f64,
) -> DMatrix<f64> {
    let m = f(at).len();
    let mut jac = DMatrix::zeros(m, at.len());
    for j in 0..at.len() {
        let mut up = at.clone();
        let mut dn = at.clone();
        up[j] += h;
        dn[j] -= h;
        let col = (f(&up) - f(&dn)) / (2.0 * h);
        jac.set_column(j, &col);
    }
    jac
}

/// Random symmetric positive definite matrix `G'G + ridge * I`.
pub fn random_spd<R: Rng>(rng: &mut R, m: usize, ridge: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    g.transpose() * &g + DMatrix::identity(m, m) * ridge
}

pub fn random_vector<R: Rng>(rng: &mut R, m: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(m, |_, _| (rng.random::<f64>() * 2.0 - 1.0) * scale)
}
