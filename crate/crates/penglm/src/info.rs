//! Partitioned information: Schur complements and conditional scores.
//!
//! The active set indexes coordinates estimated as nonzero; the inactive set
//! is its complement. With blocks ordered (inactive, active),
//!
//! ```text
//!   J = [ J11 J12 ]        J_cond = J11 - J12 J22^-1 J21
//!       [ J21 J22 ]        s_cond = s1  - J12 J22^-1 s2
//! ```
//!
//! `J_cond` is the curvature of the inactive coordinates after profiling out
//! the active ones; it drives the Monte-Carlo correction in [`crate::aic`].

use crate::error::{Error, Result};
use crate::glm::reciprocal_condition;
use nalgebra::{DMatrix, DVector, Dyn};

/// An information matrix split along an active/inactive partition.
#[derive(Debug, Clone)]
pub struct InfoBlocks {
    p: usize,
    active: Vec<usize>,
    inactive: Vec<usize>,
    j11: DMatrix<f64>,
    j12: DMatrix<f64>,
    j22: DMatrix<f64>,
    j_cond: DMatrix<f64>,
    // Retained so conditional scores reuse the factorization.
    j22_chol: Option<nalgebra::Cholesky<f64, Dyn>>,
}

impl InfoBlocks {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn inactive(&self) -> &[usize] {
        &self.inactive
    }

    pub fn j11(&self) -> &DMatrix<f64> {
        &self.j11
    }

    pub fn j12(&self) -> &DMatrix<f64> {
        &self.j12
    }

    pub fn j21(&self) -> DMatrix<f64> {
        self.j12.transpose()
    }

    pub fn j22(&self) -> &DMatrix<f64> {
        &self.j22
    }

    /// The Schur complement `J11 - J12 J22^-1 J21` (empty when nothing is inactive).
    pub fn conditional(&self) -> &DMatrix<f64> {
        &self.j_cond
    }
}

fn extract(j: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| j[(rows[r], cols[c])])
}

/// Splits a symmetric information matrix along `active`.
///
/// `active` may be in any order but must hold distinct indices below `j`'s
/// dimension. Fails if `j` is not symmetric to `1e-10` (relative to its
/// largest entry) or if the active block is not positive definite when its
/// inverse is required, i.e. whenever both blocks are non-empty.
pub fn partition_information(j: &DMatrix<f64>, active: &[usize]) -> Result<InfoBlocks> {
    let p = j.nrows();
    if j.ncols() != p {
        return Err(Error::InvalidParam(format!(
            "information matrix must be square, got {p} x {}",
            j.ncols()
        )));
    }
    let scale = j.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParam(
            "information matrix has non-finite entries".into(),
        ));
    }
    for r in 0..p {
        for c in (r + 1)..p {
            if (j[(r, c)] - j[(c, r)]).abs() > 1e-10 * (1.0 + scale) {
                return Err(Error::InvalidParam(format!(
                    "information matrix is not symmetric at ({r}, {c}): {} vs {}",
                    j[(r, c)],
                    j[(c, r)]
                )));
            }
        }
    }

    let mut active: Vec<usize> = active.to_vec();
    active.sort_unstable();
    if active.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParam("active set has duplicate indices".into()));
    }
    if active.last().is_some_and(|&m| m >= p) {
        return Err(Error::InvalidParam(format!(
            "active index {} out of range for dimension {p}",
            active.last().unwrap()
        )));
    }
    let inactive: Vec<usize> = (0..p).filter(|i| !active.binary_search(i).is_ok()).collect();

    let j11 = extract(j, &inactive, &inactive);
    let j12 = extract(j, &inactive, &active);
    let j22 = extract(j, &active, &active);

    // Inverting J22 is only needed when both blocks are present.
    let (j_cond, j22_chol) = if active.is_empty() {
        (j.clone(), None)
    } else if inactive.is_empty() {
        (DMatrix::zeros(0, 0), None)
    } else {
        let chol = j22.clone().cholesky().ok_or_else(|| Error::Conditioning {
            context: "active block of the information matrix".into(),
            rcond: reciprocal_condition(&j22),
        })?;
        let j21 = j12.transpose();
        let mut cond = &j11 - &j12 * chol.solve(&j21);
        // The complement is symmetric in exact arithmetic; re-symmetrize the
        // rounding noise so downstream factorizations see a clean matrix.
        let asym = (&cond - cond.transpose()).abs().max();
        if asym > 1e-10 * (1.0 + scale) {
            return Err(Error::Conditioning {
                context: "Schur complement lost symmetry".into(),
                rcond: reciprocal_condition(&j22),
            });
        }
        cond = (&cond + cond.transpose()) * 0.5;
        (cond, Some(chol))
    };

    Ok(InfoBlocks {
        p,
        active,
        inactive,
        j11,
        j12,
        j22,
        j_cond,
        j22_chol,
    })
}

/// Conditional score `s1 - J12 J22^-1 s2` for a partitioned information matrix.
///
/// Returns a vector indexed like `blocks.inactive()`; empty when every
/// coordinate is active.
pub fn conditional_score(s: &DVector<f64>, blocks: &InfoBlocks) -> Result<DVector<f64>> {
    if s.len() != blocks.p {
        return Err(Error::InvalidParam(format!(
            "score has {} entries but the partition was built for dimension {}",
            s.len(),
            blocks.p
        )));
    }
    let s1 = DVector::from_fn(blocks.inactive.len(), |i, _| s[blocks.inactive[i]]);
    if blocks.active.is_empty() {
        return Ok(s1);
    }
    if blocks.inactive.is_empty() {
        return Ok(DVector::zeros(0));
    }
    let s2 = DVector::from_fn(blocks.active.len(), |i, _| s[blocks.active[i]]);
    let chol = blocks
        .j22_chol
        .as_ref()
        .expect("factorization stored whenever both blocks are non-empty");
    Ok(s1 - &blocks.j12 * chol.solve(&s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_spd, random_vector};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn two_by_two_schur_complement() {
        let j = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let blocks = partition_information(&j, &[1]).unwrap();
        assert_eq!(blocks.inactive(), &[0]);
        assert_relative_eq!(blocks.conditional()[(0, 0)], 1.5, max_relative = 1e-15);
        assert_eq!(blocks.j11()[(0, 0)], 2.0);
        assert_eq!(blocks.j12()[(0, 0)], 1.0);
        assert_eq!(blocks.j21()[(0, 0)], 1.0);
        assert_eq!(blocks.j22()[(0, 0)], 2.0);

        // Conditional score: s1 - J12 J22^-1 s2 = 1 - 1 * (1/2) * 1 = 0.5.
        let s = DVector::from_vec(vec![1.0, 1.0]);
        let sc = conditional_score(&s, &blocks).unwrap();
        assert_relative_eq!(sc[0], 0.5, max_relative = 1e-15);
    }

    #[test]
    fn block_diagonal_identity_passes_through() {
        let j = DMatrix::identity(4, 4);
        let blocks = partition_information(&j, &[2, 3]).unwrap();
        assert_relative_eq!(
            (blocks.conditional() - DMatrix::identity(2, 2)).norm(),
            0.0,
            epsilon = 1e-15
        );
        // With J12 = 0 the conditional score is the inactive sub-vector.
        let s = DVector::from_vec(vec![0.3, -0.7, 2.0, 1.0]);
        let sc = conditional_score(&s, &blocks).unwrap();
        assert_eq!(sc.as_slice(), &[0.3, -0.7]);
    }

    #[test]
    fn schur_complement_matches_inverse_block_route() {
        // Identity: J_cond equals the inverse of the inactive block of J^-1.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for trial in 0..20 {
            let m = 6;
            let j = random_spd(&mut rng, m, 0.5);
            let active: Vec<usize> = match trial % 4 {
                0 => vec![0, 3, 5],
                1 => vec![1],
                2 => vec![0, 1, 2, 4],
                _ => vec![2, 3],
            };
            let blocks = partition_information(&j, &active).unwrap();
            let jinv = j.clone().try_inverse().unwrap();
            let inact = blocks.inactive();
            let block = DMatrix::from_fn(inact.len(), inact.len(), |r, c| {
                jinv[(inact[r], inact[c])]
            });
            let expected = block.try_inverse().unwrap();
            assert_relative_eq!(
                (blocks.conditional() - &expected).norm(),
                0.0,
                epsilon = 1e-9 * expected.norm()
            );
        }
    }

    #[test]
    fn conditional_score_matches_explicit_formula() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let j = random_spd(&mut rng, 5, 0.5);
        let s = random_vector(&mut rng, 5, 2.0);
        let active = vec![1, 4];
        let blocks = partition_information(&j, &active).unwrap();
        let got = conditional_score(&s, &blocks).unwrap();

        let inactive = [0usize, 2, 3];
        let j22 = DMatrix::from_fn(2, 2, |r, c| j[(active[r], active[c])]);
        let j12 = DMatrix::from_fn(3, 2, |r, c| j[(inactive[r], active[c])]);
        let s1 = DVector::from_fn(3, |i, _| s[inactive[i]]);
        let s2 = DVector::from_fn(2, |i, _| s[active[i]]);
        let expected = s1 - j12 * j22.try_inverse().unwrap() * s2;
        assert_relative_eq!((got - expected).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_partitions() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let j = random_spd(&mut rng, 4, 0.5);
        let s = random_vector(&mut rng, 4, 1.0);

        let all = partition_information(&j, &[0, 1, 2, 3]).unwrap();
        assert_eq!(all.conditional().nrows(), 0);
        assert_eq!(conditional_score(&s, &all).unwrap().len(), 0);

        let none = partition_information(&j, &[]).unwrap();
        assert_relative_eq!((none.conditional() - &j).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(
            (conditional_score(&s, &none).unwrap() - &s).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_asymmetric_and_singular() {
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(matches!(
            partition_information(&j, &[0]).unwrap_err(),
            Error::InvalidParam(_)
        ));

        // Active block is exactly singular.
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            partition_information(&j, &[1]).unwrap_err(),
            Error::Conditioning { .. }
        ));
    }

    #[test]
    fn rejects_bad_active_sets() {
        let j = DMatrix::identity(3, 3);
        assert!(partition_information(&j, &[0, 0]).is_err());
        assert!(partition_information(&j, &[3]).is_err());
        // Unsorted input is fine.
        assert!(partition_information(&j, &[2, 0]).is_ok());
    }
}
