//! Correlation metrics over the columns of a sequence set.

use num_complex::Complex64;

use super::{ComplexMatrix, SequenceSet};
use crate::error::{Error, Result};

/// Welch lower bound `sqrt((N - M) / (M (N - 1)))` on the coherence of
/// `N` unit-norm vectors in dimension `M`. Zero when `M >= N`.
pub fn welch_bound(m: usize, n: usize) -> f64 {
    if m >= n || n < 2 {
        return 0.0;
    }
    ((n - m) as f64 / (m as f64 * (n - 1) as f64)).sqrt()
}

/// `A^* A`, Hermitian by construction.
pub fn gram(a: &SequenceSet) -> ComplexMatrix {
    gram_matrix(a.matrix())
}

pub fn gram_matrix(a: &ComplexMatrix) -> ComplexMatrix {
    let cols = a.planar_columns();
    let n = cols.count();
    let mut g = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        g[(k, k)] = Complex64::new(cols.norm_sqr(k), 0.0);
        for l in k + 1..n {
            let z = cols.inner(k, l);
            g[(k, l)] = z;
            g[(l, k)] = z.conj();
        }
    }
    g
}

/// Mutual coherence: the largest normalized inner product magnitude between
/// two distinct columns.
pub fn coherence(a: &SequenceSet) -> Result<f64> {
    coherence_of(a.matrix())
}

pub fn coherence_of(a: &ComplexMatrix) -> Result<f64> {
    if a.cols() < 2 {
        return Err(Error::InvalidParameter(
            "coherence needs at least two columns".into(),
        ));
    }
    let cols = a.planar_columns();
    let norms: Vec<f64> = (0..cols.count()).map(|k| cols.norm_sqr(k).sqrt()).collect();
    if let Some(k) = norms.iter().position(|&x| x == 0.0) {
        return Err(Error::ZeroColumn(k));
    }
    let mut worst: f64 = 0.0;
    for k in 0..cols.count() {
        for l in k + 1..cols.count() {
            worst = worst.max(cols.inner(k, l).norm() / (norms[k] * norms[l]));
        }
    }
    Ok(worst.min(1.0))
}

/// RMS distance between `abs(A^* A)` and the Welch-bound-equality target
/// (ones on the diagonal, the Welch bound elsewhere), normalized by
/// `sqrt(N (N - 1))`. Zero for a single column.
pub fn welch_cost_f1(a: &SequenceSet) -> f64 {
    welch_cost_of(a.matrix())
}

pub fn welch_cost_of(a: &ComplexMatrix) -> f64 {
    let (m, n) = a.shape();
    if n < 2 {
        return 0.0;
    }
    let target = welch_bound(m, n);
    let cols = a.planar_columns();
    let mut diag = 0.0;
    let mut off = 0.0;
    for k in 0..n {
        let d = cols.norm_sqr(k) - 1.0;
        diag += d * d;
        for l in k + 1..n {
            let d = cols.inner(k, l).norm() - target;
            off += d * d;
        }
    }
    ((diag + 2.0 * off) / (n as f64 * (n - 1) as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{subsample, IndexSet, UnitaryKind};

    #[test]
    fn welch_target_value() {
        let w = welch_bound(80, 256);
        assert!((w - (176.0f64 / 20400.0).sqrt()).abs() < 1e-15);
        assert!((w - 0.09288).abs() < 1e-5);
        assert_eq!(welch_bound(8, 8), 0.0);
    }

    #[test]
    fn full_unitary_has_zero_cost_and_identity_gram() {
        for kind in [UnitaryKind::fourier(16).unwrap(), UnitaryKind::zc(16).unwrap()] {
            let a = subsample(&kind.generate(), &IndexSet::full(16).unwrap()).unwrap();
            assert!(welch_cost_f1(&a) < 1e-12);
            assert!(gram(&a).max_abs_diff(&ComplexMatrix::identity(16)) < 1e-12);
            assert!(coherence(&a).unwrap() < 1e-12);
        }
    }

    #[test]
    fn duplicated_column_has_unit_coherence() {
        let a = ComplexMatrix::from_fn(3, 3, |r, c| {
            let c = if c == 2 { 0 } else { c };
            Complex64::new(r as f64 + 1.0, c as f64)
        });
        let coh = coherence_of(&a).unwrap();
        assert!((coh - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_errors() {
        let mut a = ComplexMatrix::from_fn(2, 3, |_, _| Complex64::new(1.0, 0.0));
        a[(0, 1)] = Complex64::new(0.0, 0.0);
        a[(1, 1)] = Complex64::new(0.0, 0.0);
        assert_eq!(coherence_of(&a).unwrap_err(), Error::ZeroColumn(1));
        assert!(coherence_of(&ComplexMatrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn partial_coherence_respects_welch_bound() {
        let u = UnitaryKind::fourier(32).unwrap().generate();
        let omega = IndexSet::new(32, vec![0, 3, 4, 9, 17, 20, 21, 30]).unwrap();
        let a = subsample(&u, &omega).unwrap();
        let coh = coherence(&a).unwrap();
        assert!(coh >= welch_bound(8, 32) - 1e-12 && coh <= 1.0);
    }
}
