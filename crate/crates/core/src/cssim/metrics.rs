use std::collections::BTreeSet;

use crate::seqcore::ComplexMatrix;

/// Activity error rate `(|S \ S^| + |S^ \ S|) / |S u S^|`; 0 when both sets
/// are empty.
pub fn aer(s_true: &[usize], s_hat: &[usize]) -> f64 {
    let a: BTreeSet<usize> = s_true.iter().copied().collect();
    let b: BTreeSet<usize> = s_hat.iter().copied().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.symmetric_difference(&b).count() as f64 / union as f64
}

/// `sum_{n in S} |x_n - x^_n|^2 / sum_{n in S} |x_n|^2` over the rows in
/// `active`. Rows of `x_hat` for undetected devices are zero and count in
/// full. `None` when the active rows carry no energy.
pub fn nmse(x_true: &ComplexMatrix, x_hat: &ComplexMatrix, active: &[usize]) -> Option<f64> {
    let mut err = 0.0;
    let mut energy = 0.0;
    for &n in active {
        for (h, e) in x_true.row(n).iter().zip(x_hat.row(n)) {
            err += (h - e).norm_sqr();
            energy += h.norm_sqr();
        }
    }
    (energy > 0.0).then(|| err / energy)
}

/// `|X - X^|_F^2 / |X|_F^2`; `None` for `X = 0`.
pub fn relative_error(x_true: &ComplexMatrix, x_hat: &ComplexMatrix) -> Option<f64> {
    let energy: f64 = x_true.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let err: f64 = x_true
        .as_slice()
        .iter()
        .zip(x_hat.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    (energy > 0.0).then(|| err / energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn aer_examples() {
        assert!((aer(&[1, 2], &[2, 3]) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(aer(&[4, 1], &[1, 4]), 0.0);
        assert_eq!(aer(&[1], &[]), 1.0);
        assert_eq!(aer(&[], &[7]), 1.0);
        assert_eq!(aer(&[], &[]), 0.0);
    }

    #[test]
    fn nmse_examples() {
        let x = ComplexMatrix::from_fn(4, 2, |r, c| {
            if r == 1 || r == 3 {
                Complex64::new(1.0 + c as f64, 0.5)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let active = [1, 3];
        assert_eq!(nmse(&x, &x, &active), Some(0.0));
        assert_eq!(nmse(&x, &ComplexMatrix::zeros(4, 2), &active), Some(1.0));
        let double = x.scale(Complex64::new(2.0, 0.0));
        assert!((nmse(&x, &double, &active).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(nmse(&x, &x, &[]), None);
        assert_eq!(relative_error(&x, &x), Some(0.0));
        assert_eq!(relative_error(&ComplexMatrix::zeros(2, 2), &x), None);
    }
}
