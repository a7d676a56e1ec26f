use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Unimodular unitary generators used as the source of partial matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnitaryFamily {
    Fourier,
    /// Columns are the cyclic shifts of an even-length Zadoff-Chu sequence.
    Zc,
}

impl UnitaryFamily {
    pub fn name(self) -> &'static str {
        match self {
            UnitaryFamily::Fourier => "fourier",
            UnitaryFamily::Zc => "zc",
        }
    }
}

impl fmt::Display for UnitaryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UnitaryFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fourier" => Ok(UnitaryFamily::Fourier),
            "zc" => Ok(UnitaryFamily::Zc),
            other => Err(Error::InvalidParameter(format!("unknown unitary kind '{other}'"))),
        }
    }
}

/// A unitary generator together with its dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnitaryKind {
    family: UnitaryFamily,
    n: usize,
}

impl UnitaryKind {
    pub fn new(family: UnitaryFamily, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("unitary dimension must be at least 1".into()));
        }
        if family == UnitaryFamily::Zc && !n.is_multiple_of(2) {
            return Err(Error::OddZcDimension(n));
        }
        Ok(Self { family, n })
    }

    pub fn fourier(n: usize) -> Result<Self> {
        Self::new(UnitaryFamily::Fourier, n)
    }

    pub fn zc(n: usize) -> Result<Self> {
        Self::new(UnitaryFamily::Zc, n)
    }

    pub fn family(&self) -> UnitaryFamily {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> ComplexMatrix {
        match self.family {
            UnitaryFamily::Fourier => fourier_unchecked(self.n),
            UnitaryFamily::Zc => zc_unchecked(self.n),
        }
    }

    pub fn generate(&self) -> UnitaryMatrix {
        UnitaryMatrix {
            kind: *self,
            matrix: self.matrix(),
        }
    }
}

/// A generated unitary matrix tagged with the kind that produced it, so
/// subsampled sets can record their descriptor.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    kind: UnitaryKind,
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn kind(&self) -> UnitaryKind {
        self.kind
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.kind.n
    }
}

/// `N x N` DFT matrix with entry `(k, l) = exp(-j 2 pi k l / N)`, 0-based.
///
/// `U U^* = N I`; the matrix is not normalized.
pub fn fourier_matrix(n: usize) -> Result<ComplexMatrix> {
    UnitaryKind::fourier(n).map(|k| k.matrix())
}

/// `N x N` Zadoff-Chu matrix with entry `(k, l) = exp(-j pi (k + N - l)^2 / N)`.
///
/// The 1-based and 0-based forms coincide because only `k - l` enters the
/// exponent. Requires even `N`.
pub fn zc_matrix(n: usize) -> Result<ComplexMatrix> {
    UnitaryKind::zc(n).map(|k| k.matrix())
}

fn fourier_unchecked(n: usize) -> ComplexMatrix {
    // Reduce k*l modulo N before forming the angle so large N keeps full precision.
    ComplexMatrix::from_fn(n, n, |k, l| {
        let r = (k * l) % n;
        Complex64::cis(-2.0 * PI * r as f64 / n as f64)
    })
}

fn zc_unchecked(n: usize) -> ComplexMatrix {
    // exp(-j pi x / N) has period 2N in x.
    let period = 2 * n;
    ComplexMatrix::from_fn(n, n, |k, l| {
        let d = (k + n - l) % period;
        let r = (d * d) % period;
        Complex64::cis(-PI * r as f64 / n as f64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unitarity_error(u: &ComplexMatrix) -> f64 {
        let n = u.rows();
        let prod = u.matmul(&u.adjoint()).unwrap();
        let target = ComplexMatrix::identity(n).scale(Complex64::new(n as f64, 0.0));
        prod.sub(&target).unwrap().frobenius_norm() / target.frobenius_norm()
    }

    #[test]
    fn fourier_small_cases() {
        let f1 = fourier_matrix(1).unwrap();
        assert_eq!(f1.as_slice(), &[Complex64::new(1.0, 0.0)]);

        let f2 = fourier_matrix(2).unwrap();
        let expect = [1.0, 1.0, 1.0, -1.0];
        for (z, e) in f2.as_slice().iter().zip(expect) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
        assert!(unitarity_error(&fourier_matrix(8).unwrap()) < 1e-12);
    }

    #[test]
    fn zc_cases() {
        let z2 = zc_matrix(2).unwrap();
        // 1-based index (1,1) maps to (0,0): exp(-j pi 4 / 2) = 1
        assert!((z2[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        let z4 = zc_matrix(4).unwrap();
        let prod = z4.matmul(&z4.adjoint()).unwrap();
        let target = ComplexMatrix::identity(4).scale(Complex64::new(4.0, 0.0));
        assert!(prod.sub(&target).unwrap().frobenius_norm() < 1e-12);

        let z256 = zc_matrix(256).unwrap();
        assert!(z256.as_slice().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zc_rejects_odd_dimension() {
        assert_eq!(zc_matrix(63).unwrap_err(), Error::OddZcDimension(63));
        assert!(fourier_matrix(0).is_err());
    }

    #[test]
    fn zc_matches_one_based_formula() {
        let n = 6;
        let z = zc_matrix(n).unwrap();
        for k in 1..=n {
            for l in 1..=n {
                let x = (k + n - l) as f64;
                let expect = Complex64::cis(-PI * x * x / n as f64);
                assert!((z[(k - 1, l - 1)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn family_parse() {
        assert_eq!("Fourier".parse::<UnitaryFamily>().unwrap(), UnitaryFamily::Fourier);
        assert_eq!("zc".parse::<UnitaryFamily>().unwrap(), UnitaryFamily::Zc);
        assert!("hadamard".parse::<UnitaryFamily>().is_err());
    }
}
