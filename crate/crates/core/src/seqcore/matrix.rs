//! Dense complex matrices.
//!
//! Entries are stored in row-major order. Metric kernels that work column by
//! column (Gram, coherence, Welch distance) first copy the matrix into a
//! planar column-major buffer so the inner loops run over contiguous memory.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = Complex64::new(1.0, 0.0);
        }
        out
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major view of all entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.data[r * self.cols + c]).collect()
    }

    pub fn column_norm(&self, c: usize) -> f64 {
        (0..self.rows)
            .map(|r| self.data[r * self.cols + c].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (acc, z) in sq.iter_mut().zip(self.row(r)) {
                *acc += z.norm_sqr();
            }
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// New matrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |r, c| self[(r, cols[c])])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, &lhs) in self.row(r).iter().enumerate() {
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += lhs * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest modulus of `self - rhs`, entry-wise.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.shape(), rhs.shape());
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn planar_columns(&self) -> PlanarColumns {
        PlanarColumns::from_matrix(self)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Column-major copy with real and imaginary parts split, so inner products
/// between columns vectorize.
pub(crate) struct PlanarColumns {
    len: usize,
    count: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

const LANES: usize = 4;

impl PlanarColumns {
    pub(crate) fn from_matrix(a: &ComplexMatrix) -> Self {
        let (len, count) = a.shape();
        let mut re = vec![0.0; len * count];
        let mut im = vec![0.0; len * count];
        for r in 0..len {
            for (c, z) in a.row(r).iter().enumerate() {
                re[c * len + r] = z.re;
                im[c * len + r] = z.im;
            }
        }
        Self { len, count, re, im }
    }

    pub(crate) fn count(&self) -> usize {
        self.count
    }

    pub(crate) fn norm_sqr(&self, k: usize) -> f64 {
        let (re, im) = self.column(k);
        re.iter().zip(im).map(|(a, b)| a * a + b * b).sum()
    }

    fn column(&self, k: usize) -> (&[f64], &[f64]) {
        let span = k * self.len..(k + 1) * self.len;
        (&self.re[span.clone()], &self.im[span])
    }

    /// `<a_k, a_l> = sum_m conj(a_k[m]) * a_l[m]`.
    pub(crate) fn inner(&self, k: usize, l: usize) -> Complex64 {
        let (kr, ki) = self.column(k);
        let (lr, li) = self.column(l);
        let mut sr = [0.0; LANES];
        let mut si = [0.0; LANES];
        let whole = self.len / LANES * LANES;
        for base in (0..whole).step_by(LANES) {
            for lane in 0..LANES {
                let i = base + lane;
                sr[lane] += kr[i] * lr[i] + ki[i] * li[i];
                si[lane] += kr[i] * li[i] - ki[i] * lr[i];
            }
        }
        let mut re = sr.iter().sum::<f64>();
        let mut im = si.iter().sum::<f64>();
        for i in whole..self.len {
            re += kr[i] * lr[i] + ki[i] * li[i];
            im += kr[i] * li[i] - ki[i] * lr[i];
        }
        Complex64::new(re, im)
    }
}
