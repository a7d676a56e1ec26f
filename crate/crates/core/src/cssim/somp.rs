use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::seqcore::ComplexMatrix;

/// Column-major copy of a sequence matrix with cached column norms.
#[derive(Clone, Debug)]
pub struct Dictionary {
    m: usize,
    n: usize,
    cols: Vec<Complex64>,
    norms: Vec<f64>,
}

impl Dictionary {
    /// Fails on an all-zero column.
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let (m, n) = a.shape();
        let mut cols = Vec::with_capacity(m * n);
        for c in 0..n {
            cols.extend((0..m).map(|r| a[(r, c)]));
        }
        let norms: Vec<f64> = cols
            .chunks(m.max(1))
            .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect();
        if let Some(c) = norms.iter().position(|&x| x == 0.0) {
            return Err(Error::ZeroColumn(c));
        }
        Ok(Self { m, n, cols, norms })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn column(&self, c: usize) -> &[Complex64] {
        &self.cols[c * self.m..(c + 1) * self.m]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Mean squared column norm.
    pub fn mean_column_energy(&self) -> f64 {
        self.norms.iter().map(|x| x * x).sum::<f64>() / self.n as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionReport {
    /// Detected devices in selection order.
    pub detected: Vec<usize>,
    /// `N x J`, zero outside the detected rows.
    pub x_hat: ComplexMatrix,
    /// `Y - A x_hat`, `M x J`.
    pub residual: ComplexMatrix,
    pub iterations: usize,
    /// The selected columns were linearly dependent; `x_hat` is then the
    /// minimum-norm least-squares solution.
    pub rank_deficient: bool,
}

impl DetectionReport {
    /// Detected devices, sorted.
    pub fn support(&self) -> Vec<usize> {
        let mut s = self.detected.clone();
        s.sort_unstable();
        s
    }
}

/// Relative size below which a new column counts as dependent on the
/// already selected ones.
const DEPENDENCE_TOL: f64 = 1e-10;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Greedy state shared by the known-sparsity and blind variants.
struct Greedy<'a> {
    dict: &'a Dictionary,
    j: usize,
    /// Column-major `M x J`.
    residual: Vec<Complex64>,
    basis: Vec<Vec<Complex64>>,
    selected: Vec<usize>,
    taken: Vec<bool>,
    rank_deficient: bool,
}

impl<'a> Greedy<'a> {
    fn new(dict: &'a Dictionary, y: &ComplexMatrix) -> Result<Self> {
        if y.rows() != dict.m() {
            return Err(Error::DimensionMismatch(format!(
                "measurements have {} rows, sequences have length {}",
                y.rows(),
                dict.m()
            )));
        }
        let j = y.cols();
        let mut residual = Vec::with_capacity(dict.m() * j);
        for t in 0..j {
            residual.extend((0..dict.m()).map(|r| y[(r, t)]));
        }
        Ok(Self {
            dict,
            j,
            residual,
            basis: Vec::new(),
            selected: Vec::new(),
            taken: vec![false; dict.n()],
            rank_deficient: false,
        })
    }

    /// Unselected column with the largest squared proxy
    /// `|a_n^* R|^2 / |a_n|^2`; the smallest index wins a tie.
    fn best(&self) -> Option<(usize, f64)> {
        let m = self.dict.m();
        let mut best: Option<(usize, f64)> = None;
        for c in (0..self.dict.n()).filter(|&c| !self.taken[c]) {
            let col = self.dict.column(c);
            let energy: f64 = self
                .residual
                .chunks(m)
                .map(|r| dot(col, r).norm_sqr())
                .sum();
            let proxy = energy / (self.dict.norms()[c] * self.dict.norms()[c]);
            if best.is_none_or(|(_, b)| proxy > b) {
                best = Some((c, proxy));
            }
        }
        best
    }

    /// Adds column `c` and projects it out of the residual.
    fn select(&mut self, c: usize) {
        self.taken[c] = true;
        self.selected.push(c);
        let mut q = self.dict.column(c).to_vec();
        // Two Gram-Schmidt passes keep the basis orthonormal to working
        // precision.
        for _ in 0..2 {
            for b in &self.basis {
                let p = dot(b, &q);
                for (x, y) in q.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
        }
        let norm = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= DEPENDENCE_TOL * self.dict.norms()[c] {
            self.rank_deficient = true;
            return;
        }
        for x in &mut q {
            *x /= norm;
        }
        for r in self.residual.chunks_mut(self.dict.m()) {
            let p = dot(&q, r);
            for (x, y) in r.iter_mut().zip(&q) {
                *x -= p * y;
            }
        }
        self.basis.push(q);
    }

    fn finish(self, y: &ComplexMatrix) -> DetectionReport {
        let (m, n, j) = (self.dict.m(), self.dict.n(), self.j);
        let k = self.selected.len();
        let mut x_hat = ComplexMatrix::zeros(n, j);
        let mut residual = y.clone();
        if k > 0 {
            let a_sel = DMatrix::from_fn(m, k, |r, i| self.dict.column(self.selected[i])[r]);
            let y_mat = DMatrix::from_fn(m, j, |r, t| y[(r, t)]);
            let coef = least_squares(&a_sel, &y_mat, self.rank_deficient);
            for (i, &c) in self.selected.iter().enumerate() {
                for t in 0..j {
                    x_hat[(c, t)] = coef[(i, t)];
                }
            }
            let fitted = &a_sel * &coef;
            for r in 0..m {
                for t in 0..j {
                    residual[(r, t)] -= fitted[(r, t)];
                }
            }
        }
        DetectionReport {
            detected: self.selected,
            x_hat,
            residual,
            iterations: k,
            rank_deficient: self.rank_deficient,
        }
    }
}

fn least_squares(a: &DMatrix<Complex64>, y: &DMatrix<Complex64>, rank_deficient: bool) -> DMatrix<Complex64> {
    if !rank_deficient {
        let qr = a.clone().qr();
        let qty = qr.q().adjoint() * y;
        if let Some(x) = qr.r().solve_upper_triangular(&qty) {
            return x;
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(y, DEPENDENCE_TOL * smax)
        .expect("both singular vector sets were computed")
}

/// Simultaneous orthogonal matching pursuit with known sparsity `k`.
pub fn somp(dict: &Dictionary, y: &ComplexMatrix, k: usize) -> Result<DetectionReport> {
    if k > dict.m() || k > dict.n() {
        return Err(Error::InvalidParameter(format!(
            "sparsity {k} exceeds dictionary size {}x{}",
            dict.m(),
            dict.n()
        )));
    }
    let mut g = Greedy::new(dict, y)?;
    for _ in 0..k {
        let (c, _) = g.best().expect("k <= N leaves a candidate");
        g.select(c);
    }
    Ok(g.finish(y))
}

/// Stopping threshold `sqrt(3 sigma^2 J)` on the signal proxy.
pub fn blind_threshold(sigma2: f64, antennas: usize) -> f64 {
    (3.0 * sigma2 * antennas as f64).sqrt()
}

/// SOMP without known sparsity: selects while the largest proxy is at least
/// [`blind_threshold`], for at most `M` iterations.
pub fn somp_blind(dict: &Dictionary, y: &ComplexMatrix, sigma2: f64) -> Result<DetectionReport> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be positive and finite, got {sigma2}"
        )));
    }
    let threshold2 = 3.0 * sigma2 * y.cols() as f64;
    let mut g = Greedy::new(dict, y)?;
    for _ in 0..dict.m().min(dict.n()) {
        match g.best() {
            Some((c, proxy)) if proxy >= threshold2 => g.select(c),
            _ => break,
        }
    }
    Ok(g.finish(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::seqcore::{subsample, IndexSet, UnitaryKind};
    use rand::Rng;

    fn dict(n: usize, rows: &[usize]) -> (ComplexMatrix, Dictionary) {
        let u = UnitaryKind::fourier(n).unwrap().generate();
        let a = subsample(&u, &IndexSet::new(n, rows.to_vec()).unwrap()).unwrap().into_matrix();
        let d = Dictionary::new(&a).unwrap();
        (a, d)
    }

    #[test]
    fn single_atom() {
        let (a, d) = dict(16, &[0, 1, 3, 6, 10, 15]);
        let y = ComplexMatrix::from_fn(6, 1, |r, _| a[(r, 5)] * 3.0);
        let rep = somp(&d, &y, 1).unwrap();
        assert_eq!(rep.detected, vec![5]);
        assert!((rep.x_hat[(5, 0)] - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        assert!(rep.residual.frobenius_norm() < 1e-12);
        assert!(!rep.rank_deficient);
    }

    #[test]
    fn zero_measurements() {
        let (_, d) = dict(16, &[0, 2, 5, 9]);
        let y = ComplexMatrix::zeros(4, 3);
        let rep = somp(&d, &y, 2).unwrap();
        assert_eq!(rep.detected.len(), 2);
        assert!(rep.x_hat.frobenius_norm() == 0.0);
        assert!(rep.residual.frobenius_norm() == 0.0);
        assert!(somp_blind(&d, &y, 0.1).unwrap().detected.is_empty());
        assert!(somp(&d, &y, 5).is_err());
        assert!(somp_blind(&d, &y, 0.0).is_err());
    }

    #[test]
    fn full_support_is_rank_deficient() {
        let (_, d) = dict(8, &[0, 1, 2]);
        let mut rng = seeded(4);
        let y = ComplexMatrix::from_fn(3, 2, |_, _| Complex64::new(rng.random(), rng.random()));
        let rep = somp(&d, &y, 3).unwrap();
        assert!(!rep.rank_deficient);
        assert!(rep.residual.frobenius_norm() < 1e-10);

        // Column 1 is twice column 0. After column 0 fits y exactly every
        // proxy is zero and the earliest free column, 1, is taken next.
        let e = |i: usize| (0..3).map(move |r| Complex64::new(if r == i { 1.0 } else { 0.0 }, 0.0));
        let cols: Vec<Vec<Complex64>> = vec![e(0).collect(), e(0).map(|z| z * 2.0).collect(), e(1).collect(), e(2).collect()];
        let a = ComplexMatrix::from_fn(3, 4, |r, c| cols[c][r]);
        let d = Dictionary::new(&a).unwrap();
        let y = ComplexMatrix::from_fn(3, 1, |r, _| cols[0][r]);
        let rep = somp(&d, &y, 3).unwrap();
        assert_eq!(rep.detected, vec![0, 1, 2]);
        assert!(rep.rank_deficient);
        // minimum-norm split of x0 + 2 x1 = 1
        assert!((rep.x_hat[(0, 0)] - Complex64::new(0.2, 0.0)).norm() < 1e-12);
        assert!((rep.x_hat[(1, 0)] - Complex64::new(0.4, 0.0)).norm() < 1e-12);
        assert!(rep.x_hat[(2, 0)].norm() < 1e-12);
    }

    #[test]
    fn blind_stops_after_exact_fit() {
        let (a, d) = dict(32, &[0, 3, 4, 9, 13, 17, 20, 26, 30, 31]);
        let y = ComplexMatrix::from_fn(10, 4, |r, t| a[(r, 7)] * Complex64::new(5.0 + t as f64, -2.0));
        let rep = somp_blind(&d, &y, 1e-4).unwrap();
        assert_eq!(rep.detected, vec![7]);
    }

    #[test]
    fn dictionary_rejects_zero_column() {
        let a = ComplexMatrix::from_fn(2, 3, |r, c| Complex64::new(if c == 1 { 0.0 } else { (r + 1) as f64 }, 0.0));
        assert_eq!(Dictionary::new(&a).unwrap_err(), Error::ZeroColumn(1));
    }
}
