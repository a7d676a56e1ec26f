use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ComplexMatrix, UnitaryKind, UnitaryMatrix};
use crate::error::{Error, Result};

/// `M` distinct row indices out of `0..N`, kept sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSet {
    n: usize,
    indices: Vec<usize>,
}

impl IndexSet {
    /// Sorts `indices` into canonical order and checks range and distinctness.
    pub fn new(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidIndexSet("index set must not be empty".into()));
        }
        indices.sort_unstable();
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::InvalidIndexSet(format!("index {last} out of range for N = {n}")));
            }
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidIndexSet(format!("duplicate index {}", w[0])));
        }
        Ok(Self { n, indices })
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, (0..n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.indices.binary_search(&idx).is_ok()
    }

    /// Indices of `0..N` not in the set, ascending.
    pub fn complement(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n - self.indices.len());
        let mut it = self.indices.iter().peekable();
        for i in 0..self.n {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        out
    }

    /// Size of the symmetric difference with `other`.
    pub fn symmetric_difference_len(&self, other: &IndexSet) -> usize {
        let common = self.indices.iter().filter(|i| other.contains(**i)).count();
        self.len() + other.len() - 2 * common
    }
}

/// Phases `a_m` in `Z_q`; entry `m` acts as the unimodular factor
/// `exp(j 2 pi a_m / q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MaskSequence {
    q: usize,
    phases: Vec<usize>,
}

impl MaskSequence {
    pub fn new(q: usize, phases: Vec<usize>) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidMask("alphabet size must be at least 1".into()));
        }
        if let Some(&bad) = phases.iter().find(|&&a| a >= q) {
            return Err(Error::InvalidMask(format!("phase {bad} outside Z_{q}")));
        }
        Ok(Self { q, phases })
    }

    pub fn zeros(q: usize, len: usize) -> Result<Self> {
        Self::new(q, vec![0; len])
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[usize] {
        &self.phases
    }

    pub fn phasor(&self, m: usize) -> Complex64 {
        phasor(self.phases[m], self.q)
    }

    pub fn phasors(&self) -> Vec<Complex64> {
        self.phases.iter().map(|&a| phasor(a, self.q)).collect()
    }
}

fn phasor(a: usize, q: usize) -> Complex64 {
    if a == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::cis(2.0 * PI * a as f64 / q as f64)
    }
}

/// Everything needed to regenerate a sequence set: the unitary generator,
/// the selected rows and an optional common mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Descriptor {
    pub unitary: UnitaryKind,
    pub omega: IndexSet,
    pub mask: Option<MaskSequence>,
}

impl Descriptor {
    pub fn new(unitary: UnitaryKind, omega: IndexSet, mask: Option<MaskSequence>) -> Result<Self> {
        let d = Self { unitary, omega, mask };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.n() != self.unitary.n() {
            return Err(Error::DimensionMismatch(format!(
                "index set drawn from N = {} but unitary has N = {}",
                self.omega.n(),
                self.unitary.n()
            )));
        }
        if let Some(mask) = &self.mask {
            if mask.len() != self.omega.len() {
                return Err(Error::DimensionMismatch(format!(
                    "mask length {} differs from M = {}",
                    mask.len(),
                    self.omega.len()
                )));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.omega.len()
    }

    pub fn n(&self) -> usize {
        self.unitary.n()
    }
}

/// An `M x N` matrix whose columns are candidate sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceSet {
    matrix: ComplexMatrix,
    descriptor: Option<Descriptor>,
    label: String,
}

impl SequenceSet {
    /// Wraps an arbitrary matrix (baselines, loaded files) with no descriptor.
    pub fn from_matrix(matrix: ComplexMatrix, label: impl Into<String>) -> Self {
        Self {
            matrix,
            descriptor: None,
            label: label.into(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn descriptor(&self) -> Option<&Descriptor> {
        self.descriptor.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Sequence length (rows).
    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of sequences (columns).
    pub fn n(&self) -> usize {
        self.matrix.cols()
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        self.matrix.column(c)
    }
}

/// Rows `omega` of `u`, in ascending index order, scaled by `1/sqrt(M)`.
pub fn subsample_matrix(u: &ComplexMatrix, omega: &IndexSet) -> Result<ComplexMatrix> {
    if !u.is_square() || u.rows() != omega.n() {
        return Err(Error::DimensionMismatch(format!(
            "index set over N = {} applied to a {}x{} matrix",
            omega.n(),
            u.rows(),
            u.cols()
        )));
    }
    let scale = 1.0 / (omega.len() as f64).sqrt();
    let n = u.cols();
    let mut data = Vec::with_capacity(omega.len() * n);
    for &r in omega.indices() {
        data.extend(u.row(r).iter().map(|z| z * scale));
    }
    ComplexMatrix::new(omega.len(), n, data)
}

/// Partial unitary matrix `(1/sqrt(M)) R_omega U`, with its descriptor.
pub fn subsample(u: &UnitaryMatrix, omega: &IndexSet) -> Result<SequenceSet> {
    let matrix = subsample_matrix(u.matrix(), omega)?;
    Ok(SequenceSet {
        matrix,
        descriptor: Some(Descriptor::new(u.kind(), omega.clone(), None)?),
        label: format!("{}-partial", u.kind().family()),
    })
}

/// Multiplies row `m` by `exp(j 2 pi a_m / q)`.
pub fn mask_matrix(a: &ComplexMatrix, v: &MaskSequence) -> Result<ComplexMatrix> {
    if v.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "mask length {} for a matrix with {} rows",
            v.len(),
            a.rows()
        )));
    }
    let mut out = a.clone();
    for (m, p) in v.phasors().into_iter().enumerate() {
        for z in out.row_mut(m) {
            *z *= p;
        }
    }
    Ok(out)
}

/// `diag(v) * A`. The Gram matrix is unchanged.
///
/// A mask applied on top of an existing mask over the same alphabet is folded
/// into the descriptor by adding phases modulo `q`; with a different alphabet
/// the descriptor is dropped.
pub fn apply_mask(a: &SequenceSet, v: &MaskSequence) -> Result<SequenceSet> {
    let matrix = mask_matrix(&a.matrix, v)?;
    let descriptor = match &a.descriptor {
        Some(d) => match &d.mask {
            None => Some(Descriptor {
                mask: Some(v.clone()),
                ..d.clone()
            }),
            Some(old) if old.q() == v.q() => {
                let phases = old
                    .phases()
                    .iter()
                    .zip(v.phases())
                    .map(|(x, y)| (x + y) % v.q())
                    .collect();
                Some(Descriptor {
                    mask: Some(MaskSequence::new(v.q(), phases)?),
                    ..d.clone()
                })
            }
            Some(_) => None,
        },
        None => None,
    };
    Ok(SequenceSet {
        matrix,
        descriptor,
        label: a.label.clone(),
    })
}

/// Regenerates a sequence set from its descriptor. Deterministic: the same
/// descriptor always produces bit-identical entries.
pub fn reconstruct(descriptor: &Descriptor) -> Result<SequenceSet> {
    descriptor.validate()?;
    let u = descriptor.unitary.generate();
    let partial = subsample(&u, &descriptor.omega)?;
    let set = match &descriptor.mask {
        Some(mask) => apply_mask(&partial, mask)?,
        None => partial,
    };
    let label = match descriptor.mask {
        Some(_) => format!("{}-masked", descriptor.unitary.family()),
        None => format!("{}-partial", descriptor.unitary.family()),
    };
    Ok(set.with_label(label))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn index_set_validation() {
        assert_eq!(IndexSet::new(5, vec![3, 0, 1]).unwrap().indices(), &[0, 1, 3]);
        assert!(IndexSet::new(5, vec![1, 1]).is_err());
        assert!(IndexSet::new(5, vec![5]).is_err());
        assert!(IndexSet::new(5, vec![]).is_err());
        let s = IndexSet::new(6, vec![1, 4]).unwrap();
        assert_eq!(s.complement(), vec![0, 2, 3, 5]);
        assert!(s.contains(4) && !s.contains(3));
    }

    #[test]
    fn mask_validation() {
        assert!(MaskSequence::new(4, vec![0, 3]).is_ok());
        assert!(MaskSequence::new(4, vec![4]).is_err());
        assert!(MaskSequence::new(0, vec![]).is_err());
    }

    #[test]
    fn full_fourier_subsample_is_unitary() {
        let u = UnitaryKind::fourier(4).unwrap().generate();
        let a = subsample(&u, &IndexSet::full(4).unwrap()).unwrap();
        let half = u.matrix().scale(c(0.5, 0.0));
        assert!(a.matrix().max_abs_diff(&half) < 1e-15);
        let g = a.matrix().adjoint().matmul(a.matrix()).unwrap();
        assert!(g.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn subsample_extracts_rows() {
        let u = UnitaryKind::fourier(4).unwrap().generate();
        let a = subsample(&u, &IndexSet::new(4, vec![2, 0]).unwrap()).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let row0 = [s, s, s, s];
        let row1 = [s, -s, s, -s];
        for col in 0..4 {
            assert!((a.matrix()[(0, col)] - c(row0[col], 0.0)).norm() < 1e-15);
            assert!((a.matrix()[(1, col)] - c(row1[col], 0.0)).norm() < 1e-15);
        }
        let wrong = IndexSet::new(5, vec![0]).unwrap();
        assert!(subsample_matrix(u.matrix(), &wrong).is_err());
    }

    #[test]
    fn mask_rotates_rows() {
        let x = c(0.3, -0.2);
        let y = c(1.5, 0.25);
        let a = SequenceSet::from_matrix(ComplexMatrix::new(2, 1, vec![x, y]).unwrap(), "t");
        let v = MaskSequence::new(4, vec![1, 2]).unwrap();
        let out = apply_mask(&a, &v).unwrap();
        assert!((out.matrix()[(0, 0)] - c(0.0, 1.0) * x).norm() < 1e-15);
        assert!((out.matrix()[(1, 0)] + y).norm() < 1e-15);
        assert!(apply_mask(&a, &MaskSequence::zeros(4, 3).unwrap()).is_err());
    }

    #[test]
    fn zero_mask_is_identity() {
        let u = UnitaryKind::fourier(8).unwrap().generate();
        let omega = IndexSet::new(8, vec![1, 2, 6]).unwrap();
        let a = subsample(&u, &omega).unwrap();
        let masked = apply_mask(&a, &MaskSequence::zeros(8, 3).unwrap()).unwrap();
        assert_eq!(masked.matrix(), a.matrix());

        let d = Descriptor::new(u.kind(), omega, Some(MaskSequence::zeros(8, 3).unwrap())).unwrap();
        assert_eq!(reconstruct(&d).unwrap().matrix(), a.matrix());
    }

    #[test]
    fn reconstruct_hand_evaluated_entry() {
        let kind = UnitaryKind::fourier(8).unwrap();
        let d = Descriptor::new(
            kind,
            IndexSet::new(8, vec![0, 3, 5]).unwrap(),
            Some(MaskSequence::new(8, vec![0, 2, 4]).unwrap()),
        )
        .unwrap();
        let s = reconstruct(&d).unwrap();
        // row 1 is omega = 3, mask phase 2/8, column 2
        let expect = Complex64::cis(-PI) / 3f64.sqrt();
        assert!((s.matrix()[(1, 2)] - expect).norm() < 1e-14);

        let again = reconstruct(&d).unwrap();
        assert_eq!(s.matrix().as_slice(), again.matrix().as_slice());
        assert_eq!(s.descriptor(), Some(&d));
    }

    #[test]
    fn inconsistent_descriptor_rejected() {
        let kind = UnitaryKind::fourier(8).unwrap();
        let omega = IndexSet::new(8, vec![0, 3]).unwrap();
        assert!(Descriptor::new(kind, omega.clone(), Some(MaskSequence::zeros(8, 3).unwrap())).is_err());
        assert!(Descriptor::new(kind, IndexSet::new(9, vec![0]).unwrap(), None).is_err());
        let bad = Descriptor {
            unitary: kind,
            omega,
            mask: Some(MaskSequence::zeros(8, 1).unwrap()),
        };
        assert!(reconstruct(&bad).is_err());
    }

    #[test]
    fn stacked_masks_fold_into_descriptor() {
        let u = UnitaryKind::fourier(8).unwrap().generate();
        let a = subsample(&u, &IndexSet::new(8, vec![1, 4]).unwrap()).unwrap();
        let v1 = MaskSequence::new(8, vec![3, 7]).unwrap();
        let v2 = MaskSequence::new(8, vec![6, 2]).unwrap();
        let twice = apply_mask(&apply_mask(&a, &v1).unwrap(), &v2).unwrap();
        let folded = twice.descriptor().unwrap().mask.clone().unwrap();
        assert_eq!(folded.phases(), &[1, 1]);
        let direct = reconstruct(twice.descriptor().unwrap()).unwrap();
        assert!(direct.matrix().max_abs_diff(twice.matrix()) < 1e-14);
    }
}
