//! Peak-to-average power ratio of multicarrier symbols.
//!
//! A sequence `s` of length `M` placed on `M` subcarriers produces
//! `p(t) = sum_m s_m exp(j 2 pi m t)` for `t` in `[0, 1)`. The continuous
//! maximum is approximated on `L * M` equispaced points, evaluated with one
//! zero-padded inverse FFT of size `L * M`. The peak power is normalized by
//! `sum_m |s_m|^2`, which makes the ratio scale invariant and equal to the
//! usual definition for unimodular sequences.

use std::cmp::Ordering;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::seqcore::{ComplexMatrix, SequenceSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PaprConfig {
    oversampling: usize,
}

impl PaprConfig {
    pub const DEFAULT_OVERSAMPLING: usize = 16;

    /// Oversampling factor must be a power of two so refined grids nest.
    pub fn new(oversampling: usize) -> Result<Self> {
        if oversampling == 0 || !oversampling.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "oversampling factor must be a power of two, got {oversampling}"
            )));
        }
        Ok(Self { oversampling })
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }
}

impl Default for PaprConfig {
    fn default() -> Self {
        Self {
            oversampling: Self::DEFAULT_OVERSAMPLING,
        }
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Planned PAPR evaluator for one sequence length. Cheap to share between
/// threads; each call allocates its own work buffers.
#[derive(Clone)]
pub struct PaprEngine {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PaprEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PaprEngine")
            .field("m", &self.m)
            .field("points", &self.fft.len())
            .finish()
    }
}

impl PaprEngine {
    pub fn new(m: usize, cfg: PaprConfig) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("sequence length must be at least 1".into()));
        }
        let fft = FftPlanner::new().plan_fft_inverse(m * cfg.oversampling);
        Ok(Self { m, fft })
    }

    pub fn sequence_len(&self) -> usize {
        self.m
    }

    /// Number of evaluation points `L * M`.
    pub fn points(&self) -> usize {
        self.fft.len()
    }

    pub fn papr(&self, s: &[Complex64]) -> Result<f64> {
        let mut work = self.work();
        self.papr_with(s.iter().copied(), &mut work)
    }

    /// PAPR of every column of `a`.
    pub fn column_paprs(&self, a: &ComplexMatrix) -> Result<Vec<f64>> {
        self.check_rows(a.rows())?;
        let mut work = self.work();
        (0..a.cols())
            .map(|c| self.papr_with((0..a.rows()).map(|r| a[(r, c)]), &mut work))
            .collect()
    }

    /// PAPR of every column of `diag(phasors) * a`, without forming the
    /// masked matrix.
    pub fn masked_column_paprs(&self, a: &ComplexMatrix, phasors: &[Complex64]) -> Result<Vec<f64>> {
        self.check_rows(a.rows())?;
        if phasors.len() != a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} mask phasors for {} rows",
                phasors.len(),
                a.rows()
            )));
        }
        let mut work = self.work();
        (0..a.cols())
            .map(|c| self.papr_with((0..a.rows()).map(|r| phasors[r] * a[(r, c)]), &mut work))
            .collect()
    }

    fn check_rows(&self, rows: usize) -> Result<()> {
        if rows != self.m {
            return Err(Error::DimensionMismatch(format!(
                "engine planned for length {} applied to length {rows}",
                self.m
            )));
        }
        Ok(())
    }

    fn work(&self) -> Work {
        Work {
            buf: vec![Complex64::new(0.0, 0.0); self.fft.len()],
            scratch: vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()],
        }
    }

    fn papr_with(&self, s: impl Iterator<Item = Complex64>, work: &mut Work) -> Result<f64> {
        work.buf.fill(Complex64::new(0.0, 0.0));
        let mut energy = 0.0;
        let mut len = 0;
        for (slot, z) in work.buf.iter_mut().zip(s) {
            energy += z.norm_sqr();
            *slot = z;
            len += 1;
        }
        if len != self.m {
            return Err(Error::DimensionMismatch(format!(
                "engine planned for length {} applied to length {len}",
                self.m
            )));
        }
        if energy == 0.0 {
            return Err(Error::ZeroSequence);
        }
        self.fft.process_with_scratch(&mut work.buf, &mut work.scratch);
        let peak = work.buf.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        Ok(peak / energy)
    }
}

struct Work {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// Linear PAPR of one sequence.
pub fn papr(s: &[Complex64], cfg: PaprConfig) -> Result<f64> {
    PaprEngine::new(s.len(), cfg)?.papr(s)
}

pub fn papr_db(s: &[Complex64], cfg: PaprConfig) -> Result<f64> {
    papr(s, cfg).map(to_db)
}

/// Linear PAPR of each column.
pub fn column_paprs(a: &SequenceSet, cfg: PaprConfig) -> Result<Vec<f64>> {
    PaprEngine::new(a.m(), cfg)?.column_paprs(a.matrix())
}

/// `floor(delta * N / 100)`, the size of the top-delta% set. A relative
/// slack of 1e-9 absorbs rounding in `delta` (so `delta = 100 / N` gives 1).
pub fn top_count(n: usize, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta <= 100.0) {
        return Err(Error::InvalidParameter(format!("delta must be in (0, 100], got {delta}")));
    }
    let exact = delta * n as f64 / 100.0;
    let k = (exact * (1.0 + 1e-9)).floor() as usize;
    if k == 0 {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta}% of {n} columns selects no column"
        )));
    }
    Ok(k.min(n))
}

/// Column indices ordered by descending value, ties by ascending index.
pub(crate) fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| match values[b].total_cmp(&values[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    order
}

/// Mean of the `k` largest values.
pub fn top_average(values: &[f64], k: usize) -> f64 {
    let order = descending_order(values);
    order[..k].iter().map(|&i| values[i]).sum::<f64>() / k as f64
}

/// Stage-2 cost: mean linear PAPR over the top `delta` percent of columns.
pub fn cost_f2(a: &SequenceSet, delta: f64, cfg: PaprConfig) -> Result<f64> {
    let k = top_count(a.n(), delta)?;
    Ok(top_average(&column_paprs(a, cfg)?, k))
}

/// Largest linear column PAPR.
pub fn max_papr(a: &SequenceSet, cfg: PaprConfig) -> Result<f64> {
    if a.n() == 0 {
        return Err(Error::InvalidParameter("empty sequence set".into()));
    }
    Ok(column_paprs(a, cfg)?.into_iter().fold(f64::MIN, f64::max))
}

/// Empirical exceedance probabilities `P(PAPR_dB > threshold)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CcdfCurve {
    pub thresholds: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl CcdfCurve {
    /// Builds the curve from per-column PAPRs in dB. Thresholds must be
    /// ascending.
    pub fn from_values(values_db: &[f64], thresholds_db: &[f64]) -> Result<Self> {
        if values_db.is_empty() {
            return Err(Error::InvalidParameter("CCDF of an empty set".into()));
        }
        if thresholds_db.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("CCDF thresholds must be ascending".into()));
        }
        let mut sorted = values_db.to_vec();
        sorted.sort_by(f64::total_cmp);
        let total = sorted.len() as f64;
        let probabilities = thresholds_db
            .iter()
            .map(|&t| {
                let at_or_below = sorted.partition_point(|&v| v <= t);
                (sorted.len() - at_or_below) as f64 / total
            })
            .collect();
        Ok(Self {
            thresholds: thresholds_db.to_vec(),
            probabilities,
        })
    }
}

pub fn ccdf(a: &SequenceSet, cfg: PaprConfig, thresholds_db: &[f64]) -> Result<CcdfCurve> {
    let values: Vec<f64> = column_paprs(a, cfg)?.into_iter().map(to_db).collect();
    CcdfCurve::from_values(&values, thresholds_db)
}

/// `[0, step, 2 step, ...]` up to the first multiple of `step` at or above `max_db`.
pub fn threshold_grid(max_db: f64, step: f64) -> Vec<f64> {
    let count = (max_db.max(0.0) / step).ceil() as usize + 1;
    (0..=count).map(|i| i as f64 * step).collect()
}

/// Per-set PAPR figures reported by the experiment drivers.
#[derive(Clone, Debug, PartialEq)]
pub struct PaprSummary {
    pub columns: usize,
    pub max_db: f64,
    pub top_average_db: f64,
    pub delta: f64,
}

pub fn summarize(a: &SequenceSet, delta: f64, cfg: PaprConfig) -> Result<PaprSummary> {
    let values = column_paprs(a, cfg)?;
    let k = top_count(values.len(), delta)?;
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    Ok(PaprSummary {
        columns: values.len(),
        max_db: to_db(max),
        top_average_db: to_db(top_average(&values, k)),
        delta,
    })
}
