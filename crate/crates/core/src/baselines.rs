//! Reference sequence families: i.i.d. complex Gaussian, MUSA 3-level
//! constellation, prime-length multi-root Zadoff-Chu, and best-of-R random
//! row subsampling of a unitary matrix.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ga::CostVariant;
use crate::papr::{PaprConfig, PaprEngine};
use crate::seqcore::{
    coherence_of, subsample, welch_cost_of, ComplexMatrix, IndexSet, SequenceSet, UnitaryMatrix,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    /// Best of `trials` draws by coherence.
    Gaussian { trials: usize },
    /// Best of `trials` draws by coherence.
    Musa { trials: usize },
    ZcPrime,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::Gaussian { .. } => "gaussian",
            BaselineKind::Musa { .. } => "musa",
            BaselineKind::ZcPrime => "zcprime",
        }
    }

    pub fn build<R: Rng>(&self, m: usize, n: usize, papr: PaprConfig, rng: &mut R) -> Result<SequenceSet> {
        match *self {
            BaselineKind::Gaussian { trials } => gaussian_set(m, n, trials, rng),
            BaselineKind::Musa { trials } => musa_set(m, n, trials, rng),
            BaselineKind::ZcPrime => zc_prime_set(m, n, papr),
        }
    }
}

/// Name of a baseline family without its trial count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineFamily {
    Gaussian,
    Musa,
    ZcPrime,
}

impl BaselineFamily {
    pub fn with_trials(self, trials: usize) -> BaselineKind {
        match self {
            BaselineFamily::Gaussian => BaselineKind::Gaussian { trials },
            BaselineFamily::Musa => BaselineKind::Musa { trials },
            BaselineFamily::ZcPrime => BaselineKind::ZcPrime,
        }
    }
}

impl FromStr for BaselineFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(BaselineFamily::Gaussian),
            "musa" => Ok(BaselineFamily::Musa),
            "zcprime" | "zc-prime" => Ok(BaselineFamily::ZcPrime),
            other => Err(Error::InvalidParameter(format!("unknown baseline '{other}'"))),
        }
    }
}

impl fmt::Display for BaselineFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineFamily::Gaussian => "gaussian",
            BaselineFamily::Musa => "musa",
            BaselineFamily::ZcPrime => "zcprime",
        })
    }
}

const CANDIDATE_BATCH: usize = 16;

/// Draws `trials` candidates sequentially from `rng` and keeps the one with
/// the lowest coherence (earliest on ties). Coherence is scored in parallel
/// per batch, which does not affect the random stream.
fn lowest_coherence<R: Rng>(
    trials: usize,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> ComplexMatrix,
) -> Result<ComplexMatrix> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    if trials == 1 {
        return Ok(draw(rng));
    }
    let mut best: Option<(f64, ComplexMatrix)> = None;
    let mut remaining = trials;
    while remaining > 0 {
        let batch: Vec<ComplexMatrix> = (0..remaining.min(CANDIDATE_BATCH)).map(|_| draw(rng)).collect();
        remaining -= batch.len();
        let scores: Vec<Result<f64>> = batch.par_iter().map(coherence_of).collect();
        for (cand, score) in batch.into_iter().zip(scores) {
            let score = score?;
            if best.as_ref().is_none_or(|(b, _)| score < *b) {
                best = Some((score, cand));
            }
        }
    }
    Ok(best.expect("trials > 0").1)
}

/// Entries i.i.d. `CN(0, 1/M)`; columns are not normalized.
pub fn gaussian_set<R: Rng>(m: usize, n: usize, trials: usize, rng: &mut R) -> Result<SequenceSet> {
    check_dims(m, n)?;
    let normal = Normal::new(0.0, (0.5 / m as f64).sqrt()).expect("finite deviation");
    let matrix = lowest_coherence(trials, rng, |rng| {
        ComplexMatrix::from_fn(m, n, |_, _| Complex64::new(normal.sample(rng), normal.sample(rng)))
    })?;
    Ok(SequenceSet::from_matrix(matrix, "gaussian"))
}

/// The nine-point 3-level constellation `{±1±j, ±1, ±j, 0} / sqrt(12)`.
pub fn musa_alphabet() -> [Complex64; 9] {
    let s = 1.0 / 12f64.sqrt();
    let mut out = [Complex64::new(0.0, 0.0); 9];
    let mut i = 0;
    for re in [-1.0, 0.0, 1.0] {
        for im in [-1.0, 0.0, 1.0] {
            out[i] = Complex64::new(re * s, im * s);
            i += 1;
        }
    }
    out
}

/// Entries uniform over [`musa_alphabet`]; an all-zero column is redrawn.
pub fn musa_set<R: Rng>(m: usize, n: usize, trials: usize, rng: &mut R) -> Result<SequenceSet> {
    check_dims(m, n)?;
    let alphabet = musa_alphabet();
    let matrix = lowest_coherence(trials, rng, |rng| {
        let mut a = ComplexMatrix::zeros(m, n);
        for c in 0..n {
            loop {
                let mut nonzero = false;
                for r in 0..m {
                    let z = alphabet[rng.random_range(0..alphabet.len())];
                    nonzero |= z.norm_sqr() > 0.0;
                    a[(r, c)] = z;
                }
                if nonzero {
                    break;
                }
            }
        }
        a
    })?;
    Ok(SequenceSet::from_matrix(matrix, "musa"))
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("invalid dimensions {m}x{n}")));
    }
    Ok(())
}

pub fn is_prime(x: usize) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= x {
        if x.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime nearest to `m`; the smaller one when two are equally close.
pub fn nearest_prime(m: usize) -> usize {
    for d in 0.. {
        if d <= m && is_prime(m - d) {
            return m - d;
        }
        if is_prime(m + d) {
            return m + d;
        }
    }
    unreachable!()
}

/// Root-`u` Zadoff-Chu sequence of odd prime length `p`:
/// `z[k] = exp(j pi u k (k + 1) / p)` for `k = 0..p`.
pub fn zc_sequence(u: usize, p: usize) -> Vec<Complex64> {
    (0..p)
        .map(|k| {
            // k(k+1) is even, so the phase is 2 pi (u k (k+1) / 2 mod p) / p.
            let r = (u % p) * ((k * (k + 1) / 2) % p) % p;
            if r == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::cis(2.0 * PI * r as f64 / p as f64)
            }
        })
        .collect()
}

/// `p x p` matrix whose column `c` is the root-`u` sequence cyclically
/// advanced by `c`, scaled to unit norm.
pub fn zc_shift_matrix(u: usize, p: usize) -> ComplexMatrix {
    let z = zc_sequence(u, p);
    let s = 1.0 / (p as f64).sqrt();
    ComplexMatrix::from_fn(p, p, |k, c| z[(k + c) % p] * s)
}

/// Roots `1..p` ordered by the largest column PAPR of their shift matrix.
/// PAPRs equal to within 1e-9 (roots `u` and `p - u` tie exactly in exact
/// arithmetic) are ordered by root number.
pub fn roots_by_papr(p: usize, papr: PaprConfig) -> Result<Vec<(usize, f64)>> {
    let engine = PaprEngine::new(p, papr)?;
    let scored: Vec<(usize, f64)> = (1..p)
        .into_par_iter()
        .map(|u| {
            let values = engine.column_paprs(&zc_shift_matrix(u, p))?;
            Ok((u, values.into_iter().fold(f64::MIN, f64::max)))
        })
        .collect::<Result<_>>()?;
    let mut keyed: Vec<(i64, usize, f64)> = scored
        .into_iter()
        .map(|(u, v)| ((v * 1e9).round() as i64, u, v))
        .collect();
    keyed.sort_by_key(|&(key, u, _)| (key, u));
    Ok(keyed.into_iter().map(|(_, u, v)| (u, v)).collect())
}

/// Prime-length multi-root Zadoff-Chu set: `M_ZC` is the prime nearest `m`,
/// the `ceil(N / M_ZC)` roots with the lowest peak PAPR are stacked and the
/// first `N` columns kept. Columns have unit norm.
pub fn zc_prime_set(m: usize, n: usize, papr: PaprConfig) -> Result<SequenceSet> {
    check_dims(m, n)?;
    let p = nearest_prime(m);
    let roots_needed = n.div_ceil(p);
    if roots_needed > p - 1 {
        return Err(Error::InvalidParameter(format!(
            "{n} sequences need {roots_needed} roots but length {p} has only {}",
            p - 1
        )));
    }
    let roots = roots_by_papr(p, papr)?;
    let blocks: Vec<ComplexMatrix> = roots[..roots_needed]
        .iter()
        .map(|&(u, _)| zc_shift_matrix(u, p))
        .collect();
    let matrix = ComplexMatrix::from_fn(p, n, |r, c| blocks[c / p][(r, c % p)]);
    Ok(SequenceSet::from_matrix(matrix, "zcprime"))
}

/// Roots used by [`zc_prime_set`], in column-block order.
pub fn zc_prime_roots(m: usize, n: usize, papr: PaprConfig) -> Result<Vec<usize>> {
    let p = nearest_prime(m);
    let roots = roots_by_papr(p, papr)?;
    Ok(roots.into_iter().take(n.div_ceil(p)).map(|(u, _)| u).collect())
}

/// Best of `trials` uniformly random `m`-row subsamplings of `u`, scored by
/// the Welch-distance cost or by coherence.
pub fn random_subsampling<R: Rng>(
    u: &UnitaryMatrix,
    m: usize,
    trials: usize,
    variant: CostVariant,
    rng: &mut R,
) -> Result<(SequenceSet, f64)> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    if m == 0 || m > u.n() {
        return Err(Error::InvalidParameter(format!("cannot select {m} of {} rows", u.n())));
    }
    let sets: Vec<IndexSet> = (0..trials)
        .map(|_| IndexSet::new(u.n(), sample(rng, u.n(), m).into_vec()))
        .collect::<Result<_>>()?;
    let scores: Vec<f64> = sets
        .par_iter()
        .map(|omega| {
            let a = subsample(u, omega).expect("valid index set");
            match variant {
                CostVariant::WelchAverage => welch_cost_of(a.matrix()),
                CostVariant::Coherence => coherence_of(a.matrix()).unwrap_or(f64::INFINITY),
            }
        })
        .collect();
    let best = (0..trials)
        .reduce(|b, i| if scores[i] < scores[b] { i } else { b })
        .expect("trials > 0");
    let set = subsample(u, &sets[best])?.with_label(format!("{}-random-{variant}", u.kind().family()));
    Ok((set, scores[best]))
}
