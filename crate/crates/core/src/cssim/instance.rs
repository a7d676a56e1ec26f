use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::somp::Dictionary;
use crate::error::{Error, Result};
use crate::seqcore::{ComplexMatrix, SequenceSet};

/// Which devices are active in an access slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActivityModel {
    /// Each device independently active with probability `p`.
    Bernoulli(f64),
    /// Exactly `K` devices, positions uniform.
    FixedK(usize),
}

impl ActivityModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            ActivityModel::Bernoulli(p) if !(0.0..=1.0).contains(&p) => Err(Error::InvalidParameter(
                format!("activity probability must lie in [0, 1], got {p}"),
            )),
            ActivityModel::FixedK(k) if k > n => Err(Error::InvalidParameter(format!(
                "cannot activate {k} of {n} devices"
            ))),
            _ => Ok(()),
        }
    }

    /// Sorted active set.
    pub fn draw<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        match *self {
            ActivityModel::Bernoulli(p) => (0..n).filter(|_| rng.random::<f64>() < p).collect(),
            ActivityModel::FixedK(k) => {
                let mut s = sample(rng, n, k).into_vec();
                s.sort_unstable();
                s
            }
        }
    }
}

/// How the noise variance follows from the configured SNR.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NoiseCalibration {
    /// `sigma^2 = E|a_n|^2 / (M * SNR)` with `E|a_n|^2` the mean squared
    /// column norm of the set; `1 / (M * SNR)` for unit-norm columns.
    #[default]
    Expected,
    /// `sigma^2 = sum_t |A x_t|^2 / (K * J * M * SNR)` from the drawn
    /// instance; falls back to `Expected` when no device is active.
    Realized,
}

impl FromStr for NoiseCalibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected" => Ok(NoiseCalibration::Expected),
            "realized" => Ok(NoiseCalibration::Realized),
            other => Err(Error::InvalidParameter(format!("unknown calibration '{other}'"))),
        }
    }
}

impl fmt::Display for NoiseCalibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseCalibration::Expected => "expected",
            NoiseCalibration::Realized => "realized",
        })
    }
}

/// One access slot: `Y = A X + W`.
#[derive(Clone, Debug, PartialEq)]
pub struct MmvInstance {
    /// `M x J` received signal.
    pub y: ComplexMatrix,
    /// `N x J`, zero outside `active`.
    pub x_true: ComplexMatrix,
    /// Sorted active devices.
    pub active: Vec<usize>,
    /// Noise variance per complex entry.
    pub sigma2: f64,
    pub snr_db: f64,
}

impl MmvInstance {
    pub fn k(&self) -> usize {
        self.active.len()
    }

    pub fn antennas(&self) -> usize {
        self.y.cols()
    }
}

/// Linear SNR from dB; `+inf` dB gives an infinite ratio and zero noise.
pub fn snr_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

fn complex_normal<R: Rng>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Draws an instance for the columns of `a`.
pub fn gen_instance<R: Rng>(
    a: &SequenceSet,
    activity: ActivityModel,
    antennas: usize,
    snr_db: f64,
    calibration: NoiseCalibration,
    rng: &mut R,
) -> Result<MmvInstance> {
    let dict = Dictionary::new(a.matrix())?;
    gen_instance_with(&dict, activity, antennas, snr_db, calibration, rng)
}

/// As [`gen_instance`] with a prepared dictionary.
///
/// Draw order: activity, channels (row by row), then unit-variance noise,
/// which is scaled by `sigma` afterwards. Two calls that differ only in SNR
/// therefore see the same devices, channels and noise shape.
pub fn gen_instance_with<R: Rng>(
    dict: &Dictionary,
    activity: ActivityModel,
    antennas: usize,
    snr_db: f64,
    calibration: NoiseCalibration,
    rng: &mut R,
) -> Result<MmvInstance> {
    let (m, n) = (dict.m(), dict.n());
    if antennas == 0 {
        return Err(Error::InvalidParameter("at least one antenna is required".into()));
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidParameter("SNR is NaN".into()));
    }
    activity.validate(n)?;

    let active = activity.draw(n, rng);
    let mut x_true = ComplexMatrix::zeros(n, antennas);
    for &d in &active {
        for h in x_true.row_mut(d) {
            *h = complex_normal(rng, 1.0);
        }
    }

    let mut y = ComplexMatrix::zeros(m, antennas);
    for &d in &active {
        let col = dict.column(d);
        let x = x_true.row(d).to_vec();
        for (r, &a) in col.iter().enumerate() {
            for (out, &h) in y.row_mut(r).iter_mut().zip(&x) {
                *out += a * h;
            }
        }
    }

    let snr = snr_linear(snr_db);
    let signal = y.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
    let sigma2 = match calibration {
        NoiseCalibration::Realized if !active.is_empty() => {
            signal / (active.len() * antennas * m) as f64 / snr
        }
        _ => dict.mean_column_energy() / m as f64 / snr,
    };
    let sigma = sigma2.sqrt();
    for r in 0..m {
        for out in y.row_mut(r) {
            *out += complex_normal(rng, 1.0) * sigma;
        }
    }

    Ok(MmvInstance {
        y,
        x_true,
        active,
        sigma2,
        snr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::seqcore::{subsample, IndexSet, UnitaryKind};

    fn partial_fourier(n: usize, m: usize) -> SequenceSet {
        let u = UnitaryKind::fourier(n).unwrap().generate();
        subsample(&u, &IndexSet::new(n, (0..m).map(|i| (i * 7) % n).collect()).unwrap()).unwrap()
    }

    #[test]
    fn noiseless_limit() {
        let a = partial_fourier(16, 8);
        let inst = gen_instance(&a, ActivityModel::FixedK(3), 2, f64::INFINITY, NoiseCalibration::Expected, &mut seeded(1)).unwrap();
        assert_eq!(inst.sigma2, 0.0);
        assert_eq!(inst.k(), 3);
        let ax = a.matrix().matmul(&inst.x_true).unwrap();
        assert!(ax.max_abs_diff(&inst.y) < 1e-14);
        for r in 0..16 {
            if !inst.active.contains(&r) {
                assert!(inst.x_true.row(r).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
            }
        }
    }

    #[test]
    fn expected_calibration_for_unit_columns() {
        let a = partial_fourier(16, 8);
        let inst = gen_instance(&a, ActivityModel::FixedK(0), 4, 10.0, NoiseCalibration::Expected, &mut seeded(2)).unwrap();
        assert!((inst.sigma2 - 1.0 / 80.0).abs() < 1e-15);
        let realized = gen_instance(&a, ActivityModel::FixedK(0), 4, 10.0, NoiseCalibration::Realized, &mut seeded(2)).unwrap();
        assert_eq!(inst, realized);
    }

    #[test]
    fn common_randomness_across_snr() {
        let a = partial_fourier(16, 8);
        let lo = gen_instance(&a, ActivityModel::Bernoulli(0.3), 2, 0.0, NoiseCalibration::Expected, &mut seeded(5)).unwrap();
        let hi = gen_instance(&a, ActivityModel::Bernoulli(0.3), 2, 20.0, NoiseCalibration::Expected, &mut seeded(5)).unwrap();
        assert_eq!(lo.active, hi.active);
        assert_eq!(lo.x_true, hi.x_true);
        let clean = a.matrix().matmul(&lo.x_true).unwrap();
        let w_lo = lo.y.sub(&clean).unwrap();
        let w_hi = hi.y.sub(&clean).unwrap();
        let ratio = (lo.sigma2 / hi.sigma2).sqrt();
        assert!(w_lo.max_abs_diff(&w_hi.scale(Complex64::new(ratio, 0.0))) < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let a = partial_fourier(8, 4);
        let mut rng = seeded(0);
        let cal = NoiseCalibration::Expected;
        assert!(gen_instance(&a, ActivityModel::FixedK(9), 1, 0.0, cal, &mut rng).is_err());
        assert!(gen_instance(&a, ActivityModel::Bernoulli(1.5), 1, 0.0, cal, &mut rng).is_err());
        assert!(gen_instance(&a, ActivityModel::FixedK(1), 0, 0.0, cal, &mut rng).is_err());
    }
}
