use rayon::prelude::*;

use super::instance::{gen_instance_with, ActivityModel, NoiseCalibration};
use super::metrics::{aer, nmse, relative_error};
use super::somp::{somp, somp_blind, Dictionary};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, substream};
use crate::seqcore::SequenceSet;

/// Known-sparsity recovery sweep over a grid of `M/N` and `K/M`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTransitionConfig {
    /// Grid step in `M/N`.
    pub m_step: f64,
    /// Grid step in `K/M`.
    pub k_step: f64,
    pub trials: usize,
    pub snr_db: f64,
    pub antennas: usize,
    pub seed: u64,
    pub calibration: NoiseCalibration,
    /// A trial succeeds when `|X - X^|_F^2 / |X|_F^2` is below this.
    pub success_threshold: f64,
    /// A grid point passes when the success rate is at least this.
    pub required_rate: f64,
}

impl Default for PhaseTransitionConfig {
    fn default() -> Self {
        Self {
            m_step: 1.0 / 32.0,
            k_step: 0.01,
            trials: 10_000,
            snr_db: 20.0,
            antennas: 8,
            seed: 0,
            calibration: NoiseCalibration::Expected,
            success_threshold: 1e-2,
            required_rate: 0.99,
        }
    }
}

impl PhaseTransitionConfig {
    fn validate(&self) -> Result<()> {
        let step_ok = |s: f64| s > 0.0 && s <= 1.0;
        if !step_ok(self.m_step) || !step_ok(self.k_step) {
            return Err(Error::InvalidParameter(format!(
                "grid steps must lie in (0, 1], got {} and {}",
                self.m_step, self.k_step
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        if self.antennas == 0 {
            return Err(Error::InvalidParameter("at least one antenna is required".into()));
        }
        Ok(())
    }
}

/// Success rate at one sparsity level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KStep {
    pub k_over_m: f64,
    pub k: usize,
    pub success_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionPoint {
    pub m: usize,
    pub n: usize,
    pub m_over_n: f64,
    /// Largest grid value of `K/M` reached before the first failing one; 0
    /// if the first step already fails.
    pub k_over_m: f64,
    /// Evaluated steps in scan order.
    pub steps: Vec<KStep>,
}

/// Sequence lengths `round(i * step * N)` for `i = 1, 2, ...` with
/// `i * step < 1`, deduplicated.
pub fn m_grid(n: usize, m_step: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for i in 1.. {
        let ratio = i as f64 * m_step;
        if ratio >= 1.0 - 1e-12 {
            break;
        }
        let m = ((ratio * n as f64).round() as usize).max(1);
        if out.last() != Some(&m) {
            out.push(m);
        }
    }
    out
}

fn trial_seed(seed: u64, m: usize, k: usize) -> u64 {
    mix_seed(seed, ((m as u64) << 32) | k as u64)
}

/// Fraction of trials with relative recovery error below the threshold.
/// Trial `t` at `(M, K)` uses the same random stream for every set, so two
/// sets are compared on identical supports, channels and noise.
pub fn success_rate(dict: &Dictionary, k: usize, cfg: &PhaseTransitionConfig) -> Result<f64> {
    cfg.validate()?;
    if k == 0 {
        return Ok(1.0);
    }
    let seed = trial_seed(cfg.seed, dict.m(), k);
    let successes: Vec<bool> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t);
            let inst = gen_instance_with(dict, ActivityModel::FixedK(k), cfg.antennas, cfg.snr_db, cfg.calibration, &mut rng)?;
            let rep = somp(dict, &inst.y, k)?;
            let err = relative_error(&inst.x_true, &rep.x_hat).unwrap_or(0.0);
            Ok(err < cfg.success_threshold)
        })
        .collect::<Result<_>>()?;
    Ok(successes.iter().filter(|&&s| s).count() as f64 / cfg.trials as f64)
}

/// Scans `K/M = k_step, 2 k_step, ...` upward with `K = round(K/M * M)` and
/// stops at the first step whose success rate misses the requirement.
pub fn transition_point(a: &SequenceSet, cfg: &PhaseTransitionConfig) -> Result<TransitionPoint> {
    cfg.validate()?;
    let dict = Dictionary::new(a.matrix())?;
    let (m, n) = (a.m(), a.n());
    let mut steps = Vec::new();
    let mut reached = 0.0;
    let mut cache: Vec<Option<f64>> = vec![None; m + 1];
    for i in 1.. {
        let r = i as f64 * cfg.k_step;
        if r > 1.0 + 1e-12 {
            break;
        }
        let k = ((r * m as f64).round() as usize).min(m.min(n));
        let rate = match cache[k] {
            Some(rate) => rate,
            None => {
                let rate = success_rate(&dict, k, cfg)?;
                cache[k] = Some(rate);
                rate
            }
        };
        steps.push(KStep { k_over_m: r, k, success_rate: rate });
        if rate < cfg.required_rate - 1e-12 {
            break;
        }
        reached = r;
    }
    Ok(TransitionPoint {
        m,
        n,
        m_over_n: m as f64 / n as f64,
        k_over_m: reached,
        steps,
    })
}

/// Transition curve over [`m_grid`]; `build(M)` supplies the `M x N` set.
pub fn phase_transition(
    n: usize,
    mut build: impl FnMut(usize) -> Result<SequenceSet>,
    cfg: &PhaseTransitionConfig,
) -> Result<Vec<TransitionPoint>> {
    cfg.validate()?;
    let grid = m_grid(n, cfg.m_step);
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("step {} leaves an empty grid", cfg.m_step)));
    }
    grid.into_iter()
        .map(|m| {
            let a = build(m)?;
            if a.m() != m || a.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "builder returned {}x{} for {m}x{n}",
                    a.m(),
                    a.n()
                )));
            }
            transition_point(&a, cfg)
        })
        .collect()
}

/// Blind activity detection and channel estimation over access trials.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub activity: ActivityModel,
    pub antennas: usize,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub calibration: NoiseCalibration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignPoint {
    pub snr_db: f64,
    pub antennas: usize,
    pub m: usize,
    pub aer: f64,
    /// Mean over trials with at least one active device; NaN if none.
    pub nmse: f64,
    pub trials: usize,
    pub nmse_trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOutcome {
    pub k: usize,
    pub aer: f64,
    pub nmse: Option<f64>,
}

/// One access slot decoded with blind SOMP.
pub fn access_trial(
    dict: &Dictionary,
    activity: ActivityModel,
    antennas: usize,
    snr_db: f64,
    calibration: NoiseCalibration,
    rng: &mut crate::rng::SimRng,
) -> Result<TrialOutcome> {
    let inst = gen_instance_with(dict, activity, antennas, snr_db, calibration, rng)?;
    let rep = somp_blind(dict, &inst.y, inst.sigma2)?;
    Ok(TrialOutcome {
        k: inst.k(),
        aer: aer(&inst.active, &rep.detected),
        nmse: nmse(&inst.x_true, &rep.x_hat, &inst.active),
    })
}

/// Mean AER and NMSE at each SNR. Trial `t` uses stream `t` of the master
/// seed at every SNR, so points differ only in noise scale.
pub fn aud_ce_campaign(a: &SequenceSet, cfg: &CampaignConfig) -> Result<Vec<CampaignPoint>> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    if let Some(s) = cfg.snr_db.iter().find(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter(format!("SNR must be finite, got {s}")));
    }
    let dict = Dictionary::new(a.matrix())?;
    cfg.snr_db
        .iter()
        .map(|&snr_db| {
            let outcomes: Vec<TrialOutcome> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut rng = substream(cfg.seed, t);
                    access_trial(&dict, cfg.activity, cfg.antennas, snr_db, cfg.calibration, &mut rng)
                })
                .collect::<Result<_>>()?;
            let aer_mean = outcomes.iter().map(|o| o.aer).sum::<f64>() / outcomes.len() as f64;
            let nmse_values: Vec<f64> = outcomes.iter().filter_map(|o| o.nmse).collect();
            let nmse_mean = if nmse_values.is_empty() {
                f64::NAN
            } else {
                nmse_values.iter().sum::<f64>() / nmse_values.len() as f64
            };
            Ok(CampaignPoint {
                snr_db,
                antennas: cfg.antennas,
                m: a.m(),
                aer: aer_mean,
                nmse: nmse_mean,
                trials: cfg.trials,
                nmse_trials: nmse_values.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{subsample, IndexSet, UnitaryKind};

    #[test]
    fn grid_points() {
        assert_eq!(m_grid(64, 0.125), vec![8, 16, 24, 32, 40, 48, 56]);
        assert_eq!(m_grid(256, 1.0 / 32.0).len(), 31);
        assert!(m_grid(10, 1.0).is_empty());
    }

    #[test]
    fn square_system_always_succeeds() {
        let u = UnitaryKind::fourier(8).unwrap().generate();
        let a = subsample(&u, &IndexSet::full(8).unwrap()).unwrap();
        let dict = Dictionary::new(a.matrix()).unwrap();
        let cfg = PhaseTransitionConfig {
            trials: 50,
            snr_db: f64::INFINITY,
            ..Default::default()
        };
        assert_eq!(success_rate(&dict, 1, &cfg).unwrap(), 1.0);
        assert_eq!(success_rate(&dict, 0, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn transition_scan_stops_at_first_failure() {
        let u = UnitaryKind::fourier(32).unwrap().generate();
        let a = subsample(&u, &IndexSet::new(32, vec![0, 1, 3, 7, 12, 20, 21, 27]).unwrap()).unwrap();
        let cfg = PhaseTransitionConfig {
            k_step: 0.125,
            trials: 40,
            ..Default::default()
        };
        let p = transition_point(&a, &cfg).unwrap();
        let last = p.steps.last().unwrap();
        assert!(p.steps[..p.steps.len() - 1].iter().all(|s| s.success_rate >= 0.99));
        assert!(last.success_rate < 0.99 || last.k_over_m >= 1.0 - 1e-12);
        assert_eq!(p, transition_point(&a, &cfg).unwrap());
    }

    #[test]
    fn campaign_is_deterministic() {
        let u = UnitaryKind::fourier(32).unwrap().generate();
        let a = subsample(&u, &IndexSet::new(32, (0..12).map(|i| i * 2).collect()).unwrap()).unwrap();
        let cfg = CampaignConfig {
            activity: ActivityModel::Bernoulli(0.1),
            antennas: 4,
            snr_db: vec![0.0, 10.0],
            trials: 30,
            seed: 9,
            calibration: NoiseCalibration::Expected,
        };
        let a1 = aud_ce_campaign(&a, &cfg).unwrap();
        assert_eq!(a1, aud_ce_campaign(&a, &cfg).unwrap());
        assert!(a1.iter().all(|p| (0.0..=1.0).contains(&p.aer) && p.trials == 30));
        let bad = CampaignConfig { snr_db: vec![f64::INFINITY], ..cfg };
        assert!(aud_ce_campaign(&a, &bad).is_err());
    }
}
