use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gaseq_core::baselines::{random_subsampling, BaselineFamily};
use gaseq_core::cssim::{
    aud_ce_campaign, m_grid, transition_point, ActivityModel, CampaignConfig, CampaignPoint,
    PhaseTransitionConfig,
};
use gaseq_core::ga::{run_stage1, run_stage2, CostTrace, CostVariant, GaConfig};
use gaseq_core::papr::{ccdf, summarize, threshold_grid, to_db, PaprConfig};
use gaseq_core::rng::{mix_seed, seeded};
use gaseq_core::seqcore::{
    coherence, reconstruct, subsample, welch_cost_f1, Descriptor, SequenceSet, UnitaryFamily,
    UnitaryKind,
};
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::files::{self, num, write_csv, write_json, DescriptorFile, GaEcho, MatrixFile};
use crate::{Calibration, Common, CountSweep, Sweep};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Unitary {
    Fourier,
    Zc,
}

impl From<Unitary> for UnitaryFamily {
    fn from(u: Unitary) -> Self {
        match u {
            Unitary::Fourier => UnitaryFamily::Fourier,
            Unitary::Zc => UnitaryFamily::Zc,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Cost {
    /// Distance of the absolute Gram matrix to the Welch-bound target.
    Avg,
    /// Mutual coherence.
    Coh,
}

impl From<Cost> for CostVariant {
    fn from(c: Cost) -> Self {
        match c {
            Cost::Avg => CostVariant::WelchAverage,
            Cost::Coh => CostVariant::Coherence,
        }
    }
}

fn unitary_kind(u: Unitary, n: usize) -> CliResult<UnitaryKind> {
    UnitaryKind::new(u.into(), n).map_err(|e| CliError::Validation(e.to_string()))
}

fn papr_config(oversample: usize) -> CliResult<PaprConfig> {
    PaprConfig::new(oversample).map_err(|e| CliError::Usage(format!("--oversample: {e}")))
}

fn trace_rows(trace: &CostTrace) -> Vec<Vec<String>> {
    trace
        .values()
        .iter()
        .enumerate()
        .map(|(i, &c)| vec![i.to_string(), num(c)])
        .collect()
}

const TRACE_HEADER: [&str; 2] = ["iteration", "best_cost"];

/// GA parameters shared by `design` and `phase-transition`.
#[derive(Args, Debug, Clone)]
pub struct GaArgs {
    #[arg(long, default_value_t = GaConfig::DEFAULT_STAGE1_ITERATIONS)]
    pub iters1: usize,
    #[arg(long, default_value_t = GaConfig::DEFAULT_POPULATION)]
    pub population: usize,
    #[arg(long, default_value_t = GaConfig::DEFAULT_CROSSOVER_RATE)]
    pub crossover_rate: f64,
    #[arg(long, default_value_t = GaConfig::DEFAULT_MUTATION_COUNT)]
    pub mutations: usize,
}

impl GaArgs {
    fn stage(&self, iterations: usize, seed: u64) -> GaConfig {
        GaConfig {
            population_size: self.population,
            crossover_rate: self.crossover_rate,
            mutation_count: self.mutations,
            max_iterations: iterations,
            seed,
            ..GaConfig::stage1_default()
        }
    }
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    #[arg(long, value_enum, default_value = "fourier")]
    pub unitary: Unitary,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 80)]
    pub m: usize,
    #[command(flatten)]
    pub ga: GaArgs,
    #[arg(long, default_value_t = GaConfig::DEFAULT_STAGE2_ITERATIONS)]
    pub iters2: usize,
    /// Stage-1 objective.
    #[arg(long, value_enum, default_value = "avg")]
    pub cost: Cost,
    /// Percentage of worst columns averaged by the stage-2 cost.
    #[arg(long, default_value_t = GaConfig::DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = PaprConfig::DEFAULT_OVERSAMPLING)]
    pub oversample: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn design(a: &DesignArgs) -> CliResult<()> {
    let kind = unitary_kind(a.unitary, a.n)?;
    let papr = papr_config(a.oversample)?;
    let mut c1 = a.ga.stage(a.ga.iters1, mix_seed(a.common.seed, 1));
    c1.cost_variant = a.cost.into();
    let mut c2 = a.ga.stage(a.iters2, mix_seed(a.common.seed, 2));
    c2.delta = a.delta;
    for c in [&c1, &c2] {
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }

    let u = kind.generate();
    let s1 = run_stage1(&u, a.m, &c1)?;
    let partial = subsample(&u, &s1.omega)?;
    let s2 = run_stage2(&partial, &c2, papr)?;
    let descriptor = Descriptor::new(kind, s1.omega.clone(), Some(s2.mask.clone()))?;
    let set = reconstruct(&descriptor)?;

    let mut file = DescriptorFile::from_descriptor(&descriptor);
    file.label = Some(format!("{}-ga-{}", kind.family(), a.cost.to_possible_value().unwrap().get_name()));
    file.cost_variant = Some(CostVariant::from(a.cost).name().into());
    file.cost_f1 = Some(welch_cost_f1(&set));
    file.cost_f2 = Some(s2.cost);
    file.delta = Some(a.delta);
    file.oversample = Some(a.oversample);
    file.seed = Some(a.common.seed);
    file.stage1 = Some(GaEcho::from(&c1));
    file.stage2 = Some(GaEcho::from(&c2));
    // Fails if the file would not validate when read back.
    file.reconstruct()?;

    let dir = files::output_dir(&a.common.out)?;
    write_json(&dir.join("descriptor.json"), &file)?;
    write_csv(&dir.join("trace_stage1.csv"), &TRACE_HEADER, &trace_rows(&s1.trace))?;
    write_csv(&dir.join("trace_stage2.csv"), &TRACE_HEADER, &trace_rows(&s2.trace))?;
    println!(
        "stage 1 cost {:.6} -> {:.6}; stage 2 top-{}% PAPR {:.3} -> {:.3} dB",
        s1.trace.first().unwrap_or(f64::NAN),
        s1.cost,
        a.delta,
        to_db(s2.trace.first().unwrap_or(f64::NAN)),
        to_db(s2.cost)
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct PaprArgs {
    /// Descriptor or matrix file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = GaConfig::DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = PaprConfig::DEFAULT_OVERSAMPLING)]
    pub oversample: usize,
    /// CCDF threshold spacing in dB.
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Drop the mask of a descriptor before evaluating.
    #[arg(long)]
    pub unmasked: bool,
    #[command(flatten)]
    pub common: Common,
}

fn load_input(path: &std::path::Path, unmasked: bool) -> CliResult<SequenceSet> {
    if !unmasked {
        return files::load_set(path);
    }
    let file = files::read_descriptor(path)?;
    let mut d = file.descriptor()?;
    d.mask = None;
    Ok(reconstruct(&d)?)
}

pub fn papr(a: &PaprArgs) -> CliResult<()> {
    let cfg = papr_config(a.oversample)?;
    if !(a.step > 0.0 && a.step.is_finite()) {
        return Err(CliError::Usage(format!("--step must be positive, got {}", a.step)));
    }
    let set = load_input(&a.input, a.unmasked)?;
    let summary = summarize(&set, a.delta, cfg)?;
    let thresholds = threshold_grid(summary.max_db, a.step);
    let curve = ccdf(&set, cfg, &thresholds)?;

    let dir = files::output_dir(&a.common.out)?;
    let rows: Vec<Vec<String>> = curve
        .thresholds
        .iter()
        .zip(&curve.probabilities)
        .map(|(&t, &p)| vec![num(t), num(p)])
        .collect();
    write_csv(&dir.join("ccdf.csv"), &["papr_db", "prob_exceed"], &rows)?;
    write_json(
        &dir.join("papr_summary.json"),
        &json!({
            "label": set.label(),
            "m": set.m(),
            "n": set.n(),
            "oversample": a.oversample,
            "delta": a.delta,
            "max_papr_db": summary.max_db,
            "top_average_db": summary.top_average_db,
        }),
    )?;
    println!("max PAPR {:.3} dB, top-{}% average {:.3} dB", summary.max_db, a.delta, summary.top_average_db);
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransitionMethod {
    /// Stage-1 GA with the Welch-distance cost.
    Ga,
    /// Stage-1 GA with the coherence cost.
    GaCoh,
    /// Best random subsampling by the Welch-distance cost.
    Random,
    /// Best random subsampling by coherence.
    RandomCoh,
}

#[derive(Args, Debug)]
pub struct TransitionArgs {
    #[arg(long, value_enum, default_value = "fourier")]
    pub unitary: Unitary,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "ga")]
    pub method: TransitionMethod,
    #[command(flatten)]
    pub ga: GaArgs,
    /// Candidates drawn by the random methods.
    #[arg(long, default_value_t = 500)]
    pub random_trials: usize,
    #[arg(long, default_value_t = 1.0 / 32.0)]
    pub m_step: f64,
    #[arg(long, default_value_t = 0.01)]
    pub k_step: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 20.0)]
    pub snr: f64,
    #[arg(long, default_value_t = 8)]
    pub antennas: usize,
    #[arg(long, value_enum, default_value = "expected")]
    pub calibration: Calibration,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct TransitionRow {
    m: usize,
    m_over_n: f64,
    k_over_m_transition: f64,
    cost_f1: f64,
    coherence: f64,
}

pub fn phase_transition(a: &TransitionArgs) -> CliResult<()> {
    let kind = unitary_kind(a.unitary, a.n)?;
    if a.trials == 0 || a.antennas == 0 {
        return Err(CliError::Usage("--trials and --antennas must be positive".into()));
    }
    let cfg = PhaseTransitionConfig {
        m_step: a.m_step,
        k_step: a.k_step,
        trials: a.trials,
        snr_db: a.snr,
        antennas: a.antennas,
        seed: mix_seed(a.common.seed, 3),
        calibration: a.calibration.into(),
        ..Default::default()
    };
    let grid = m_grid(a.n, a.m_step);
    if grid.is_empty() || a.m_step.is_nan() || a.m_step <= 0.0 {
        return Err(CliError::Usage(format!("--m-step {} leaves an empty grid", a.m_step)));
    }
    let u = kind.generate();
    let mut rows = Vec::new();
    for (i, &m) in grid.iter().enumerate() {
        let seed = mix_seed(a.common.seed, 100 + i as u64);
        let set = match a.method {
            TransitionMethod::Ga | TransitionMethod::GaCoh => {
                let mut c = a.ga.stage(a.ga.iters1, seed);
                if a.method == TransitionMethod::GaCoh {
                    c.cost_variant = CostVariant::Coherence;
                }
                c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
                subsample(&u, &run_stage1(&u, m, &c)?.omega)?
            }
            TransitionMethod::Random | TransitionMethod::RandomCoh => {
                let variant = if a.method == TransitionMethod::RandomCoh {
                    CostVariant::Coherence
                } else {
                    CostVariant::WelchAverage
                };
                random_subsampling(&u, m, a.random_trials, variant, &mut seeded(seed))?.0
            }
        };
        let point = transition_point(&set, &cfg)?;
        eprintln!("M={m}: K/M transition {:.3}", point.k_over_m);
        rows.push(TransitionRow {
            m,
            m_over_n: point.m_over_n,
            k_over_m_transition: point.k_over_m,
            cost_f1: welch_cost_f1(&set),
            coherence: coherence(&set)?,
        });
    }

    let dir = files::output_dir(&a.common.out)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.m_over_n), num(r.k_over_m_transition)])
        .collect();
    write_csv(&dir.join("phase_transition.csv"), &["m_over_n", "k_over_m_transition"], &csv_rows)?;
    write_json(
        &dir.join("phase_transition.json"),
        &json!({
            "unitary": kind.family().name(),
            "n": a.n,
            "method": a.method.to_possible_value().unwrap().get_name(),
            "trials": a.trials,
            "snr_db": a.snr,
            "antennas": a.antennas,
            "points": rows,
        }),
    )?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Descriptor or matrix files. Several inputs sweep the sequence length.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// SNR per device in dB, value or start:step:stop.
    #[arg(long, default_value = "0:2:10")]
    pub snr: Sweep,
    /// Receive antennas, value or start:step:stop.
    #[arg(long, default_value = "16")]
    pub antennas: CountSweep,
    /// Activity probability.
    #[arg(long, default_value_t = 0.1)]
    pub pa: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "expected")]
    pub calibration: Calibration,
    #[command(flatten)]
    pub common: Common,
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&a.pa) {
        return Err(CliError::Usage(format!("--pa must lie in [0, 1], got {}", a.pa)));
    }
    let (snrs, js) = (&a.snr.0, &a.antennas.0);
    let axes = [a.input.len() > 1, js.len() > 1, snrs.len() > 1];
    if axes.iter().filter(|&&x| x).count() > 1 {
        return Err(CliError::Usage(
            "sweep one of: several inputs, an antenna range, or an SNR range".into(),
        ));
    }
    let sets: Vec<SequenceSet> = a.input.iter().map(|p| files::load_set(p)).collect::<CliResult<_>>()?;
    let seed = mix_seed(a.common.seed, 4);

    let mut points: Vec<(String, CampaignPoint)> = Vec::new();
    for set in &sets {
        for &j in js {
            let cfg = CampaignConfig {
                activity: ActivityModel::Bernoulli(a.pa),
                antennas: j,
                snr_db: snrs.clone(),
                trials: a.trials,
                seed,
                calibration: a.calibration.into(),
            };
            for p in aud_ce_campaign(set, &cfg)? {
                eprintln!("{} M={} J={} {} dB: AER {:.4e} NMSE {:.4e}", set.label(), p.m, p.antennas, p.snr_db, p.aer, p.nmse);
                points.push((set.label().to_string(), p));
            }
        }
    }

    let (key, value): (&str, fn(&CampaignPoint) -> String) = if a.input.len() > 1 {
        ("m", |p| p.m.to_string())
    } else if js.len() > 1 {
        ("j", |p| p.antennas.to_string())
    } else {
        ("snr_db", |p| num(p.snr_db))
    };
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|(_, p)| vec![value(p), num(p.aer), num(p.nmse), p.trials.to_string()])
        .collect();
    let dir = files::output_dir(&a.common.out)?;
    write_csv(&dir.join("simulate.csv"), &[key, "aer", "nmse", "trials"], &rows)?;
    let summary: Vec<serde_json::Value> = points
        .iter()
        .map(|(label, p)| {
            json!({
                "label": label,
                "m": p.m,
                "antennas": p.antennas,
                "snr_db": p.snr_db,
                "aer": p.aer,
                "nmse": if p.nmse.is_finite() { json!(p.nmse) } else { serde_json::Value::Null },
                "trials": p.trials,
                "nmse_trials": p.nmse_trials,
            })
        })
        .collect();
    write_json(
        &dir.join("simulate.json"),
        &json!({ "pa": a.pa, "calibration": format!("{:?}", a.calibration).to_lowercase(), "points": summary }),
    )?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    Gaussian,
    Musa,
    Zcprime,
}

impl From<BaselineArg> for BaselineFamily {
    fn from(b: BaselineArg) -> Self {
        match b {
            BaselineArg::Gaussian => BaselineFamily::Gaussian,
            BaselineArg::Musa => BaselineFamily::Musa,
            BaselineArg::Zcprime => BaselineFamily::ZcPrime,
        }
    }
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub kind: BaselineArg,
    #[arg(long, default_value_t = 80)]
    pub m: usize,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Candidates for best-of-trials selection by coherence.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Oversampling used to rank prime-length ZC roots.
    #[arg(long, default_value_t = PaprConfig::DEFAULT_OVERSAMPLING)]
    pub oversample: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn baseline(a: &BaselineArgs) -> CliResult<()> {
    let papr = papr_config(a.oversample)?;
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let family = BaselineFamily::from(a.kind);
    let set = family
        .with_trials(a.trials)
        .build(a.m, a.n, papr, &mut seeded(a.common.seed))
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let dir = files::output_dir(&a.common.out)?;
    write_json(&dir.join(format!("{family}.json")), &MatrixFile::from_set(&set))?;
    println!("{}: {}x{}, coherence {:.6}", family, set.m(), set.n(), coherence(&set)?);
    Ok(())
}
