//! Two-stage genetic search for non-orthogonal sequence sets.
//!
//! Stage 1 evolves row index sets of a unitary matrix toward an equiangular
//! tight frame; stage 2 evolves a common phase mask that lowers the PAPR of
//! the resulting columns without touching their correlations.
//!
//! Both stages share one generation scheme. From a population `P` of size
//! `T`, every unordered pair produces one child (`C`, `T(T-1)/2` members)
//! and every member produces one mutant (`M`, `T` members). The next
//! population is the `T` cheapest members of the concatenation `P + C + M`,
//! with ties kept in concatenation order. Because `P` is part of the pool the
//! best cost never increases.

mod engine;
mod masking;
mod subsampling;

pub use engine::{
    evolve, fittest, generation, intermediate_size, population_update, Evolution,
    GenerationReport, Genome, Scored,
};
pub use masking::{
    run_stage2, stage2_crossover, stage2_init, stage2_mutate, MaskingGenome, Stage2Outcome,
};
pub use subsampling::{
    run_stage1, stage1_crossover, stage1_init, stage1_mutate, SubsamplingGenome, Stage1Outcome,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::papr::PaprConfig;
use crate::seqcore::{reconstruct, subsample, Descriptor, SequenceSet, UnitaryKind};

/// Stage-1 objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CostVariant {
    /// RMS distance of the absolute Gram matrix to the Welch-bound target.
    #[default]
    WelchAverage,
    /// Mutual coherence.
    Coherence,
}

impl CostVariant {
    pub fn name(self) -> &'static str {
        match self {
            CostVariant::WelchAverage => "avg",
            CostVariant::Coherence => "coh",
        }
    }
}

impl fmt::Display for CostVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg" | "welch" => Ok(CostVariant::WelchAverage),
            "coh" | "coherence" => Ok(CostVariant::Coherence),
            other => Err(Error::InvalidParameter(format!("unknown cost variant '{other}'"))),
        }
    }
}

/// Parameters of one GA stage.
#[derive(Clone, Debug, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_count: usize,
    pub max_iterations: usize,
    pub seed: u64,
    /// Stage 1 only.
    pub cost_variant: CostVariant,
    /// Stage 2 only: percentage of worst columns averaged by the cost.
    pub delta: f64,
}

impl GaConfig {
    pub const DEFAULT_POPULATION: usize = 20;
    pub const DEFAULT_CROSSOVER_RATE: f64 = 0.7;
    pub const DEFAULT_MUTATION_COUNT: usize = 1;
    pub const DEFAULT_STAGE1_ITERATIONS: usize = 500;
    pub const DEFAULT_STAGE2_ITERATIONS: usize = 2000;
    pub const DEFAULT_DELTA: f64 = 30.0;

    pub fn stage1_default() -> Self {
        Self {
            population_size: Self::DEFAULT_POPULATION,
            crossover_rate: Self::DEFAULT_CROSSOVER_RATE,
            mutation_count: Self::DEFAULT_MUTATION_COUNT,
            max_iterations: Self::DEFAULT_STAGE1_ITERATIONS,
            seed: 0,
            cost_variant: CostVariant::WelchAverage,
            delta: Self::DEFAULT_DELTA,
        }
    }

    pub fn stage2_default() -> Self {
        Self {
            max_iterations: Self::DEFAULT_STAGE2_ITERATIONS,
            ..Self::stage1_default()
        }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.max_iterations = iterations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cost_variant(mut self, variant: CostVariant) -> Self {
        self.cost_variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "population size must be at least 2, got {}",
                self.population_size
            )));
        }
        if !(self.crossover_rate > 0.5 && self.crossover_rate <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "crossover rate must lie in (0.5, 1], got {}",
                self.crossover_rate
            )));
        }
        if !(self.delta > 0.0 && self.delta <= 100.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 100], got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Best cost after each generation; entry 0 is the initial population.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CostTrace(pub Vec<f64>);

impl CostTrace {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<f64> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.0.last().copied()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.0.windows(2).all(|w| w[1] <= w[0])
    }
}

/// `d1 = ceil(beta * M)` genes from the fitter parent, clamped to `M`.
pub fn crossover_split(beta: f64, m: usize) -> usize {
    // 1e-9 keeps products such as 0.7 * 80 from rounding up past an integer.
    ((beta * m as f64 - 1e-9).ceil().max(0.0) as usize).min(m)
}

/// Output of the full two-stage design.
#[derive(Clone, Debug)]
pub struct TwoStageDesign {
    /// Masked set, regenerated from its descriptor.
    pub set: SequenceSet,
    pub stage1: Stage1Outcome,
    pub stage2: Stage2Outcome,
}

impl TwoStageDesign {
    pub fn descriptor(&self) -> &Descriptor {
        self.set
            .descriptor()
            .expect("two-stage designs always carry a descriptor")
    }
}

/// Runs stage 1 on `kind`, then stage 2 on the resulting partial matrix.
pub fn run_two_stage(
    kind: UnitaryKind,
    m: usize,
    stage1: &GaConfig,
    stage2: &GaConfig,
    papr: PaprConfig,
) -> Result<TwoStageDesign> {
    let u = kind.generate();
    let s1 = run_stage1(&u, m, stage1)?;
    let partial = subsample(&u, &s1.omega)?;
    let s2 = run_stage2(&partial, stage2, papr)?;
    let descriptor = Descriptor::new(kind, s1.omega.clone(), Some(s2.mask.clone()))?;
    let set = reconstruct(&descriptor)?.with_label(format!("{}-ga", kind.family()));
    Ok(TwoStageDesign {
        set,
        stage1: s1,
        stage2: s2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{gram, welch_cost_f1};

    #[test]
    fn split_arithmetic() {
        assert_eq!(crossover_split(0.7, 80), 56);
        assert_eq!(80 - crossover_split(0.7, 80), 24);
        assert_eq!(crossover_split(0.7, 10), 7);
        assert_eq!(crossover_split(0.7, 4), 3);
        assert_eq!(crossover_split(0.7, 24), 17);
        assert_eq!(crossover_split(1.0, 5), 5);
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::stage1_default().validate().is_ok());
        let mut c = GaConfig::stage1_default();
        c.crossover_rate = 0.5;
        assert!(c.validate().is_err());
        let mut c = GaConfig::stage1_default();
        c.population_size = 1;
        assert!(c.validate().is_err());
        let mut c = GaConfig::stage2_default();
        c.delta = 0.0;
        assert!(c.validate().is_err());
        assert_eq!(GaConfig::stage2_default().max_iterations, 2000);
    }

    #[test]
    fn cost_variant_parse() {
        assert_eq!("avg".parse::<CostVariant>().unwrap(), CostVariant::WelchAverage);
        assert_eq!("coh".parse::<CostVariant>().unwrap(), CostVariant::Coherence);
        assert!("max".parse::<CostVariant>().is_err());
    }

    #[test]
    fn two_stage_small_design() {
        let kind = UnitaryKind::fourier(32).unwrap();
        let c1 = GaConfig::stage1_default().with_iterations(10).with_seed(1);
        let c2 = GaConfig::stage2_default().with_iterations(10).with_seed(2);
        let design = run_two_stage(kind, 12, &c1, &c2, PaprConfig::default()).unwrap();
        let d = design.descriptor();
        assert_eq!(d.omega.len(), 12);
        assert_eq!(d.mask.as_ref().unwrap().len(), 12);
        assert_eq!(reconstruct(d).unwrap().matrix(), design.set.matrix());

        let partial = subsample(&kind.generate(), &design.stage1.omega).unwrap();
        assert!(gram(&design.set).sub(&gram(&partial)).unwrap().frobenius_norm() < 1e-10);
        assert!((welch_cost_f1(&design.set) - design.stage1.cost).abs() < 1e-10);
        assert!(design.stage1.trace.is_non_increasing());
        assert!(design.stage2.trace.is_non_increasing());
    }
}
