//! Stage 2: common phase masks over `Z_q`, with `q = N`.

use rand::seq::index::sample;
use rand::Rng;

use super::engine::{evolve, Genome};
use super::{crossover_split, CostTrace, GaConfig};
use crate::error::{Error, Result};
use crate::papr::{top_average, top_count, PaprConfig, PaprEngine};
use crate::rng::seeded;
use crate::seqcore::{ComplexMatrix, MaskSequence, SequenceSet};

/// `t` masks of length `m` with phases uniform over `Z_q`.
pub fn stage2_init<R: Rng>(m: usize, q: usize, t: usize, rng: &mut R) -> Result<Vec<MaskSequence>> {
    (0..t)
        .map(|_| MaskSequence::new(q, (0..m).map(|_| rng.random_range(0..q.max(1))).collect()))
        .collect()
}

/// First `ceil(beta M)` phases of `fitter`, remaining phases of `other`.
pub fn stage2_crossover(fitter: &MaskSequence, other: &MaskSequence, beta: f64) -> MaskSequence {
    debug_assert_eq!(fitter.len(), other.len());
    debug_assert_eq!(fitter.q(), other.q());
    let d1 = crossover_split(beta, fitter.len());
    let phases = fitter.phases()[..d1]
        .iter()
        .chain(&other.phases()[d1..])
        .copied()
        .collect();
    MaskSequence::new(fitter.q(), phases).expect("spliced phases stay in Z_q")
}

/// Redraws `mu` distinct positions uniformly over `Z_q`. A redraw may land
/// on the old value.
pub fn stage2_mutate<R: Rng>(v: &MaskSequence, mu: usize, rng: &mut R) -> Result<MaskSequence> {
    if mu > v.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot mutate {mu} of {} phases",
            v.len()
        )));
    }
    let mut phases = v.phases().to_vec();
    for pos in sample(rng, phases.len(), mu) {
        phases[pos] = rng.random_range(0..v.q());
    }
    MaskSequence::new(v.q(), phases)
}

/// Stage-2 operators over a fixed partial matrix.
#[derive(Debug)]
pub struct MaskingGenome<'a> {
    base: &'a ComplexMatrix,
    crossover_rate: f64,
    mutation_count: usize,
    top: usize,
    engine: PaprEngine,
}

impl<'a> MaskingGenome<'a> {
    pub fn new(base: &'a ComplexMatrix, cfg: &GaConfig, papr: PaprConfig) -> Result<Self> {
        Ok(Self {
            base,
            crossover_rate: cfg.crossover_rate,
            mutation_count: cfg.mutation_count.min(base.rows()),
            top: top_count(base.cols(), cfg.delta)?,
            engine: PaprEngine::new(base.rows(), papr)?,
        })
    }
}

impl Genome for MaskingGenome<'_> {
    type Chromosome = MaskSequence;

    /// Mean linear PAPR over the top-delta% columns of `diag(v) A`.
    fn cost(&self, v: &MaskSequence) -> f64 {
        match self.engine.masked_column_paprs(self.base, &v.phasors()) {
            Ok(values) => top_average(&values, self.top),
            Err(_) => f64::INFINITY,
        }
    }

    fn crossover<R: Rng>(&self, fitter: &MaskSequence, other: &MaskSequence, _: &mut R) -> MaskSequence {
        stage2_crossover(fitter, other, self.crossover_rate)
    }

    fn mutate<R: Rng>(&self, v: &MaskSequence, rng: &mut R) -> Result<MaskSequence> {
        stage2_mutate(v, self.mutation_count, rng)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stage2Outcome {
    pub mask: MaskSequence,
    /// Mean linear PAPR of the top-delta% columns.
    pub cost: f64,
    pub trace: CostTrace,
}

/// Evolves a mask over `Z_N` for the columns of `a`.
pub fn run_stage2(a: &SequenceSet, cfg: &GaConfig, papr: PaprConfig) -> Result<Stage2Outcome> {
    cfg.validate()?;
    let mut rng = seeded(cfg.seed);
    let initial = stage2_init(a.m(), a.n(), cfg.population_size, &mut rng)?;
    let genome = MaskingGenome::new(a.matrix(), cfg, papr)?;
    let evo = evolve(&genome, initial, cfg.max_iterations, &mut rng)?;
    Ok(Stage2Outcome {
        mask: evo.best.chromosome,
        cost: evo.best.cost,
        trace: evo.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::papr::cost_f2;
    use crate::rng::seeded;
    use crate::seqcore::{subsample, IndexSet, UnitaryKind};

    #[test]
    fn crossover_splices_positions() {
        let zeros = MaskSequence::zeros(4, 10).unwrap();
        let ones = MaskSequence::new(4, vec![1; 10]).unwrap();
        let child = stage2_crossover(&zeros, &ones, 0.7);
        assert_eq!(child.phases(), &[0, 0, 0, 0, 0, 0, 0, 1, 1, 1]);
        assert_eq!(stage2_crossover(&ones, &ones, 0.7), ones);
    }

    #[test]
    fn mutation_edge_cases() {
        let v = MaskSequence::new(16, vec![3, 1, 4, 1, 5]).unwrap();
        let mut rng = seeded(1);
        assert_eq!(stage2_mutate(&v, 0, &mut rng).unwrap(), v);
        let single = MaskSequence::zeros(1, 5).unwrap();
        assert_eq!(stage2_mutate(&single, 5, &mut rng).unwrap(), single);
        assert!(stage2_mutate(&v, 6, &mut rng).is_err());

        let a = stage2_mutate(&v, 2, &mut seeded(77)).unwrap();
        let b = stage2_mutate(&v, 2, &mut seeded(77)).unwrap();
        assert_eq!(a, b);
        let changed = a.phases().iter().zip(v.phases()).filter(|(x, y)| x != y).count();
        assert!(changed <= 2);
    }

    #[test]
    fn stage2_single_symbol_alphabet() {
        let u = UnitaryKind::fourier(1).unwrap().generate();
        let a = subsample(&u, &IndexSet::full(1).unwrap()).unwrap();
        let mut cfg = GaConfig::stage2_default().with_iterations(2);
        cfg.delta = 100.0;
        let out = run_stage2(&a, &cfg, PaprConfig::default()).unwrap();
        assert_eq!(out.mask.phases(), &[0]);
        assert_eq!(out.cost, cost_f2(&a, 100.0, PaprConfig::default()).unwrap());
    }

    #[test]
    fn stage2_zero_iterations_and_cost_agreement() {
        let u = UnitaryKind::fourier(32).unwrap().generate();
        let a = subsample(&u, &IndexSet::new(32, (0..32).step_by(3).collect()).unwrap()).unwrap();
        let cfg = GaConfig::stage2_default().with_iterations(0).with_seed(6);
        let out = run_stage2(&a, &cfg, PaprConfig::default()).unwrap();
        let masked = crate::seqcore::apply_mask(&a, &out.mask).unwrap();
        let direct = cost_f2(&masked, 30.0, PaprConfig::default()).unwrap();
        assert!((direct - out.cost).abs() < 1e-12 * direct);
    }
}
