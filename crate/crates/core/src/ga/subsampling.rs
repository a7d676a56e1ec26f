//! Stage 1: row index sets of a unitary matrix.

use rand::seq::index::sample;
use rand::Rng;

use super::engine::{evolve, Genome};
use super::{crossover_split, CostTrace, CostVariant, GaConfig};
use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::seqcore::{coherence_of, subsample_matrix, welch_cost_of, ComplexMatrix, IndexSet, UnitaryMatrix};

/// `t` index sets of `m` distinct indices drawn uniformly from `0..n`.
pub fn stage1_init<R: Rng>(n: usize, m: usize, t: usize, rng: &mut R) -> Result<Vec<IndexSet>> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {m} distinct indices out of {n}"
        )));
    }
    (0..t)
        .map(|_| IndexSet::new(n, sample(rng, n, m).into_vec()))
        .collect()
}

/// Child with `ceil(beta M)` indices drawn from `fitter` and the rest from
/// `other`, skipping indices already taken. If `other` cannot supply enough
/// new indices the shortfall is drawn uniformly from the indices not yet in
/// the child.
///
/// Both parents must share `N` and `M`.
pub fn stage1_crossover<R: Rng>(fitter: &IndexSet, other: &IndexSet, beta: f64, rng: &mut R) -> IndexSet {
    debug_assert_eq!(fitter.n(), other.n());
    debug_assert_eq!(fitter.len(), other.len());
    let n = fitter.n();
    let m = fitter.len();
    let d1 = crossover_split(beta, m);

    let mut taken = vec![false; n];
    let mut child = Vec::with_capacity(m);
    for i in sample(rng, m, d1) {
        let idx = fitter.indices()[i];
        taken[idx] = true;
        child.push(idx);
    }

    let candidates: Vec<usize> = other.indices().iter().copied().filter(|&i| !taken[i]).collect();
    let want = (m - d1).min(candidates.len());
    for i in sample(rng, candidates.len(), want) {
        let idx = candidates[i];
        taken[idx] = true;
        child.push(idx);
    }

    if child.len() < m {
        let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
        for i in sample(rng, free.len(), m - child.len()) {
            child.push(free[i]);
        }
    }
    IndexSet::new(n, child).expect("crossover keeps indices distinct and in range")
}

/// Replaces `mu` randomly chosen members with indices drawn from the
/// complement of the current set.
pub fn stage1_mutate<R: Rng>(omega: &IndexSet, mu: usize, rng: &mut R) -> Result<IndexSet> {
    let m = omega.len();
    let free = omega.complement();
    if mu > m || mu > free.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot replace {mu} of {m} indices with only {} unused indices",
            free.len()
        )));
    }
    let mut dropped = vec![false; m];
    for i in sample(rng, m, mu) {
        dropped[i] = true;
    }
    let mut out: Vec<usize> = omega
        .indices()
        .iter()
        .zip(&dropped)
        .filter(|(_, &d)| !d)
        .map(|(&i, _)| i)
        .collect();
    out.extend(sample(rng, free.len(), mu).into_iter().map(|i| free[i]));
    IndexSet::new(omega.n(), out)
}

/// Stage-1 operators over a fixed unitary matrix.
#[derive(Debug)]
pub struct SubsamplingGenome<'a> {
    unitary: &'a ComplexMatrix,
    crossover_rate: f64,
    mutation_count: usize,
    variant: CostVariant,
}

impl<'a> SubsamplingGenome<'a> {
    /// The mutation count is capped at `N - M`, so `M = N` runs with no
    /// mutation instead of failing.
    pub fn new(unitary: &'a ComplexMatrix, m: usize, cfg: &GaConfig) -> Self {
        Self {
            unitary,
            crossover_rate: cfg.crossover_rate,
            mutation_count: cfg.mutation_count.min(unitary.rows().saturating_sub(m)),
            variant: cfg.cost_variant,
        }
    }
}

impl Genome for SubsamplingGenome<'_> {
    type Chromosome = IndexSet;

    fn cost(&self, omega: &IndexSet) -> f64 {
        let a = match subsample_matrix(self.unitary, omega) {
            Ok(a) => a,
            Err(_) => return f64::INFINITY,
        };
        match self.variant {
            CostVariant::WelchAverage => welch_cost_of(&a),
            CostVariant::Coherence => coherence_of(&a).unwrap_or(f64::INFINITY),
        }
    }

    fn crossover<R: Rng>(&self, fitter: &IndexSet, other: &IndexSet, rng: &mut R) -> IndexSet {
        stage1_crossover(fitter, other, self.crossover_rate, rng)
    }

    fn mutate<R: Rng>(&self, omega: &IndexSet, rng: &mut R) -> Result<IndexSet> {
        stage1_mutate(omega, self.mutation_count, rng)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stage1Outcome {
    pub omega: IndexSet,
    pub cost: f64,
    pub trace: CostTrace,
}

/// Evolves an `m`-row index set of `u` for `cfg.max_iterations` generations.
pub fn run_stage1(u: &UnitaryMatrix, m: usize, cfg: &GaConfig) -> Result<Stage1Outcome> {
    cfg.validate()?;
    let mut rng = seeded(cfg.seed);
    let initial = stage1_init(u.n(), m, cfg.population_size, &mut rng)?;
    let genome = SubsamplingGenome::new(u.matrix(), m, cfg);
    let evo = evolve(&genome, initial, cfg.max_iterations, &mut rng)?;
    Ok(Stage1Outcome {
        omega: evo.best.chromosome,
        cost: evo.best.cost,
        trace: evo.trace,
    })
}
