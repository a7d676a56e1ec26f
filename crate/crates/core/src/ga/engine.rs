use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;

use super::CostTrace;
use crate::error::{Error, Result};

/// Chromosome representation and variation operators of one GA stage.
pub trait Genome: Sync {
    type Chromosome: Clone + Send + Sync;

    /// Lower is fitter.
    fn cost(&self, chromosome: &Self::Chromosome) -> f64;

    fn crossover<R: Rng>(
        &self,
        fitter: &Self::Chromosome,
        other: &Self::Chromosome,
        rng: &mut R,
    ) -> Self::Chromosome;

    fn mutate<R: Rng>(&self, chromosome: &Self::Chromosome, rng: &mut R) -> Result<Self::Chromosome>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scored<C> {
    pub chromosome: C,
    pub cost: f64,
}

/// Bookkeeping for one generation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationReport {
    pub children: usize,
    pub mutants: usize,
    pub intermediate: usize,
    pub best_cost: f64,
}

#[derive(Clone, Debug)]
pub struct Evolution<C> {
    pub best: Scored<C>,
    pub trace: CostTrace,
    /// Final population, cheapest first.
    pub population: Vec<Scored<C>>,
}

/// `T + T(T-1)/2 + T = T(T+3)/2`.
pub fn intermediate_size(t: usize) -> usize {
    t * (t + 3) / 2
}

/// Cheapest member; the earliest one wins a tie.
pub fn fittest<C>(population: &[Scored<C>]) -> Option<&Scored<C>> {
    population.iter().reduce(|best, s| if s.cost < best.cost { s } else { best })
}

/// Keeps the `t` cheapest members. The sort is stable, so equal costs stay
/// in their original order and duplicates are kept as separate members.
pub fn population_update<C>(mut intermediate: Vec<Scored<C>>, t: usize) -> Result<Vec<Scored<C>>> {
    if intermediate.len() < t {
        return Err(Error::InvalidParameter(format!(
            "cannot keep {t} members out of {}",
            intermediate.len()
        )));
    }
    intermediate.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    intermediate.truncate(t);
    Ok(intermediate)
}

fn score_all<G: Genome>(genome: &G, chromosomes: Vec<G::Chromosome>) -> Vec<Scored<G::Chromosome>> {
    chromosomes
        .into_par_iter()
        .map(|chromosome| {
            let cost = genome.cost(&chromosome);
            Scored { chromosome, cost }
        })
        .collect()
}

/// One generation: crossover over every pair, one mutant per member, then
/// population update. All random draws happen before any cost evaluation.
pub fn generation<G: Genome, R: Rng>(
    genome: &G,
    population: &[Scored<G::Chromosome>],
    rng: &mut R,
) -> Result<(Vec<Scored<G::Chromosome>>, GenerationReport)> {
    let t = population.len();
    let mut offspring = Vec::with_capacity(t * (t + 1) / 2);
    for i in 0..t {
        for j in i + 1..t {
            let (fitter, other) = match population[j].cost.total_cmp(&population[i].cost) {
                Ordering::Less => (&population[j], &population[i]),
                _ => (&population[i], &population[j]),
            };
            offspring.push(genome.crossover(&fitter.chromosome, &other.chromosome, rng));
        }
    }
    let children = offspring.len();
    for member in population {
        offspring.push(genome.mutate(&member.chromosome, rng)?);
    }
    let mutants = offspring.len() - children;

    let mut pool: Vec<Scored<G::Chromosome>> = population.to_vec();
    pool.extend(score_all(genome, offspring));
    let intermediate = pool.len();
    let next = population_update(pool, t)?;
    let report = GenerationReport {
        children,
        mutants,
        intermediate,
        best_cost: next[0].cost,
    };
    Ok((next, report))
}

/// Scores `initial` and runs `iterations` generations.
pub fn evolve<G: Genome, R: Rng>(
    genome: &G,
    initial: Vec<G::Chromosome>,
    iterations: usize,
    rng: &mut R,
) -> Result<Evolution<G::Chromosome>> {
    if initial.is_empty() {
        return Err(Error::InvalidParameter("empty initial population".into()));
    }
    let mut population = score_all(genome, initial);
    let mut trace = Vec::with_capacity(iterations + 1);
    trace.push(fittest(&population).map(|s| s.cost).unwrap_or(f64::INFINITY));
    for _ in 0..iterations {
        let (next, report) = generation(genome, &population, rng)?;
        population = next;
        trace.push(report.best_cost);
    }
    let best = fittest(&population).cloned().expect("population is non-empty");
    Ok(Evolution {
        best,
        trace: CostTrace(trace),
        population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    /// Bit strings scored by popcount; enough to exercise the engine.
    struct Bits;

    impl Genome for Bits {
        type Chromosome = u32;

        fn cost(&self, c: &u32) -> f64 {
            c.count_ones() as f64
        }

        fn crossover<R: Rng>(&self, fitter: &u32, other: &u32, _: &mut R) -> u32 {
            (fitter & 0xFFFF_0000) | (other & 0x0000_FFFF)
        }

        fn mutate<R: Rng>(&self, c: &u32, rng: &mut R) -> Result<u32> {
            Ok(c ^ (1 << rng.random_range(0..32)))
        }
    }

    #[test]
    fn intermediate_population_size() {
        assert_eq!(intermediate_size(20), 230);
        let mut rng = seeded(3);
        let pop: Vec<Scored<u32>> = (0..20)
            .map(|_| {
                let c: u32 = rng.random();
                Scored { chromosome: c, cost: c.count_ones() as f64 }
            })
            .collect();
        let (next, report) = generation(&Bits, &pop, &mut rng).unwrap();
        assert_eq!(report.children, 190);
        assert_eq!(report.mutants, 20);
        assert_eq!(report.intermediate, 230);
        assert_eq!(next.len(), 20);
    }

    #[test]
    fn update_is_stable_and_keeps_duplicates() {
        let pool: Vec<Scored<char>> = "abcde"
            .chars()
            .map(|c| Scored { chromosome: c, cost: 1.0 })
            .collect();
        let kept = population_update(pool.clone(), 3).unwrap();
        assert_eq!(kept.iter().map(|s| s.chromosome).collect::<String>(), "abc");
        assert_eq!(population_update(pool.clone(), 5).unwrap(), pool);
        assert!(population_update(pool, 6).is_err());

        let dup = vec![
            Scored { chromosome: 'x', cost: 2.0 },
            Scored { chromosome: 'y', cost: 1.0 },
            Scored { chromosome: 'y', cost: 1.0 },
        ];
        let kept = population_update(dup, 2).unwrap();
        assert_eq!(kept.iter().map(|s| s.chromosome).collect::<String>(), "yy");
    }

    #[test]
    fn evolve_is_elitist_and_deterministic() {
        let init: Vec<u32> = (0..10).map(|i| 0xDEAD_BEEF ^ (i * 7919)).collect();
        let a = evolve(&Bits, init.clone(), 30, &mut seeded(11)).unwrap();
        let b = evolve(&Bits, init.clone(), 30, &mut seeded(11)).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best, b.best);
        assert_eq!(a.trace.len(), 31);
        assert!(a.trace.is_non_increasing());
        assert_eq!(a.best.cost, a.trace.last().unwrap());

        let none = evolve(&Bits, init.clone(), 0, &mut seeded(11)).unwrap();
        let min = init.iter().map(|c| c.count_ones()).min().unwrap() as f64;
        assert_eq!(none.best.cost, min);
    }

    #[test]
    fn fittest_prefers_earliest_on_tie() {
        let pop = vec![
            Scored { chromosome: 0, cost: 2.0 },
            Scored { chromosome: 1, cost: 1.0 },
            Scored { chromosome: 2, cost: 1.0 },
        ];
        assert_eq!(fittest(&pop).unwrap().chromosome, 1);
    }
}
