//! Genetic search over per-pair route choices.
//!
//! A chromosome holds, for every ordered pair, the index of one of that
//! pair's minimal routes. Fitness is the deviation `sigma(4)` of the channel
//! loads (lower is better). Parents are drawn uniformly from the whole
//! population, recombined by two-point crossover and mutated gene by gene;
//! the best `population` of parents and children survive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::paths::enumerate_with_distances;
use super::{Generated, LinkWeights, Stats};
use crate::error::{Error, Result};
use crate::metrics::perfect_load_for;
use crate::routes::{Route, RoutingTable};
use crate::routing_graph::RoutingGraph;
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneticParams {
    pub population: usize,
    /// Per-gene mutation probability.
    pub mutation: f64,
    /// Generations without significant improvement before stopping.
    pub stagnation: usize,
    /// Relative improvement of the best fitness that counts as significant.
    pub epsilon: f64,
    pub seed: u64,
    /// Most route variants kept per pair.
    pub variant_cap: usize,
    pub max_generations: usize,
}

impl Default for GeneticParams {
    fn default() -> Self {
        GeneticParams {
            population: 100,
            mutation: 0.02,
            stagnation: 30,
            epsilon: 0.05,
            seed: 0,
            variant_cap: 64,
            max_generations: 10_000,
        }
    }
}

impl GeneticParams {
    fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Invalid("population must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation) {
            return Err(Error::Invalid(
                "mutation probability must lie in [0, 1]".into(),
            ));
        }
        if self.variant_cap == 0 {
            return Err(Error::Invalid("variant cap must be positive".into()));
        }
        Ok(())
    }
}

struct Problem {
    variants: Vec<Vec<Route>>,
    channels: Vec<Vec<Vec<u32>>>,
    live: Vec<usize>,
    slots: usize,
    perfect: f64,
}

impl Problem {
    fn fitness(&self, genes: &[u16], loads: &mut [u32]) -> f64 {
        loads.fill(0);
        for (pair, &g) in genes.iter().enumerate() {
            for &c in &self.channels[pair][g as usize] {
                loads[c as usize] += 1;
            }
        }
        let sum: f64 = self
            .live
            .iter()
            .map(|&c| (self.perfect - loads[c] as f64).powi(4))
            .sum();
        (sum / self.live.len() as f64).powf(0.25)
    }
}

#[derive(Clone)]
struct Individual {
    genes: Vec<u16>,
    fitness: f64,
}

pub fn build_rt_genetic(
    rg: &RoutingGraph,
    nodes: &[NodeId],
    params: &GeneticParams,
) -> Result<Generated> {
    params.validate()?;
    let topo = rg.topology();
    let mut variants = Vec::new();
    let mut pairs = Vec::new();
    let mut missing = Vec::new();
    for &src in nodes {
        let dist = rg.hop_distances(rg.begin(src));
        for &dst in nodes {
            if dst == src {
                continue;
            }
            match enumerate_with_distances(rg, &dist, src, dst, params.variant_cap) {
                Ok((routes, _)) => {
                    pairs.push((src, dst));
                    variants.push(routes);
                }
                Err(Error::Unroutable(p)) => missing.extend(p),
                Err(e) => return Err(e),
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Unroutable(missing));
    }
    let channels = variants
        .iter()
        .map(|vs| {
            vs.iter()
                .map(|r| r.channels(topo).map(|c| c as u32).collect())
                .collect()
        })
        .collect();
    let problem = Problem {
        channels,
        live: topo.live_channels().collect(),
        slots: topo.channel_slots(),
        perfect: perfect_load_for(topo, &pairs)?,
        variants,
    };

    let (best, stats) = evolve(&problem, params);
    let mut table = RoutingTable::new(topo);
    let mut weights = LinkWeights::new(topo);
    for (pair, &g) in best.genes.iter().enumerate() {
        let route = problem.variants[pair][g as usize].clone();
        weights.add_route(topo, &route);
        table.insert(route);
    }
    Ok(Generated {
        table,
        weights,
        stats,
    })
}

fn evolve(problem: &Problem, params: &GeneticParams) -> (Individual, Stats) {
    let sizes: Vec<usize> = problem.variants.iter().map(Vec::len).collect();
    let len = sizes.len();
    let mut loads = vec![0u32; problem.slots];
    let mut stats = Stats {
        total_pairs: len,
        ..Stats::default()
    };
    stats.unique_pairs = sizes.iter().filter(|&&s| s == 1).count();

    if sizes.iter().all(|&s| s == 1) {
        let genes = vec![0u16; len];
        let fitness = problem.fitness(&genes, &mut loads);
        stats.best_fitness.push(fitness);
        return (Individual { genes, fitness }, stats);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut population: Vec<Individual> = (0..params.population)
        .map(|_| {
            let genes: Vec<u16> = sizes
                .iter()
                .map(|&s| if s > 1 { rng.gen_range(0..s) as u16 } else { 0 })
                .collect();
            let fitness = problem.fitness(&genes, &mut loads);
            Individual { genes, fitness }
        })
        .collect();
    rank(&mut population);
    stats.best_fitness.push(population[0].fitness);

    let mut reference = population[0].fitness;
    let mut stale = 0;
    while stale < params.stagnation && stats.generations < params.max_generations {
        let mut children = Vec::with_capacity(params.population + 1);
        while children.len() < params.population {
            let a = &population[rng.gen_range(0..population.len())].genes;
            let b = &population[rng.gen_range(0..population.len())].genes;
            let mut lo = rng.gen_range(0..=len);
            let mut hi = rng.gen_range(0..=len);
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            for (x, y) in [(a, b), (b, a)] {
                let mut genes = Vec::with_capacity(len);
                genes.extend_from_slice(&x[..lo]);
                genes.extend_from_slice(&y[lo..hi]);
                genes.extend_from_slice(&x[hi..]);
                for (g, &s) in genes.iter_mut().zip(&sizes) {
                    if s > 1 && rng.gen_bool(params.mutation) {
                        *g = rng.gen_range(0..s) as u16;
                    }
                }
                let fitness = problem.fitness(&genes, &mut loads);
                children.push(Individual { genes, fitness });
            }
        }
        population.extend(children);
        rank(&mut population);
        population.truncate(params.population);
        stats.generations += 1;

        let best = population[0].fitness;
        stats.best_fitness.push(best);
        if best < reference * (1.0 - params.epsilon) {
            reference = best;
            stale = 0;
        } else {
            stale += 1;
        }
    }
    (population.swap_remove(0), stats)
}

/// Stable sort by fitness, so earlier individuals win ties.
fn rank(population: &mut [Individual]) {
    population.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::Prepared;
    use crate::metrics::{channel_loads, LoadReport};
    use crate::routes::check_table;
    use crate::topology::Topology;
    use std::sync::Arc;

    fn prepared(dims: &[usize]) -> Prepared {
        Prepared::new(&Arc::new(Topology::torus(dims).unwrap())).unwrap()
    }

    fn small() -> GeneticParams {
        GeneticParams {
            population: 20,
            stagnation: 10,
            ..GeneticParams::default()
        }
    }

    #[test]
    fn single_variant_space_stops_at_once() {
        let p = prepared(&[3, 3]);
        let g = build_rt_genetic(&p.rg, p.rg.topology().nodes(), &small()).unwrap();
        assert_eq!(g.stats.generations, 0);
        assert_eq!(g.stats.unique_pairs, 72);
        assert_eq!(g.table.len(), 72);
    }

    #[test]
    fn best_fitness_never_worsens() {
        let p = prepared(&[4, 4]);
        let g = build_rt_genetic(&p.rg, p.rg.topology().nodes(), &small()).unwrap();
        assert!(g.stats.generations >= small().stagnation);
        for w in g.stats.best_fitness.windows(2) {
            assert!(w[1] <= w[0]);
        }
        let report = LoadReport::for_table(&g.table).unwrap();
        assert!((report.sigma(4).unwrap() - g.stats.best_fitness.last().unwrap()).abs() < 1e-9);
        assert_eq!(channel_loads(&g.table).unwrap(), g.weights.as_slice());
        assert!(check_table(&g.table, &p.rg).passed());
    }

    #[test]
    fn seeded_runs_repeat() {
        let p = prepared(&[3, 4]);
        let a = build_rt_genetic(&p.rg, p.rg.topology().nodes(), &small()).unwrap();
        let b = build_rt_genetic(&p.rg, p.rg.topology().nodes(), &small()).unwrap();
        assert_eq!(a.table.to_text(), b.table.to_text());
    }

    #[test]
    fn bad_params_rejected() {
        let p = prepared(&[3]);
        let bad = GeneticParams {
            population: 1,
            ..GeneticParams::default()
        };
        assert!(build_rt_genetic(&p.rg, p.rg.topology().nodes(), &bad).is_err());
        let bad = GeneticParams {
            mutation: 1.5,
            ..GeneticParams::default()
        };
        assert!(build_rt_genetic(&p.rg, p.rg.topology().nodes(), &bad).is_err());
    }
}
