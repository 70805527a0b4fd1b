//! Routing-table generators over the (augmented) routing graph.
//!
//! All generators produce shortest rule-compliant routes. They differ in how
//! they spread load: [`bfs`] orders each search frontier by accumulated link
//! weight, [`sssp`] fixes forced routes first and then routes groups of
//! similar pairs with weighted shortest paths, and [`genetic`] searches over
//! per-pair route choices.

pub mod bfs;
pub mod genetic;
pub mod paths;
pub mod sssp;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::cdg::{Cdg, CdgEdge};
use crate::error::{Error, Result};
use crate::routes::{Route, RoutingTable};
use crate::routing_graph::RoutingGraph;
use crate::topology::Topology;

pub use genetic::GeneticParams;
pub use paths::{enumerate_minimal_routes, summarize_from, PairSummary};

/// Routing graph with every admissible order-violating turn realized.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub rg: RoutingGraph,
    pub cdg: Cdg,
}

impl Prepared {
    pub fn new(topo: &Arc<Topology>) -> Result<Self> {
        let mut cdg = Cdg::build(topo);
        let added = cdg.augment();
        let mut rg = RoutingGraph::build(topo);
        rg.apply_augmentation(&added)?;
        Ok(Prepared { rg, cdg })
    }

    pub fn added(&self) -> &[CdgEdge] {
        self.cdg.added()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Bfs,
    Genetic,
    Sssp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Bfs, Algorithm::Genetic, Algorithm::Sssp];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Bfs => "bfs",
            Algorithm::Genetic => "genetic",
            Algorithm::Sssp => "sssp",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Invalid(format!("unknown algorithm '{s}'")))
    }
}

/// Per-link weight increments accumulated while routing, by channel slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkWeights(Vec<u32>);

impl LinkWeights {
    pub fn new(topo: &Topology) -> Self {
        LinkWeights(vec![0; topo.channel_slots()])
    }

    #[inline]
    pub fn get(&self, channel: usize) -> u32 {
        self.0[channel]
    }

    /// One more route over every link of `route`.
    pub fn add_route(&mut self, topo: &Topology, route: &Route) {
        for c in route.channels(topo) {
            self.0[c] += 1;
        }
    }

    pub fn add(&mut self, channel: usize, amount: u32) {
        self.0[channel] += amount;
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

/// Counters reported by the generators.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    /// Weighted shortest-path tree builds.
    pub sssp_calls: usize,
    /// Pairs with exactly one minimal route.
    pub unique_pairs: usize,
    pub total_pairs: usize,
    pub generations: usize,
    /// Best fitness after each generation, starting with the initial population.
    pub best_fitness: Vec<f64>,
}

impl Stats {
    pub fn unique_fraction(&self) -> f64 {
        if self.total_pairs == 0 {
            0.0
        } else {
            self.unique_pairs as f64 / self.total_pairs as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub table: RoutingTable,
    pub weights: LinkWeights,
    pub stats: Stats,
}

/// Options shared by all generators.
#[derive(Debug, Clone)]
pub struct Options {
    pub genetic: GeneticParams,
    /// Run the forced-route stage of the SSSP generator.
    pub sssp_unique_stage: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            genetic: GeneticParams::default(),
            sssp_unique_stage: true,
        }
    }
}

pub fn generate(algo: Algorithm, rg: &RoutingGraph, opts: &Options) -> Result<Generated> {
    let nodes = rg.topology().nodes().to_vec();
    match algo {
        Algorithm::Bfs => bfs::build_rt_bfs(rg, &nodes),
        Algorithm::Genetic => genetic::build_rt_genetic(rg, &nodes, &opts.genetic),
        Algorithm::Sssp => sssp::build_rt_sssp(rg, &nodes, opts.sssp_unique_stage),
    }
}

/// Share of routable ordered pairs with exactly one shortest route.
pub fn unique_route_fraction(rg: &RoutingGraph) -> f64 {
    use rayon::prelude::*;
    let nodes = rg.topology().nodes();
    let (unique, total) = nodes
        .par_iter()
        .map(|&src| {
            let s = summarize_from(rg, src);
            nodes
                .iter()
                .filter(|&&d| d != src)
                .fold((0, 0), |(u, t), &d| match s[d.index()] {
                    Some(p) => (u + usize::from(p.count == 1), t + 1),
                    None => (u, t),
                })
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if total == 0 {
        0.0
    } else {
        unique as f64 / total as f64
    }
}
