//! Brute-force route enumeration straight on the topology.
//!
//! Candidates are built in rule shape: an optional positive first step, a body
//! that walks the directions in global order (each one repeated any number of
//! times, never both signs of a dimension), and an optional negative last
//! step. Each candidate is walked over live links. Nothing here consults the
//! routing graph, so the two can be checked against each other.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;

use crate::algorithms::summarize_from;
use crate::cdg::CdgEdge;
use crate::error::{Error, Result};
use crate::routes::Route;
use crate::routing_graph::{RoutingGraph, VertexKind};
use crate::topology::{Direction, NodeId, Topology};

/// Candidate steps explored by one call before giving up.
pub const SEARCH_BUDGET: usize = 20_000_000;

/// Largest topology `oracle_equivalence` accepts.
pub const EQUIVALENCE_MAX_NODES: usize = 64;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleConfig {
    pub allow_fs: bool,
    pub allow_ls: bool,
    /// Order-violating turns permitted between a first step and the body, or
    /// between the body and a last step.
    pub relaxed_turns: BTreeSet<CdgEdge>,
}

impl RuleConfig {
    /// Direction order and direction bits only.
    pub fn dor_only() -> Self {
        RuleConfig::default()
    }

    /// First and last steps that keep the direction order.
    pub fn plain() -> Self {
        RuleConfig {
            allow_fs: true,
            allow_ls: true,
            relaxed_turns: BTreeSet::new(),
        }
    }

    pub fn augmented(turns: &[CdgEdge]) -> Self {
        RuleConfig {
            relaxed_turns: turns.iter().copied().collect(),
            ..RuleConfig::plain()
        }
    }

    /// Every relaxed turn must join consecutive live channels, go against the
    /// direction order and keep its sign.
    pub fn validate(&self, topo: &Topology) -> Result<()> {
        for e in &self.relaxed_turns {
            let (a, b) = (topo.channel_at(e.from), topo.channel_at(e.to));
            let ok = topo.channel_head(e.from) == Some(b.tail)
                && topo.channel_live(e.to)
                && a.dir > b.dir
                && a.dir.is_positive() == b.dir.is_positive();
            if !ok {
                return Err(Error::Invalid(format!(
                    "relaxed turn [{}, {}] is not a first-step or last-step turn",
                    topo.format_channel(a),
                    topo.format_channel(b)
                )));
            }
        }
        Ok(())
    }

    /// Turns happen at `at`, entered from `prev`.
    fn fs_turn(
        &self,
        topo: &Topology,
        prev: NodeId,
        at: NodeId,
        fs: Direction,
        first: Direction,
    ) -> bool {
        (first > fs && first != fs.opposite()) || self.relaxed(topo, prev, at, fs, first)
    }

    fn ls_turn(
        &self,
        topo: &Topology,
        prev: NodeId,
        at: NodeId,
        last: Direction,
        ls: Direction,
    ) -> bool {
        (ls > last && ls != last.opposite()) || self.relaxed(topo, prev, at, last, ls)
    }

    fn relaxed(
        &self,
        topo: &Topology,
        prev: NodeId,
        at: NodeId,
        into: Direction,
        out: Direction,
    ) -> bool {
        self.relaxed_turns.contains(&CdgEdge {
            from: topo.channel_index(prev, into),
            to: topo.channel_index(at, out),
        })
    }
}

/// Every rule-compliant route from `src` to `dst` of at most `max_len` hops,
/// one per distinct node sequence, sorted by node sequence.
pub fn brute_force_routes(
    topo: &Topology,
    src: NodeId,
    dst: NodeId,
    rules: &RuleConfig,
    max_len: usize,
) -> Result<Vec<Route>> {
    let mut found: BTreeMap<Vec<NodeId>, Route> = BTreeMap::new();
    enumerate(topo, src, rules, max_len, SEARCH_BUDGET, |c| {
        if c.nodes.last() == Some(&dst) {
            found
                .entry(c.nodes.to_vec())
                .or_insert_with(|| c.to_route(dst));
        }
    })?;
    Ok(found.into_values().collect())
}

/// Hop bound that covers every route needed for reachability: a body never
/// needs more than `d` steps in one dimension, plus the two special steps.
pub fn existence_bound(topo: &Topology) -> usize {
    topo.dims().iter().sum::<usize>() + 2
}

struct Candidate<'a> {
    src: NodeId,
    fs: Option<Direction>,
    body: &'a [Direction],
    ls: Option<Direction>,
    nodes: &'a [NodeId],
}

impl Candidate<'_> {
    fn to_route(&self, dst: NodeId) -> Route {
        Route {
            src: self.src,
            dst,
            fs: self.fs,
            body: self.body.to_vec(),
            ls: self.ls,
            nodes: self.nodes.to_vec(),
        }
    }
}

struct Search<'a, F> {
    topo: &'a Topology,
    rules: &'a RuleConfig,
    order: Vec<Direction>,
    max_len: usize,
    budget: usize,
    spent: usize,
    src: NodeId,
    fs: Option<Direction>,
    body: Vec<Direction>,
    nodes: Vec<NodeId>,
    visit: F,
}

fn enumerate<F: FnMut(&Candidate<'_>)>(
    topo: &Topology,
    src: NodeId,
    rules: &RuleConfig,
    max_len: usize,
    budget: usize,
    visit: F,
) -> Result<()> {
    let mut s = Search {
        topo,
        rules,
        order: Direction::all(topo.n()).collect(),
        max_len,
        budget,
        spent: 0,
        src,
        fs: None,
        body: Vec::new(),
        nodes: vec![src],
        visit,
    };
    s.body_from(0)?;
    if rules.allow_fs && max_len > 0 {
        for fs in Direction::all(topo.n()).filter(|d| d.is_positive()) {
            if let Some(v) = s.step(src, fs)? {
                s.fs = Some(fs);
                s.nodes.push(v);
                s.body_from(0)?;
                s.nodes.pop();
            }
        }
    }
    Ok(())
}

impl<F: FnMut(&Candidate<'_>)> Search<'_, F> {
    fn step(&mut self, u: NodeId, d: Direction) -> Result<Option<NodeId>> {
        self.spent += 1;
        if self.spent > self.budget {
            return Err(Error::SearchBudget(self.budget));
        }
        Ok(self.topo.neighbor(u, d))
    }

    fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Extend the body with directions from `order[i..]`.
    fn body_from(&mut self, i: usize) -> Result<()> {
        if i == self.order.len() {
            return self.finish();
        }
        self.body_from(i + 1)?;
        let d = self.order[i];
        if self.body.iter().any(|&b| b == d.opposite()) {
            return Ok(());
        }
        let mut pushed = 0;
        while self.len() < self.max_len {
            let u = *self.nodes.last().unwrap();
            if self.body.is_empty() {
                if let Some(fs) = self.fs {
                    if !self.rules.fs_turn(self.topo, self.src, u, fs, d) {
                        break;
                    }
                }
            }
            let Some(v) = self.step(u, d)? else { break };
            self.body.push(d);
            self.nodes.push(v);
            pushed += 1;
            self.body_from(i + 1)?;
        }
        for _ in 0..pushed {
            self.body.pop();
            self.nodes.pop();
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        if self.len() == 0 {
            return Ok(());
        }
        self.emit(None);
        let Some(&last) = self.body.last() else {
            return Ok(());
        };
        if !self.rules.allow_ls || self.len() >= self.max_len {
            return Ok(());
        }
        let u = *self.nodes.last().unwrap();
        let prev = self.nodes[self.nodes.len() - 2];
        for ls in Direction::all(self.topo.n()).filter(|d| !d.is_positive()) {
            if !self.rules.ls_turn(self.topo, prev, u, last, ls) {
                continue;
            }
            if let Some(v) = self.step(u, ls)? {
                self.nodes.push(v);
                self.emit(Some(ls));
                self.nodes.pop();
            }
        }
        Ok(())
    }

    fn emit(&mut self, ls: Option<Direction>) {
        if *self.nodes.last().unwrap() == self.src {
            return;
        }
        let c = Candidate {
            src: self.src,
            fs: self.fs,
            body: &self.body,
            ls,
            nodes: &self.nodes,
        };
        (self.visit)(&c);
    }
}

/// Shortest route length and number of distinct shortest routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairFacts {
    pub length: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub src: NodeId,
    pub dst: NodeId,
    pub oracle: Option<PairFacts>,
    pub graph: Option<PairFacts>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub pairs: usize,
    pub mismatches: Vec<Mismatch>,
    /// Routable pairs whose shortest route is longer than the torus distance:
    /// `(src, dst, route length, distance)`.
    pub detours: Vec<(NodeId, NodeId, usize, usize)>,
}

impl EquivalenceReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// The routing graph matching `rules`: relaxed turns added, and first or last
/// step vertices cut off when disabled.
pub fn graph_for(topo: &Arc<Topology>, rules: &RuleConfig) -> Result<RoutingGraph> {
    rules.validate(topo)?;
    let mut rg = RoutingGraph::build(topo);
    let turns: Vec<CdgEdge> = rules.relaxed_turns.iter().copied().collect();
    rg.apply_augmentation(&turns)?;
    if !rules.allow_fs || !rules.allow_ls {
        rg.retain_edges(|_, to, _| match to.kind {
            VertexKind::Fs(_) => rules.allow_fs,
            VertexKind::Ls(_) => rules.allow_ls,
            _ => true,
        });
    }
    Ok(rg)
}

/// Compare the oracle against the routing graph built for `rules`.
pub fn oracle_equivalence(topo: &Arc<Topology>, rules: &RuleConfig) -> Result<EquivalenceReport> {
    let rg = graph_for(topo, rules)?;
    compare_with_graph(&rg, rules)
}

/// Compare existence, shortest length and shortest-route count for every
/// ordered pair between the oracle and an arbitrary routing graph.
pub fn compare_with_graph(rg: &RoutingGraph, rules: &RuleConfig) -> Result<EquivalenceReport> {
    let topo = rg.topology();
    if topo.node_count() > EQUIVALENCE_MAX_NODES {
        return Err(Error::Invalid(format!(
            "{} nodes exceed the oracle limit of {EQUIVALENCE_MAX_NODES}",
            topo.node_count()
        )));
    }
    let bound = existence_bound(topo);
    let per_source: Vec<Result<EquivalenceReport>> = topo
        .nodes()
        .par_iter()
        .map(|&src| {
            let oracle = shortest_from(topo, src, rules, bound)?;
            let graph = summarize_from(rg, src);
            let mut report = EquivalenceReport::default();
            for &dst in topo.nodes() {
                if dst == src {
                    continue;
                }
                report.pairs += 1;
                let o = oracle.get(&dst).copied();
                let g = graph[dst.index()].map(|s| PairFacts {
                    length: s.length,
                    count: s.count,
                });
                if o != g {
                    report.mismatches.push(Mismatch {
                        src,
                        dst,
                        oracle: o,
                        graph: g,
                    });
                }
                if let (Some(o), Some(dist)) = (o, topo.torus_distance(src, dst)) {
                    if o.length > dist {
                        report.detours.push((src, dst, o.length, dist));
                    }
                }
            }
            Ok(report)
        })
        .collect();
    let mut total = EquivalenceReport::default();
    for r in per_source {
        let r = r?;
        total.pairs += r.pairs;
        total.mismatches.extend(r.mismatches);
        total.detours.extend(r.detours);
    }
    Ok(total)
}

fn shortest_from(
    topo: &Topology,
    src: NodeId,
    rules: &RuleConfig,
    max_len: usize,
) -> Result<BTreeMap<NodeId, PairFacts>> {
    let mut best: BTreeMap<NodeId, (usize, BTreeSet<Vec<NodeId>>)> = BTreeMap::new();
    enumerate(topo, src, rules, max_len, SEARCH_BUDGET, |c| {
        let dst = *c.nodes.last().unwrap();
        let len = c.nodes.len() - 1;
        let entry = best.entry(dst).or_insert_with(|| (len, BTreeSet::new()));
        if len < entry.0 {
            *entry = (len, BTreeSet::new());
        }
        if len == entry.0 {
            entry.1.insert(c.nodes.to_vec());
        }
    })?;
    Ok(best
        .into_iter()
        .map(|(dst, (length, seqs))| {
            (
                dst,
                PairFacts {
                    length,
                    count: seqs.len() as u64,
                },
            )
        })
        .collect())
}
