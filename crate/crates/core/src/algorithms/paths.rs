//! Minimal routes between node pairs, read off the routing graph.
//!
//! Several routing-graph paths can describe the same physical route (a first
//! hop taken as a first step or as an ordinary step, for instance). Counting
//! and enumeration therefore work on link sequences: the vertex sets reached
//! by a common link sequence are merged, as in a subset construction.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::routes::{encode_rg_path, Route};
use crate::routing_graph::{RoutingGraph, VertexId};
use crate::topology::{Direction, NodeId, Topology};

/// Minimal-route facts for one ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSummary {
    /// Hop count of a shortest rule-compliant route.
    pub length: usize,
    /// Distinct physical routes of that length (saturating).
    pub count: u64,
    /// Fewest direction changes among those routes.
    pub min_turns: usize,
}

struct State {
    vertices: Vec<VertexId>,
    count: u64,
    turns: usize,
    last: Option<Direction>,
}

/// Summaries from `src` to every node slot; `None` for `src` itself and for
/// unreachable or failed nodes.
pub fn summarize_from(rg: &RoutingGraph, src: NodeId) -> Vec<Option<PairSummary>> {
    let topo = rg.topology();
    let dist = rg.hop_distances(rg.begin(src));
    let mut out: Vec<Option<PairSummary>> = vec![None; topo.node_slots()];
    let mut level = vec![State {
        vertices: vec![rg.begin(src)],
        count: 1,
        turns: 0,
        last: None,
    }];
    let mut hops = 0usize;
    while !level.is_empty() {
        let mut next: Vec<State> = Vec::new();
        let mut index: HashMap<Vec<VertexId>, usize> = HashMap::new();
        for state in &level {
            let mut by_link: Vec<(usize, VertexId)> = Vec::new();
            let mut accepts = false;
            for &v in &state.vertices {
                let dv = dist[v as usize];
                for e in rg.out_edges(v) {
                    if dist[e.to as usize] != dv + 1 {
                        continue;
                    }
                    match e.link() {
                        Some(c) => by_link.push((c, e.to)),
                        None => accepts = true,
                    }
                }
            }
            if accepts {
                let node = rg.node_of(state.vertices[0]);
                if node != src {
                    let entry = out[node.index()].get_or_insert(PairSummary {
                        length: hops,
                        count: 0,
                        min_turns: usize::MAX,
                    });
                    entry.count = entry.count.saturating_add(state.count);
                    entry.min_turns = entry.min_turns.min(state.turns);
                }
            }
            by_link.sort_unstable();
            by_link.dedup();
            for group in by_link.chunk_by(|a, b| a.0 == b.0) {
                let dir = topo.channel_at(group[0].0).dir;
                let vertices: Vec<VertexId> = group.iter().map(|&(_, v)| v).collect();
                let turns = state.turns + usize::from(state.last.is_some_and(|d| d != dir));
                match index.get(&vertices) {
                    Some(&i) => {
                        let s = &mut next[i];
                        s.count = s.count.saturating_add(state.count);
                        s.turns = s.turns.min(turns);
                    }
                    None => {
                        index.insert(vertices.clone(), next.len());
                        next.push(State {
                            vertices,
                            count: state.count,
                            turns,
                            last: Some(dir),
                        });
                    }
                }
            }
        }
        level = next;
        hops += 1;
    }
    out
}

/// The direction from `u` to its neighbor `v`.
pub fn direction_between(topo: &Topology, u: NodeId, v: NodeId) -> Option<Direction> {
    Direction::all(topo.n()).find(|&d| topo.neighbor(u, d) == Some(v))
}

/// Decompose a node sequence into a route the routing graph admits,
/// preferring a plain route, then a first step, then a last step, then both.
pub fn canonical_route(rg: &RoutingGraph, nodes: &[NodeId]) -> Result<Route> {
    let topo = rg.topology();
    let mut steps = Vec::with_capacity(nodes.len());
    for w in nodes.windows(2) {
        steps.push(direction_between(topo, w[0], w[1]).ok_or_else(|| {
            Error::MalformedPath(format!(
                "{} and {} are not linked",
                topo.format_node(w[0]),
                topo.format_node(w[1])
            ))
        })?);
    }
    let k = steps.len();
    for (use_fs, use_ls) in [(false, false), (true, false), (false, true), (true, true)] {
        if usize::from(use_fs) + usize::from(use_ls) > k {
            continue;
        }
        let fs = use_fs.then(|| steps[0]);
        let ls = use_ls.then(|| steps[k - 1]);
        let body = steps[usize::from(use_fs)..k - usize::from(use_ls)].to_vec();
        let route = Route {
            src: nodes[0],
            dst: *nodes.last().unwrap(),
            fs,
            body,
            ls,
            nodes: nodes.to_vec(),
        };
        if encode_rg_path(rg, &route).is_ok() {
            return Ok(route);
        }
    }
    Err(Error::MalformedPath(format!(
        "no routing-graph path follows {} -> {}",
        topo.format_node(nodes[0]),
        topo.format_node(*nodes.last().unwrap())
    )))
}

/// Node sequence of a routing-graph path.
pub fn path_nodes(rg: &RoutingGraph, path: &[VertexId]) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = Vec::with_capacity(path.len());
    for &v in path {
        let u = rg.node_of(v);
        if nodes.last() != Some(&u) {
            nodes.push(u);
        }
    }
    nodes
}

/// Distinct minimal routes `src -> dst` in ascending direction order of
/// their steps, at most `cap` of them. The flag reports truncation.
pub fn enumerate_minimal_routes(
    rg: &RoutingGraph,
    src: NodeId,
    dst: NodeId,
    cap: usize,
) -> Result<(Vec<Route>, bool)> {
    enumerate_with_distances(rg, &rg.hop_distances(rg.begin(src)), src, dst, cap)
}

/// As [`enumerate_minimal_routes`], reusing hop distances from `Begin(src)`.
pub fn enumerate_with_distances(
    rg: &RoutingGraph,
    dist: &[u32],
    src: NodeId,
    dst: NodeId,
    cap: usize,
) -> Result<(Vec<Route>, bool)> {
    let end = rg.end(dst);
    let total = dist[end as usize];
    if total == u32::MAX || src == dst {
        return Err(Error::Unroutable(vec![(src, dst)]));
    }

    // vertices on some shortest path to `end`
    let mut by_level: Vec<Vec<VertexId>> = vec![Vec::new(); total as usize];
    for (v, &d) in dist.iter().enumerate() {
        if d < total {
            by_level[d as usize].push(v as VertexId);
        }
    }
    let mut good = vec![false; rg.vertex_count()];
    good[end as usize] = true;
    for lvl in (0..total as usize).rev() {
        for &v in &by_level[lvl] {
            good[v as usize] = rg
                .out_edges(v)
                .iter()
                .any(|e| good[e.to as usize] && dist[e.to as usize] == lvl as u32 + 1);
        }
    }

    let mut found = Vec::new();
    let mut truncated = false;
    let mut nodes = vec![src];
    descend(
        rg,
        dist,
        &good,
        end,
        vec![rg.begin(src)],
        &mut nodes,
        cap,
        &mut found,
        &mut truncated,
    );
    let routes = found
        .iter()
        .map(|seq| canonical_route(rg, seq))
        .collect::<Result<Vec<_>>>()?;
    Ok((routes, truncated))
}

#[allow(clippy::too_many_arguments)]
fn descend(
    rg: &RoutingGraph,
    dist: &[u32],
    good: &[bool],
    end: VertexId,
    state: Vec<VertexId>,
    nodes: &mut Vec<NodeId>,
    cap: usize,
    found: &mut Vec<Vec<NodeId>>,
    truncated: &mut bool,
) {
    let mut by_link: Vec<(usize, VertexId)> = Vec::new();
    for &v in &state {
        for e in rg.out_edges(v) {
            if e.to == end && dist[end as usize] == dist[v as usize] + 1 {
                if found.len() == cap {
                    *truncated = true;
                    return;
                }
                found.push(nodes.clone());
                return;
            }
            if let Some(c) = e.link() {
                if good[e.to as usize] && dist[e.to as usize] == dist[v as usize] + 1 {
                    by_link.push((c, e.to));
                }
            }
        }
    }
    by_link.sort_unstable();
    by_link.dedup();
    for group in by_link.chunk_by(|a, b| a.0 == b.0) {
        if *truncated {
            return;
        }
        let next: Vec<VertexId> = group.iter().map(|&(_, v)| v).collect();
        nodes.push(rg.node_of(next[0]));
        descend(rg, dist, good, end, next, nodes, cap, found, truncated);
        nodes.pop();
    }
}
