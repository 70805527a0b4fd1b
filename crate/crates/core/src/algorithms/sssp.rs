//! Shortest-path table generation in two stages.
//!
//! First, every pair with a single minimal route gets that route. Then the
//! remaining pairs are sorted by (fewest turns, length, source) and routed
//! group by group: a weighted shortest-path tree from the group's source is
//! built, routes sharing no link are accepted together, their links gain
//! weight, and the rest of the group goes around again.
//!
//! Each link edge weighs `|N|^2` plus the link's accumulated load, and the
//! search only relaxes edges between consecutive BFS levels, so every returned
//! path has the minimal hop count.

use rayon::prelude::*;

use super::bfs::bfs_tree;
use super::paths::{canonical_route, path_nodes, summarize_from, PairSummary};
use super::{Generated, LinkWeights, Stats};
use crate::error::{Error, Result};
use crate::routes::RoutingTable;
use crate::routing_graph::{RoutingGraph, VertexId};
use crate::topology::NodeId;

const UNSEEN: u32 = u32::MAX;

/// `unique_stage = false` skips the first stage and routes every pair in groups.
pub fn build_rt_sssp(rg: &RoutingGraph, nodes: &[NodeId], unique_stage: bool) -> Result<Generated> {
    let topo = rg.topology();
    let base = (nodes.len() as u64).pow(2);
    let mut weights = LinkWeights::new(topo);
    let mut table = RoutingTable::new(topo);
    let mut stats = Stats::default();

    let summaries: Vec<Vec<Option<PairSummary>>> =
        nodes.par_iter().map(|&s| summarize_from(rg, s)).collect();
    let mut missing = Vec::new();
    let mut pending: Vec<(usize, usize, NodeId, NodeId)> = Vec::new();
    let mut unique: Vec<Vec<NodeId>> = vec![Vec::new(); nodes.len()];
    for (si, &src) in nodes.iter().enumerate() {
        for &dst in nodes {
            if dst == src {
                continue;
            }
            stats.total_pairs += 1;
            match summaries[si][dst.index()] {
                None => missing.push((src, dst)),
                Some(s) => {
                    if s.count == 1 {
                        stats.unique_pairs += 1;
                    }
                    if s.count == 1 && unique_stage {
                        unique[si].push(dst);
                    } else {
                        pending.push((s.min_turns, s.length, src, dst));
                    }
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Unroutable(missing));
    }

    // any shortest routing-graph path of a unique pair is its route
    for (si, &src) in nodes.iter().enumerate() {
        if unique[si].is_empty() {
            continue;
        }
        let parent = bfs_tree(rg, &LinkWeights::new(topo), src);
        for &dst in &unique[si] {
            let path = trace(&parent, rg.begin(src), rg.end(dst));
            let route = canonical_route(rg, &path_nodes(rg, &path))?;
            weights.add_route(topo, &route);
            table.insert(route);
        }
    }

    pending.sort_unstable();
    for group in pending.chunk_by(|a, b| (a.0, a.1, a.2) == (b.0, b.1, b.2)) {
        let src = group[0].2;
        let mut dsts: Vec<NodeId> = group.iter().map(|p| p.3).collect();
        while !dsts.is_empty() {
            stats.sssp_calls += 1;
            let paths = build_sssp(rg, &weights, base, src, &dsts)?;
            let mut taken = vec![false; topo.channel_slots()];
            let mut accepted = Vec::new();
            for (i, path) in paths.iter().enumerate() {
                let route = canonical_route(rg, &path_nodes(rg, path))?;
                let links: Vec<usize> = route.channels(topo).collect();
                if links.iter().any(|&c| taken[c]) {
                    continue;
                }
                for &c in &links {
                    taken[c] = true;
                }
                accepted.push(i);
                weights.add_route(topo, &route);
                table.insert(route);
            }
            let mut k = 0;
            dsts.retain(|_| {
                let keep = !accepted.contains(&k);
                k += 1;
                keep
            });
        }
    }
    Ok(Generated {
        table,
        weights,
        stats,
    })
}

fn trace(parent: &[VertexId], root: VertexId, target: VertexId) -> Vec<VertexId> {
    let mut path = vec![target];
    let mut v = target;
    while v != root {
        v = parent[v as usize];
        path.push(v);
    }
    path.reverse();
    path
}

/// Minimal-hop, least-weight routing-graph paths from `Begin(src)` to the
/// `End` vertex of each node in `dsts`, in the order given.
///
/// Distances settle level by level; the search stops after the level in which
/// the last requested `End` vertex is reached.
pub fn build_sssp(
    rg: &RoutingGraph,
    weights: &LinkWeights,
    base: u64,
    src: NodeId,
    dsts: &[NodeId],
) -> Result<Vec<Vec<VertexId>>> {
    let n = rg.vertex_count();
    let mut level = vec![UNSEEN; n];
    let mut cost = vec![u64::MAX; n];
    let mut parent = vec![VertexId::MAX; n];
    let root = rg.begin(src);
    level[root as usize] = 0;
    cost[root as usize] = 0;
    parent[root as usize] = root;

    let targets: Vec<VertexId> = dsts.iter().map(|&d| rg.end(d)).collect();
    let mut frontier = vec![root];
    let mut depth = 0u32;
    let mut settled = 0;
    while !frontier.is_empty() && settled < targets.len() {
        let mut next = Vec::new();
        for &v in &frontier {
            let cv = cost[v as usize];
            for e in rg.out_edges(v) {
                let w = e.link().map_or(0, |c| base + u64::from(weights.get(c)));
                let t = e.to as usize;
                if level[t] == UNSEEN {
                    level[t] = depth + 1;
                    cost[t] = cv + w;
                    parent[t] = v;
                    next.push(e.to);
                } else if level[t] == depth + 1 && cv + w < cost[t] {
                    cost[t] = cv + w;
                    parent[t] = v;
                }
            }
        }
        next.sort_unstable();
        settled += targets
            .iter()
            .filter(|&&t| level[t as usize] == depth + 1)
            .count();
        frontier = next;
        depth += 1;
    }
    let missing: Vec<(NodeId, NodeId)> = dsts
        .iter()
        .zip(&targets)
        .filter(|(_, &t)| level[t as usize] == UNSEEN)
        .map(|(&d, _)| (src, d))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Unroutable(missing));
    }
    Ok(targets.iter().map(|&t| trace(&parent, root, t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::Prepared;
    use crate::metrics::channel_loads;
    use crate::routes::check_table;
    use crate::topology::{Direction, Topology};
    use std::sync::Arc;

    fn prepared(dims: &[usize]) -> Prepared {
        Prepared::new(&Arc::new(Topology::torus(dims).unwrap())).unwrap()
    }

    #[test]
    fn two_nodes_need_no_second_stage() {
        let p = prepared(&[2]);
        let g = build_rt_sssp(&p.rg, p.rg.topology().nodes(), true).unwrap();
        assert_eq!(g.table.len(), 2);
        assert_eq!(g.stats.sssp_calls, 0);
        assert_eq!(g.stats.unique_pairs, 2);
    }

    #[test]
    fn equal_weights_give_minimal_paths() {
        let p = prepared(&[4, 3]);
        let topo = p.rg.topology().clone();
        let w = LinkWeights::new(&topo);
        let dsts: Vec<NodeId> = topo.nodes()[1..].to_vec();
        let paths = build_sssp(&p.rg, &w, 144, NodeId(0), &dsts).unwrap();
        for (d, path) in dsts.iter().zip(&paths) {
            let nodes = path_nodes(&p.rg, path);
            assert_eq!(Some(nodes.len() - 1), topo.torus_distance(NodeId(0), *d));
        }
    }

    #[test]
    fn loaded_link_is_avoided() {
        let p = prepared(&[4]);
        let topo = p.rg.topology().clone();
        let mut w = LinkWeights::new(&topo);
        w.add(topo.channel_index(NodeId(0), Direction::plus(0)), 10);
        let paths = build_sssp(&p.rg, &w, 16, NodeId(0), &[NodeId(2)]).unwrap();
        let r = canonical_route(&p.rg, &path_nodes(&p.rg, &paths[0])).unwrap();
        assert_eq!(r.body, vec![Direction::minus(0); 2]);
    }

    #[test]
    fn heavy_load_never_lengthens_paths() {
        let p = prepared(&[5]);
        let topo = p.rg.topology().clone();
        let mut w = LinkWeights::new(&topo);
        // far beyond the base weight: minimality still wins
        w.add(topo.channel_index(NodeId(0), Direction::plus(0)), 1000);
        let paths = build_sssp(&p.rg, &w, 25, NodeId(0), &[NodeId(1)]).unwrap();
        assert_eq!(path_nodes(&p.rg, &paths[0]).len(), 2);
    }

    #[test]
    fn tables_are_complete_and_minimal() {
        for dims in [vec![3, 3], vec![2, 3, 2], vec![4, 2, 2, 2]] {
            let p = prepared(&dims);
            for unique_stage in [true, false] {
                let g = build_rt_sssp(&p.rg, p.rg.topology().nodes(), unique_stage).unwrap();
                let check = check_table(&g.table, &p.rg);
                assert!(check.passed(), "{dims:?}: {check:?}");
                assert_eq!(channel_loads(&g.table).unwrap(), g.weights.as_slice());
            }
        }
    }
}
