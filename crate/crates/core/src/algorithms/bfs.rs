//! Breadth-first table generation.
//!
//! Sources are processed farthest-first. For each source a level-synchronous
//! BFS tree is grown over the routing graph; within a level, vertices reached
//! over a link with less accumulated weight claim children first.

use super::paths::{canonical_route, path_nodes};
use super::{Generated, LinkWeights, Stats};
use crate::error::{Error, Result};
use crate::routes::{Route, RoutingTable};
use crate::routing_graph::{RoutingGraph, VertexId};
use crate::topology::NodeId;

const UNSEEN: VertexId = VertexId::MAX;

pub fn build_rt_bfs(rg: &RoutingGraph, nodes: &[NodeId]) -> Result<Generated> {
    let topo = rg.topology();
    let mut weights = LinkWeights::new(topo);
    let mut table = RoutingTable::new(topo);
    let Some(&first) = nodes.first() else {
        return Ok(Generated {
            table,
            weights,
            stats: Stats::default(),
        });
    };
    let mut unprocessed: Vec<NodeId> = nodes.iter().copied().filter(|&u| u != first).collect();
    let mut src = first;
    loop {
        for route in build_bfs_routes(rg, &mut weights, src, nodes)? {
            table.insert(route);
        }
        if unprocessed.is_empty() {
            break;
        }
        let next = topo.most_remote(&unprocessed, src)?;
        unprocessed.retain(|&u| u != next);
        src = next;
    }
    let stats = Stats {
        total_pairs: table.len(),
        ..Stats::default()
    };
    Ok(Generated {
        table,
        weights,
        stats,
    })
}

/// Routes from `src` to every other node of `dsts`, taken from one BFS tree.
/// Every link on a returned route gains one unit of weight.
pub fn build_bfs_routes(
    rg: &RoutingGraph,
    weights: &mut LinkWeights,
    src: NodeId,
    dsts: &[NodeId],
) -> Result<Vec<Route>> {
    let parent = bfs_tree(rg, weights, src);
    let mut routes = Vec::new();
    let mut missing = Vec::new();
    for &dst in dsts {
        if dst == src {
            continue;
        }
        let end = rg.end(dst);
        if parent[end as usize] == UNSEEN {
            missing.push((src, dst));
            continue;
        }
        let mut path = vec![end];
        let mut v = end;
        while v != rg.begin(src) {
            v = parent[v as usize];
            path.push(v);
        }
        path.reverse();
        routes.push(canonical_route(rg, &path_nodes(rg, &path))?);
    }
    if !missing.is_empty() {
        return Err(Error::Unroutable(missing));
    }
    let topo = rg.topology();
    for r in &routes {
        weights.add_route(topo, r);
    }
    Ok(routes)
}

/// Parent pointers of the weight-ordered BFS tree rooted at `Begin(src)`.
/// Each frontier vertex is keyed by the weight of the link it was reached
/// over; ties go to the lower vertex id.
pub fn bfs_tree(rg: &RoutingGraph, weights: &LinkWeights, src: NodeId) -> Vec<VertexId> {
    let mut parent = vec![UNSEEN; rg.vertex_count()];
    let root = rg.begin(src);
    parent[root as usize] = root;
    let mut reached = vec![0u32; rg.vertex_count()];
    let mut frontier = vec![root];
    while !frontier.is_empty() {
        let mut keyed: Vec<(u32, VertexId)> =
            frontier.iter().map(|&v| (reached[v as usize], v)).collect();
        keyed.sort_unstable();
        let mut next = Vec::new();
        for (_, v) in keyed {
            for e in rg.out_edges(v) {
                if parent[e.to as usize] == UNSEEN {
                    parent[e.to as usize] = v;
                    reached[e.to as usize] = e.link().map_or(0, |c| weights.get(c));
                    next.push(e.to);
                }
            }
        }
        frontier = next;
    }
    parent
}
