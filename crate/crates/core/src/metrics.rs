//! Channel loads and balancedness scores of routing tables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::routes::{Route, RoutingTable};
use crate::topology::{Direction, NodeId, Topology};

/// Number of routes crossing each channel slot (dead slots stay 0).
pub fn channel_loads(table: &RoutingTable) -> Result<Vec<u32>> {
    loads_of(table.topology(), table.iter())
}

fn loads_of<'a>(topo: &Topology, routes: impl Iterator<Item = &'a Route>) -> Result<Vec<u32>> {
    let mut loads = vec![0u32; topo.channel_slots()];
    for r in routes {
        for (i, (&u, d)) in r.nodes.iter().zip(r.steps()).enumerate() {
            if topo.neighbor(u, d) != r.nodes.get(i + 1).copied() {
                return Err(Error::Integrity(format!(
                    "route {} -> {} uses dead channel {} {d}",
                    topo.format_node(r.src),
                    topo.format_node(r.dst),
                    topo.format_node(u)
                )));
            }
            loads[topo.channel_index(u, d)] += 1;
        }
    }
    Ok(loads)
}

/// Loads of the live channels only, in slot order.
pub fn live_loads(topo: &Topology, loads: &[u32]) -> Vec<u32> {
    topo.live_channels().map(|c| loads[c]).collect()
}

/// Mean channel load if every ordered pair of `pairs` took a shortest path.
pub fn perfect_load_for(topo: &Topology, pairs: &[(NodeId, NodeId)]) -> Result<f64> {
    if topo.channel_count() == 0 {
        return Err(Error::Invalid("topology has no channels".into()));
    }
    let dist = topo.distance_matrix();
    let mut total = 0usize;
    for &(a, b) in pairs {
        total += dist.get(a, b).ok_or_else(|| {
            Error::Topology(format!(
                "{} cannot reach {}",
                topo.format_node(a),
                topo.format_node(b)
            ))
        })?;
    }
    Ok(total as f64 / topo.channel_count() as f64)
}

/// Perfect channel load over all ordered pairs.
pub fn perfect_channel_load(topo: &Topology) -> Result<f64> {
    perfect_load_for(topo, &all_pairs(topo))
}

/// `(mean |perfect - load|^k)^(1/k)` over the given channel loads.
pub fn deviation(loads: &[u32], perfect: f64, k: u32) -> Result<f64> {
    if loads.is_empty() {
        return Err(Error::Invalid("deviation over an empty channel set".into()));
    }
    if k == 0 {
        return Err(Error::Invalid(
            "deviation exponent must be at least 1".into(),
        ));
    }
    let sum: f64 = loads
        .iter()
        .map(|&g| (perfect - g as f64).abs().powi(k as i32))
        .sum();
    Ok((sum / loads.len() as f64).powf(1.0 / k as f64))
}

pub fn all_pairs(topo: &Topology) -> Vec<(NodeId, NodeId)> {
    let nodes = topo.nodes();
    nodes
        .iter()
        .flat_map(|&a| nodes.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelLoad {
    pub channel: String,
    pub load: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub pi: u32,
    pub min_load: u32,
    pub gamma_perfect: f64,
    /// Deviation keyed by exponent.
    pub sigma: BTreeMap<String, f64>,
    pub max_d: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_channel: Option<Vec<ChannelLoad>>,
}

impl LoadReport {
    pub fn sigma(&self, k: u32) -> Option<f64> {
        self.sigma.get(&k.to_string()).copied()
    }

    /// Report over all routes of `table`, with `sigma(4)`.
    pub fn for_table(table: &RoutingTable) -> Result<Self> {
        pattern_loads(table, TrafficPattern::Alltoall, &[4], false)
    }
}

/// Synthetic traffic patterns over the live nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrafficPattern {
    /// Coordinates reversed when the dimensions read the same both ways,
    /// otherwise rotated by one position.
    Transpose,
    /// Every node to each of its direct neighbors.
    Neighbor,
    /// `ceil(d_1 / 2) - 1` hops along `+X`.
    Tornado,
    Alltoall,
}

impl TrafficPattern {
    pub const ALL: [TrafficPattern; 4] = [
        TrafficPattern::Transpose,
        TrafficPattern::Neighbor,
        TrafficPattern::Tornado,
        TrafficPattern::Alltoall,
    ];

    /// Ordered pairs, without self pairs, in ascending source order.
    pub fn pairs(self, topo: &Topology) -> Result<Vec<(NodeId, NodeId)>> {
        let n = topo.n();
        let dims = topo.dims();
        let mut pairs = Vec::new();
        let mut mapped = |src: NodeId, coords: Vec<usize>| -> Result<()> {
            let dst = topo.node_at(&coords).unwrap();
            if !topo.is_live(dst) {
                return Err(Error::Invalid(format!(
                    "{self} pattern sends {} to failed node {}",
                    topo.format_node(src),
                    topo.format_node(dst)
                )));
            }
            if dst != src {
                pairs.push((src, dst));
            }
            Ok(())
        };
        match self {
            TrafficPattern::Alltoall => return Ok(all_pairs(topo)),
            TrafficPattern::Neighbor => {
                return Ok(topo
                    .nodes()
                    .iter()
                    .flat_map(|&u| {
                        Direction::all(n).filter_map(move |d| topo.neighbor(u, d).map(|v| (u, v)))
                    })
                    .collect())
            }
            TrafficPattern::Transpose => {
                let palindrome = dims.iter().eq(dims.iter().rev());
                for &u in topo.nodes() {
                    let c = topo.coords(u);
                    let dst = if palindrome {
                        c.iter().rev().copied().collect()
                    } else {
                        (0..n).map(|j| c[(j + 1) % n] % dims[j]).collect()
                    };
                    mapped(u, dst)?;
                }
            }
            TrafficPattern::Tornado => {
                let shift = dims[0].div_ceil(2) - 1;
                for &u in topo.nodes() {
                    let mut c = topo.coords(u);
                    c[0] = (c[0] + shift) % dims[0];
                    mapped(u, c)?;
                }
            }
        }
        Ok(pairs)
    }
}

impl fmt::Display for TrafficPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrafficPattern::Transpose => "transpose",
            TrafficPattern::Neighbor => "neighbor",
            TrafficPattern::Tornado => "tornado",
            TrafficPattern::Alltoall => "alltoall",
        })
    }
}

impl FromStr for TrafficPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Invalid(format!("unknown pattern '{s}'")))
    }
}

/// Loads and scores counting only the routes a pattern uses.
pub fn pattern_loads(
    table: &RoutingTable,
    pattern: TrafficPattern,
    ks: &[u32],
    per_channel: bool,
) -> Result<LoadReport> {
    let topo = table.topology();
    let pairs = pattern.pairs(topo)?;
    let mut routes = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        routes.push(table.get(a, b).ok_or_else(|| {
            Error::Integrity(format!(
                "no route {} -> {}",
                topo.format_node(a),
                topo.format_node(b)
            ))
        })?);
    }
    let loads = loads_of(topo, routes.iter().copied())?;
    let live = live_loads(topo, &loads);
    let perfect = perfect_load_for(topo, &pairs)?;
    let mut sigma = BTreeMap::new();
    for &k in ks {
        sigma.insert(k.to_string(), deviation(&live, perfect, k)?);
    }
    Ok(LoadReport {
        pi: live.iter().copied().max().unwrap_or(0),
        min_load: live.iter().copied().min().unwrap_or(0),
        gamma_perfect: perfect,
        sigma,
        max_d: routes.iter().map(|r| r.len()).max().unwrap_or(0),
        per_channel: per_channel.then(|| {
            topo.live_channels()
                .map(|c| ChannelLoad {
                    channel: topo.format_channel(topo.channel_at(c)),
                    load: loads[c],
                })
                .collect()
        }),
    })
}
