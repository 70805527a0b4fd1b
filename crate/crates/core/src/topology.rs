//! The n-dimensional torus: dimensions, directions, node coordinates and links.
//!
//! Nodes are numbered in row-major order (the last coordinate varies fastest).
//! A dimension of size 2 is a mesh along that dimension: the pair of nodes is
//! joined by a single cable, exposed as one `+D` channel and one `-D` channel.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIMS: usize = 4;

const DIM_NAMES: [char; MAX_DIMS] = ['X', 'Y', 'Z', 'K'];
const NO_NEIGHBOR: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A unit step along one dimension.
///
/// The derived ordering is the routing order `+X +Y +Z +K -X -Y -Z -K`:
/// every positive direction precedes every negative one, and within a sign
/// directions are ordered by dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Direction {
    negative: bool,
    dim: u8,
}

impl Direction {
    pub const fn new(dim: usize, positive: bool) -> Self {
        debug_assert!(dim < MAX_DIMS);
        Direction {
            negative: !positive,
            dim: dim as u8,
        }
    }

    pub const fn plus(dim: usize) -> Self {
        Self::new(dim, true)
    }

    pub const fn minus(dim: usize) -> Self {
        Self::new(dim, false)
    }

    /// Direction with 0-based index `idx` in a torus of `n` dimensions.
    pub fn from_index(idx: usize, n: usize) -> Self {
        debug_assert!(idx < 2 * n);
        Self::new(idx % n, idx < n)
    }

    /// 0-based position in the routing order for an `n`-dimensional torus.
    #[inline]
    pub fn index(self, n: usize) -> usize {
        self.dim as usize + if self.negative { n } else { 0 }
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        !self.negative
    }

    #[inline]
    pub fn sign(self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    #[inline]
    pub fn opposite(self) -> Self {
        Direction {
            negative: !self.negative,
            dim: self.dim,
        }
    }

    /// All `2n` directions in routing order.
    pub fn all(n: usize) -> impl Iterator<Item = Direction> + Clone {
        (0..2 * n).map(move |i| Direction::from_index(i, n))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negative { '-' } else { '+' };
        write!(f, "{}{}", sign, DIM_NAMES[self.dim as usize])
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        let positive = match chars.next() {
            Some('+') => true,
            Some('-') | Some('\u{2212}') => false,
            _ => return Err(Error::Invalid(format!("bad direction `{s}`"))),
        };
        let name = chars.next().map(|c| c.to_ascii_uppercase());
        let dim = DIM_NAMES
            .iter()
            .position(|&d| Some(d) == name)
            .ok_or_else(|| Error::Invalid(format!("bad direction `{s}`")))?;
        if chars.next().is_some() {
            return Err(Error::Invalid(format!("bad direction `{s}`")));
        }
        Ok(Direction::new(dim, positive))
    }
}

/// A directed physical link `(tail, dir)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Channel {
    pub tail: NodeId,
    pub dir: Direction,
}

#[derive(Debug, Clone)]
pub struct Topology {
    dims: Vec<usize>,
    strides: Vec<usize>,
    failed_nodes: BTreeSet<NodeId>,
    failed_links: BTreeSet<(NodeId, Direction)>,
    /// `neighbors[node * 2n + dir_index]`, `NO_NEIGHBOR` when the link is absent.
    neighbors: Vec<u32>,
    live: Vec<bool>,
    live_nodes: Vec<NodeId>,
    channel_count: usize,
}

impl Topology {
    /// Fault-free torus.
    pub fn torus(dims: &[usize]) -> Result<Self> {
        Self::new(dims, [], [])
    }

    pub fn new(
        dims: &[usize],
        failed_nodes: impl IntoIterator<Item = NodeId>,
        failed_links: impl IntoIterator<Item = (NodeId, Direction)>,
    ) -> Result<Self> {
        let n = dims.len();
        if n == 0 || n > MAX_DIMS {
            return Err(Error::Topology(format!(
                "dimension count must be in 1..={MAX_DIMS}, got {n}"
            )));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::Topology(format!("dimension size {d} is below 2")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t < u32::MAX as usize / 128)
            .ok_or_else(|| Error::Topology("too many nodes".into()))?;

        let mut strides = vec![1; n];
        for j in (0..n.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * dims[j + 1];
        }

        let mut topo = Topology {
            dims: dims.to_vec(),
            strides,
            failed_nodes: BTreeSet::new(),
            failed_links: BTreeSet::new(),
            neighbors: Vec::new(),
            live: vec![true; total],
            live_nodes: Vec::new(),
            channel_count: 0,
        };

        for node in failed_nodes {
            if node.index() >= total {
                return Err(Error::Topology(format!("failed node {node} out of range")));
            }
            topo.failed_nodes.insert(node);
            topo.live[node.index()] = false;
        }
        for (node, dir) in failed_links {
            if node.index() >= total || dir.dim() >= n {
                return Err(Error::Topology(format!(
                    "failed link ({node}, {dir}) out of range"
                )));
            }
            let far = topo.raw_step(node, dir).ok_or_else(|| {
                Error::Topology(format!(
                    "failed link {} {dir} does not exist (mesh dimension)",
                    topo.format_node(node)
                ))
            })?;
            topo.failed_links.insert((node, dir));
            topo.failed_links.insert((far, dir.opposite()));
        }

        let slots = 2 * n;
        topo.neighbors = vec![NO_NEIGHBOR; total * slots];
        for u in 0..total {
            let node = NodeId(u as u32);
            if !topo.live[u] {
                continue;
            }
            for dir in Direction::all(n) {
                if topo.failed_links.contains(&(node, dir)) {
                    continue;
                }
                if let Some(v) = topo.raw_step(node, dir) {
                    if topo.live[v.index()] {
                        topo.neighbors[u * slots + dir.index(n)] = v.0;
                        topo.channel_count += 1;
                    }
                }
            }
        }
        topo.live_nodes = (0..total)
            .filter(|&u| topo.live[u])
            .map(|u| NodeId(u as u32))
            .collect();
        Ok(topo)
    }

    /// Step ignoring faults; `None` only for the suppressed wraparound of a
    /// size-2 dimension.
    fn raw_step(&self, node: NodeId, dir: Direction) -> Option<NodeId> {
        let j = dir.dim();
        let d = self.dims[j];
        let c = (node.index() / self.strides[j]) % d;
        let next = if dir.is_positive() {
            if d == 2 && c == 1 {
                return None;
            }
            (c + 1) % d
        } else {
            if d == 2 && c == 0 {
                return None;
            }
            (c + d - 1) % d
        };
        let id = node.index() - c * self.strides[j] + next * self.strides[j];
        Some(NodeId(id as u32))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total number of coordinate positions, failed nodes included.
    #[inline]
    pub fn node_slots(&self) -> usize {
        self.live.len()
    }

    pub fn node_count(&self) -> usize {
        self.live_nodes.len()
    }

    /// Live nodes in ascending id order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.live_nodes
    }

    #[inline]
    pub fn is_live(&self, node: NodeId) -> bool {
        self.live.get(node.index()).copied().unwrap_or(false)
    }

    pub fn failed_nodes(&self) -> &BTreeSet<NodeId> {
        &self.failed_nodes
    }

    /// Failed links, closed under reversal.
    pub fn failed_links(&self) -> &BTreeSet<(NodeId, Direction)> {
        &self.failed_links
    }

    pub fn is_fault_free(&self) -> bool {
        self.failed_nodes.is_empty() && self.failed_links.is_empty()
    }

    pub fn coords(&self, node: NodeId) -> Vec<usize> {
        (0..self.n())
            .map(|j| (node.index() / self.strides[j]) % self.dims[j])
            .collect()
    }

    #[inline]
    pub fn coord(&self, node: NodeId, dim: usize) -> usize {
        (node.index() / self.strides[dim]) % self.dims[dim]
    }

    pub fn node_at(&self, coords: &[usize]) -> Option<NodeId> {
        if coords.len() != self.n() || coords.iter().zip(&self.dims).any(|(&c, &d)| c >= d) {
            return None;
        }
        let id: usize = coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum();
        Some(NodeId(id as u32))
    }

    /// Neighbor across a live link, `None` if the link is failed, leads to a
    /// failed node, or is the suppressed wraparound of a size-2 dimension.
    #[inline]
    pub fn neighbor(&self, node: NodeId, dir: Direction) -> Option<NodeId> {
        let v = self.neighbors[self.channel_index(node, dir)];
        (v != NO_NEIGHBOR).then_some(NodeId(v))
    }

    /// Dense channel slot `node * 2n + dir_index`; dead channels included.
    #[inline]
    pub fn channel_index(&self, node: NodeId, dir: Direction) -> usize {
        node.index() * 2 * self.n() + dir.index(self.n())
    }

    pub fn channel_slots(&self) -> usize {
        self.neighbors.len()
    }

    pub fn channel_at(&self, index: usize) -> Channel {
        let slots = 2 * self.n();
        Channel {
            tail: NodeId((index / slots) as u32),
            dir: Direction::from_index(index % slots, self.n()),
        }
    }

    #[inline]
    pub fn channel_head(&self, index: usize) -> Option<NodeId> {
        let v = self.neighbors[index];
        (v != NO_NEIGHBOR).then_some(NodeId(v))
    }

    #[inline]
    pub fn channel_live(&self, index: usize) -> bool {
        self.neighbors[index] != NO_NEIGHBOR
    }

    /// Number of live directed channels.
    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    /// Live channel slots in ascending order.
    pub fn live_channels(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.neighbors.len()).filter(move |&c| self.channel_live(c))
    }

    /// Hop distance over live links. Closed form on fault-free tori, BFS otherwise.
    pub fn torus_distance(&self, a: NodeId, b: NodeId) -> Option<usize> {
        if !self.is_live(a) || !self.is_live(b) {
            return None;
        }
        if self.is_fault_free() {
            let d = (0..self.n())
                .map(|j| {
                    let (ca, cb) = (self.coord(a, j), self.coord(b, j));
                    let delta = ca.abs_diff(cb);
                    if self.dims[j] == 2 {
                        delta
                    } else {
                        delta.min(self.dims[j] - delta)
                    }
                })
                .sum();
            Some(d)
        } else {
            self.distances_from(a)[b.index()].map(|d| d as usize)
        }
    }

    /// BFS hop distances from `src` to every node slot.
    pub fn distances_from(&self, src: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_slots()];
        if !self.is_live(src) {
            return dist;
        }
        let mut queue = VecDeque::from([src]);
        dist[src.index()] = Some(0);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.index()].unwrap();
            for dir in Direction::all(self.n()) {
                if let Some(v) = self.neighbor(u, dir) {
                    if dist[v.index()].is_none() {
                        dist[v.index()] = Some(du + 1);
                        queue.push_back(v);
                    }
                }
            }
        }
        dist
    }

    pub fn distance_matrix(&self) -> DistanceMatrix {
        let slots = self.node_slots();
        let mut data = vec![u32::MAX; slots * slots];
        for &src in self.nodes() {
            if self.is_fault_free() {
                for &dst in self.nodes() {
                    data[src.index() * slots + dst.index()] =
                        self.torus_distance(src, dst).unwrap() as u32;
                }
            } else {
                for (dst, d) in self.distances_from(src).into_iter().enumerate() {
                    if let Some(d) = d {
                        data[src.index() * slots + dst] = d;
                    }
                }
            }
        }
        DistanceMatrix { slots, data }
    }

    /// Candidate farthest from `from`; ties go to the smallest node id and
    /// unreachable candidates rank below every reachable one.
    pub fn most_remote(&self, candidates: &[NodeId], from: NodeId) -> Result<NodeId> {
        let dist = self.distances_from(from);
        candidates
            .iter()
            .copied()
            .max_by(|&a, &b| {
                dist[a.index()]
                    .cmp(&dist[b.index()])
                    .then_with(|| b.cmp(&a))
            })
            .ok_or_else(|| Error::Invalid("most_remote: empty candidate set".into()))
    }

    pub fn format_node(&self, node: NodeId) -> String {
        let c = self.coords(node);
        let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        format!("({})", parts.join(","))
    }

    pub fn format_channel(&self, ch: Channel) -> String {
        format!("{} {}", self.format_node(ch.tail), ch.dir)
    }

    /// Parse `(1,0,2)`, `1,0,2` or `1 0 2`.
    pub fn parse_node(&self, text: &str) -> Result<NodeId> {
        let cleaned: String = text
            .chars()
            .map(|c| {
                if c == '(' || c == ')' || c == ',' {
                    ' '
                } else {
                    c
                }
            })
            .collect();
        let coords: Vec<usize> = cleaned
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Invalid(format!("bad coordinates `{text}`: {e}")))?;
        self.node_at(&coords)
            .ok_or_else(|| Error::Invalid(format!("coordinates `{text}` out of range")))
    }

    /// Parse the topology description format:
    ///
    /// ```text
    /// dims: 4 2 2 2
    /// fail-node: 1 0 0 0
    /// fail-link: 0 0 0 0 +X
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut dims: Option<Vec<usize>> = None;
        let mut fail_nodes = Vec::new();
        let mut fail_links = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| perr(format!("expected `key: value`, got `{line}`")))?;
            match key.trim() {
                "dims" => {
                    if dims.is_some() {
                        return Err(perr("duplicate dims line".into()));
                    }
                    let d = value
                        .split_whitespace()
                        .map(|t| t.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| perr(format!("bad dims: {e}")))?;
                    dims = Some(d);
                }
                "fail-node" => fail_nodes.push((line_no, value.trim().to_string())),
                "fail-link" => fail_links.push((line_no, value.trim().to_string())),
                other => return Err(perr(format!("unknown key `{other}`"))),
            }
        }
        let dims = dims.ok_or(Error::Parse {
            line: 1,
            msg: "missing `dims:` line".into(),
        })?;
        let shape = Topology::torus(&dims).map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?;
        let nodes = fail_nodes
            .iter()
            .map(|(line, v)| {
                shape.parse_node(v).map_err(|e| Error::Parse {
                    line: *line,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let links = fail_links
            .iter()
            .map(|(line, v)| {
                let perr = |msg: String| Error::Parse { line: *line, msg };
                let (coords, dir) = v
                    .rsplit_once(char::is_whitespace)
                    .ok_or_else(|| perr(format!("expected `<coords> <dir>`, got `{v}`")))?;
                let node = shape.parse_node(coords).map_err(|e| perr(e.to_string()))?;
                let dir: Direction = dir.parse().map_err(|e: Error| perr(e.to_string()))?;
                if dir.dim() >= dims.len() {
                    return Err(perr(format!(
                        "direction {dir} outside a {}-D torus",
                        dims.len()
                    )));
                }
                Ok((node, dir))
            })
            .collect::<Result<Vec<_>>>()?;
        Topology::new(&dims, nodes, links)
    }

    /// Inverse of [`Topology::parse`]. Failed links are written once per cable.
    pub fn to_spec_string(&self) -> String {
        let mut out = String::from("dims:");
        for d in &self.dims {
            out.push_str(&format!(" {d}"));
        }
        out.push('\n');
        for &node in &self.failed_nodes {
            out.push_str(&format!("fail-node: {}\n", self.format_node(node)));
        }
        // every cable has a positive side and the set is closed under reversal
        for &(node, dir) in self.failed_links.iter().filter(|(_, d)| d.is_positive()) {
            out.push_str(&format!("fail-link: {} {dir}\n", self.format_node(node)));
        }
        out
    }
}

/// All-pairs hop distances over node slots; `u32::MAX` marks unreachable.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    slots: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, a: NodeId, b: NodeId) -> Option<usize> {
        let d = self.data[a.index() * self.slots + b.index()];
        (d != u32::MAX).then_some(d as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(topo: &Topology, c: &[usize]) -> NodeId {
        topo.node_at(c).unwrap()
    }

    #[test]
    fn direction_order_and_opposite() {
        let all: Vec<String> = Direction::all(4).map(|d| d.to_string()).collect();
        assert_eq!(all, ["+X", "+Y", "+Z", "+K", "-X", "-Y", "-Z", "-K"]);
        let dirs: Vec<Direction> = Direction::all(4).collect();
        assert!(dirs.windows(2).all(|w| w[0] < w[1]));
        for d in Direction::all(3) {
            assert_eq!(d.opposite().opposite(), d);
            assert_eq!(d.opposite().index(3), (d.index(3) + 3) % 6);
        }
        assert_eq!("−Y".parse::<Direction>().unwrap(), Direction::minus(1));
        assert!("+Q".parse::<Direction>().is_err());
    }

    #[test]
    fn four_by_two_cube_node_count() {
        let t = Topology::torus(&[4, 2, 2, 2]).unwrap();
        assert_eq!(t.node_count(), 32);
    }

    #[test]
    fn two_node_mesh_has_two_links() {
        let t = Topology::torus(&[2]).unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.channel_count(), 2);
        assert_eq!(t.neighbor(NodeId(0), Direction::plus(0)), Some(NodeId(1)));
        assert_eq!(t.neighbor(NodeId(1), Direction::plus(0)), None);
        assert_eq!(t.neighbor(NodeId(1), Direction::minus(0)), Some(NodeId(0)));
        assert_eq!(t.neighbor(NodeId(0), Direction::minus(0)), None);
    }

    #[test]
    fn failed_links_are_symmetrized() {
        let shape = Topology::torus(&[3, 3]).unwrap();
        let origin = n(&shape, &[0, 0]);
        let t = Topology::new(&[3, 3], [], [(origin, Direction::plus(0))]).unwrap();
        assert_eq!(t.neighbor(origin, Direction::plus(0)), None);
        assert_eq!(t.neighbor(n(&t, &[1, 0]), Direction::minus(0)), None);
        assert_eq!(t.channel_count(), 2 * 2 * 9 - 2);
    }

    #[test]
    fn construction_errors() {
        assert!(Topology::torus(&[]).is_err());
        assert!(Topology::torus(&[3, 1]).is_err());
        assert!(Topology::torus(&[2, 2, 2, 2, 2]).is_err());
        assert!(Topology::new(&[3], [NodeId(3)], []).is_err());
        assert!(Topology::new(&[3], [], [(NodeId(0), Direction::plus(1))]).is_err());
        // suppressed wraparound of a mesh dimension
        assert!(Topology::new(&[2], [], [(NodeId(1), Direction::plus(0))]).is_err());
    }

    #[test]
    fn neighbor_wraparound() {
        let t = Topology::torus(&[3, 3]).unwrap();
        assert_eq!(
            t.neighbor(n(&t, &[2, 0]), Direction::plus(0)),
            Some(n(&t, &[0, 0]))
        );
        let ring = Topology::torus(&[4]).unwrap();
        assert_eq!(
            ring.neighbor(NodeId(3), Direction::plus(0)),
            Some(NodeId(0))
        );
    }

    #[test]
    fn neighbor_absent_into_failed_node() {
        let t = Topology::new(&[4], [NodeId(2)], []).unwrap();
        assert_eq!(t.neighbor(NodeId(1), Direction::plus(0)), None);
        assert_eq!(t.neighbor(NodeId(3), Direction::minus(0)), None);
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.nodes(), &[NodeId(0), NodeId(1), NodeId(3)]);
    }

    #[test]
    fn distances() {
        let t = Topology::torus(&[4, 2, 2, 2]).unwrap();
        let a = n(&t, &[0, 0, 0, 0]);
        let b = n(&t, &[2, 1, 1, 1]);
        assert_eq!(t.torus_distance(a, b), Some(5));
        assert_eq!(t.torus_distance(a, a), Some(0));
        let ring = Topology::torus(&[5]).unwrap();
        assert_eq!(ring.torus_distance(NodeId(0), NodeId(3)), Some(2));
    }

    #[test]
    fn faulty_distance_uses_bfs() {
        let t = Topology::new(&[4], [], [(NodeId(0), Direction::plus(0))]).unwrap();
        assert_eq!(t.torus_distance(NodeId(0), NodeId(1)), Some(3));
        let cut = Topology::new(&[2], [], [(NodeId(0), Direction::plus(0))]).unwrap();
        assert_eq!(cut.torus_distance(NodeId(0), NodeId(1)), None);
    }

    #[test]
    fn most_remote_examples() {
        let ring = Topology::torus(&[8]).unwrap();
        let got = ring
            .most_remote(&[NodeId(1), NodeId(4), NodeId(7)], NodeId(0))
            .unwrap();
        assert_eq!(got, NodeId(4));
        assert_eq!(
            ring.most_remote(&[NodeId(0)], NodeId(0)).unwrap(),
            NodeId(0)
        );
        assert!(ring.most_remote(&[], NodeId(0)).is_err());

        let t = Topology::torus(&[4, 2, 2, 2]).unwrap();
        let origin = n(&t, &[0, 0, 0, 0]);
        let others: Vec<NodeId> = t.nodes().iter().copied().filter(|&x| x != origin).collect();
        // exhaustive scan for the expected answer
        let best = others
            .iter()
            .copied()
            .max_by_key(|&x| (t.torus_distance(origin, x).unwrap(), std::cmp::Reverse(x)))
            .unwrap();
        assert_eq!(best, n(&t, &[2, 1, 1, 1]));
        assert_eq!(t.most_remote(&others, origin).unwrap(), best);
    }

    #[test]
    fn channel_count_matches_enumeration() {
        for dims in [
            vec![3, 3],
            vec![2, 3],
            vec![4, 2, 2, 2],
            vec![2],
            vec![5, 2, 3],
        ] {
            let t = Topology::torus(&dims).unwrap();
            let nodes = t.node_count();
            let mut expected = 2 * dims.len() * nodes;
            for &d in &dims {
                if d == 2 {
                    expected -= 2 * (nodes / d);
                }
            }
            let enumerated = t
                .nodes()
                .iter()
                .flat_map(|&u| Direction::all(t.n()).filter_map(move |d| Some((u, d))))
                .filter(|&(u, d)| t.neighbor(u, d).is_some())
                .count();
            assert_eq!(enumerated, expected, "dims {dims:?}");
            assert_eq!(t.channel_count(), expected);
        }
    }

    #[test]
    fn parse_round_trip() {
        let text = "dims: 3 3\nfail-node: (2,2)\nfail-link: 0 0 +X\n# comment\n";
        let t = Topology::parse(text).unwrap();
        assert_eq!(t.dims(), &[3, 3]);
        assert_eq!(t.node_count(), 8);
        assert_eq!(t.neighbor(n(&t, &[1, 0]), Direction::minus(0)), None);
        let again = Topology::parse(&t.to_spec_string()).unwrap();
        assert_eq!(again.failed_links(), t.failed_links());
        assert_eq!(again.failed_nodes(), t.failed_nodes());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match Topology::parse("dims: 3 3\nfail-link: 0 0 +Z\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Topology::parse("fail-node: 0\n").is_err());
        assert!(Topology::parse("dims: 3 1\n").is_err());
    }
}
