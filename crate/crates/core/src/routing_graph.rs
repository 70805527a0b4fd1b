//! The routing graph: an expansion of the torus whose vertices remember how a
//! packet got to a node (injection, first step, direction-bit history, last
//! step, ejection), so that graph paths from a `Begin` vertex to an `End`
//! vertex are exactly the rule-compliant routes.
//!
//! Every node owns `3^n + 2n + 1` vertices laid out contiguously:
//! `Begin`, the `3^n - 1` direction-bit vectors (indexed by their base-3 code),
//! `n` first-step vertices, `n` last-step vertices, and `End`.
//!
//! Immediate reversals (a first step `+D` followed by `-D`, or a last step
//! `-D` right after `+D`) are not emitted: such a walk returns to the node it
//! just left, so it never yields a shorter route or a new destination.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::cdg::CdgEdge;
use crate::error::{Error, Result};
use crate::topology::{Direction, NodeId, Topology};

pub type VertexId = u32;

const NO_LINK: u32 = u32::MAX;

/// Per-dimension signs of the directions a route has used, all-zero excluded.
///
/// Stored as a base-3 code (digit 0 = unused, 1 = positive, 2 = negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirbitVector(u16);

impl DirbitVector {
    pub fn single(dir: Direction) -> Self {
        DirbitVector(digit(dir) * POW3[dir.dim()])
    }

    pub fn from_code(code: usize) -> Option<Self> {
        (code > 0 && code < POW3[4] as usize).then_some(DirbitVector(code as u16))
    }

    /// Build from explicit entries in `{-1, 0, +1}`; `None` for the all-zero vector.
    pub fn from_entries(entries: &[i8]) -> Option<Self> {
        let code = entries.iter().enumerate().fold(0u16, |acc, (j, &e)| {
            acc + POW3[j]
                * match e {
                    1 => 1,
                    -1 => 2,
                    _ => 0,
                }
        });
        (code != 0).then_some(DirbitVector(code))
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn entry(self, dim: usize) -> i8 {
        match (self.0 / POW3[dim]) % 3 {
            1 => 1,
            2 => -1,
            _ => 0,
        }
    }

    /// The vector after also stepping in `dir`; `None` if the opposite sign
    /// of that dimension was already used.
    pub fn with(self, dir: Direction) -> Option<Self> {
        match self.entry(dir.dim()) {
            0 => Some(DirbitVector(self.0 + digit(dir) * POW3[dir.dim()])),
            e if e == dir.sign() => Some(self),
            _ => None,
        }
    }

    /// Used directions in routing order.
    pub fn directions(self) -> impl Iterator<Item = Direction> {
        let mut dirs: Vec<Direction> = (0..4)
            .filter_map(|j| match self.entry(j) {
                1 => Some(Direction::plus(j)),
                -1 => Some(Direction::minus(j)),
                _ => None,
            })
            .collect();
        dirs.sort();
        dirs.into_iter()
    }

    /// Greatest used direction. Entries accumulate in ascending order, so this
    /// is also the direction of the most recent step.
    pub fn last_direction(self) -> Direction {
        self.directions()
            .last()
            .expect("dirbit vector is never all-zero")
    }
}

const POW3: [u16; 5] = [1, 3, 9, 27, 81];

fn digit(dir: Direction) -> u16 {
    if dir.is_positive() {
        1
    } else {
        2
    }
}

impl fmt::Display for DirbitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.directions() {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Begin,
    /// Reached by a positive first step.
    Fs(Direction),
    Dirbit(DirbitVector),
    /// Reached by a negative last step.
    Ls(Direction),
    End,
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKind::Begin => write!(f, "begin"),
            VertexKind::Fs(d) => write!(f, "fs({d})"),
            VertexKind::Dirbit(v) => write!(f, "dirbit[{v}]"),
            VertexKind::Ls(d) => write!(f, "ls({d})"),
            VertexKind::End => write!(f, "end"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RgVertex {
    pub node: NodeId,
    pub kind: VertexKind,
}

impl RgVertex {
    /// Direction of the hop that entered this vertex, if any.
    pub fn arrival(&self) -> Option<Direction> {
        match self.kind {
            VertexKind::Fs(d) | VertexKind::Ls(d) => Some(d),
            VertexKind::Dirbit(v) => Some(v.last_direction()),
            VertexKind::Begin | VertexKind::End => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RgEdge {
    pub to: VertexId,
    link: u32,
    pub augmented: bool,
}

impl RgEdge {
    /// Channel slot of the physical link this edge traverses; `None` for ejection edges.
    #[inline]
    pub fn link(&self) -> Option<usize> {
        (self.link != NO_LINK).then_some(self.link as usize)
    }
}

#[derive(Debug, Clone)]
pub struct RoutingGraph {
    topo: Arc<Topology>,
    per_node: usize,
    pow3n: usize,
    adj: Vec<Vec<RgEdge>>,
    augmentation: Vec<CdgEdge>,
}

impl RoutingGraph {
    /// Vertices owned by each node of an `n`-dimensional torus: `3^n + 2n + 1`.
    pub fn vertices_per_node(n: usize) -> usize {
        3usize.pow(n as u32) + 2 * n + 1
    }

    /// The per-node edge bound `2n*3^n + 1.5n^2 + 1.5n + 1`.
    pub fn edge_bound_per_node(n: usize) -> f64 {
        let nf = n as f64;
        2.0 * nf * 3f64.powi(n as i32) + 1.5 * nf * nf + 1.5 * nf + 1.0
    }

    pub fn build(topo: &Arc<Topology>) -> Self {
        let n = topo.n();
        let pow3n = 3usize.pow(n as u32);
        let per_node = Self::vertices_per_node(n);
        let mut rg = RoutingGraph {
            topo: Arc::clone(topo),
            per_node,
            pow3n,
            adj: vec![Vec::new(); topo.node_slots() * per_node],
            augmentation: Vec::new(),
        };
        for &u in topo.nodes() {
            rg.build_node(u);
        }
        rg
    }

    fn build_node(&mut self, u: NodeId) {
        let topo = Arc::clone(&self.topo);
        let n = topo.n();
        let end = self.end(u);
        let step = |dir: Direction| {
            topo.neighbor(u, dir)
                .map(|v| (v, topo.channel_index(u, dir) as u32))
        };

        // injection
        let mut edges = Vec::new();
        for dir in Direction::all(n) {
            if let Some((v, link)) = step(dir) {
                edges.push(edge(
                    self.id(v, VertexKind::Dirbit(DirbitVector::single(dir))),
                    link,
                ));
                if dir.is_positive() {
                    edges.push(edge(self.id(v, VertexKind::Fs(dir)), link));
                }
            }
        }
        edges.push(edge(end, NO_LINK));
        let slot = self.begin(u) as usize;
        self.adj[slot] = edges;

        // first step: any greater direction, starting a fresh history
        for first in Direction::all(n).filter(|d| d.is_positive()) {
            let mut edges = Vec::new();
            for dir in Direction::all(n).filter(|&d| d > first && d != first.opposite()) {
                if let Some((v, link)) = step(dir) {
                    edges.push(edge(
                        self.id(v, VertexKind::Dirbit(DirbitVector::single(dir))),
                        link,
                    ));
                }
            }
            edges.push(edge(end, NO_LINK));
            let slot = self.id(u, VertexKind::Fs(first)) as usize;
            self.adj[slot] = edges;
        }

        // direction-bit history
        for code in 1..self.pow3n {
            let hist = DirbitVector::from_code(code).unwrap();
            let last = hist.last_direction();
            let mut edges = Vec::new();
            for dir in Direction::all(n).filter(|&d| d >= last) {
                let Some((v, link)) = step(dir) else { continue };
                if let Some(next) = hist.with(dir) {
                    edges.push(edge(self.id(v, VertexKind::Dirbit(next)), link));
                }
                if dir > last && !dir.is_positive() && dir != last.opposite() {
                    edges.push(edge(self.id(v, VertexKind::Ls(dir)), link));
                }
            }
            edges.push(edge(end, NO_LINK));
            let slot = self.id(u, VertexKind::Dirbit(hist)) as usize;
            self.adj[slot] = edges;
        }

        for dim in 0..n {
            let slot = self.id(u, VertexKind::Ls(Direction::minus(dim))) as usize;
            self.adj[slot] = vec![edge(end, NO_LINK)];
        }
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topo
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn per_node(&self) -> usize {
        self.per_node
    }

    /// Vertices owned by `node` (all `3^n + 2n + 1` slots are always present).
    pub fn node_vertices(&self, node: NodeId) -> std::ops::Range<VertexId> {
        let base = (node.index() * self.per_node) as VertexId;
        base..base + self.per_node as VertexId
    }

    /// Out-edges leaving the vertices of `node`.
    pub fn node_edge_count(&self, node: NodeId) -> usize {
        self.node_vertices(node)
            .map(|v| self.adj[v as usize].len())
            .sum()
    }

    #[inline]
    pub fn out_edges(&self, v: VertexId) -> &[RgEdge] {
        &self.adj[v as usize]
    }

    #[inline]
    pub fn begin(&self, node: NodeId) -> VertexId {
        (node.index() * self.per_node) as VertexId
    }

    #[inline]
    pub fn end(&self, node: NodeId) -> VertexId {
        (node.index() * self.per_node + self.per_node - 1) as VertexId
    }

    #[inline]
    pub fn is_end(&self, v: VertexId) -> bool {
        v as usize % self.per_node == self.per_node - 1
    }

    #[inline]
    pub fn node_of(&self, v: VertexId) -> NodeId {
        NodeId((v as usize / self.per_node) as u32)
    }

    pub fn id(&self, node: NodeId, kind: VertexKind) -> VertexId {
        let n = self.topo.n();
        let local = match kind {
            VertexKind::Begin => 0,
            VertexKind::Dirbit(v) => v.code(),
            VertexKind::Fs(d) => self.pow3n + d.dim(),
            VertexKind::Ls(d) => self.pow3n + n + d.dim(),
            VertexKind::End => self.per_node - 1,
        };
        (node.index() * self.per_node + local) as VertexId
    }

    pub fn vertex(&self, v: VertexId) -> RgVertex {
        let n = self.topo.n();
        let node = self.node_of(v);
        let local = v as usize % self.per_node;
        let kind = if local == 0 {
            VertexKind::Begin
        } else if local < self.pow3n {
            VertexKind::Dirbit(DirbitVector::from_code(local).unwrap())
        } else if local < self.pow3n + n {
            VertexKind::Fs(Direction::plus(local - self.pow3n))
        } else if local < self.pow3n + 2 * n {
            VertexKind::Ls(Direction::minus(local - self.pow3n - n))
        } else {
            VertexKind::End
        };
        RgVertex { node, kind }
    }

    /// Whether `v` is a first-step or last-step vertex.
    #[inline]
    pub fn is_non_standard(&self, v: VertexId) -> bool {
        let local = v as usize % self.per_node;
        local >= self.pow3n && local < self.per_node - 1
    }

    /// Augmentation edges applied so far, in application order.
    pub fn augmentation(&self) -> &[CdgEdge] {
        &self.augmentation
    }

    /// Unweighted BFS hop distances from `source`; `u32::MAX` when unreachable.
    pub fn hop_distances(&self, source: VertexId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.adj.len()];
        let mut queue = VecDeque::from([source]);
        dist[source as usize] = 0;
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for e in &self.adj[u as usize] {
                if dist[e.to as usize] == u32::MAX {
                    dist[e.to as usize] = du + 1;
                    queue.push_back(e.to);
                }
            }
        }
        dist
    }

    /// Ordered pairs `(i, j)`, `i != j`, with a path from `Begin(i)` to `End(j)`.
    pub fn reachable_pairs(&self) -> BTreeSet<(NodeId, NodeId)> {
        let mut pairs = BTreeSet::new();
        for &src in self.topo.nodes() {
            let dist = self.hop_distances(self.begin(src));
            for &dst in self.topo.nodes() {
                if dst != src && dist[self.end(dst) as usize] != u32::MAX {
                    pairs.insert((src, dst));
                }
            }
        }
        pairs
    }

    /// Realize channel-dependency edges that violate the direction order as
    /// routing-graph edges.
    ///
    /// A positive turn `[(u_i, D_i), (u_j, D_j)]` becomes
    /// `Fs(D_i)@u_j -> Dirbit{D_j}@u_k`; a negative one becomes an edge from
    /// every `Dirbit@u_j` whose last direction is `D_i` to `Ls(D_j)@u_k`.
    pub fn apply_augmentation(&mut self, added: &[CdgEdge]) -> Result<()> {
        let topo = Arc::clone(&self.topo);
        let n = topo.n();
        for &cdg_edge in added {
            if self.augmentation.contains(&cdg_edge) {
                continue;
            }
            let from = topo.channel_at(cdg_edge.from);
            let to = topo.channel_at(cdg_edge.to);
            let describe = || {
                format!(
                    "[{}, {}]",
                    topo.format_channel(from),
                    topo.format_channel(to)
                )
            };
            let (Some(mid), Some(far)) = (
                topo.channel_head(cdg_edge.from),
                topo.channel_head(cdg_edge.to),
            ) else {
                return Err(Error::Augmentation(format!("{}: dead channel", describe())));
            };
            if mid != to.tail {
                return Err(Error::Augmentation(format!(
                    "{}: channels are not consecutive",
                    describe()
                )));
            }
            if from.dir <= to.dir {
                return Err(Error::Augmentation(format!(
                    "{}: turn does not violate the direction order",
                    describe()
                )));
            }
            let link = cdg_edge.to as u32;
            if from.dir.is_positive() {
                let src = self.id(mid, VertexKind::Fs(from.dir));
                let dst = self.id(far, VertexKind::Dirbit(DirbitVector::single(to.dir)));
                self.push_augmented(src, dst, link);
            } else if !to.dir.is_positive() {
                let dst = self.id(far, VertexKind::Ls(to.dir));
                for code in 1..self.pow3n {
                    let hist = DirbitVector::from_code(code).unwrap();
                    if hist.last_direction() == from.dir {
                        let src = self.id(mid, VertexKind::Dirbit(hist));
                        self.push_augmented(src, dst, link);
                    }
                }
            } else {
                return Err(Error::Augmentation(format!(
                    "{}: neither a first-step nor a last-step shape (n = {n})",
                    describe()
                )));
            }
            self.augmentation.push(cdg_edge);
        }
        Ok(())
    }

    fn push_augmented(&mut self, src: VertexId, dst: VertexId, link: u32) {
        let list = &mut self.adj[src as usize];
        let end_pos = list.len() - 1;
        debug_assert!(self_is_end_edge(&list[end_pos]));
        list.insert(
            end_pos,
            RgEdge {
                to: dst,
                link,
                augmented: true,
            },
        );
    }

    /// Keep only edges accepted by `keep`. Used for fault-injection tests of
    /// the route oracle.
    pub fn retain_edges(&mut self, mut keep: impl FnMut(RgVertex, RgVertex, &RgEdge) -> bool) {
        for v in 0..self.adj.len() {
            let from = self.vertex(v as VertexId);
            let mut list = std::mem::take(&mut self.adj[v]);
            list.retain(|e| keep(from, self.vertex(e.to), e));
            self.adj[v] = list;
        }
    }

    /// One line per edge:
    /// `(0,0):begin -> (1,0):dirbit[+X] w=0 link=(0,0) +X aug=0`.
    pub fn dump(&self, weights: Option<&[u32]>) -> String {
        let mut out = String::new();
        for v in 0..self.adj.len() as VertexId {
            if self.adj[v as usize].is_empty() {
                continue;
            }
            let a = self.vertex(v);
            for e in &self.adj[v as usize] {
                let b = self.vertex(e.to);
                let (w, link) = match e.link() {
                    Some(c) => (
                        weights.map_or(0, |w| w[c]),
                        self.topo.format_channel(self.topo.channel_at(c)),
                    ),
                    None => (0, "none".to_string()),
                };
                out.push_str(&format!(
                    "{}:{} -> {}:{} w={} link={} aug={}\n",
                    self.topo.format_node(a.node),
                    a.kind,
                    self.topo.format_node(b.node),
                    b.kind,
                    w,
                    link,
                    u8::from(e.augmented)
                ));
            }
        }
        out
    }
}

fn edge(to: VertexId, link: u32) -> RgEdge {
    RgEdge {
        to,
        link,
        augmented: false,
    }
}

fn self_is_end_edge(e: &RgEdge) -> bool {
    e.link == NO_LINK
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Topology;

    fn rg(dims: &[usize]) -> RoutingGraph {
        RoutingGraph::build(&Arc::new(Topology::torus(dims).unwrap()))
    }

    #[test]
    fn dirbit_vector_basics() {
        let v = DirbitVector::single(Direction::plus(0));
        assert_eq!(v.last_direction(), Direction::plus(0));
        let v = v.with(Direction::minus(1)).unwrap();
        assert_eq!(v.last_direction(), Direction::minus(1));
        assert!(v.with(Direction::minus(0)).is_none());
        assert_eq!(v.with(Direction::minus(1)), Some(v));
        assert_eq!(v.to_string(), "+X-Y");
        assert_eq!(DirbitVector::from_entries(&[1, -1]), Some(v));
        assert_eq!(DirbitVector::from_entries(&[0, 0]), None);
        // every non-zero code round-trips through its entries
        for code in 1..81 {
            let v = DirbitVector::from_code(code).unwrap();
            let entries: Vec<i8> = (0..4).map(|j| v.entry(j)).collect();
            assert_eq!(DirbitVector::from_entries(&entries), Some(v));
        }
    }

    #[test]
    fn vertex_counts_per_node() {
        assert_eq!(RoutingGraph::vertices_per_node(2), 14);
        assert_eq!(RoutingGraph::vertices_per_node(4), 90);
        let g = rg(&[3, 3]);
        assert_eq!(g.vertex_count(), 9 * 14);
    }

    #[test]
    fn vertex_id_round_trip() {
        let g = rg(&[3, 2, 3]);
        for v in 0..g.vertex_count() as VertexId {
            let x = g.vertex(v);
            assert_eq!(g.id(x.node, x.kind), v);
        }
    }

    #[test]
    fn edge_count_within_bound() {
        let g = rg(&[3, 3]);
        for &u in g.topology().nodes() {
            assert!(g.node_edge_count(u) as f64 <= 46.0);
        }
        assert_eq!(RoutingGraph::edge_bound_per_node(2), 46.0);
    }

    #[test]
    fn begin_fs_ls_family_counts() {
        for n in 1..=4 {
            let dims = vec![3; n];
            let g = rg(&dims);
            let u = NodeId(0);
            assert_eq!(g.out_edges(g.begin(u)).len(), 3 * n + 1);
            for dim in 0..n {
                let ls = g.id(u, VertexKind::Ls(Direction::minus(dim)));
                assert_eq!(g.out_edges(ls).len(), 1);
                let fs = g.id(u, VertexKind::Fs(Direction::plus(dim)));
                // greater directions minus the reversal, plus ejection
                assert_eq!(g.out_edges(fs).len(), 2 * n - dim - 1);
            }
        }
    }

    #[test]
    fn edges_follow_links() {
        let g = rg(&[3, 4]);
        let topo = g.topology();
        for v in 0..g.vertex_count() as VertexId {
            for e in g.out_edges(v) {
                match e.link() {
                    Some(c) => {
                        let ch = topo.channel_at(c);
                        assert_eq!(ch.tail, g.node_of(v));
                        assert_eq!(topo.neighbor(ch.tail, ch.dir), Some(g.node_of(e.to)));
                        assert_eq!(g.vertex(e.to).arrival(), Some(ch.dir));
                    }
                    None => {
                        assert!(g.is_end(e.to));
                        assert_eq!(g.node_of(e.to), g.node_of(v));
                    }
                }
            }
        }
    }

    #[test]
    fn reachable_pairs_small() {
        assert_eq!(rg(&[3, 3]).reachable_pairs().len(), 72);
        let two = rg(&[2]).reachable_pairs();
        assert_eq!(
            two.into_iter().collect::<Vec<_>>(),
            vec![(NodeId(0), NodeId(1)), (NodeId(1), NodeId(0))]
        );
    }

    #[test]
    fn reachable_around_a_cut_link() {
        let topo = Topology::new(&[4], [], [(NodeId(0), Direction::plus(0))]).unwrap();
        let g = RoutingGraph::build(&Arc::new(topo));
        assert!(g.reachable_pairs().contains(&(NodeId(0), NodeId(1))));
        let dist = g.hop_distances(g.begin(NodeId(0)));
        assert_eq!(dist[g.end(NodeId(1)) as usize], 4);
    }

    #[test]
    fn augmentation_adds_first_step_edge() {
        let topo = Arc::new(Topology::torus(&[3, 3]).unwrap());
        let mut g = RoutingGraph::build(&topo);
        let before = g.edge_count();
        g.apply_augmentation(&[]).unwrap();
        assert_eq!(g.edge_count(), before);

        let at = |c: &[usize]| topo.node_at(c).unwrap();
        let e = CdgEdge {
            from: topo.channel_index(at(&[1, 0]), Direction::plus(1)),
            to: topo.channel_index(at(&[1, 1]), Direction::plus(0)),
        };
        g.apply_augmentation(&[e]).unwrap();
        assert_eq!(g.edge_count(), before + 1);
        let fs = g.id(at(&[1, 1]), VertexKind::Fs(Direction::plus(1)));
        let target = g.id(
            at(&[2, 1]),
            VertexKind::Dirbit(DirbitVector::single(Direction::plus(0))),
        );
        assert!(g
            .out_edges(fs)
            .iter()
            .any(|x| x.to == target && x.augmented));
        // reapplying is a no-op
        g.apply_augmentation(&[e]).unwrap();
        assert_eq!(g.edge_count(), before + 1);
    }

    #[test]
    fn augmentation_adds_last_step_edges() {
        let topo = Arc::new(Topology::torus(&[3, 3]).unwrap());
        let mut g = RoutingGraph::build(&topo);
        let before = g.edge_count();
        let at = |c: &[usize]| topo.node_at(c).unwrap();
        let e = CdgEdge {
            from: topo.channel_index(at(&[1, 1]), Direction::minus(1)),
            to: topo.channel_index(at(&[1, 0]), Direction::minus(0)),
        };
        g.apply_augmentation(&[e]).unwrap();
        // dirbit vectors whose last direction is -Y: {-Y}, {+X,-Y}, {-X,-Y}
        assert_eq!(g.edge_count(), before + 3);
    }

    #[test]
    fn augmentation_rejects_bad_shapes() {
        let topo = Arc::new(Topology::torus(&[3, 3]).unwrap());
        let mut g = RoutingGraph::build(&topo);
        let at = |c: &[usize]| topo.node_at(c).unwrap();
        // mixed signs: -Y then +X
        let mixed = CdgEdge {
            from: topo.channel_index(at(&[1, 1]), Direction::minus(1)),
            to: topo.channel_index(at(&[1, 0]), Direction::plus(0)),
        };
        assert!(matches!(
            g.apply_augmentation(&[mixed]),
            Err(Error::Augmentation(_))
        ));
        // order-preserving turn
        let ordered = CdgEdge {
            from: topo.channel_index(at(&[0, 0]), Direction::plus(0)),
            to: topo.channel_index(at(&[1, 0]), Direction::plus(1)),
        };
        assert!(g.apply_augmentation(&[ordered]).is_err());
        // not consecutive
        let apart = CdgEdge {
            from: topo.channel_index(at(&[0, 0]), Direction::plus(1)),
            to: topo.channel_index(at(&[2, 2]), Direction::plus(0)),
        };
        assert!(g.apply_augmentation(&[apart]).is_err());
        assert!(g.augmentation().is_empty());
    }

    #[test]
    fn adding_a_fault_never_adds_edges() {
        let free = rg(&[3, 4]);
        let topo = Topology::new(&[3, 4], [NodeId(5)], [(NodeId(0), Direction::plus(1))]).unwrap();
        let faulty = RoutingGraph::build(&Arc::new(topo));
        for v in 0..free.vertex_count() as VertexId {
            for e in faulty.out_edges(v) {
                assert!(free.out_edges(v).contains(e));
            }
        }
    }

    #[test]
    fn dump_format() {
        let g = rg(&[2]);
        let dump = g.dump(None);
        assert!(dump.contains("(0):begin -> (1):dirbit[+X] w=0 link=(0) +X aug=0\n"));
        assert!(dump.contains("(1):dirbit[+X] -> (1):end w=0 link=none aug=0\n"));
    }
}
