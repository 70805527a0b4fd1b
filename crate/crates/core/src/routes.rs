//! Routes in first-step / body / last-step form, and routing tables holding
//! one route per ordered node pair.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::cdg::CdgEdge;
use crate::error::{Error, Result};
use crate::routing_graph::{RoutingGraph, VertexId, VertexKind};
use crate::topology::{Direction, NodeId, Topology};

/// A route written as `src, [first step], body..., [last step]`.
///
/// The body follows the direction order and never uses both signs of one
/// dimension. The optional first step is positive and the optional last step
/// negative; either may break the order where the dependency graph allows it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Route {
    pub src: NodeId,
    pub dst: NodeId,
    pub fs: Option<Direction>,
    pub body: Vec<Direction>,
    pub ls: Option<Direction>,
    /// Visited nodes, `src` first and `dst` last.
    pub nodes: Vec<NodeId>,
}

/// A rule broken by a route; `step` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteViolation {
    #[error("step {step}: link is absent or failed")]
    DeadLink { step: usize },
    #[error("node sequence does not match the steps at position {at}")]
    NodeMismatch { at: usize },
    #[error("route ends at the wrong node")]
    WrongEndpoint,
    #[error("empty route between distinct nodes, or a route from a node to itself")]
    Empty,
    #[error("first step must be a positive direction")]
    FirstStepSign,
    #[error("last step must be a negative direction")]
    LastStepSign,
    #[error("a last step needs a non-empty body before it")]
    Shape,
    #[error("step {step}: direction order violated")]
    Order { step: usize },
    #[error("step {step}: both signs of one dimension used")]
    DirectionBit { step: usize },
}

impl Route {
    /// Route from `src` along the given steps over live links.
    pub fn walk(
        topo: &Topology,
        src: NodeId,
        fs: Option<Direction>,
        body: Vec<Direction>,
        ls: Option<Direction>,
    ) -> std::result::Result<Route, RouteViolation> {
        let mut nodes = vec![src];
        let mut at = src;
        for (i, dir) in fs.iter().chain(&body).chain(&ls).enumerate() {
            at = topo
                .neighbor(at, *dir)
                .ok_or(RouteViolation::DeadLink { step: i + 1 })?;
            nodes.push(at);
        }
        Ok(Route {
            src,
            dst: at,
            fs,
            body,
            ls,
            nodes,
        })
    }

    pub fn steps(&self) -> impl Iterator<Item = Direction> + '_ {
        self.fs.iter().chain(&self.body).chain(&self.ls).copied()
    }

    /// Hop count.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Channel slots traversed, in order. Assumes the node sequence is valid.
    pub fn channels<'a>(&'a self, topo: &'a Topology) -> impl Iterator<Item = usize> + 'a {
        self.nodes
            .iter()
            .zip(self.steps())
            .map(|(&u, d)| topo.channel_index(u, d))
    }

    /// Adjacent step pairs with different directions.
    pub fn turn_count(&self) -> usize {
        let steps: Vec<Direction> = self.steps().collect();
        steps.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Whether the route uses a first or last step.
    pub fn is_non_standard(&self) -> bool {
        self.fs.is_some() || self.ls.is_some()
    }

    /// `(0,0) -> (1,1) : FS(+Y) +X | nodes: (0,0) (0,1) (1,1)`.
    pub fn format(&self, topo: &Topology) -> String {
        let mut out = format!(
            "{} -> {} :",
            topo.format_node(self.src),
            topo.format_node(self.dst)
        );
        if let Some(d) = self.fs {
            write!(out, " FS({d})").unwrap();
        }
        for d in &self.body {
            write!(out, " {d}").unwrap();
        }
        if let Some(d) = self.ls {
            write!(out, " LS({d})").unwrap();
        }
        out.push_str(" | nodes:");
        for &u in &self.nodes {
            write!(out, " {}", topo.format_node(u)).unwrap();
        }
        out
    }

    /// Parse one table line written by [`Route::format`].
    pub fn parse(topo: &Topology, line: &str) -> std::result::Result<Route, String> {
        let (head, nodes_part) = line
            .split_once("| nodes:")
            .ok_or("missing '| nodes:' section")?;
        let (pair, steps_part) = head.split_once(" : ").ok_or("missing ' : ' separator")?;
        let (src, dst) = pair.split_once("->").ok_or("missing '->'")?;
        let src = topo.parse_node(src.trim()).map_err(|e| e.to_string())?;
        let dst = topo.parse_node(dst.trim()).map_err(|e| e.to_string())?;

        let mut fs = None;
        let mut ls = None;
        let mut body = Vec::new();
        let dir = |t: &str| -> std::result::Result<Direction, String> {
            let d: Direction = t.parse().map_err(|e: Error| e.to_string())?;
            if d.dim() >= topo.n() {
                return Err(format!("direction {t} outside the topology"));
            }
            Ok(d)
        };
        for token in steps_part.split_whitespace() {
            if let Some(inner) = token.strip_prefix("FS(").and_then(|t| t.strip_suffix(')')) {
                if fs.is_some() || !body.is_empty() || ls.is_some() {
                    return Err("FS must come first and only once".into());
                }
                fs = Some(dir(inner)?);
            } else if let Some(inner) = token.strip_prefix("LS(").and_then(|t| t.strip_suffix(')'))
            {
                if ls.is_some() {
                    return Err("LS given twice".into());
                }
                ls = Some(dir(inner)?);
            } else {
                if ls.is_some() {
                    return Err("LS must be the final step".into());
                }
                body.push(dir(token)?);
            }
        }

        // coordinates may contain spaces, so split on the closing parenthesis
        let mut nodes = Vec::new();
        for part in nodes_part.split(')') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            nodes.push(topo.parse_node(part).map_err(|e| e.to_string())?);
        }
        if nodes.first() != Some(&src) || nodes.last() != Some(&dst) {
            return Err("node list must start at the source and end at the destination".into());
        }
        Ok(Route {
            src,
            dst,
            fs,
            body,
            ls,
            nodes,
        })
    }
}

/// Check a route against the routing rules. `relaxed` lists the
/// order-violating turns (as channel dependencies) that are permitted.
pub fn validate_route(
    topo: &Topology,
    route: &Route,
    relaxed: &[CdgEdge],
) -> std::result::Result<(), RouteViolation> {
    let steps: Vec<Direction> = route.steps().collect();
    if steps.is_empty() || route.src == route.dst {
        return Err(RouteViolation::Empty);
    }
    if route.nodes.len() != steps.len() + 1 || route.nodes[0] != route.src {
        return Err(RouteViolation::NodeMismatch { at: 0 });
    }
    let mut channels = Vec::with_capacity(steps.len());
    for (i, &d) in steps.iter().enumerate() {
        let u = route.nodes[i];
        match topo.neighbor(u, d) {
            None => return Err(RouteViolation::DeadLink { step: i + 1 }),
            Some(v) if v != route.nodes[i + 1] => {
                return Err(RouteViolation::NodeMismatch { at: i + 1 })
            }
            Some(_) => channels.push(topo.channel_index(u, d)),
        }
    }
    if *route.nodes.last().unwrap() != route.dst {
        return Err(RouteViolation::WrongEndpoint);
    }
    if route.fs.is_some_and(|d| !d.is_positive()) {
        return Err(RouteViolation::FirstStepSign);
    }
    if route.ls.is_some_and(|d| d.is_positive()) {
        return Err(RouteViolation::LastStepSign);
    }
    if route.ls.is_some() && route.body.is_empty() {
        return Err(RouteViolation::Shape);
    }

    let offset = usize::from(route.fs.is_some());
    let mut used = [0i8; crate::topology::MAX_DIMS];
    for (i, &d) in route.body.iter().enumerate() {
        let step = offset + i + 1;
        if i > 0 && d < route.body[i - 1] {
            return Err(RouteViolation::Order { step });
        }
        match used[d.dim()] {
            0 => used[d.dim()] = d.sign(),
            s if s != d.sign() => return Err(RouteViolation::DirectionBit { step }),
            _ => {}
        }
    }

    let turn_ok = |prev: Direction, next: Direction, at: usize| {
        (next > prev && next != prev.opposite())
            || relaxed.contains(&CdgEdge {
                from: channels[at - 1],
                to: channels[at],
            })
    };
    if let (Some(fs), Some(&first)) = (route.fs, route.body.first()) {
        if !turn_ok(fs, first, 1) {
            return Err(RouteViolation::Order { step: 2 });
        }
    }
    if let (Some(ls), Some(&last)) = (route.ls, route.body.last()) {
        if !turn_ok(last, ls, steps.len() - 1) {
            return Err(RouteViolation::Order { step: steps.len() });
        }
    }
    Ok(())
}

/// Read a route off a `Begin -> ... -> End` path of the routing graph.
pub fn decode_rg_path(rg: &RoutingGraph, path: &[VertexId]) -> Result<Route> {
    let bad = |msg: &str| Error::MalformedPath(msg.to_string());
    let (&first, &last) = path
        .first()
        .zip(path.last())
        .ok_or_else(|| bad("empty path"))?;
    let src = rg.vertex(first);
    let dst = rg.vertex(last);
    if src.kind != VertexKind::Begin || dst.kind != VertexKind::End {
        return Err(bad("path must run from a begin vertex to an end vertex"));
    }

    let mut fs = None;
    let mut ls = None;
    let mut body = Vec::new();
    let mut nodes = vec![src.node];
    for (i, w) in path.windows(2).enumerate() {
        let edge = rg
            .out_edges(w[0])
            .iter()
            .find(|e| e.to == w[1])
            .ok_or_else(|| Error::MalformedPath(format!("no edge at position {i}")))?;
        let to = rg.vertex(w[1]);
        let is_last = i + 2 == path.len();
        match (to.kind, edge.link()) {
            (VertexKind::End, None) if is_last => break,
            (VertexKind::Fs(d), Some(_)) if i == 0 => fs = Some(d),
            (VertexKind::Dirbit(v), Some(_)) if ls.is_none() => body.push(v.last_direction()),
            (VertexKind::Ls(d), Some(_)) if ls.is_none() => ls = Some(d),
            _ => {
                return Err(Error::MalformedPath(format!(
                    "unexpected {} at position {}",
                    to.kind,
                    i + 1
                )))
            }
        }
        nodes.push(to.node);
    }
    if nodes.last() != Some(&dst.node) {
        return Err(bad("end vertex is not at the final node"));
    }
    Ok(Route {
        src: src.node,
        dst: dst.node,
        fs,
        body,
        ls,
        nodes,
    })
}

/// The routing-graph path a route corresponds to, if every edge exists.
pub fn encode_rg_path(rg: &RoutingGraph, route: &Route) -> Result<Vec<VertexId>> {
    let mut path = vec![rg.begin(route.src)];
    let mut hist = None;
    let mut idx = 1;
    if let Some(d) = route.fs {
        path.push(rg.id(route.nodes[idx], VertexKind::Fs(d)));
        idx += 1;
    }
    for &d in &route.body {
        let next = match hist {
            None => crate::routing_graph::DirbitVector::single(d),
            Some(h) => crate::routing_graph::DirbitVector::with(h, d)
                .ok_or_else(|| Error::MalformedPath(format!("direction-bit conflict at {d}")))?,
        };
        hist = Some(next);
        path.push(rg.id(route.nodes[idx], VertexKind::Dirbit(next)));
        idx += 1;
    }
    if let Some(d) = route.ls {
        path.push(rg.id(route.nodes[idx], VertexKind::Ls(d)));
    }
    path.push(rg.end(route.dst));
    for w in path.windows(2) {
        if !rg.out_edges(w[0]).iter().any(|e| e.to == w[1]) {
            return Err(Error::MalformedPath(format!(
                "no edge {} -> {}",
                rg.vertex(w[0]).kind,
                rg.vertex(w[1]).kind
            )));
        }
    }
    Ok(path)
}

/// One route per ordered pair of distinct live nodes.
#[derive(Debug, Clone)]
pub struct RoutingTable {
    topo: Arc<Topology>,
    slots: Vec<Option<Route>>,
}

impl PartialEq for RoutingTable {
    fn eq(&self, other: &Self) -> bool {
        self.slots == other.slots && self.topo.to_spec_string() == other.topo.to_spec_string()
    }
}

impl Eq for RoutingTable {}

impl RoutingTable {
    pub fn new(topo: &Arc<Topology>) -> Self {
        let n = topo.node_slots();
        RoutingTable {
            topo: Arc::clone(topo),
            slots: vec![None; n * n],
        }
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topo
    }

    fn slot(&self, src: NodeId, dst: NodeId) -> usize {
        src.index() * self.topo.node_slots() + dst.index()
    }

    /// Store a route, replacing any previous one for the same pair.
    pub fn insert(&mut self, route: Route) {
        let s = self.slot(route.src, route.dst);
        self.slots[s] = Some(route);
    }

    pub fn get(&self, src: NodeId, dst: NodeId) -> Option<&Route> {
        self.slots[self.slot(src, dst)].as_ref()
    }

    /// Routes ordered by `(src, dst)`.
    pub fn iter(&self) -> impl Iterator<Item = &Route> {
        self.slots.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ordered live pairs without a route.
    pub fn missing_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for &s in self.topo.nodes() {
            for &d in self.topo.nodes() {
                if s != d && self.get(s, d).is_none() {
                    out.push((s, d));
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in self.iter() {
            out.push_str(&r.format(&self.topo));
            out.push('\n');
        }
        out
    }

    /// Parse the text form. Blank lines and `#` comments are skipped.
    pub fn from_text(topo: &Arc<Topology>, text: &str) -> Result<Self> {
        let mut table = RoutingTable::new(topo);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let route =
                Route::parse(topo, line).map_err(|msg| Error::Parse { line: i + 1, msg })?;
            if table.get(route.src, route.dst).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "duplicate pair".into(),
                });
            }
            table.insert(route);
        }
        Ok(table)
    }
}

/// Outcome of checking a full table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableCheck {
    pub missing: Vec<(NodeId, NodeId)>,
    pub violations: Vec<((NodeId, NodeId), RouteViolation)>,
    /// Pairs whose route is longer than the shortest rule-compliant route:
    /// `(pair, route length, shortest length)`.
    pub non_minimal: Vec<((NodeId, NodeId), usize, usize)>,
    /// Pairs whose shortest rule-compliant route is longer than the hop
    /// distance; only faults can cause this.
    pub detours: Vec<(NodeId, NodeId)>,
}

impl TableCheck {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.violations.is_empty() && self.non_minimal.is_empty()
    }
}

/// Completeness, rule validity and minimality of `table` against the
/// (possibly augmented) routing graph `rg`.
pub fn check_table(table: &RoutingTable, rg: &RoutingGraph) -> TableCheck {
    let topo = table.topology();
    let relaxed = rg.augmentation();
    let mut check = TableCheck {
        missing: table.missing_pairs(),
        ..Default::default()
    };
    for &src in topo.nodes() {
        let hops = rg.hop_distances(rg.begin(src));
        let dist = topo.distances_from(src);
        for &dst in topo.nodes() {
            if dst == src {
                continue;
            }
            let rule_min = hops[rg.end(dst) as usize];
            if rule_min != u32::MAX && dist[dst.index()].is_some_and(|d| d + 1 < rule_min) {
                check.detours.push((src, dst));
            }
            let Some(route) = table.get(src, dst) else {
                continue;
            };
            if let Err(v) = validate_route(topo, route, relaxed) {
                check.violations.push(((src, dst), v));
                continue;
            }
            if rule_min != u32::MAX && route.len() + 1 > rule_min as usize {
                check
                    .non_minimal
                    .push(((src, dst), route.len(), rule_min as usize - 1));
            }
        }
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdg::Cdg;

    fn topo(dims: &[usize]) -> Arc<Topology> {
        Arc::new(Topology::torus(dims).unwrap())
    }

    fn at(t: &Topology, c: &[usize]) -> NodeId {
        t.node_at(c).unwrap()
    }

    const PX: Direction = Direction::plus(0);
    const PY: Direction = Direction::plus(1);
    const MX: Direction = Direction::minus(0);

    #[test]
    fn validate_examples() {
        let t = topo(&[3, 3]);
        let src = at(&t, &[0, 0]);
        let ok = Route::walk(&t, src, None, vec![PX, PY], None).unwrap();
        assert_eq!(validate_route(&t, &ok, &[]), Ok(()));
        let swapped = Route::walk(&t, src, None, vec![PY, PX], None).unwrap();
        assert_eq!(
            validate_route(&t, &swapped, &[]),
            Err(RouteViolation::Order { step: 2 })
        );
        let back = Route::walk(&t, src, None, vec![PX, PY, MX], None).unwrap();
        assert_eq!(
            validate_route(&t, &back, &[]),
            Err(RouteViolation::DirectionBit { step: 3 })
        );
    }

    #[test]
    fn relaxed_turn_admits_first_step() {
        let t = topo(&[3, 3]);
        let src = at(&t, &[1, 0]);
        let r = Route::walk(&t, src, Some(PY), vec![PX], None).unwrap();
        assert_eq!(r.dst, at(&t, &[2, 1]));
        assert_eq!(
            validate_route(&t, &r, &[]),
            Err(RouteViolation::Order { step: 2 })
        );
        let turn = CdgEdge {
            from: t.channel_index(src, PY),
            to: t.channel_index(at(&t, &[1, 1]), PX),
        };
        assert_eq!(validate_route(&t, &r, &[turn]), Ok(()));
    }

    #[test]
    fn turn_counts() {
        let t = topo(&[4, 4]);
        let s = at(&t, &[0, 0]);
        assert_eq!(
            Route::walk(&t, s, None, vec![PX, PX], None)
                .unwrap()
                .turn_count(),
            0
        );
        assert_eq!(
            Route::walk(&t, s, None, vec![PX, PY], None)
                .unwrap()
                .turn_count(),
            1
        );
        assert_eq!(
            Route::walk(&t, s, Some(PY), vec![PX], None)
                .unwrap()
                .turn_count(),
            1
        );
    }

    #[test]
    fn decode_plain_and_first_step_paths() {
        let t = topo(&[3, 3]);
        let mut rg = RoutingGraph::build(&t);
        let (a, b) = (at(&t, &[0, 0]), at(&t, &[1, 0]));
        let path = [
            rg.begin(a),
            rg.id(b, VertexKind::Dirbit(crate::DirbitVector::single(PX))),
            rg.end(b),
        ];
        let r = decode_rg_path(&rg, &path).unwrap();
        assert_eq!((r.fs, r.body.clone(), r.ls), (None, vec![PX], None));
        assert_eq!(encode_rg_path(&rg, &r).unwrap(), path);

        let turn = CdgEdge {
            from: t.channel_index(at(&t, &[1, 0]), PY),
            to: t.channel_index(at(&t, &[1, 1]), PX),
        };
        rg.apply_augmentation(&[turn]).unwrap();
        let path = [
            rg.begin(at(&t, &[1, 0])),
            rg.id(at(&t, &[1, 1]), VertexKind::Fs(PY)),
            rg.id(
                at(&t, &[2, 1]),
                VertexKind::Dirbit(crate::DirbitVector::single(PX)),
            ),
            rg.end(at(&t, &[2, 1])),
        ];
        let r = decode_rg_path(&rg, &path).unwrap();
        assert_eq!((r.fs, r.body.clone()), (Some(PY), vec![PX]));
        assert_eq!(validate_route(&t, &r, rg.augmentation()), Ok(()));
    }

    #[test]
    fn decode_rejects_malformed() {
        let t = topo(&[3, 3]);
        let rg = RoutingGraph::build(&t);
        let a = at(&t, &[0, 0]);
        assert!(decode_rg_path(&rg, &[]).is_err());
        assert!(decode_rg_path(&rg, &[rg.end(a), rg.begin(a)]).is_err());
        // self route decodes but is empty
        let r = decode_rg_path(&rg, &[rg.begin(a), rg.end(a)]).unwrap();
        assert!(r.is_empty());
        assert_eq!(validate_route(&t, &r, &[]), Err(RouteViolation::Empty));
        // skipping a hop has no edge
        let far = rg.id(
            at(&t, &[2, 0]),
            VertexKind::Dirbit(crate::DirbitVector::single(PX)),
        );
        assert!(decode_rg_path(&rg, &[rg.begin(a), far, rg.end(at(&t, &[2, 0]))]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let t = topo(&[3, 3]);
        let mut table = RoutingTable::new(&t);
        let s = at(&t, &[0, 0]);
        table.insert(Route::walk(&t, s, None, vec![PX, PY], None).unwrap());
        table.insert(Route::walk(&t, s, Some(PY), vec![PX], Some(Direction::minus(1))).unwrap());
        let text = table.to_text();
        assert!(text.contains("(0,0) -> (1,1) : +X +Y | nodes: (0,0) (1,0) (1,1)\n"));
        assert!(
            text.contains("(0,0) -> (1,0) : FS(+Y) +X LS(-Y) | nodes: (0,0) (0,1) (1,1) (1,0)\n")
        );
        let back = RoutingTable::from_text(&t, &text).unwrap();
        assert_eq!(back, table);
        assert!(matches!(
            RoutingTable::from_text(&t, "(0,0) -> (1,1) +X"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn check_table_flags_problems() {
        let t = topo(&[3, 3]);
        let rg = RoutingGraph::build(&t);
        let s = at(&t, &[0, 0]);
        let mut table = RoutingTable::new(&t);
        table.insert(Route::walk(&t, s, None, vec![PX, PX, PX, PY], None).unwrap());
        table.insert(Route::walk(&t, s, None, vec![PY, PX], None).unwrap());
        let check = check_table(&table, &rg);
        assert_eq!(check.missing.len(), 72 - 2);
        assert_eq!(check.violations.len(), 1);
        assert_eq!(check.non_minimal, vec![((s, at(&t, &[0, 1])), 4, 1)]);
        assert!(check.detours.is_empty());
        assert!(!check.passed());
    }

    #[test]
    fn used_turns_are_dependencies() {
        let t = topo(&[2, 2]);
        let mut cdg = Cdg::build(&t);
        let added = cdg.augment();
        let s = at(&t, &[0, 0]);
        let r = Route::walk(&t, s, Some(PY), vec![PX], None).unwrap();
        assert_eq!(validate_route(&t, &r, &added), Ok(()));
        let ch: Vec<usize> = r.channels(&t).collect();
        assert!(cdg.has_edge(CdgEdge {
            from: ch[0],
            to: ch[1]
        }));
    }
}
