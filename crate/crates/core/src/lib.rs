//! Deadlock-free deterministic routing tables for n-dimensional tori.
//!
//! Routes follow the direction order `+X +Y +Z +K -X -Y -Z -K`, never use both
//! signs of a dimension, and may deviate from the order only in a positive
//! first step or a negative last step. The [`routing_graph`] turns those rules
//! into plain graph reachability, [`cdg`] decides which order violations are
//! safe, and [`algorithms`] build balanced tables on top.

pub mod algorithms;
pub mod cdg;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod routes;
pub mod routing_graph;
pub mod topology;

pub use algorithms::{Algorithm, Generated, GeneticParams, Options, Prepared};
pub use cdg::{Cdg, CdgEdge};
pub use error::{Error, Result};
pub use metrics::{LoadReport, TrafficPattern};
pub use oracle::{EquivalenceReport, RuleConfig};
pub use routes::{Route, RouteViolation, RoutingTable};
pub use routing_graph::{DirbitVector, RgVertex, RoutingGraph, VertexId, VertexKind};
pub use topology::{Channel, Direction, NodeId, Topology};
