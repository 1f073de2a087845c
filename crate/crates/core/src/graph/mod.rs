//! The calibration hypergraph: one node per sensor frame, one edge per
//! pairwise calibration result.
//!
//! The residual of an edge `i → j` with measurement `Z` is
//! `e = log(Z⁻¹ · T_i⁻¹ · T_j)`, and the objective is `Σ eᵀ Ω e`.

mod linear;
mod solver;
mod tree;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{Matrix6, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lie::{Pose, Twist};

pub use linear::{edge_jacobians, linearize, linearize_with, EdgeLinearization, JacobianMode, LinearSystem};
pub use solver::{optimize, SolveReport, SolverOptions};
pub use tree::{spanning_tree, spanning_tree_init};

pub type NodeId = u32;

/// Which pairwise procedure produced an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Stereo,
    HandEye,
    LidarCamera,
    LidarLidar,
    Tracking,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 5] = [
        EdgeKind::Stereo,
        EdgeKind::HandEye,
        EdgeKind::LidarCamera,
        EdgeKind::LidarLidar,
        EdgeKind::Tracking,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeKind::Stereo => "stereo",
            EdgeKind::HandEye => "handeye",
            EdgeKind::LidarCamera => "lidar_camera",
            EdgeKind::LidarLidar => "lidar_lidar",
            EdgeKind::Tracking => "tracking",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EdgeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(alloc::format!("unknown edge kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensorNode {
    pub id: NodeId,
    pub label: String,
    /// Sensor frame with respect to the common reference frame.
    pub pose: Pose,
    /// Held constant during optimization.
    pub fixed: bool,
}

impl SensorNode {
    pub fn new(id: NodeId, pose: Pose) -> Self {
        SensorNode {
            id,
            label: String::new(),
            pose,
            fixed: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibEdge {
    pub from: NodeId,
    pub to: NodeId,
    /// Pose of frame `to` expressed in frame `from`.
    pub measurement: Pose,
    /// 6×6 information matrix, translation block first.
    pub information: Matrix6<f64>,
    pub kind: Option<EdgeKind>,
}

impl CalibEdge {
    pub fn new(from: NodeId, to: NodeId, measurement: Pose, information: Matrix6<f64>) -> Self {
        CalibEdge {
            from,
            to,
            measurement,
            information,
            kind: None,
        }
    }

    pub fn with_kind(mut self, kind: EdgeKind) -> Self {
        self.kind = Some(kind);
        self
    }

    fn check(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidEdge {
            from: self.from,
            to: self.to,
            reason: reason.into(),
        };
        if self.from == self.to {
            return Err(bad("self loop"));
        }
        let info = &self.information;
        if info.iter().any(|v| !v.is_finite()) {
            return Err(bad("information matrix is not finite"));
        }
        let scale = info.abs().max().max(1.0);
        if (info - info.transpose()).abs().max() > 1e-9 * scale {
            return Err(bad("information matrix is not symmetric"));
        }
        let min_eig = SymmetricEigen::new(*info).eigenvalues.min();
        if min_eig < -1e-9 * scale {
            return Err(bad("information matrix has a negative eigenvalue"));
        }
        Ok(())
    }
}

/// Sensor nodes plus calibration edges. Parallel edges between one pair of
/// nodes are allowed and each contributes its own term.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CalibGraph {
    nodes: Vec<SensorNode>,
    edges: Vec<CalibEdge>,
    index: BTreeMap<NodeId, usize>,
}

impl CalibGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, node: SensorNode) -> Result<()> {
        if self.index.contains_key(&node.id) {
            return Err(Error::DuplicateNode(node.id));
        }
        self.index.insert(node.id, self.nodes.len());
        self.nodes.push(node);
        Ok(())
    }

    pub fn add_edge(&mut self, edge: CalibEdge) -> Result<()> {
        edge.check()?;
        for id in [edge.from, edge.to] {
            if !self.index.contains_key(&id) {
                return Err(Error::UnknownNode(id));
            }
        }
        self.edges.push(edge);
        Ok(())
    }

    pub fn nodes(&self) -> &[SensorNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[CalibEdge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&SensorNode> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut SensorNode> {
        self.index.get(&id).map(|&i| &mut self.nodes[i])
    }

    pub fn pose(&self, id: NodeId) -> Result<Pose> {
        self.node(id).map(|n| n.pose).ok_or(Error::UnknownNode(id))
    }

    pub fn set_pose(&mut self, id: NodeId, pose: Pose) -> Result<()> {
        self.node_mut(id).ok_or(Error::UnknownNode(id))?.pose = pose;
        Ok(())
    }

    pub fn set_fixed(&mut self, id: NodeId, fixed: bool) -> Result<()> {
        self.node_mut(id).ok_or(Error::UnknownNode(id))?.fixed = fixed;
        Ok(())
    }

    pub fn fixed_ids(&self) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.fixed).map(|n| n.id).collect()
    }

    /// Node ids in increasing order.
    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.index.keys().copied()
    }

    pub(crate) fn slot(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Connected components, each sorted by id, ordered by smallest id.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut sets = DisjointSets::new(self.nodes.len());
        for e in &self.edges {
            sets.union(self.index[&e.from], self.index[&e.to]);
        }
        let mut groups: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
        for id in self.ids() {
            let root = sets.find(self.index[&id]);
            groups.entry(root).or_default().push(id);
        }
        let mut out: Vec<Vec<NodeId>> = groups.into_values().collect();
        out.sort_by_key(|c| c[0]);
        out
    }

    pub fn check_connected(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::EmptyInput("graph has no nodes"));
        }
        let components = self.components();
        if components.len() > 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(())
    }
}

/// `log(Z⁻¹ · T_from⁻¹ · T_to)`.
pub fn edge_error(graph: &CalibGraph, edge: &CalibEdge) -> Result<Twist> {
    let ti = graph.pose(edge.from)?;
    let tj = graph.pose(edge.to)?;
    residual(&edge.measurement, &ti, &tj)
}

pub(crate) fn residual(measurement: &Pose, ti: &Pose, tj: &Pose) -> Result<Twist> {
    (measurement.inverse() * ti.inverse() * *tj).log()
}

/// Information-weighted squared error summed over all edges.
pub fn total_cost(graph: &CalibGraph) -> Result<f64> {
    graph.edges.iter().try_fold(0.0, |acc, edge| {
        let e = edge_error(graph, edge)?.0;
        Ok(acc + e.dot(&(edge.information * e)))
    })
}

/// Chains edge measurements along `path`, inverting those traversed
/// against their direction. Between two nodes the lowest-index edge is used.
pub fn compose_along_path(graph: &CalibGraph, path: &[NodeId]) -> Result<Pose> {
    let first = *path.first().ok_or(Error::EmptyInput("path"))?;
    graph.pose(first)?;
    path.windows(2).try_fold(Pose::identity(), |acc, w| {
        let (a, b) = (w[0], w[1]);
        let step = graph
            .edges
            .iter()
            .find_map(|e| {
                if e.from == a && e.to == b {
                    Some(e.measurement)
                } else if e.from == b && e.to == a {
                    Some(e.measurement.inverse())
                } else {
                    None
                }
            })
            .ok_or(Error::MissingEdge { from: a, to: b })?;
        Ok(acc * step)
    })
}

/// Maps `estimate` into the gauge of `reference` so that the two agree
/// exactly at index `anchor`.
pub fn gauge_align(estimate: &[Pose], reference: &[Pose], anchor: usize) -> Vec<Pose> {
    let g = reference[anchor] * estimate[anchor].inverse();
    estimate.iter().map(|p| g * *p).collect()
}

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}
