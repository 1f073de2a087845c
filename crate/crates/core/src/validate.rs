//! Calibration quality metrics.

use alloc::vec::Vec;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{edge_error, CalibGraph, EdgeKind};
use crate::lie::Pose;

/// Unit normal of a plane observed in one sensor frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneObservation {
    normal: Vector3<f64>,
}

impl PlaneObservation {
    /// Normalizes `normal`; rejects zero-length or non-finite input.
    pub fn new(normal: Vector3<f64>) -> Result<Self> {
        let n = normal.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::invalid("plane normal must be finite and nonzero"));
        }
        Ok(PlaneObservation { normal: normal / n })
    }

    pub fn normal(&self) -> &Vector3<f64> {
        &self.normal
    }
}

/// Matched points: `target[i]` should equal `t · source[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCorrespondences {
    source: Vec<Vector3<f64>>,
    target: Vec<Vector3<f64>>,
}

impl PointCorrespondences {
    pub fn new(source: Vec<Vector3<f64>>, target: Vec<Vector3<f64>>) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::invalid(alloc::format!(
                "{} source points but {} target points",
                source.len(),
                target.len()
            )));
        }
        if source.is_empty() {
            return Err(Error::EmptyInput("point correspondences"));
        }
        Ok(PointCorrespondences { source, target })
    }

    pub fn source(&self) -> &[Vector3<f64>] {
        &self.source
    }

    pub fn target(&self) -> &[Vector3<f64>] {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }
}

/// Cosine between `n1` and `n2` carried into the first frame by the rotation
/// of `t`. Close to 1 for a good calibration.
pub fn normal_alignment(n1: &Vector3<f64>, n2: &Vector3<f64>, t: &Pose) -> Result<f64> {
    let (a, b) = (n1.norm(), n2.norm());
    if a == 0.0 || b == 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("normals must be finite and nonzero"));
    }
    let d = n1.dot(&t.rotation.rotate(n2)) / (a * b);
    Ok(d.clamp(-1.0, 1.0))
}

/// Mean of `‖p_t − (R p_s + t)‖` over all correspondences.
pub fn point_residual(corr: &PointCorrespondences, t: &Pose) -> f64 {
    let sum: f64 = corr
        .source
        .iter()
        .zip(&corr.target)
        .map(|(s, p)| (p - t.act(s)).norm())
        .sum();
    sum / corr.len() as f64
}

/// Unweighted mean squared edge error `(1/N_E) Σ ‖e_i‖²`.
pub fn global_error(graph: &CalibGraph) -> Result<f64> {
    let edges = graph.edges();
    if edges.is_empty() {
        return Err(Error::EmptyInput("graph edges"));
    }
    let mut sum = 0.0;
    for edge in edges {
        sum += edge_error(graph, edge)?.0.norm_squared();
    }
    Ok(sum / edges.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KindResidual {
    /// `None` collects untagged edges.
    pub kind: Option<EdgeKind>,
    pub edges: usize,
    /// `sqrt(mean ‖e‖²)` over the edges of this kind.
    pub rms: f64,
}

/// Residual RMS per edge kind, in kind order with untagged edges first.
/// Kinds without edges are omitted.
pub fn residuals_by_kind(graph: &CalibGraph) -> Result<Vec<KindResidual>> {
    let mut out: Vec<KindResidual> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for edge in graph.edges() {
        let sq = edge_error(graph, edge)?.0.norm_squared();
        match out.binary_search_by(|r| r.kind.cmp(&edge.kind)) {
            Ok(k) => {
                out[k].edges += 1;
                sums[k] += sq;
            }
            Err(k) => {
                out.insert(
                    k,
                    KindResidual {
                        kind: edge.kind,
                        edges: 1,
                        rms: 0.0,
                    },
                );
                sums.insert(k, sq);
            }
        }
    }
    for (r, s) in out.iter_mut().zip(sums) {
        r.rms = (s / r.edges as f64).sqrt();
    }
    Ok(out)
}
