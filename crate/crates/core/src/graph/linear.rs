use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix6, Vector6};

use super::{residual, CalibEdge, CalibGraph, NodeId};
use crate::error::{Error, Result};
use crate::lie::{se3_right_jacobian_inv, Twist};

/// How edge Jacobians are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum JacobianMode {
    /// Closed form with the exact inverse right Jacobian of SE(3).
    #[default]
    Analytic,
    /// `Jr⁻¹(e) ≈ I + ½ ad(e)`, accurate for small residuals.
    SmallResidual,
    /// Central differences with step 1e-6.
    Numeric,
}

const NUMERIC_STEP: f64 = 1e-6;

/// Residual of one edge and its derivatives with respect to right
/// perturbations of the two endpoint poses.
#[derive(Clone, Copy, Debug)]
pub struct EdgeLinearization {
    pub error: Twist,
    pub d_from: Matrix6<f64>,
    pub d_to: Matrix6<f64>,
}

pub fn edge_jacobians(
    graph: &CalibGraph,
    edge: &CalibEdge,
    mode: JacobianMode,
) -> Result<EdgeLinearization> {
    let ti = graph.pose(edge.from)?;
    let tj = graph.pose(edge.to)?;
    let error = residual(&edge.measurement, &ti, &tj)?;
    let (d_from, d_to) = match mode {
        JacobianMode::Analytic | JacobianMode::SmallResidual => {
            let jr_inv = if mode == JacobianMode::Analytic {
                se3_right_jacobian_inv(&error)
            } else {
                Matrix6::identity() + error.ad() * 0.5
            };
            // T_i exp(δ) enters as exp(-Ad(T_j⁻¹ T_i) δ) on the right of the error pose.
            let ad = (tj.inverse() * ti).adjoint();
            (-jr_inv * ad, jr_inv)
        }
        JacobianMode::Numeric => {
            let mut d_from = Matrix6::zeros();
            let mut d_to = Matrix6::zeros();
            for k in 0..6 {
                let mut step = Vector6::zeros();
                step[k] = NUMERIC_STEP;
                let (plus, minus) = (Twist(step), Twist(-step));
                let ei_p = residual(&edge.measurement, &ti.retract(&plus)?, &tj)?.0;
                let ei_m = residual(&edge.measurement, &ti.retract(&minus)?, &tj)?.0;
                let ej_p = residual(&edge.measurement, &ti, &tj.retract(&plus)?)?.0;
                let ej_m = residual(&edge.measurement, &ti, &tj.retract(&minus)?)?.0;
                d_from.set_column(k, &((ei_p - ei_m) / (2.0 * NUMERIC_STEP)));
                d_to.set_column(k, &((ej_p - ej_m) / (2.0 * NUMERIC_STEP)));
            }
            (d_from, d_to)
        }
    };
    Ok(EdgeLinearization {
        error,
        d_from,
        d_to,
    })
}

/// Normal equations `H Δ = -b` over the free nodes, stored as 6×6 blocks.
///
/// Only blocks on or above the diagonal are kept; `h()` assembles the full
/// dense matrix.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    free: Vec<NodeId>,
    blocks: BTreeMap<(usize, usize), Matrix6<f64>>,
    rhs: Vec<Vector6<f64>>,
    cost: f64,
}

impl LinearSystem {
    /// Free node ids; block `k` of the system belongs to `free_nodes()[k]`.
    pub fn free_nodes(&self) -> &[NodeId] {
        &self.free
    }

    pub fn dim(&self) -> usize {
        6 * self.free.len()
    }

    /// Block `(row, col)` of H, if structurally nonzero.
    pub fn block(&self, row: usize, col: usize) -> Option<Matrix6<f64>> {
        if row <= col {
            self.blocks.get(&(row, col)).copied()
        } else {
            self.blocks.get(&(col, row)).map(|b| b.transpose())
        }
    }

    pub fn h(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        for (&(r, c), b) in &self.blocks {
            h.fixed_view_mut::<6, 6>(6 * r, 6 * c).copy_from(b);
            if r != c {
                h.fixed_view_mut::<6, 6>(6 * c, 6 * r).copy_from(&b.transpose());
            }
        }
        h
    }

    pub fn b(&self) -> DVector<f64> {
        let mut b = DVector::zeros(self.dim());
        for (k, v) in self.rhs.iter().enumerate() {
            b.fixed_rows_mut::<6>(6 * k).copy_from(v);
        }
        b
    }

    /// Objective value at the linearization point.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    fn add_block(&mut self, r: usize, c: usize, m: Matrix6<f64>) {
        let (key, m) = if r <= c { ((r, c), m) } else { ((c, r), m.transpose()) };
        *self.blocks.entry(key).or_insert_with(Matrix6::zeros) += m;
    }
}

/// `H = Σ JᵀΩJ`, `b = Σ JᵀΩe` with analytic Jacobians.
pub fn linearize(graph: &CalibGraph) -> Result<LinearSystem> {
    linearize_with(graph, JacobianMode::Analytic)
}

pub fn linearize_with(graph: &CalibGraph, mode: JacobianMode) -> Result<LinearSystem> {
    if graph.nodes().iter().all(|n| !n.fixed) {
        return Err(Error::NoFixedNode);
    }
    let mut slot_of = vec![None; graph.nodes().len()];
    let mut free = Vec::new();
    for node in graph.nodes() {
        if !node.fixed {
            slot_of[graph.slot(node.id).unwrap()] = Some(free.len());
            free.push(node.id);
        }
    }
    let mut sys = LinearSystem {
        rhs: vec![Vector6::zeros(); free.len()],
        free,
        blocks: BTreeMap::new(),
        cost: 0.0,
    };
    for edge in graph.edges() {
        let lin = edge_jacobians(graph, edge, mode)?;
        let omega = &edge.information;
        let weighted = omega * lin.error.0;
        sys.cost += lin.error.0.dot(&weighted);
        let i = slot_of[graph.slot(edge.from).unwrap()];
        let j = slot_of[graph.slot(edge.to).unwrap()];
        let ji_t_omega = lin.d_from.transpose() * omega;
        let jj_t_omega = lin.d_to.transpose() * omega;
        if let Some(i) = i {
            sys.add_block(i, i, ji_t_omega * lin.d_from);
            sys.rhs[i] += lin.d_from.transpose() * weighted;
        }
        if let Some(j) = j {
            sys.add_block(j, j, jj_t_omega * lin.d_to);
            sys.rhs[j] += lin.d_to.transpose() * weighted;
        }
        if let (Some(i), Some(j)) = (i, j) {
            sys.add_block(i, j, ji_t_omega * lin.d_to);
        }
    }
    Ok(sys)
}
