use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DVector, Vector6};

use super::linear::{linearize_with, JacobianMode, LinearSystem};
use super::{total_cost, CalibGraph};
use crate::error::{Error, Result};
use crate::lie::Twist;

const LAMBDA_MIN: f64 = 1e-20;
const LAMBDA_MAX: f64 = 1e30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Initial Levenberg-Marquardt damping.
    pub lambda0: f64,
    /// Stop when a step changes the cost by less than this fraction.
    pub relative_cost_tolerance: f64,
    /// Stop when the largest update component falls below this.
    pub step_tolerance: f64,
    pub jacobian: JacobianMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 100,
            lambda0: 1e-4,
            relative_cost_tolerance: 1e-10,
            step_tolerance: 1e-12,
            jacobian: JacobianMode::Analytic,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Current cost after each iteration, accepted or not.
    pub cost_trace: Vec<f64>,
    /// `‖b‖∞` at the returned poses.
    pub gradient_norm: f64,
    pub final_lambda: f64,
}

/// Levenberg-Marquardt on the graph objective.
///
/// Each iteration solves `(H + λ diag(H)) Δ = -b` and applies
/// `T_k ← T_k · exp(Δ_k)` to every free node. A step is kept when it does not
/// increase the cost; λ is divided by 10 on acceptance and multiplied by 10 on
/// rejection.
pub fn optimize(graph: &CalibGraph, opts: &SolverOptions) -> Result<(CalibGraph, SolveReport)> {
    graph.check_connected()?;
    if graph.fixed_ids().is_empty() {
        return Err(Error::NoFixedNode);
    }
    let mut current = graph.clone();
    let mut cost = total_cost(&current)?;
    let initial_cost = cost;
    let mut lambda = opts.lambda0;
    let mut trace = Vec::new();
    let mut converged = cost == 0.0;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let sys = linearize_with(&current, opts.jacobian)?;
        if sys.dim() == 0 {
            converged = true;
            break;
        }
        let delta = damped_step(&sys, lambda)?;
        let step = delta.amax();
        let candidate = apply_step(&current, &sys, &delta)?;
        // a step that leaves the logarithm's principal branch counts as a rejection
        let new_cost = total_cost(&candidate).unwrap_or(f64::INFINITY);

        // rounding-level changes end the run whether or not the step is kept
        let change = if cost > 0.0 { (cost - new_cost).abs() / cost } else { 0.0 };
        let negligible = change < opts.relative_cost_tolerance || step < opts.step_tolerance;
        if new_cost <= cost {
            current = candidate;
            cost = new_cost;
            lambda = (lambda / 10.0).max(LAMBDA_MIN);
            converged = cost == 0.0 || negligible;
        } else {
            lambda *= 10.0;
            converged = negligible;
            if lambda > LAMBDA_MAX {
                trace.push(cost);
                break;
            }
        }
        trace.push(cost);
    }

    let gradient_norm = if current.fixed_ids().len() == current.nodes().len() {
        0.0
    } else {
        linearize_with(&current, opts.jacobian)?.b().amax()
    };
    let report = SolveReport {
        initial_cost,
        final_cost: cost,
        iterations,
        converged,
        cost_trace: trace,
        gradient_norm,
        final_lambda: lambda,
    };
    Ok((current, report))
}

fn damped_step(sys: &LinearSystem, lambda: f64) -> Result<DVector<f64>> {
    let mut h = sys.h();
    for k in 0..h.nrows() {
        h[(k, k)] *= 1.0 + lambda;
    }
    let chol = Cholesky::new(h).ok_or_else(|| {
        Error::NumericalFailure(format!(
            "damped system is not positive definite (lambda = {lambda:e})"
        ))
    })?;
    let delta = -chol.solve(&sys.b());
    if delta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite update".into()));
    }
    Ok(delta)
}

fn apply_step(graph: &CalibGraph, sys: &LinearSystem, delta: &DVector<f64>) -> Result<CalibGraph> {
    let mut out = graph.clone();
    for (k, &id) in sys.free_nodes().iter().enumerate() {
        let xi = Twist(Vector6::from_iterator(delta.rows(6 * k, 6).iter().copied()));
        let pose = out.pose(id)?.retract(&xi)?;
        out.set_pose(id, pose)?;
    }
    Ok(out)
}
