//! Synthetic rigs and the Monte-Carlo noise study.
//!
//! A rig is a set of ground-truth sensor poses plus noisy relative-pose
//! measurements on a chosen set of edges. A trial initializes the graph from a
//! spanning tree, optimizes it, and compares the squared edge residuals after
//! optimization with the squared noise that was injected.

use alloc::vec::Vec;

use nalgebra::{Matrix6, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    edge_error, gauge_align, optimize, spanning_tree_init, CalibEdge, CalibGraph, NodeId,
    SensorNode, SolverOptions,
};
use crate::handeye::MotionPair;
use crate::lie::{sample_perturbation, sample_rotation, Pose, Rotation};
use crate::resample::{information_from_variance, DEFAULT_VARIANCE_FLOOR};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Topology {
    /// Every pair `(i, j)` with `i < j`.
    Complete,
    Edges(Vec<(NodeId, NodeId)>),
}

impl Topology {
    pub fn pairs(&self, node_count: usize) -> Vec<(NodeId, NodeId)> {
        match self {
            Topology::Complete => {
                let n = node_count as NodeId;
                (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
            }
            Topology::Edges(e) => e.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigSpec {
    pub node_count: usize,
    pub topology: Topology,
    /// Per-component measurement noise, translation first (m, rad).
    pub noise_sigma: Vector6<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for RigSpec {
    fn default() -> Self {
        RigSpec {
            node_count: 4,
            topology: Topology::Complete,
            noise_sigma: Vector6::repeat(0.05),
            trials: 300,
            seed: 7,
        }
    }
}

impl RigSpec {
    pub fn with_sigma(mut self, translation: f64, rotation: f64) -> Self {
        self.noise_sigma = Vector6::new(
            translation,
            translation,
            translation,
            rotation,
            rotation,
            rotation,
        );
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::invalid("a rig needs at least 2 nodes"));
        }
        if NodeId::try_from(self.node_count).is_err() {
            return Err(Error::invalid("too many nodes"));
        }
        if self.trials < 1 {
            return Err(Error::invalid("at least one trial is required"));
        }
        if self.noise_sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::invalid("noise sigma must be finite and non-negative"));
        }
        for (a, b) in self.topology.pairs(self.node_count) {
            if a == b {
                return Err(Error::invalid("topology has a self loop"));
            }
            for id in [a, b] {
                if id as usize >= self.node_count {
                    return Err(Error::UnknownNode(id));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticRig {
    pub ground_truth: Vec<Pose>,
    /// Node poses start at the ground truth; node 0 is fixed.
    pub graph: CalibGraph,
    /// Noise twist applied to each edge, in edge order.
    pub injected: Vec<Vector6<f64>>,
}

/// Samples ground-truth poses and right-perturbed measurements for `spec`.
pub fn generate_rig<R: Rng + ?Sized>(spec: &RigSpec, rng: &mut R) -> Result<SyntheticRig> {
    spec.validate()?;
    let ground_truth: Vec<Pose> = (0..spec.node_count).map(|_| random_pose(rng)).collect();
    let variance = spec.noise_sigma.component_mul(&spec.noise_sigma);
    let information: Matrix6<f64> = information_from_variance(&variance, DEFAULT_VARIANCE_FLOOR)?;

    let mut graph = CalibGraph::new();
    for (i, pose) in ground_truth.iter().enumerate() {
        graph.add_node(SensorNode::new(i as NodeId, *pose))?;
    }
    graph.set_fixed(0, true)?;

    let mut injected = Vec::new();
    for (a, b) in spec.topology.pairs(spec.node_count) {
        let truth = ground_truth[a as usize].inverse() * ground_truth[b as usize];
        let xi = sample_perturbation(&spec.noise_sigma, rng)?;
        graph.add_edge(CalibEdge::new(a, b, truth.retract(&xi)?, information))?;
        injected.push(xi.0);
    }
    Ok(SyntheticRig {
        ground_truth,
        graph,
        injected,
    })
}

/// Uniform rotation, translation uniform in `[-1, 1]³`.
pub fn random_pose<R: Rng + ?Sized>(rng: &mut R) -> Pose {
    let rotation = sample_rotation(rng);
    let t = Vector3::new(
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
    );
    Pose::new(rotation, t)
}

/// `count` motion pairs `A = X B X⁻¹`, with `B` rotating 0.2 to 1.5 rad about
/// a random axis. Nonzero `sigma` right-perturbs both motions independently.
pub fn generate_motion_pairs<R: Rng + ?Sized>(
    x: &Pose,
    count: usize,
    sigma: &Vector6<f64>,
    rng: &mut R,
) -> Result<Vec<MotionPair>> {
    let x_inv = x.inverse();
    let noisy = sigma.iter().any(|s| *s != 0.0);
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let axis = sample_rotation(rng).rotate(&Vector3::z());
        let angle = rng.random_range(0.2..1.5);
        let t = Vector3::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        let mut b = Pose::new(Rotation::from_axis_angle(&axis, angle)?, t);
        let mut a = *x * b * x_inv;
        if noisy {
            a = a.retract(&sample_perturbation(sigma, rng)?)?;
            b = b.retract(&sample_perturbation(sigma, rng)?)?;
        }
        pairs.push(MotionPair::new(a, b));
    }
    Ok(pairs)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialResult {
    /// Σ over edges of the squared injected translation noise (m²).
    pub injected_translation_sq_error: f64,
    /// Σ over edges of the squared injected angle-axis noise (rad²).
    pub injected_rotation_sq_error: f64,
    /// Σ over edges of the squared translation residual at the optimum.
    pub optimized_translation_sq_error: f64,
    /// Σ over edges of the squared rotation residual at the optimum.
    pub optimized_rotation_sq_error: f64,
    /// Σ over nodes of squared distance to ground truth after gauge alignment.
    pub node_translation_sq_error: f64,
    pub node_rotation_sq_error: f64,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl TrialResult {
    pub fn translation_improved(&self) -> bool {
        self.optimized_translation_sq_error < self.injected_translation_sq_error
    }

    pub fn rotation_improved(&self) -> bool {
        self.optimized_rotation_sq_error < self.injected_rotation_sq_error
    }
}

/// Random stream for one trial: seeded by the spec, one stream per trial
/// index, so trials can run in any order.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub fn run_trial(spec: &RigSpec, trial: usize, opts: &SolverOptions) -> Result<TrialResult> {
    let mut rng = trial_rng(spec.seed, trial);
    let rig = generate_rig(spec, &mut rng)?;
    evaluate(&rig, opts)
}

/// Spanning-tree initialization and optimization of `rig.graph`, scored
/// against its injected noise and ground truth.
pub fn evaluate(rig: &SyntheticRig, opts: &SolverOptions) -> Result<TrialResult> {
    let init = spanning_tree_init(&rig.graph, 0)?;
    let (optimized, report) = optimize(&init, opts)?;

    let (mut injected_t, mut injected_r) = (0.0, 0.0);
    for xi in &rig.injected {
        let (t, r) = split_sq(xi);
        injected_t += t;
        injected_r += r;
    }
    let (mut optimized_t, mut optimized_r) = (0.0, 0.0);
    for edge in optimized.edges() {
        let (t, r) = split_sq(&edge_error(&optimized, edge)?.0);
        optimized_t += t;
        optimized_r += r;
    }
    let estimate: Vec<Pose> = optimized.nodes().iter().map(|n| n.pose).collect();
    let (mut node_t, mut node_r) = (0.0, 0.0);
    for (e, t) in gauge_align(&estimate, &rig.ground_truth, 0).iter().zip(&rig.ground_truth) {
        let (angle, dist) = e.distance(t);
        node_t += dist * dist;
        node_r += angle * angle;
    }

    Ok(TrialResult {
        injected_translation_sq_error: injected_t,
        injected_rotation_sq_error: injected_r,
        optimized_translation_sq_error: optimized_t,
        optimized_rotation_sq_error: optimized_r,
        node_translation_sq_error: node_t,
        node_rotation_sq_error: node_r,
        initial_cost: report.initial_cost,
        final_cost: report.final_cost,
        iterations: report.iterations,
        converged: report.converged,
    })
}

fn split_sq(v: &Vector6<f64>) -> (f64, f64) {
    let t = v.fixed_rows::<3>(0).norm_squared();
    let r = v.fixed_rows::<3>(3).norm_squared();
    (t, r)
}

/// All trials of `spec` in index order. A failing trial yields its error in
/// place without stopping the batch.
pub fn run_trials(spec: &RigSpec, opts: &SolverOptions) -> Result<Vec<Result<TrialResult>>> {
    spec.validate()?;
    Ok((0..spec.trials).map(|i| run_trial(spec, i, opts)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Result<Stats> {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return Err(Error::EmptyInput("values"));
        }
        let n = values.len() as f64;
        // shifted by the first value so constant input gives exactly zero spread
        let shift = values[0];
        let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Stats {
            mean,
            variance,
            min,
            max,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub trials: usize,
    pub injected_translation: Stats,
    pub injected_rotation: Stats,
    pub optimized_translation: Stats,
    pub optimized_rotation: Stats,
    pub node_translation: Stats,
    pub node_rotation: Stats,
    /// Fraction of trials whose optimized error is below the injected error.
    pub translation_improved: f64,
    pub rotation_improved: f64,
}

pub fn summarize(results: &[TrialResult]) -> Result<Summary> {
    if results.is_empty() {
        return Err(Error::EmptyInput("trial results"));
    }
    let stats = |f: fn(&TrialResult) -> f64| Stats::of(results.iter().map(f));
    let fraction = |f: fn(&TrialResult) -> bool| {
        results.iter().filter(|r| f(r)).count() as f64 / results.len() as f64
    };
    Ok(Summary {
        trials: results.len(),
        injected_translation: stats(|r| r.injected_translation_sq_error)?,
        injected_rotation: stats(|r| r.injected_rotation_sq_error)?,
        optimized_translation: stats(|r| r.optimized_translation_sq_error)?,
        optimized_rotation: stats(|r| r.optimized_rotation_sq_error)?,
        node_translation: stats(|r| r.node_translation_sq_error)?,
        node_rotation: stats(|r| r.node_rotation_sq_error)?,
        translation_improved: fraction(TrialResult::translation_improved),
        rotation_improved: fraction(TrialResult::rotation_improved),
    })
}
