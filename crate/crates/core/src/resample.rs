//! Jackknife uncertainty of a pairwise calibration.
//!
//! Each of the `m` samples behind a pairwise estimate is left out in turn and
//! the estimate recomputed. The leave-one-out results are expressed as twists
//! `ρ_i` in the tangent space of the full-sample estimate, and the per-component
//! variance is `(m − 1)/m · Σ (ρ_i − ρ̂)²`. Its reciprocal becomes the diagonal
//! information matrix of the graph edge.

use alloc::vec::Vec;

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::handeye::{self, MotionPair};
use crate::lie::{Pose, Twist};

pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-10;

const MEAN_MAX_ITERATIONS: usize = 50;
const MEAN_TOLERANCE: f64 = 1e-12;

/// Computes a pairwise transform from a set of samples. Must be
/// deterministic for a given sample slice.
pub trait PairwiseEstimator {
    type Sample: Clone;

    /// Smallest sample count `estimate` accepts.
    fn min_samples(&self) -> usize {
        1
    }

    fn estimate(&self, samples: &[Self::Sample]) -> Result<Pose>;
}

/// Tangent-space mean of repeated direct measurements of one transform.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanPose;

impl PairwiseEstimator for MeanPose {
    type Sample = Pose;

    fn estimate(&self, samples: &[Pose]) -> Result<Pose> {
        tangent_mean(samples)
    }
}

/// Hand-eye solution over motion pairs.
#[derive(Clone, Copy, Debug, Default)]
pub struct HandEye;

impl PairwiseEstimator for HandEye {
    type Sample = MotionPair;

    fn min_samples(&self) -> usize {
        2
    }

    fn estimate(&self, samples: &[MotionPair]) -> Result<Pose> {
        Ok(handeye::solve(samples)?.x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceEstimate {
    /// Full-sample estimate; the `ρ_i` live in its tangent space.
    pub reference: Pose,
    /// Mean of the leave-one-out twists.
    pub rho_hat: Twist,
    /// Per-component variance, m² for translation and rad² for rotation.
    pub variance: Vector6<f64>,
    pub m: usize,
}

/// Leave-one-out variance of `estimator` over `samples`.
///
/// The `ρ_i` are summed in lexicographic order, so the reduction does not
/// depend on the order of `samples`.
pub fn jackknife<E: PairwiseEstimator>(
    estimator: &E,
    samples: &[E::Sample],
) -> Result<VarianceEstimate> {
    let m = samples.len();
    let needed = 3.max(estimator.min_samples() + 1);
    if m < needed {
        return Err(Error::TooFewSamples { needed, got: m });
    }
    let reference = estimator.estimate(samples)?;
    let reference_inv = reference.inverse();

    let mut subset: Vec<E::Sample> = Vec::with_capacity(m - 1);
    let mut rhos = Vec::with_capacity(m);
    for omitted in 0..m {
        subset.clear();
        subset.extend(
            samples
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != omitted)
                .map(|(_, s)| s.clone()),
        );
        let wrap = |e: Error| Error::LeaveOneOut {
            omitted,
            source: alloc::boxed::Box::new(e),
        };
        let estimate = estimator.estimate(&subset).map_err(wrap)?;
        rhos.push(relative_twist(&reference, &reference_inv, &estimate).map_err(wrap)?);
    }

    rhos.sort_by(lexicographic);
    let mut rho_hat = Vector6::zeros();
    for rho in &rhos {
        rho_hat += rho;
    }
    rho_hat /= m as f64;

    let mut sum_sq = Vector6::zeros();
    for rho in &rhos {
        let d = rho - rho_hat;
        sum_sq += d.component_mul(&d);
    }
    let variance = sum_sq * ((m - 1) as f64 / m as f64);

    Ok(VarianceEstimate {
        reference,
        rho_hat: Twist(rho_hat),
        variance,
        m,
    })
}

pub(crate) fn lexicographic(a: &Vector6<f64>, b: &Vector6<f64>) -> core::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(core::cmp::Ordering::Equal)
}

/// `log(base⁻¹ · p)`, exactly zero when `p` is `base`.
fn relative_twist(base: &Pose, base_inv: &Pose, p: &Pose) -> Result<Vector6<f64>> {
    if p == base {
        return Ok(Vector6::zeros());
    }
    Ok((*base_inv * *p).log()?.0)
}

/// Diagonal information matrix `diag(1 / max(σ²_k, floor))`.
pub fn information_from_variance(variance: &Vector6<f64>, floor: f64) -> Result<Matrix6<f64>> {
    if !(floor > 0.0) || !floor.is_finite() {
        return Err(Error::invalid("variance floor must be positive and finite"));
    }
    if variance.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("variance is NaN"));
    }
    Ok(Matrix6::from_diagonal(&variance.map(|v| 1.0 / v.max(floor))))
}

/// Iterated tangent-space mean `M ← M · exp(mean_i log(M⁻¹ P_i))`, started
/// at the first pose.
pub fn tangent_mean(poses: &[Pose]) -> Result<Pose> {
    let mut mean = *poses.first().ok_or(Error::EmptyInput("poses"))?;
    let n = poses.len() as f64;
    for _ in 0..MEAN_MAX_ITERATIONS {
        let inv = mean.inverse();
        let mut update = Vector6::zeros();
        for p in poses {
            update += relative_twist(&mean, &inv, p)?;
        }
        update /= n;
        if update.norm() < MEAN_TOLERANCE {
            return Ok(mean);
        }
        mean = mean.retract(&Twist(update))?;
    }
    Err(Error::NonConvergence {
        iterations: MEAN_MAX_ITERATIONS,
    })
}
