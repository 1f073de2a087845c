//! Fusion of pairwise sensor-to-sensor extrinsic calibrations into one
//! globally consistent set of SE(3) sensor poses.
//!
//! The crate is `no_std` (it needs `alloc`). It contains:
//!
//! * [`lie`]: SO(3)/SE(3) exponential and logarithm maps, Jacobians, sampling.
//! * [`graph`]: the calibration hypergraph, spanning-tree initialization and a
//!   Levenberg-Marquardt refinement of all sensor poses.
//! * [`handeye`]: an `AX = XB` solver for sensor pairs without overlap.
//! * [`resample`]: Jackknife variance of a pairwise estimate and the diagonal
//!   information matrix derived from it.
//! * [`validate`]: calibration quality metrics.
//! * [`synth`]: synthetic rigs and the Monte-Carlo noise study.
//!
//! File formats, reports and the command line live in the `sensorgraph` crate.
#![no_std]
// `!(x > 0.0)` deliberately treats NaN as out of range
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod graph;
pub mod handeye;
pub mod lie;
pub mod resample;
pub mod synth;
pub mod validate;

pub use nalgebra;

pub use error::{Error, Result};
pub use graph::{CalibEdge, CalibGraph, EdgeKind, NodeId, SensorNode, SolveReport, SolverOptions};
pub use lie::{Pose, Rotation, Twist};
