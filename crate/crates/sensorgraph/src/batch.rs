//! Parallel execution of the synthetic study and its CSV output.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use sensorgraph_core::synth::{evaluate, generate_rig, trial_rng, RigSpec, TrialResult};
use sensorgraph_core::{Error, SolverOptions};

use crate::formats::graph::save_graph;
use crate::formats::FileError;

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    File(#[from] FileError),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs every trial of `spec`, in parallel when `threads` allows, and returns
/// the outcomes in trial order. With `graphs_dir`, each generated graph is
/// saved as `trial_NNNN.graph` with ground-truth vertex poses.
pub fn run_batch(
    spec: &RigSpec,
    opts: &SolverOptions,
    threads: Option<usize>,
    graphs_dir: Option<&Path>,
) -> Result<Vec<Result<TrialResult, Error>>, BatchError> {
    spec.validate()?;
    let trial = |i: usize| -> Result<Result<TrialResult, Error>, FileError> {
        let rig = match generate_rig(spec, &mut trial_rng(spec.seed, i)) {
            Ok(rig) => rig,
            Err(e) => return Ok(Err(e)),
        };
        if let Some(dir) = graphs_dir {
            save_graph(&dir.join(format!("trial_{i:04}.graph")), &rig.graph)?;
        }
        Ok(evaluate(&rig, opts))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()?;
    let results: Result<Vec<_>, FileError> =
        pool.install(|| (0..spec.trials).into_par_iter().map(trial).collect());
    Ok(results?)
}

#[derive(Serialize)]
struct Row<'a> {
    trial: usize,
    status: &'a str,
    injected_translation_sq_error: Option<f64>,
    injected_rotation_sq_error: Option<f64>,
    optimized_translation_sq_error: Option<f64>,
    optimized_rotation_sq_error: Option<f64>,
    node_translation_sq_error: Option<f64>,
    node_rotation_sq_error: Option<f64>,
    initial_cost: Option<f64>,
    final_cost: Option<f64>,
    iterations: Option<usize>,
    converged: Option<bool>,
    error: String,
}

/// One CSV row per trial after a header; failed trials leave the numeric
/// columns empty and carry the error message.
pub fn write_csv<W: Write>(out: W, results: &[Result<TrialResult, Error>]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (trial, r) in results.iter().enumerate() {
        let row = match r {
            Ok(t) => Row {
                trial,
                status: "ok",
                injected_translation_sq_error: Some(t.injected_translation_sq_error),
                injected_rotation_sq_error: Some(t.injected_rotation_sq_error),
                optimized_translation_sq_error: Some(t.optimized_translation_sq_error),
                optimized_rotation_sq_error: Some(t.optimized_rotation_sq_error),
                node_translation_sq_error: Some(t.node_translation_sq_error),
                node_rotation_sq_error: Some(t.node_rotation_sq_error),
                initial_cost: Some(t.initial_cost),
                final_cost: Some(t.final_cost),
                iterations: Some(t.iterations),
                converged: Some(t.converged),
                error: String::new(),
            },
            Err(e) => Row {
                trial,
                status: "failed",
                injected_translation_sq_error: None,
                injected_rotation_sq_error: None,
                optimized_translation_sq_error: None,
                optimized_rotation_sq_error: None,
                node_translation_sq_error: None,
                node_rotation_sq_error: None,
                initial_cost: None,
                final_cost: None,
                iterations: None,
                converged: None,
                error: e.to_string(),
            },
        };
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
