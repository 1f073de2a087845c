//! Run configuration: an optional JSON file whose values command-line flags
//! override.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "solver": { "max_iterations": 100, "lambda0": 1e-4, "jacobian": "analytic" },
//!   "optimize": { "init": "tree" },
//!   "jackknife": { "variance_floor": 1e-10 },
//!   "synth": { "nodes": 4, "topology": "complete", "sigma_trans": 0.05,
//!              "sigma_rot": 0.05, "trials": 300, "threads": 4 }
//! }
//! ```
//!
//! Every key is optional and unknown keys are rejected.

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use sensorgraph_core::graph::JacobianMode;
use sensorgraph_core::resample::DEFAULT_VARIANCE_FLOOR;
use sensorgraph_core::synth::{RigSpec, Topology};
use sensorgraph_core::{NodeId, SolverOptions};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: std::path::PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub solver: SolverConfig,
    pub optimize: OptimizeConfig,
    pub jackknife: JackknifeConfig,
    pub synth: SynthConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| ConfigError::Json {
            path: path.to_owned(),
            source,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum JacobianChoice {
    Analytic,
    SmallResidual,
    Numeric,
}

impl From<JacobianChoice> for JacobianMode {
    fn from(c: JacobianChoice) -> Self {
        match c {
            JacobianChoice::Analytic => JacobianMode::Analytic,
            JacobianChoice::SmallResidual => JacobianMode::SmallResidual,
            JacobianChoice::Numeric => JacobianMode::Numeric,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Iteration cap for Levenberg-Marquardt.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    /// Initial damping.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    /// Stop when a step changes the cost by less than this fraction.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_cost_tolerance: Option<f64>,
    /// Stop when the largest update component is below this.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_tolerance: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<JacobianChoice>,
}

impl SolverConfig {
    /// Values of `over` where present, otherwise ours.
    pub fn overridden_by(&self, over: &SolverConfig) -> SolverConfig {
        SolverConfig {
            max_iterations: over.max_iterations.or(self.max_iterations),
            lambda0: over.lambda0.or(self.lambda0),
            relative_cost_tolerance: over.relative_cost_tolerance.or(self.relative_cost_tolerance),
            step_tolerance: over.step_tolerance.or(self.step_tolerance),
            jacobian: over.jacobian.or(self.jacobian),
        }
    }

    pub fn options(&self) -> Result<SolverOptions, ConfigError> {
        let d = SolverOptions::default();
        let opts = SolverOptions {
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            lambda0: self.lambda0.unwrap_or(d.lambda0),
            relative_cost_tolerance: self.relative_cost_tolerance.unwrap_or(d.relative_cost_tolerance),
            step_tolerance: self.step_tolerance.unwrap_or(d.step_tolerance),
            jacobian: self.jacobian.map_or(d.jacobian, Into::into),
        };
        if opts.max_iterations == 0 {
            return Err(invalid("max_iterations must be at least 1"));
        }
        if !(opts.lambda0 > 0.0 && opts.lambda0.is_finite()) {
            return Err(invalid("lambda0 must be positive and finite"));
        }
        for (name, v) in [
            ("relative_cost_tolerance", opts.relative_cost_tolerance),
            ("step_tolerance", opts.step_tolerance),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be non-negative and finite")));
            }
        }
        Ok(opts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Start from the poses in the file.
    File,
    /// Chain measurements along the maximum-information spanning tree.
    Tree,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<InitMode>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JackknifeConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance_floor: Option<f64>,
}

impl JackknifeConfig {
    pub fn floor(&self) -> Result<f64, ConfigError> {
        let f = self.variance_floor.unwrap_or(DEFAULT_VARIANCE_FLOOR);
        if f > 0.0 && f.is_finite() {
            Ok(f)
        } else {
            Err(invalid("variance_floor must be positive and finite"))
        }
    }
}

/// `"complete"` or a list of `[from, to]` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopologyConfig {
    Named(String),
    Edges(Vec<[NodeId; 2]>),
}

impl TopologyConfig {
    pub fn topology(&self) -> Result<Topology, ConfigError> {
        match self {
            TopologyConfig::Named(s) => parse_topology(s),
            TopologyConfig::Edges(e) => Ok(Topology::Edges(e.iter().map(|[a, b]| (*a, *b)).collect())),
        }
    }
}

/// `complete`, or comma-separated `from-to` pairs such as `0-1,1-2,2-0`.
pub fn parse_topology(s: &str) -> Result<Topology, ConfigError> {
    if s == "complete" {
        return Ok(Topology::Complete);
    }
    let mut edges = Vec::new();
    for pair in s.split(',') {
        let (a, b) = pair
            .split_once('-')
            .ok_or_else(|| invalid(format!("topology edge {pair:?} is not of the form a-b")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<NodeId>()
                .map_err(|_| invalid(format!("topology edge {pair:?}: {t:?} is not a node id")))
        };
        edges.push((parse(a)?, parse(b)?));
    }
    Ok(Topology::Edges(edges))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_trans: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_rot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl SynthConfig {
    pub fn overridden_by(&self, over: &SynthConfig) -> SynthConfig {
        SynthConfig {
            nodes: over.nodes.or(self.nodes),
            topology: over.topology.clone().or_else(|| self.topology.clone()),
            sigma_trans: over.sigma_trans.or(self.sigma_trans),
            sigma_rot: over.sigma_rot.or(self.sigma_rot),
            trials: over.trials.or(self.trials),
            threads: over.threads.or(self.threads),
        }
    }

    pub fn spec(&self, seed: Option<u64>) -> Result<RigSpec, ConfigError> {
        let d = RigSpec::default();
        let spec = RigSpec {
            node_count: self.nodes.unwrap_or(d.node_count),
            topology: match &self.topology {
                Some(t) => t.topology()?,
                None => d.topology,
            },
            noise_sigma: d.noise_sigma,
            trials: self.trials.unwrap_or(d.trials),
            seed: seed.unwrap_or(d.seed),
        }
        .with_sigma(
            self.sigma_trans.unwrap_or(d.noise_sigma[0]),
            self.sigma_rot.unwrap_or(d.noise_sigma[3]),
        );
        spec.validate().map_err(|e| invalid(e.to_string()))?;
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1"));
        }
        Ok(spec)
    }
}
