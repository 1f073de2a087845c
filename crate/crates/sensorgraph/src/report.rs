//! JSON run reports.
//!
//! Every command can emit a [`RunReport`]. The layout is versioned by
//! `schema_version` and described by `docs/run-report.schema.json`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sensorgraph_core::handeye::HandEyeResult;
use sensorgraph_core::resample::VarianceEstimate;
use sensorgraph_core::synth::{Stats, Summary};
use sensorgraph_core::validate::KindResidual;
use sensorgraph_core::Pose;

pub const SCHEMA_VERSION: u32 = 1;

/// The published JSON schema for [`RunReport`].
pub const SCHEMA: &str = include_str!("../../../docs/run-report.schema.json");

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {found}, expected {SCHEMA_VERSION}")]
    Version { found: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    /// Input role to path.
    pub inputs: BTreeMap<String, String>,
    /// Effective configuration after flags and config file are merged.
    pub config: serde_json::Value,
    pub metrics: Metrics,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command: command.to_owned(),
            inputs: BTreeMap::new(),
            config: serde_json::Value::Object(Default::default()),
            metrics: Metrics::default(),
            timing: Timing::default(),
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) {
        self.inputs.insert(role.to_owned(), path.display().to_string());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports hold only finite numbers")
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let report: RunReport = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(ReportError::Version {
                found: report.schema_version,
            });
        }
        Ok(report)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Metrics {
    /// Information-weighted objective before optimization.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_cost: Option<f64>,
    /// Unweighted mean squared edge error before optimization.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_error_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_error_after: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_rms_by_kind: Option<Vec<KindRms>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub handeye: Option<HandEyeMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jackknife: Option<JackknifeMetrics>,
    /// Normal alignment of each plane pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_alignment: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthMetrics>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    pub translation: [f64; 3],
    /// Scalar-last, `w ≥ 0`.
    pub quaternion: [f64; 4],
}

impl From<&Pose> for PoseRecord {
    fn from(p: &Pose) -> Self {
        PoseRecord {
            translation: p.translation.into(),
            quaternion: p.rotation.xyzw(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindRms {
    /// Edge kind, or `untagged`.
    pub kind: String,
    pub edges: usize,
    pub rms: f64,
}

impl From<&KindResidual> for KindRms {
    fn from(r: &KindResidual) -> Self {
        KindRms {
            kind: r.kind.map_or_else(|| "untagged".to_owned(), |k| k.to_string()),
            edges: r.edges,
            rms: r.rms,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandEyeMetrics {
    pub pairs: usize,
    pub x: PoseRecord,
    pub rotation_residual_rms: f64,
    pub translation_residual_rms: f64,
    /// Smallest singular value of the stacked translation system.
    pub condition_indicator: f64,
}

impl HandEyeMetrics {
    pub fn new(pairs: usize, r: &HandEyeResult) -> Self {
        HandEyeMetrics {
            pairs,
            x: (&r.x).into(),
            rotation_residual_rms: r.rotation_residual_rms,
            translation_residual_rms: r.translation_residual_rms,
            condition_indicator: r.condition_indicator,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JackknifeMetrics {
    pub m: usize,
    pub estimate: PoseRecord,
    pub rho_hat: [f64; 6],
    pub variance: [f64; 6],
    pub information_diagonal: [f64; 6],
}

impl JackknifeMetrics {
    pub fn new(v: &VarianceEstimate, information_diagonal: [f64; 6]) -> Self {
        JackknifeMetrics {
            m: v.m,
            estimate: (&v.reference).into(),
            rho_hat: v.rho_hat.0.into(),
            variance: v.variance.into(),
            information_diagonal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsRecord {
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl From<&Stats> for StatsRecord {
    fn from(s: &Stats) -> Self {
        StatsRecord {
            mean: s.mean,
            variance: s.variance,
            min: s.min,
            max: s.max,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthMetrics {
    pub trials: usize,
    pub failed: usize,
    pub injected_translation_sq_error: StatsRecord,
    pub injected_rotation_sq_error: StatsRecord,
    pub optimized_translation_sq_error: StatsRecord,
    pub optimized_rotation_sq_error: StatsRecord,
    pub node_translation_sq_error: StatsRecord,
    pub node_rotation_sq_error: StatsRecord,
    pub translation_improved_fraction: f64,
    pub rotation_improved_fraction: f64,
}

impl SynthMetrics {
    pub fn new(s: &Summary, failed: usize) -> Self {
        SynthMetrics {
            trials: s.trials + failed,
            failed,
            injected_translation_sq_error: (&s.injected_translation).into(),
            injected_rotation_sq_error: (&s.injected_rotation).into(),
            optimized_translation_sq_error: (&s.optimized_translation).into(),
            optimized_rotation_sq_error: (&s.optimized_rotation).into(),
            node_translation_sq_error: (&s.node_translation).into(),
            node_rotation_sq_error: (&s.node_rotation).into(),
            translation_improved_fraction: s.translation_improved,
            rotation_improved_fraction: s.rotation_improved,
        }
    }
}
