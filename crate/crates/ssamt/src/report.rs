//! JSON documents written by the commands. Field order in the structs is the
//! key order in the files.

use std::path::Path;

use serde::Serialize;
use ssamt_core::{DenoisingScore, Dof, MtpReport, SimReport, TestResult};

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub dataset: String,
    pub preprocessing: Preprocessing,
    pub tests: Vec<TestEntry>,
    pub procedures: Vec<ProcedureEntry>,
    pub diagnostics: Diagnostics,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Preprocessing {
    pub method: String,
    /// A single window length, or one per variable or group, or null.
    #[serde(rename = "L")]
    pub window: serde_json::Value,
    /// A single rank, one per variable or group, or null.
    pub rank: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestEntry {
    pub variable_name: String,
    pub statistic: f64,
    pub dof: Vec<f64>,
    pub p_value: f64,
    pub kind: &'static str,
}

impl From<&TestResult> for TestEntry {
    fn from(t: &TestResult) -> Self {
        Self {
            variable_name: t.variable_name.clone(),
            statistic: t.statistic,
            dof: match t.dof {
                Dof::One(v) => vec![v],
                Dof::Two(a, b) => vec![a, b],
            },
            p_value: t.p_value,
            kind: t.kind.as_str(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProcedureEntry {
    pub procedure: &'static str,
    pub alpha: f64,
    pub decisions: Vec<bool>,
    pub rejection_count: usize,
    pub adjusted_thresholds: Vec<f64>,
}

impl From<&MtpReport> for ProcedureEntry {
    fn from(r: &MtpReport) -> Self {
        Self {
            procedure: r.procedure.as_str(),
            alpha: r.alpha,
            decisions: r.decisions.clone(),
            rejection_count: r.rejection_count,
            adjusted_thresholds: r.adjusted_thresholds.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub variables: Vec<VariableDiagnostics>,
}

/// Goodness in dB, or the affine-fit marker.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Decibels {
    Finite(f64),
    Marker(&'static str),
}

pub const AFFINE_MARKER: &str = "inf (affine fit)";

#[derive(Debug, Clone, Serialize)]
pub struct VariableDiagnostics {
    pub variable: String,
    pub goodness_db: Option<Decibels>,
    pub snr: Option<f64>,
    pub roughness: Option<f64>,
    pub w_correlation: Option<f64>,
}

impl VariableDiagnostics {
    pub fn with_score(variable: String, score: Option<DenoisingScore>, w_correlation: Option<f64>) -> Self {
        Self {
            variable,
            goodness_db: score.map(|s| {
                if s.affine {
                    Decibels::Marker(AFFINE_MARKER)
                } else {
                    Decibels::Finite(s.goodness_db)
                }
            }),
            snr: score.map(|s| s.snr),
            roughness: score.map(|s| s.roughness),
            w_correlation,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ImputationReport {
    pub dataset: String,
    #[serde(rename = "L")]
    pub window: Option<usize>,
    pub variables: Vec<ImputedVariable>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImputedVariable {
    pub variable: String,
    pub missing: usize,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub last_change: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub model: &'static str,
    #[serde(rename = "N")]
    pub length: usize,
    pub sigma: f64,
    pub seed: u64,
    pub replications: usize,
    pub rank_rule: String,
    pub windows: Vec<usize>,
    pub mean_rmse: Vec<f64>,
    pub mean_rank: Vec<f64>,
}

impl SimulationReport {
    pub fn new(r: &SimReport, rank_rule: String) -> Self {
        Self {
            model: r.model.as_str(),
            length: r.length,
            sigma: r.sigma,
            seed: r.seed,
            replications: r.replications,
            rank_rule,
            windows: r.windows.clone(),
            mean_rmse: r.mean_rmse.clone(),
            mean_rank: r.mean_rank.clone(),
        }
    }
}

pub fn write_json(value: &impl Serialize, path: &Path) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}
