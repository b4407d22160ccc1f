//! JSON run report.
//!
//! `serde_json` maps are ordered by key, so the emitted document has sorted
//! keys at every level and is byte-stable for identical inputs.

use serde::Serialize;

use crate::config::{ModelConfig, ModelKind};
use crate::corpus::Corpus;
use crate::eval::EvalReport;
use crate::inference::ConvergenceTrace;

/// A percentage rendered to one decimal next to its full-precision value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Percent {
    pub display: String,
    pub value: f64,
}

impl From<f64> for Percent {
    fn from(value: f64) -> Self {
        Percent {
            display: format!("{value:.1}"),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub precision: Percent,
    pub recall: Percent,
    pub f1: Percent,
    pub r_value: Percent,
    pub purity: Percent,
    pub singleton_pct: Percent,
    pub nmi: Percent,
}

impl From<&EvalReport> for Metrics {
    fn from(r: &EvalReport) -> Self {
        Metrics {
            precision: r.precision.into(),
            recall: r.recall.into(),
            f1: r.f1.into(),
            r_value: r.r_value.into(),
            purity: r.purity.into(),
            singleton_pct: r.singleton_pct.into(),
            nmi: r.nmi.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSummary {
    pub iterations: usize,
    pub final_max_kl: f64,
    pub converged: bool,
    pub max_kl_trace: Vec<f64>,
}

impl From<&ConvergenceTrace> for ConvergenceSummary {
    fn from(t: &ConvergenceTrace) -> Self {
        ConvergenceSummary {
            iterations: t.iterations(),
            final_max_kl: t.final_max_kl(),
            converged: t.converged,
            max_kl_trace: t.max_kl.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub utterances: usize,
    pub total_frames: usize,
    pub vocab_size: usize,
    pub num_units: usize,
}

impl CorpusStats {
    pub fn new(corpus: &Corpus, num_units: usize) -> Self {
        CorpusStats {
            utterances: corpus.len(),
            total_frames: corpus.total_frames(),
            vocab_size: corpus.vocab_size(),
            num_units,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub seed: u64,
    #[serde(flatten)]
    pub model_config: ModelConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSettings {
    pub frame_ms: u64,
    pub tolerance_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RunReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvalSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusStats>,
}

impl RunReport {
    /// Pretty-printed JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report is serialisable");
        let mut s = serde_json::to_string_pretty(&value).expect("value is serialisable");
        s.push('\n');
        s
    }
}
