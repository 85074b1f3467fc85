//! Scenarios, ground truth, experiment runs and their artifacts.
//!
//! A run synthesizes each session's stream from the content elements'
//! samples and seeded filler, splits it, teaches the semantic elements over
//! the protocol, sends the rest as plain bits, and sends the whole stream
//! again over a purely classical baseline link.

mod export;
mod run;
mod scenario;
mod truth;

use std::path::Path;

use thiserror::Error;

pub use export::{
    export, kpi_csv, kpi_from_trace, parse_trace, summary_json, trace_csv, traces_from_records,
    KPI_FILE, LANGUAGE_FILE, SCENARIO_FILE, SUMMARY_FILE, TRACE_FILE,
};
pub use run::{
    run_experiment, BitLedger, Dominance, RunReport, SessionReport, FILLER_SOURCE, SEMANTIC_SHARE,
};
pub use scenario::{ContentSpec, Scenario, SemanticSpec, SCHEMA};
pub use truth::{element_id, generate_truth};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("content spec infeasible: {0}")]
    Infeasible(String),
    #[error("io: {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },
    #[error("scm: {0}")]
    Scm(#[from] crate::scm::ScmError),
    #[error("mdl: {0}")]
    Mdl(#[from] crate::mdl::MdlError),
    #[error("split: {0}")]
    Split(#[from] crate::split::SplitError),
    #[error("protocol: {0}")]
    Protocol(#[from] crate::protocol::ProtocolError),
    #[error("kpi: {0}")]
    Kpi(#[from] crate::kpi::KpiError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// True for problems with the scenario itself rather than the run.
    pub fn is_config(&self) -> bool {
        matches!(self, Self::Config(_) | Self::Infeasible(_))
    }
}
