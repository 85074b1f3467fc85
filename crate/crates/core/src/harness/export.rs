//! Run artifacts and the standalone trace analyzer.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::channel::ChannelConfig;
use crate::kpi::{KpiRecord, KPI_HEADER};
use crate::protocol::{MessageKind, MessageRecord, SessionTrace, TRACE_HEADER};

use super::run::RunReport;
use super::HarnessError;

pub const TRACE_FILE: &str = "trace.csv";
pub const KPI_FILE: &str = "kpi.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SCENARIO_FILE: &str = "scenario.toml";
pub const LANGUAGE_FILE: &str = "language.txt";

pub fn trace_csv(report: &RunReport) -> String {
    let mut out = format!("{TRACE_HEADER}\n");
    for m in report.messages() {
        out.push_str(&m.to_csv());
        out.push('\n');
    }
    out
}

pub fn kpi_csv(records: &[KpiRecord]) -> String {
    let mut out = format!("{KPI_HEADER}\n");
    for r in records {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

pub fn summary_json(report: &RunReport) -> String {
    let sessions: Vec<_> = report
        .sessions
        .iter()
        .map(|s| {
            let t = &s.trace;
            json!({
                "session": s.session,
                "stream_symbols": s.stream_len,
                "learnable_fraction": s.learnable_fraction,
                "semantic_elements": s.semantic_elements,
                "reps_sent": t.reps_sent,
                "rep_packets": t.rep_packets,
                "nu": t.nu,
                "zeta": t.zeta,
                "answer_packets": t.answer_packets,
                "shower_packets": t.shower_packets,
                "classical_packets": t.classical_packets,
                "duration_s": t.duration_s,
                "fidelity": t.fidelity,
                "maturity": t.maturity,
                "knowledge_gain": t.knowledge_gain,
                "corrections": t.corrections,
                "miscorrections": t.miscorrections,
                "baseline_packets": s.baseline.packets,
                "baseline_seconds": s.baseline.seconds,
                "ledger": s.ledger,
                "kpi": s.kpi,
            })
        })
        .collect();
    let value = json!({
        "tool": "semcom",
        "tool_version": report.tool_version,
        "seed": report.scenario.seed,
        "baseline_only": report.scenario.semantic.baseline_only,
        "shannon_capacity": report.shannon_capacity,
        "baseline": {
            "packets": report.baseline_total.packets,
            "bits": report.baseline_total.bits,
            "seconds": report.baseline_total.seconds,
            "corrupted_packets": report.baseline_total.corrupted_packets,
        },
        "ledger": report.ledger,
        "ledger_conserved": report.ledger.is_conserved(),
        "regime_timeline": report.regime_timeline(),
        "aggregate": report.aggregate,
        "dominance": report.dominance,
        "language_model": report.language.as_ref().map(|l| l.model_id.clone()),
        "sessions": sessions,
    });
    let mut text = serde_json::to_string_pretty(&value).expect("summary serializes");
    text.push('\n');
    text
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, HarnessError> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, &target).map_err(|e| HarnessError::io(&target, e))?;
    Ok(target)
}

/// Writes the run's artifacts into `out_dir`, creating it if needed. Each
/// file is written beside its target and renamed into place.
pub fn export(report: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut written = vec![
        write_atomic(out_dir, TRACE_FILE, &trace_csv(report))?,
        write_atomic(out_dir, KPI_FILE, &kpi_csv(&report.kpi_records()))?,
        write_atomic(out_dir, SUMMARY_FILE, &summary_json(report))?,
        write_atomic(out_dir, SCENARIO_FILE, &report.scenario.to_toml())?,
    ];
    if let Some(lang) = &report.language {
        written.push(write_atomic(out_dir, LANGUAGE_FILE, &lang.to_text())?);
    }
    Ok(written)
}

pub fn parse_trace(text: &str) -> Result<Vec<MessageRecord>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == TRACE_HEADER => {}
        _ => {
            return Err(HarnessError::Trace {
                line: 1,
                message: "missing trace header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            MessageRecord::from_csv(l.trim_end()).ok_or_else(|| HarnessError::Trace {
                line: i + 1,
                message: format!("malformed record {l:?}"),
            })
        })
        .collect()
}

/// Rebuilds the KPI-relevant part of each session from its message rows.
/// Durations are summed per row in file order, as during the run.
pub fn traces_from_records(records: &[MessageRecord], cfg: &ChannelConfig) -> Vec<SessionTrace> {
    let mut by_session: BTreeMap<u32, SessionTrace> = BTreeMap::new();
    for r in records {
        let t = by_session
            .entry(r.session)
            .or_insert_with(|| SessionTrace::empty(r.session));
        match r.kind {
            MessageKind::Representation => {
                t.reps_sent += 1;
                t.rep_packets += r.packets;
                t.element_bits.push(r.impact_bits);
            }
            MessageKind::Raw => t.nu += r.packets,
            MessageKind::Query => t.zeta += r.packets,
            MessageKind::QueryAnswer => t.answer_packets += r.packets,
            MessageKind::LanguageShower => t.shower_packets += r.packets,
            MessageKind::Classical => t.classical_packets += r.packets,
        }
        t.duration_s += cfg.seconds_for(r.packets);
        t.messages.push(r.clone());
    }
    by_session.into_values().collect()
}

/// Per-session KPI rows plus the aggregate row, from a message trace alone.
pub fn kpi_from_trace(
    records: &[MessageRecord],
    cfg: &ChannelConfig,
    omega: f64,
) -> Result<Vec<KpiRecord>, HarnessError> {
    let traces = traces_from_records(records, cfg);
    if traces.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = traces
        .iter()
        .map(|t| KpiRecord::for_session(t, cfg, omega))
        .collect::<Result<Vec<_>, _>>()?;
    out.push(KpiRecord::aggregate(&traces, cfg, omega)?);
    Ok(out)
}
