//! Semantic KPIs: impact, symmetry index, reasoning and total capacity, and
//! the link regime.
//!
//! Impact `iota` is the packet count the content would have cost classically.
//! The symmetry index is `eta = (zeta / nu) * iota`, with `zeta` the query
//! packets and `nu` the raw-data packets of a session. Reasoning capacity is
//! `omega * log2(1 + eta)` and adds to the Shannon term to give the total.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{classical_packets_needed, shannon_capacity, ChannelConfig};
use crate::protocol::SessionTrace;

/// Relative width of the band below `iota` counted as converging.
pub const CONVERGENCE_BAND: f64 = 0.1;
/// Absolute tolerance for `eta == iota`.
pub const EQUALITY_TOL: f64 = 1e-9;

pub const KPI_HEADER: &str = "session,iota,eta,eta_per_s,c_r,c_c,c_t,omega,regime,fully_semantic";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KpiError {
    #[error("no session traces given")]
    EmptyTraces,
    #[error("total session duration is zero")]
    ZeroDuration,
    #[error("{name} must be finite and nonnegative, got {value}")]
    InvalidInput { name: &'static str, value: f64 },
    #[error("kpi row {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Nascent,
    Converging,
    AcknowledgementLike,
    LanguageDominant,
    RepresentationFailure,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::Nascent,
        Regime::Converging,
        Regime::AcknowledgementLike,
        Regime::LanguageDominant,
        Regime::RepresentationFailure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Nascent => "nascent",
            Regime::Converging => "converging",
            Regime::AcknowledgementLike => "acknowledgement_like",
            Regime::LanguageDominant => "language_dominant",
            Regime::RepresentationFailure => "representation_failure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classical packets for `content_bits` of content.
pub fn semantic_impact(content_bits: u64, cfg: &ChannelConfig) -> u64 {
    classical_packets_needed(content_bits, cfg)
}

/// Session impact: the per-element impacts summed.
pub fn session_impact(trace: &SessionTrace, cfg: &ChannelConfig) -> u64 {
    trace
        .element_bits
        .iter()
        .map(|&b| semantic_impact(b, cfg))
        .sum()
}

/// `(zeta / nu) * iota`. A session without raw data (`nu == 0`) divides by
/// one instead and reports itself as fully semantic.
pub fn symmetry_index(zeta: u64, nu: u64, iota: f64) -> (f64, bool) {
    let fully_semantic = nu == 0;
    (zeta as f64 / nu.max(1) as f64 * iota, fully_semantic)
}

pub fn reasoning_capacity(omega: f64, eta_per_s: f64) -> f64 {
    omega * (1.0 + eta_per_s).log2()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacities {
    pub c_c: f64,
    pub c_r: f64,
    pub c_t: f64,
}

pub fn total_capacity(cfg: &ChannelConfig, omega: f64, eta_per_s: f64) -> Capacities {
    let c_c = shannon_capacity(cfg);
    let c_r = reasoning_capacity(omega, eta_per_s);
    Capacities {
        c_c,
        c_r,
        c_t: c_c + c_r,
    }
}

/// Maps `(eta, iota)` to a regime. Checked in order: equality, then
/// `eta > iota`, then `eta <= 1`, then the converging band
/// `iota - 0.1 iota <= eta < iota`. Whatever remains is nascent.
pub fn classify_regime(eta: f64, iota: f64) -> Regime {
    if iota > 1.0 && (eta - iota).abs() <= EQUALITY_TOL {
        return Regime::AcknowledgementLike;
    }
    if eta > iota {
        return if iota > 1.0 {
            Regime::LanguageDominant
        } else {
            Regime::RepresentationFailure
        };
    }
    if eta <= 1.0 {
        return Regime::Nascent;
    }
    if eta >= iota - CONVERGENCE_BAND * iota {
        return Regime::Converging;
    }
    Regime::Nascent
}

/// Symmetry index per second over a window of sessions: packet counts and
/// durations are summed first, then `(sum zeta / sum nu) * (sum iota / sum
/// duration)` is taken, with each session's `nu` clamped to at least one.
pub fn eta_per_second(traces: &[SessionTrace], cfg: &ChannelConfig) -> Result<f64, KpiError> {
    if traces.is_empty() {
        return Err(KpiError::EmptyTraces);
    }
    let duration: f64 = traces.iter().map(|t| t.duration_s).sum();
    if duration <= 0.0 {
        return Err(KpiError::ZeroDuration);
    }
    let zeta: u64 = traces.iter().map(|t| t.zeta).sum();
    let nu: u64 = traces.iter().map(|t| t.nu.max(1)).sum();
    let iota: u64 = traces.iter().map(|t| session_impact(t, cfg)).sum();
    Ok(zeta as f64 / nu as f64 * (iota as f64 / duration))
}

/// One row of `kpi.csv`. `session` is `None` on the aggregate row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiRecord {
    pub session: Option<u32>,
    pub iota: f64,
    pub eta: f64,
    pub eta_per_s: f64,
    pub c_r: f64,
    pub c_c: f64,
    pub c_t: f64,
    pub omega: f64,
    pub regime: Regime,
    pub fully_semantic: bool,
}

impl KpiRecord {
    pub fn for_session(
        trace: &SessionTrace,
        cfg: &ChannelConfig,
        omega: f64,
    ) -> Result<Self, KpiError> {
        let iota = session_impact(trace, cfg) as f64;
        let (eta, fully_semantic) = symmetry_index(trace.zeta, trace.nu, iota);
        let eta_per_s = eta_per_second(std::slice::from_ref(trace), cfg)?;
        Self::assemble(
            Some(trace.session),
            iota,
            eta,
            fully_semantic,
            eta_per_s,
            cfg,
            omega,
        )
    }

    /// The whole-run row: counts summed over sessions before any ratio.
    pub fn aggregate(
        traces: &[SessionTrace],
        cfg: &ChannelConfig,
        omega: f64,
    ) -> Result<Self, KpiError> {
        let eta_per_s = eta_per_second(traces, cfg)?;
        let iota: u64 = traces.iter().map(|t| session_impact(t, cfg)).sum();
        let zeta: u64 = traces.iter().map(|t| t.zeta).sum();
        let nu: u64 = traces.iter().map(|t| t.nu.max(1)).sum();
        let eta = zeta as f64 / nu as f64 * iota as f64;
        let fully_semantic = traces.iter().all(|t| t.nu == 0);
        Self::assemble(
            None,
            iota as f64,
            eta,
            fully_semantic,
            eta_per_s,
            cfg,
            omega,
        )
    }

    fn assemble(
        session: Option<u32>,
        iota: f64,
        eta: f64,
        fully_semantic: bool,
        eta_per_s: f64,
        cfg: &ChannelConfig,
        omega: f64,
    ) -> Result<Self, KpiError> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(KpiError::InvalidInput {
                name: "omega",
                value: omega,
            });
        }
        let caps = total_capacity(cfg, omega, eta_per_s);
        Ok(Self {
            session,
            iota,
            eta,
            eta_per_s,
            c_r: caps.c_r,
            c_c: caps.c_c,
            c_t: caps.c_t,
            omega,
            regime: classify_regime(eta, iota),
            fully_semantic,
        })
    }

    pub fn to_csv(&self) -> String {
        let session = self
            .session
            .map_or_else(|| "all".to_string(), |s| s.to_string());
        format!(
            "{session},{},{},{},{},{},{},{},{},{}",
            self.iota,
            self.eta,
            self.eta_per_s,
            self.c_r,
            self.c_c,
            self.c_t,
            self.omega,
            self.regime,
            self.fully_semantic
        )
    }

    pub fn from_csv(line: &str, line_no: usize) -> Result<Self, KpiError> {
        let err = |message: &str| KpiError::Format {
            line: line_no,
            message: message.to_string(),
        };
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 10 {
            return Err(err("expected 10 fields"));
        }
        let num = |i: usize| f[i].parse::<f64>().map_err(|_| err("bad number"));
        Ok(Self {
            session: match f[0] {
                "all" => None,
                s => Some(s.parse().map_err(|_| err("bad session"))?),
            },
            iota: num(1)?,
            eta: num(2)?,
            eta_per_s: num(3)?,
            c_r: num(4)?,
            c_c: num(5)?,
            c_t: num(6)?,
            omega: num(7)?,
            regime: Regime::parse(f[8]).ok_or_else(|| err("unknown regime"))?,
            fully_semantic: f[9].parse().map_err(|_| err("bad flag"))?,
        })
    }
}
