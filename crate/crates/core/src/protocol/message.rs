//! Plane-tagged protocol messages and their trace records.

use std::collections::BTreeMap;
use std::fmt;

use crate::mdl::{Representation, SemanticLanguage};
use crate::scm::Symbol;

use super::CellId;

/// Fixed size of an outbound query.
pub const QUERY_BITS: usize = 64;
/// Header of a query answer; each probability then takes 16 bits.
pub const ANSWER_HEADER_BITS: usize = 16;
pub const ANSWER_PROB_BITS: usize = 16;
/// Element reference carried by raw-data messages.
pub const RAW_HEADER_BITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Plane {
    User,
    Control,
    Reasoning,
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::User => "user",
            Self::Control => "control",
            Self::Reasoning => "reasoning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MessageKind {
    Representation,
    Raw,
    Query,
    QueryAnswer,
    LanguageShower,
    /// Content carried as plain bits outside the teaching exchange.
    Classical,
}

impl MessageKind {
    pub fn plane(self) -> Plane {
        match self {
            Self::Representation | Self::Raw | Self::Classical => Plane::User,
            Self::Query | Self::QueryAnswer => Plane::Control,
            Self::LanguageShower => Plane::Reasoning,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Representation => "representation",
            Self::Raw => "raw",
            Self::Query => "query",
            Self::QueryAnswer => "query_answer",
            Self::LanguageShower => "language_shower",
            Self::Classical => "classical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Self::Representation,
            Self::Raw,
            Self::Query,
            Self::QueryAnswer,
            Self::LanguageShower,
            Self::Classical,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rung of the causal ladder a query climbs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum QueryLevel {
    Associational,
    Interventional,
    Counterfactual,
}

impl QueryLevel {
    /// Associational below 0.3, interventional below 0.7, counterfactual
    /// from there on.
    pub fn for_maturity(maturity: f64) -> Self {
        if maturity < 0.3 {
            Self::Associational
        } else if maturity < 0.7 {
            Self::Interventional
        } else {
            Self::Counterfactual
        }
    }
}

/// A question about one content element's ground-truth model, phrased over
/// that model with its noise variables observable (`noise:<id>`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalQuery {
    pub element: String,
    pub level: QueryLevel,
    pub target: String,
    /// Conditioning for associational queries, the `do` set otherwise.
    pub setting: BTreeMap<String, Symbol>,
    /// Factual evidence for counterfactual queries.
    pub factual: BTreeMap<String, Symbol>,
    /// The table cell the answer pins down, when the query was built for one.
    pub cell: Option<CellId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MessageBody {
    Representation(Representation),
    Raw(Vec<(CellId, Symbol)>),
    Query(CausalQuery),
    /// A dense pmf over the target's alphabet, or the reason it could not be
    /// answered.
    Answer {
        query: CausalQuery,
        result: Result<Vec<f64>, String>,
    },
    Shower(SemanticLanguage),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub session: u32,
    pub kind: MessageKind,
    pub element: Option<String>,
    pub payload_bits: usize,
    pub body: MessageBody,
}

impl Message {
    pub fn plane(&self) -> Plane {
        self.kind.plane()
    }
}

/// One line of the message trace.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageRecord {
    pub session: u32,
    pub plane: Plane,
    pub kind: MessageKind,
    pub element: String,
    pub payload_bits: usize,
    pub packets: u64,
    pub corrupted: u64,
    /// Content bits the message stands for (representations only).
    pub impact_bits: u64,
}

pub const TRACE_HEADER: &str =
    "session,plane,kind,element,payload_bits,packets,corrupted,impact_bits";

impl MessageRecord {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.session,
            self.plane,
            self.kind,
            self.element,
            self.payload_bits,
            self.packets,
            self.corrupted,
            self.impact_bits
        )
    }

    pub fn from_csv(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.split(',').collect();
        let [session, plane, kind, element, payload_bits, packets, corrupted, impact_bits] = f[..]
        else {
            return None;
        };
        let kind = MessageKind::parse(kind)?;
        if kind.plane().to_string() != plane {
            return None;
        }
        Some(Self {
            session: session.parse().ok()?,
            plane: kind.plane(),
            kind,
            element: element.to_string(),
            payload_bits: payload_bits.parse().ok()?,
            packets: packets.parse().ok()?,
            corrupted: corrupted.parse().ok()?,
            impact_bits: impact_bits.parse().ok()?,
        })
    }
}
