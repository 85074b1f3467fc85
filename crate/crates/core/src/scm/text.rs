//! Canonical TOML form of an [`Scm`].
//!
//! ```toml
//! format = "scm/1"
//!
//! [[variable]]
//! id = "X"
//! alphabet = ["0", "1"]
//! parents = []
//! noise = [0.7, 0.3]
//! table = [0, 1]
//! ```
//!
//! Variables appear in sorted-id order with their mechanism inlined, so a
//! model that round-trips through [`Scm::from_text`] re-serializes to the same
//! bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Mechanism, Scm, Symbol, Variable, Violation};

pub const FORMAT_TAG: &str = "scm/1";

#[derive(Debug, Error)]
pub enum ScmFormatError {
    #[error("malformed model file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported format tag {0:?}")]
    UnsupportedFormat(String),
    #[error("model file describes an invalid model: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    #[serde(default)]
    variable: Vec<Entry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    id: String,
    alphabet: Vec<String>,
    #[serde(default)]
    parents: Vec<String>,
    noise: Vec<f64>,
    table: Vec<Symbol>,
}

impl Scm {
    pub fn to_text(&self) -> String {
        let variable = self
            .variables()
            .iter()
            .map(|v| {
                let m = self.mechanism(&v.id);
                Entry {
                    id: v.id.clone(),
                    alphabet: v.alphabet.clone(),
                    parents: m.map(|m| m.parents.clone()).unwrap_or_default(),
                    noise: m.map(|m| m.noise.clone()).unwrap_or_default(),
                    table: m.map(|m| m.table.clone()).unwrap_or_default(),
                }
            })
            .collect();
        let doc = Document {
            format: FORMAT_TAG.to_string(),
            variable,
        };
        toml::to_string(&doc).expect("model documents always serialize")
    }

    /// Parses and validates a model file.
    pub fn from_text(text: &str) -> Result<Scm, ScmFormatError> {
        let doc: Document = toml::from_str(text)?;
        if doc.format != FORMAT_TAG {
            return Err(ScmFormatError::UnsupportedFormat(doc.format));
        }
        let mut variables = Vec::with_capacity(doc.variable.len());
        let mut mechanisms = Vec::with_capacity(doc.variable.len());
        for e in doc.variable {
            variables.push(Variable {
                id: e.id.clone(),
                alphabet: e.alphabet,
            });
            mechanisms.push(Mechanism {
                target: e.id,
                parents: e.parents,
                noise: e.noise,
                table: e.table,
            });
        }
        let scm = Scm::new(variables, mechanisms);
        scm.validate().map_err(ScmFormatError::Invalid)?;
        Ok(scm)
    }
}
