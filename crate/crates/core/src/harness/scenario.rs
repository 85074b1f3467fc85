//! Scenario files.
//!
//! ```toml
//! schema = "semcom-scenario/1"
//! seed = 7
//! sessions = 10
//!
//! [content]
//! elements = 2
//! variables = 4
//! alphabet = 4
//!
//! [channel]
//! bandwidth_w = 1000.0
//! sinr_gamma = 3.0
//! payload_bits = 128
//! bit_error_prob = 0.0
//!
//! [semantic]
//! omega = 50.0
//! ```
//!
//! Omitted `[content]` and `[semantic]` keys take their defaults. Omega is in
//! representation decodings per second.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelConfig;
use crate::mdl::{SemanticLanguage, MAX_NODES};
use crate::scm::{MAX_ALPHABET, MAX_STATES};
use crate::split::MIN_WINDOW;

use super::HarnessError;

pub const SCHEMA: &str = "semcom-scenario/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub seed: u64,
    pub sessions: u32,
    #[serde(default)]
    pub content: ContentSpec,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub semantic: SemanticSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContentSpec {
    pub elements: usize,
    /// Variables per element.
    pub variables: usize,
    /// Shared by every variable and by the stream.
    pub alphabet: usize,
    /// In `[0, 1]`: relative weight of the non-default noise symbols.
    pub noise: f64,
    pub noise_symbols: usize,
    pub max_parents: usize,
    pub samples_per_session: usize,
    /// Random symbols interleaved with the structured content each session.
    pub filler_symbols: usize,
}

impl Default for ContentSpec {
    fn default() -> Self {
        Self {
            elements: 2,
            variables: 3,
            alphabet: 4,
            noise: 0.05,
            noise_symbols: 2,
            max_parents: 2,
            samples_per_session: 256,
            filler_symbols: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticSpec {
    pub omega: f64,
    pub lambda: f64,
    pub theta: f64,
    pub window: usize,
    pub max_order: usize,
    pub query_budget: usize,
    pub didactics_max_raw: f64,
    pub max_attempts: usize,
    pub shower: bool,
    pub reverse_mentorship: bool,
    pub baseline_only: bool,
    /// Language file preinstalled at the apprentice, relative to the
    /// scenario file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub apprentice_library: Option<PathBuf>,
    /// Cap on the learnable part's language complexity, in bits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_cap: Option<f64>,
}

impl Default for SemanticSpec {
    fn default() -> Self {
        Self {
            omega: 50.0,
            lambda: 1.0,
            theta: crate::split::DEFAULT_THETA,
            window: crate::split::DEFAULT_WINDOW,
            max_order: 3,
            query_budget: 4,
            didactics_max_raw: 0.9,
            max_attempts: 32,
            shower: false,
            reverse_mentorship: false,
            baseline_only: false,
            apprentice_library: None,
            gamma_cap: None,
        }
    }
}

impl Scenario {
    /// A small scenario with every optional key at its default.
    pub fn new(seed: u64, sessions: u32) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            seed,
            sessions,
            content: ContentSpec::default(),
            channel: ChannelConfig::default(),
            semantic: SemanticSpec::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let s: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    /// Reads and validates a scenario; a relative library path is resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut s: Self = toml::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if let Some(lib) = &s.semantic.apprentice_library {
            if lib.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                s.semantic.apprentice_library = Some(base.join(lib));
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.schema != SCHEMA {
            return bad(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                self.schema
            ));
        }
        if self.sessions == 0 {
            return bad("sessions must be positive".into());
        }
        let c = &self.content;
        if c.elements == 0 || c.elements > usize::from(u16::MAX) {
            return bad(format!(
                "content.elements must be in 1..=65535, got {}",
                c.elements
            ));
        }
        if c.variables == 0 || c.variables > MAX_NODES {
            return bad(format!(
                "content.variables must be in 1..={MAX_NODES}, got {}",
                c.variables
            ));
        }
        if !(2..=MAX_ALPHABET).contains(&c.alphabet) {
            return bad(format!(
                "content.alphabet must be in 2..={MAX_ALPHABET}, got {}",
                c.alphabet
            ));
        }
        if !(0.0..=1.0).contains(&c.noise) {
            return bad(format!("content.noise must be in [0, 1], got {}", c.noise));
        }
        if c.noise_symbols == 0 || c.noise_symbols > MAX_ALPHABET {
            return bad(format!(
                "content.noise_symbols must be in 1..={MAX_ALPHABET}, got {}",
                c.noise_symbols
            ));
        }
        if c.samples_per_session == 0 {
            return bad("content.samples_per_session must be positive".into());
        }
        // Regenerating a partly known element widens each noise alphabet by
        // the variable alphabet; its worlds must stay enumerable.
        let per_var = (c.noise_symbols * c.alphabet) as f64;
        if per_var.powi(c.variables as i32) > MAX_STATES as f64 {
            return bad(
                "content is too large to enumerate: lower variables, alphabet or noise_symbols"
                    .into(),
            );
        }
        self.channel
            .validate()
            .map_err(|e| HarnessError::Config(format!("channel: {e}")))?;
        let s = &self.semantic;
        if !s.omega.is_finite() || s.omega < 0.0 {
            return bad(format!(
                "semantic.omega must be finite and nonnegative, got {}",
                s.omega
            ));
        }
        if !s.lambda.is_finite() || s.lambda < 0.0 {
            return bad(format!(
                "semantic.lambda must be finite and nonnegative, got {}",
                s.lambda
            ));
        }
        if !s.theta.is_finite() || s.theta <= 0.0 {
            return bad(format!("semantic.theta must be positive, got {}", s.theta));
        }
        if s.window < MIN_WINDOW {
            return bad(format!(
                "semantic.window must be at least {MIN_WINDOW}, got {}",
                s.window
            ));
        }
        if !(0.0..=1.0).contains(&s.didactics_max_raw) {
            return bad(format!(
                "semantic.didactics_max_raw must be in [0, 1], got {}",
                s.didactics_max_raw
            ));
        }
        if s.max_attempts == 0 {
            return bad("semantic.max_attempts must be positive".into());
        }
        if let Some(cap) = s.gamma_cap {
            if !cap.is_finite() || cap < 0.0 {
                return bad(format!(
                    "semantic.gamma_cap must be finite and nonnegative, got {cap}"
                ));
            }
        }
        if let Some(lib) = &s.apprentice_library {
            if !lib.is_file() {
                return bad(format!(
                    "apprentice library {} does not exist",
                    lib.display()
                ));
            }
        }
        Ok(())
    }

    pub fn load_library(&self) -> Result<Option<SemanticLanguage>, HarnessError> {
        let Some(path) = &self.semantic.apprentice_library else {
            return Ok(None);
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        SemanticLanguage::from_text(&text)
            .map(Some)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }
}
