//! Partition a symbol stream into learnable and memorizable segments.
//!
//! The stream is cut into fixed windows. Each window's best two-part cost
//! (cross-entropy under a family member plus that member's K amortized over
//! the stream) is compared with the raw cost of `log2 |alphabet|` bits per
//! symbol. A window whose gain per symbol reaches `theta` is learnable;
//! adjacent windows of the same class are merged.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::mdl::{cross_entropy_loss, pairs_from_symbols, ComplexityReport, ModelFamily, Pair};

pub const DEFAULT_WINDOW: usize = 32;
pub const DEFAULT_THETA: f64 = 0.25;
pub const MIN_WINDOW: usize = 4;
/// History handed to the models when scoring a symbol.
pub const MAX_CONTEXT: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("stream is empty")]
    EmptyStream,
    #[error("alphabet must have at least one symbol")]
    EmptyAlphabet,
    #[error("symbol {symbol} at position {index} is outside the alphabet")]
    SymbolOutOfAlphabet { index: usize, symbol: u32 },
    #[error("window of {0} symbols is below the minimum of {MIN_WINDOW}")]
    WindowTooSmall(usize),
    #[error("theta must be positive and finite, got {0}")]
    InvalidTheta(f64),
    #[error("split file line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Ground-truth origin of a stretch of the stream. Only the harness sets it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceTag {
    pub offset: usize,
    pub length: usize,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Datastream {
    symbols: Vec<u32>,
    alphabet_size: usize,
    pub tags: Vec<SourceTag>,
}

impl Datastream {
    pub fn new(symbols: Vec<u32>, alphabet_size: usize) -> Result<Self, SplitError> {
        if symbols.is_empty() {
            return Err(SplitError::EmptyStream);
        }
        if alphabet_size == 0 {
            return Err(SplitError::EmptyAlphabet);
        }
        if let Some((index, &symbol)) = symbols
            .iter()
            .enumerate()
            .find(|(_, &s)| s as usize >= alphabet_size)
        {
            return Err(SplitError::SymbolOutOfAlphabet { index, symbol });
        }
        Ok(Self {
            symbols,
            alphabet_size,
            tags: Vec::new(),
        })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn raw_bits_per_symbol(&self) -> f64 {
        (self.alphabet_size as f64).log2()
    }

    /// Next-symbol pairs over the whole stream, as scored by the splitter.
    pub fn pairs(&self) -> Vec<Pair> {
        pairs_from_symbols(&self.symbols, MAX_CONTEXT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentClass {
    Learnable,
    Memorizable,
}

impl fmt::Display for SegmentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Learnable => "learnable",
            Self::Memorizable => "memorizable",
        })
    }
}

impl FromStr for SegmentClass {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "learnable" => Ok(Self::Learnable),
            "memorizable" => Ok(Self::Memorizable),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub class: SegmentClass,
    pub offset: usize,
    pub length: usize,
    /// Raw cost minus best model cost, in bits.
    pub gain: f64,
}

impl Segment {
    pub fn end(&self) -> usize {
        self.offset + self.length
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub segments: Vec<Segment>,
}

impl SplitResult {
    pub fn learnable(&self) -> impl Iterator<Item = &Segment> {
        self.segments
            .iter()
            .filter(|s| s.class == SegmentClass::Learnable)
    }

    pub fn memorizable(&self) -> impl Iterator<Item = &Segment> {
        self.segments
            .iter()
            .filter(|s| s.class == SegmentClass::Memorizable)
    }

    pub fn total_len(&self) -> usize {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn learnable_symbols(&self) -> usize {
        self.learnable().map(|s| s.length).sum()
    }

    pub fn learnable_fraction(&self) -> f64 {
        let total = self.total_len();
        if total == 0 {
            0.0
        } else {
            self.learnable_symbols() as f64 / total as f64
        }
    }

    /// Per-position class.
    pub fn classes(&self) -> Vec<SegmentClass> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.class, s.length))
            .collect()
    }

    /// Number of learnable symbols inside `[start, end)`.
    pub fn learnable_in(&self, start: usize, end: usize) -> usize {
        self.learnable()
            .map(|s| s.end().min(end).saturating_sub(s.offset.max(start)))
            .sum()
    }

    /// True iff the segments are ordered, disjoint and cover `[0, len)`.
    pub fn covers(&self, len: usize) -> bool {
        let mut pos = 0;
        for s in &self.segments {
            if s.offset != pos || s.length == 0 {
                return false;
            }
            pos = s.end();
        }
        pos == len
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("class,offset,length,gain\n");
        for s in &self.segments {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.class, s.offset, s.length, s.gain
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, SplitError> {
        let err = |line: usize, message: &str| SplitError::Format {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        if lines.next().map(|(_, l)| l) != Some("class,offset,length,gain") {
            return Err(err(1, "missing header"));
        }
        let mut segments = Vec::new();
        for (n, line) in lines {
            let f: Vec<&str> = line.split(',').collect();
            let [class, offset, length, gain] = f[..] else {
                return Err(err(n, "expected four fields"));
            };
            segments.push(Segment {
                class: class.parse().map_err(|_| err(n, "bad class"))?,
                offset: offset.parse().map_err(|_| err(n, "bad offset"))?,
                length: length.parse().map_err(|_| err(n, "bad length"))?,
                gain: gain.parse().map_err(|_| err(n, "bad gain"))?,
            });
        }
        Ok(Self { segments })
    }
}

/// Costs of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowCost {
    pub offset: usize,
    pub length: usize,
    pub raw_bits: f64,
    /// Best cross-entropy plus amortized K.
    pub model_bits: f64,
    pub best_model: String,
}

impl WindowCost {
    pub fn gain(&self) -> f64 {
        self.raw_bits - self.model_bits
    }

    pub fn gain_per_symbol(&self) -> f64 {
        self.gain() / self.length as f64
    }
}

fn check_params(window: usize, theta: f64) -> Result<(), SplitError> {
    if window < MIN_WINDOW {
        return Err(SplitError::WindowTooSmall(window));
    }
    if !theta.is_finite() || theta <= 0.0 {
        return Err(SplitError::InvalidTheta(theta));
    }
    Ok(())
}

/// Two-part costs of every window; the final window may be short.
pub fn window_profile(
    stream: &Datastream,
    family: &ModelFamily,
    window: usize,
) -> Result<Vec<WindowCost>, SplitError> {
    if window < MIN_WINDOW {
        return Err(SplitError::WindowTooSmall(window));
    }
    let pairs = stream.pairs();
    let n = stream.len() as f64;
    let raw_rate = stream.raw_bits_per_symbol();
    let mut out = Vec::with_capacity(stream.len().div_ceil(window));
    for offset in (0..stream.len()).step_by(window) {
        let length = window.min(stream.len() - offset);
        let slice = &pairs[offset..offset + length];
        let mut best: Option<(f64, String)> = None;
        for m in family.members() {
            let Ok(ce) = cross_entropy_loss(m.as_ref(), slice) else {
                continue;
            };
            let cost = ce + m.description_length() as f64 * length as f64 / n;
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, m.id()));
            }
        }
        let (model_bits, best_model) = best.unwrap_or((f64::INFINITY, String::new()));
        out.push(WindowCost {
            offset,
            length,
            raw_bits: raw_rate * length as f64,
            model_bits,
            best_model,
        });
    }
    Ok(out)
}

fn merge(segments: impl IntoIterator<Item = Segment>) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for s in segments {
        match out.last_mut() {
            Some(last) if last.class == s.class && last.end() == s.offset => {
                last.length += s.length;
                last.gain += s.gain;
            }
            _ => out.push(s),
        }
    }
    out
}

pub fn split(
    stream: &Datastream,
    family: &ModelFamily,
    window: usize,
    theta: f64,
) -> Result<SplitResult, SplitError> {
    check_params(window, theta)?;
    if stream.len() < window {
        return Ok(SplitResult {
            segments: vec![Segment {
                class: SegmentClass::Memorizable,
                offset: 0,
                length: stream.len(),
                gain: 0.0,
            }],
        });
    }
    let profile = window_profile(stream, family, window)?;
    let segments = merge(profile.into_iter().map(|w| Segment {
        class: if w.gain_per_symbol() >= theta {
            SegmentClass::Learnable
        } else {
            SegmentClass::Memorizable
        },
        offset: w.offset,
        length: w.length,
        gain: w.gain(),
    }));
    Ok(SplitResult { segments })
}

/// Two-part cost of a partition: learnable symbols are coded under the single
/// best family member (cross-entropy plus full K), memorizable symbols at the
/// raw rate.
pub fn partition_cost(stream: &Datastream, family: &ModelFamily, classes: &[SegmentClass]) -> f64 {
    let pairs = stream.pairs();
    let learnable: Vec<Pair> = pairs
        .iter()
        .zip(classes)
        .filter(|(_, c)| **c == SegmentClass::Learnable)
        .map(|(p, _)| p.clone())
        .collect();
    let raw = (classes.len() - learnable.len()) as f64 * stream.raw_bits_per_symbol();
    if learnable.is_empty() {
        return raw;
    }
    let model = family
        .members()
        .iter()
        .filter_map(|m| {
            cross_entropy_loss(m.as_ref(), &learnable)
                .ok()
                .map(|ce| ce + m.description_length() as f64)
        })
        .fold(f64::INFINITY, f64::min);
    raw + model
}

/// When the language complexity of the learnable part exceeds `gamma_cap`,
/// demotes learnable segments in ascending gain order until the projected
/// complexity (scaled by the surviving share of learnable symbols) fits.
pub fn resplit_on_high_complexity(
    prior: &SplitResult,
    report: &ComplexityReport,
    gamma_cap: f64,
) -> SplitResult {
    if report.gamma <= gamma_cap {
        return prior.clone();
    }
    let original = prior.learnable_symbols();
    let mut order: Vec<usize> = prior
        .segments
        .iter()
        .enumerate()
        .filter(|(_, s)| s.class == SegmentClass::Learnable)
        .map(|(i, _)| i)
        .collect();
    order.sort_by(|&a, &b| {
        prior.segments[a]
            .gain
            .total_cmp(&prior.segments[b].gain)
            .then(a.cmp(&b))
    });
    let mut segments = prior.segments.clone();
    let mut remaining = original;
    for i in order {
        let projected = report.gamma * remaining as f64 / original as f64;
        if projected <= gamma_cap {
            break;
        }
        segments[i].class = SegmentClass::Memorizable;
        remaining -= segments[i].length;
    }
    SplitResult {
        segments: merge(segments),
    }
}
