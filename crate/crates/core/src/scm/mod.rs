//! Finite-alphabet structural causal models with exact inference.
//!
//! Every variable `X_i` is produced by a mechanism `X_i := s_i(pa_i, e_i)`
//! where `pa_i` is an ordered parent list and `e_i` an exogenous noise symbol
//! drawn from a finite pmf. Noise variables are mutually independent, so the
//! model's joint distribution is obtained by enumerating noise realizations and
//! pushing them through the mechanism tables. All queries (observational,
//! interventional, counterfactual) are answered by that enumeration, never by
//! sampling.
//!
//! Table layout: a mechanism with parents `p_0..p_k` and `n` noise symbols
//! stores `table[row * n + e]`, where `row` is the mixed-radix index of the
//! parent assignment with `p_0` most significant.

mod checks;
pub mod gallery;
mod infer;
mod pmf;
mod text;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use checks::{
    check_counterfactually_invariant, check_disentangled, check_generalizable,
    check_mechanism_independence, check_style_invariance, mechanism_conditionals_agree,
};
pub use pmf::Pmf;
pub use text::ScmFormatError;

/// A value of a variable: an index into that variable's alphabet.
pub type Symbol = usize;

/// A full assignment, aligned with [`Scm::variables`].
pub type Assignment = Vec<Symbol>;

pub const MAX_ALPHABET: usize = 16;
/// Enumeration bound on both noise realizations and joint states.
pub const MAX_STATES: u128 = 1 << 24;
/// Normalization tolerance for noise pmfs and enumerated distributions.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance for distribution-equality checks.
pub const EQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub id: String,
    pub alphabet: Vec<String>,
}

impl Variable {
    pub fn new(id: impl Into<String>, alphabet: &[&str]) -> Self {
        Self {
            id: id.into(),
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// A variable whose symbols are labelled `"0"`, `"1"`, ...
    pub fn with_arity(id: impl Into<String>, arity: usize) -> Self {
        Self {
            id: id.into(),
            alphabet: (0..arity).map(|s| s.to_string()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.alphabet.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    pub target: String,
    pub parents: Vec<String>,
    pub noise: Vec<f64>,
    pub table: Vec<Symbol>,
}

impl Mechanism {
    pub fn new(
        target: impl Into<String>,
        parents: &[&str],
        noise: Vec<f64>,
        table: Vec<Symbol>,
    ) -> Self {
        Self {
            target: target.into(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            noise,
            table,
        }
    }

    /// `target := symbol`, with no parents and a point-mass noise.
    pub fn constant(target: impl Into<String>, symbol: Symbol) -> Self {
        Self {
            target: target.into(),
            parents: Vec::new(),
            noise: vec![1.0],
            table: vec![symbol],
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.noise.iter().filter(|&&p| p > 0.0).count() <= 1
    }
}

/// One invariant violation found by [`Scm::validate`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),
    #[error("variable {0:?} has an empty alphabet")]
    EmptyAlphabet(String),
    #[error("variable {id:?} has {size} symbols, above the limit of {MAX_ALPHABET}")]
    AlphabetTooLarge { id: String, size: usize },
    #[error("variable {id:?} repeats symbol {symbol:?}")]
    DuplicateSymbol { id: String, symbol: String },
    #[error("mechanism targets unknown variable {0:?}")]
    UnknownTarget(String),
    #[error("variable {0:?} has more than one mechanism")]
    DuplicateMechanism(String),
    #[error("variable {0:?} has no mechanism")]
    MissingMechanism(String),
    #[error("mechanism for {target:?} lists unknown parent {parent:?}")]
    UnknownParent { target: String, parent: String },
    #[error("mechanism for {0:?} lists its own target as a parent")]
    SelfParent(String),
    #[error("mechanism for {target:?} lists parent {parent:?} twice")]
    DuplicateParent { target: String, parent: String },
    #[error("cycle detected through {0:?}")]
    CycleDetected(Vec<String>),
    #[error("noise pmf for {target:?} sums to {sum}")]
    UnnormalizedNoise { target: String, sum: f64 },
    #[error("noise pmf for {0:?} has a negative or non-finite entry")]
    InvalidNoiseMass(String),
    #[error("table for {target:?} has {actual} cells, expected {expected}")]
    IncompleteTable {
        target: String,
        expected: usize,
        actual: usize,
    },
    #[error("table for {target:?} contains symbol {symbol} outside its alphabet")]
    TableSymbolOutOfRange { target: String, symbol: Symbol },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScmError {
    #[error("invalid model: {}", display_list(.0))]
    Invalid(Vec<Violation>),
    #[error("state space of {states} exceeds the enumeration bound")]
    StateSpaceTooLarge { states: u128 },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("symbol {symbol} is outside the alphabet of {variable:?} (arity {arity})")]
    SymbolOutOfRange {
        variable: String,
        symbol: Symbol,
        arity: usize,
    },
    #[error("variable {0:?} is both intervened on and conditioned on")]
    OverlappingIntervention(String),
    #[error("conditioning event has zero probability")]
    ZeroProbabilityConditioning,
    #[error("factual evidence has zero probability under the model")]
    ImpossibleFactual,
    #[error("style intervention assigns the structure variable {0:?}")]
    InvalidStyleIntervention(String),
}

fn display_list(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// `do(assignments)`, optionally read under the evidence `conditioning`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Intervention {
    pub assignments: BTreeMap<String, Symbol>,
    pub conditioning: BTreeMap<String, Symbol>,
}

impl Intervention {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn set(mut self, var: impl Into<String>, symbol: Symbol) -> Self {
        self.assignments.insert(var.into(), symbol);
        self
    }

    pub fn given(mut self, var: impl Into<String>, symbol: Symbol) -> Self {
        self.conditioning.insert(var.into(), symbol);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty() && self.conditioning.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterfactualQuery {
    /// Observed evidence; may be partial.
    pub factual: BTreeMap<String, Symbol>,
    pub intervention: Intervention,
    pub target: String,
}

/// A structural causal model. Variables and mechanisms are kept sorted by id,
/// which is also the order of every [`Assignment`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    variables: Vec<Variable>,
    mechanisms: Vec<Mechanism>,
}

impl Scm {
    /// Builds a model without checking it; see [`Scm::validate`].
    pub fn new(mut variables: Vec<Variable>, mut mechanisms: Vec<Mechanism>) -> Self {
        variables.sort_by(|a, b| a.id.cmp(&b.id));
        mechanisms.sort_by(|a, b| a.target.cmp(&b.target));
        Self {
            variables,
            mechanisms,
        }
    }

    pub fn try_new(variables: Vec<Variable>, mechanisms: Vec<Mechanism>) -> Result<Self, ScmError> {
        let scm = Self::new(variables, mechanisms);
        scm.validate().map_err(ScmError::Invalid)?;
        Ok(scm)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.variables
            .binary_search_by(|v| v.id.as_str().cmp(id))
            .ok()
    }

    pub fn variable(&self, id: &str) -> Option<&Variable> {
        self.index_of(id).map(|i| &self.variables[i])
    }

    pub fn mechanism(&self, id: &str) -> Option<&Mechanism> {
        self.mechanisms
            .binary_search_by(|m| m.target.as_str().cmp(id))
            .ok()
            .map(|i| &self.mechanisms[i])
    }

    pub fn variable_ids(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.id.clone()).collect()
    }

    /// True when every mechanism has a point-mass noise.
    pub fn is_deterministic(&self) -> bool {
        self.mechanisms.iter().all(Mechanism::is_deterministic)
    }

    /// Total number of table cells across all mechanisms.
    pub fn cell_count(&self) -> usize {
        self.mechanisms.iter().map(|m| m.table.len()).sum()
    }

    /// Looks up `var = symbol`, checking both exist.
    pub fn check_symbol(&self, var: &str, symbol: Symbol) -> Result<usize, ScmError> {
        let idx = self
            .index_of(var)
            .ok_or_else(|| ScmError::UnknownVariable(var.to_string()))?;
        let arity = self.variables[idx].arity();
        if symbol >= arity {
            return Err(ScmError::SymbolOutOfRange {
                variable: var.to_string(),
                symbol,
                arity,
            });
        }
        Ok(idx)
    }

    pub fn to_named(&self, assignment: &[Symbol]) -> BTreeMap<String, Symbol> {
        self.variables
            .iter()
            .zip(assignment)
            .map(|(v, &s)| (v.id.clone(), s))
            .collect()
    }

    /// Returns every invariant violation; `Ok(())` iff there are none.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for v in &self.variables {
            if !seen.insert(v.id.as_str()) {
                out.push(Violation::DuplicateVariable(v.id.clone()));
            }
            if v.alphabet.is_empty() {
                out.push(Violation::EmptyAlphabet(v.id.clone()));
            }
            if v.alphabet.len() > MAX_ALPHABET {
                out.push(Violation::AlphabetTooLarge {
                    id: v.id.clone(),
                    size: v.alphabet.len(),
                });
            }
            let mut symbols = BTreeSet::new();
            for s in &v.alphabet {
                if !symbols.insert(s) {
                    out.push(Violation::DuplicateSymbol {
                        id: v.id.clone(),
                        symbol: s.clone(),
                    });
                }
            }
        }

        let mut covered = BTreeSet::new();
        let mut parents_ok = true;
        for m in &self.mechanisms {
            let Some(target) = self.variable(&m.target) else {
                out.push(Violation::UnknownTarget(m.target.clone()));
                parents_ok = false;
                continue;
            };
            if !covered.insert(m.target.as_str()) {
                out.push(Violation::DuplicateMechanism(m.target.clone()));
                parents_ok = false;
            }
            let mut rows = 1usize;
            let mut listed = BTreeSet::new();
            for p in &m.parents {
                if p == &m.target {
                    out.push(Violation::SelfParent(m.target.clone()));
                    parents_ok = false;
                } else if let Some(pv) = self.variable(p) {
                    rows = rows.saturating_mul(pv.arity());
                } else {
                    out.push(Violation::UnknownParent {
                        target: m.target.clone(),
                        parent: p.clone(),
                    });
                    parents_ok = false;
                }
                if !listed.insert(p.as_str()) {
                    out.push(Violation::DuplicateParent {
                        target: m.target.clone(),
                        parent: p.clone(),
                    });
                    parents_ok = false;
                }
            }

            if m.noise.iter().any(|p| !p.is_finite() || *p < 0.0) {
                out.push(Violation::InvalidNoiseMass(m.target.clone()));
            } else {
                let sum: f64 = m.noise.iter().sum();
                if m.noise.is_empty() || (sum - 1.0).abs() > NORMALIZATION_TOL {
                    out.push(Violation::UnnormalizedNoise {
                        target: m.target.clone(),
                        sum,
                    });
                }
            }

            let expected = rows.saturating_mul(m.noise.len());
            if m.table.len() != expected {
                out.push(Violation::IncompleteTable {
                    target: m.target.clone(),
                    expected,
                    actual: m.table.len(),
                });
            }
            if let Some(&bad) = m.table.iter().find(|&&s| s >= target.arity()) {
                out.push(Violation::TableSymbolOutOfRange {
                    target: m.target.clone(),
                    symbol: bad,
                });
            }
        }
        for v in &self.variables {
            if !covered.contains(v.id.as_str()) {
                out.push(Violation::MissingMechanism(v.id.clone()));
            }
        }

        if parents_ok {
            if let Some(cycle) = self.find_cycle() {
                out.push(Violation::CycleDetected(cycle));
            }
        }

        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn find_cycle(&self) -> Option<Vec<String>> {
        // Iterative three-colour DFS over parent edges.
        let n = self.variables.len();
        let parents: Vec<Vec<usize>> = self
            .variables
            .iter()
            .map(|v| {
                self.mechanism(&v.id)
                    .map(|m| m.parents.iter().filter_map(|p| self.index_of(p)).collect())
                    .unwrap_or_default()
            })
            .collect();
        let mut colour = vec![0u8; n];
        for start in 0..n {
            if colour[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            colour[start] = 1;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if *next < parents[node].len() {
                    let p = parents[node][*next];
                    *next += 1;
                    match colour[p] {
                        0 => {
                            colour[p] = 1;
                            stack.push((p, 0));
                        }
                        1 => {
                            let pos = stack.iter().position(|&(x, _)| x == p).unwrap();
                            let mut cycle: Vec<String> = stack[pos..]
                                .iter()
                                .map(|&(x, _)| self.variables[x].id.clone())
                                .collect();
                            cycle.push(self.variables[p].id.clone());
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    colour[node] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    /// Exposes each mechanism's noise as an observable root variable named
    /// `noise:<id>`. The target becomes a deterministic function of its
    /// parents plus that variable (appended last, so table cells keep their
    /// positions). Marginals over the original variables are unchanged.
    pub fn with_observable_noise(&self) -> Scm {
        let mut variables = self.variables.clone();
        let mut mechanisms = Vec::with_capacity(self.mechanisms.len() * 2);
        for m in &self.mechanisms {
            let nid = noise_variable_id(&m.target);
            variables.push(Variable::with_arity(nid.clone(), m.noise.len()));
            mechanisms.push(Mechanism {
                target: nid.clone(),
                parents: Vec::new(),
                noise: m.noise.clone(),
                table: (0..m.noise.len()).collect(),
            });
            let mut parents = m.parents.clone();
            parents.push(nid);
            mechanisms.push(Mechanism {
                target: m.target.clone(),
                parents,
                noise: vec![1.0],
                table: m.table.clone(),
            });
        }
        Scm::new(variables, mechanisms)
    }
}

/// Name of the observable noise variable created by
/// [`Scm::with_observable_noise`].
pub fn noise_variable_id(target: &str) -> String {
    format!("noise:{target}")
}
