//! Sparse probability mass functions over named finite variables.

use std::collections::BTreeMap;

use super::{ScmError, Symbol, NORMALIZATION_TOL};

/// A pmf over the joint values of `variables`. Only outcomes with positive
/// mass are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    variables: Vec<String>,
    entries: BTreeMap<Vec<Symbol>, f64>,
}

impl Pmf {
    pub fn new(variables: Vec<String>) -> Self {
        Self {
            variables,
            entries: BTreeMap::new(),
        }
    }

    pub fn point(variables: Vec<String>, outcome: Vec<Symbol>) -> Self {
        let mut p = Self::new(variables);
        p.add(outcome, 1.0);
        p
    }

    /// Accumulates `mass` onto `outcome`. Non-positive masses are ignored.
    pub fn add(&mut self, outcome: Vec<Symbol>, mass: f64) {
        debug_assert_eq!(outcome.len(), self.variables.len());
        if mass > 0.0 {
            *self.entries.entry(outcome).or_insert(0.0) += mass;
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Symbol>, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    /// Number of outcomes with positive mass.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn prob(&self, outcome: &[Symbol]) -> f64 {
        self.entries.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn normalized(mut self) -> Self {
        let t = self.total();
        if t > 0.0 {
            for v in self.entries.values_mut() {
                *v /= t;
            }
        }
        self
    }

    fn position(&self, var: &str) -> Result<usize, ScmError> {
        self.variables
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| ScmError::UnknownVariable(var.to_string()))
    }

    /// Marginal over `vars`, in the given order.
    pub fn marginal(&self, vars: &[&str]) -> Result<Pmf, ScmError> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| self.position(v))
            .collect::<Result<_, _>>()?;
        let mut out = Pmf::new(vars.iter().map(|v| v.to_string()).collect());
        for (k, p) in &self.entries {
            out.add(idx.iter().map(|&i| k[i]).collect(), *p);
        }
        Ok(out)
    }

    /// Distribution of a single variable as a dense vector of length `arity`.
    pub fn marginal_vector(&self, var: &str, arity: usize) -> Result<Vec<f64>, ScmError> {
        let i = self.position(var)?;
        let mut out = vec![0.0; arity];
        for (k, p) in &self.entries {
            if k[i] < arity {
                out[k[i]] += p;
            }
        }
        Ok(out)
    }

    /// Restricts to outcomes agreeing with `evidence` and renormalizes.
    pub fn condition(&self, evidence: &BTreeMap<String, Symbol>) -> Result<Pmf, ScmError> {
        let checks: Vec<(usize, Symbol)> = evidence
            .iter()
            .map(|(v, s)| Ok((self.position(v)?, *s)))
            .collect::<Result<_, ScmError>>()?;
        let mut out = Pmf::new(self.variables.clone());
        for (k, p) in &self.entries {
            if checks.iter().all(|&(i, s)| k[i] == s) {
                out.add(k.clone(), *p);
            }
        }
        if out.total() <= 0.0 {
            return Err(ScmError::ZeroProbabilityConditioning);
        }
        Ok(out.normalized())
    }

    /// Total-variation distance. Both pmfs must range over the same variables
    /// in the same order.
    pub fn tv_distance(&self, other: &Pmf) -> f64 {
        debug_assert_eq!(self.variables, other.variables);
        let mut sum = 0.0;
        for (k, p) in &self.entries {
            sum += (p - other.prob(k)).abs();
        }
        for (k, q) in &other.entries {
            if !self.entries.contains_key(k) {
                sum += q;
            }
        }
        sum / 2.0
    }

    /// Largest pointwise difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Pmf) -> f64 {
        let a = self.entries.iter().map(|(k, p)| (p - other.prob(k)).abs());
        let b = other.entries.iter().map(|(k, q)| (q - self.prob(k)).abs());
        a.chain(b).fold(0.0, f64::max)
    }
}
