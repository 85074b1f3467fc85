//! Exhaustive minimizations over a model family.

use super::model::{ConditionalModel, ModelFamily, Pair};
use super::MdlError;

/// `sum -log2 p(z | context)` over the pairs.
pub fn cross_entropy_loss(model: &dyn ConditionalModel, pairs: &[Pair]) -> Result<f64, MdlError> {
    let mut bits = 0.0;
    for (i, p) in pairs.iter().enumerate() {
        let q = model.prob(&p.context, p.z);
        if q <= 0.0 {
            return Err(MdlError::ZeroProbabilityPair {
                model: model.id(),
                index: i,
            });
        }
        bits -= q.log2();
    }
    Ok(bits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    /// The minimized objective.
    pub gamma: f64,
    pub chosen_model: String,
    pub loss: f64,
    /// Description length of the chosen model, in bits.
    pub k: usize,
    pub lambda: f64,
    /// Complexity budget, set for structure-function reports.
    pub budget: Option<f64>,
    /// The chosen model is parameter-free: nothing was learned, so the data
    /// is better memorized than modelled.
    pub memorize: bool,
}

struct Scored {
    id: String,
    loss: f64,
    k: usize,
    uniform: bool,
}

/// Loss and K of every member that gives all pairs positive probability.
fn feasible(family: &ModelFamily, pairs: &[Pair]) -> Vec<Scored> {
    family
        .members()
        .iter()
        .filter_map(|m| {
            cross_entropy_loss(m.as_ref(), pairs)
                .ok()
                .map(|loss| Scored {
                    id: m.id(),
                    loss,
                    k: m.description_length(),
                    uniform: m.is_uniform(),
                })
        })
        .collect()
}

/// Argmin of `objective`, ties broken by smaller K, then by id.
fn argmin(scored: &[Scored], objective: impl Fn(&Scored) -> f64) -> Option<&Scored> {
    scored.iter().min_by(|a, b| {
        objective(a)
            .total_cmp(&objective(b))
            .then(a.k.cmp(&b.k))
            .then_with(|| a.id.cmp(&b.id))
    })
}

/// `min_p loss(p) + lambda * K(p)`.
pub fn lagrangian_complexity(
    family: &ModelFamily,
    pairs: &[Pair],
    lambda: f64,
) -> Result<ComplexityReport, MdlError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(MdlError::InvalidLambda(lambda));
    }
    let scored = feasible(family, pairs);
    let best =
        argmin(&scored, |s| s.loss + lambda * s.k as f64).ok_or(MdlError::NoFeasibleModel)?;
    Ok(ComplexityReport {
        gamma: best.loss + lambda * best.k as f64,
        chosen_model: best.id.clone(),
        loss: best.loss,
        k: best.k,
        lambda,
        budget: None,
        memorize: best.uniform,
    })
}

/// `min_p loss(p) + K(p)`.
pub fn language_complexity(
    family: &ModelFamily,
    pairs: &[Pair],
) -> Result<ComplexityReport, MdlError> {
    lagrangian_complexity(family, pairs, 1.0)
}

/// The minimizing member among those with `K <= t`.
pub fn structure_function_report(
    family: &ModelFamily,
    pairs: &[Pair],
    t: f64,
) -> Result<ComplexityReport, MdlError> {
    let scored: Vec<Scored> = feasible(family, pairs)
        .into_iter()
        .filter(|s| s.k as f64 <= t)
        .collect();
    let best = argmin(&scored, |s| s.loss).ok_or(MdlError::BudgetInfeasible(t))?;
    Ok(ComplexityReport {
        gamma: best.loss,
        chosen_model: best.id.clone(),
        loss: best.loss,
        k: best.k,
        lambda: 0.0,
        budget: Some(t),
        memorize: best.uniform,
    })
}

/// `min { loss(p) : K(p) <= t }`.
pub fn structure_function(family: &ModelFamily, pairs: &[Pair], t: f64) -> Result<f64, MdlError> {
    structure_function_report(family, pairs, t).map(|r| r.loss)
}

/// The structure function sampled at every K value attained by a feasible
/// member, ascending in K. Between samples the function is a step.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureCurve {
    pub points: Vec<(usize, f64)>,
}

impl StructureCurve {
    pub fn compute(family: &ModelFamily, pairs: &[Pair]) -> Result<Self, MdlError> {
        let mut scored = feasible(family, pairs);
        if scored.is_empty() {
            return Err(MdlError::NoFeasibleModel);
        }
        scored.sort_by(|a, b| a.k.cmp(&b.k).then(a.loss.total_cmp(&b.loss)));
        let mut points: Vec<(usize, f64)> = Vec::new();
        let mut best = f64::INFINITY;
        for s in scored {
            best = best.min(s.loss);
            match points.last_mut() {
                Some(last) if last.0 == s.k => last.1 = best,
                _ => points.push((s.k, best)),
            }
        }
        Ok(Self { points })
    }

    pub fn at(&self, t: f64) -> Option<f64> {
        self.points
            .iter()
            .take_while(|(k, _)| *k as f64 <= t)
            .last()
            .map(|&(_, psi)| psi)
    }

    /// `min_t psi(t) + lambda * t` over the sampled budgets.
    pub fn legendre(&self, lambda: f64) -> f64 {
        self.points
            .iter()
            .map(|&(t, psi)| psi + lambda * t as f64)
            .fold(f64::INFINITY, f64::min)
    }
}

/// True iff the Lagrangian complexity agrees with the transform of `curve`
/// at every lambda in the grid, within 1e-9.
pub fn legendre_consistent_with(
    curve: &StructureCurve,
    family: &ModelFamily,
    pairs: &[Pair],
    lambda_grid: &[f64],
) -> bool {
    lambda_grid.iter().all(
        |&lambda| match lagrangian_complexity(family, pairs, lambda) {
            Ok(r) => (r.gamma - curve.legendre(lambda)).abs() <= 1e-9,
            Err(_) => false,
        },
    )
}

pub fn legendre_consistency(family: &ModelFamily, pairs: &[Pair], lambda_grid: &[f64]) -> bool {
    match StructureCurve::compute(family, pairs) {
        Ok(curve) => legendre_consistent_with(&curve, family, pairs, lambda_grid),
        Err(_) => false,
    }
}
