//! Structural property checks on joints and representation maps.
//!
//! A representation map sends a full assignment (aligned with
//! [`Scm::variables`]) to an arbitrary ordered value.

use std::collections::BTreeMap;

use super::{CounterfactualQuery, Intervention, Pmf, Scm, ScmError, Symbol, EQUALITY_TOL};

type Conditional = BTreeMap<Vec<Symbol>, BTreeMap<Symbol, f64>>;

fn conditional(joint: &Pmf, target: usize, parents: &[usize]) -> Conditional {
    let mut out: Conditional = BTreeMap::new();
    for (k, p) in joint.iter() {
        let row: Vec<Symbol> = parents.iter().map(|&i| k[i]).collect();
        *out.entry(row).or_default().entry(k[target]).or_insert(0.0) += p;
    }
    for dist in out.values_mut() {
        let t: f64 = dist.values().sum();
        for v in dist.values_mut() {
            *v /= t;
        }
    }
    out
}

fn position(joint: &Pmf, var: &str) -> Result<usize, ScmError> {
    joint
        .variables()
        .iter()
        .position(|v| v == var)
        .ok_or_else(|| ScmError::UnknownVariable(var.to_string()))
}

fn dists_agree<V: Ord>(a: &BTreeMap<V, f64>, b: &BTreeMap<V, f64>) -> bool {
    a.keys()
        .chain(b.keys())
        .all(|s| (a.get(s).unwrap_or(&0.0) - b.get(s).unwrap_or(&0.0)).abs() <= EQUALITY_TOL)
}

/// True iff the joint factorizes as the product of `p(z_i | parents_i)` at
/// every support point, so that it sums to one over the support.
pub fn check_disentangled(
    joint: &Pmf,
    parent_sets: &BTreeMap<String, Vec<String>>,
) -> Result<bool, ScmError> {
    let mut factors = Vec::with_capacity(joint.variables().len());
    for (i, var) in joint.variables().iter().enumerate() {
        let parents: Vec<usize> = parent_sets
            .get(var)
            .map(|ps| ps.iter().map(|p| position(joint, p)).collect())
            .transpose()?
            .unwrap_or_default();
        factors.push((i, parents.clone(), conditional(joint, i, &parents)));
    }
    let mut product_mass = 0.0;
    for (k, p) in joint.iter() {
        let product: f64 = factors
            .iter()
            .map(|(i, parents, table)| {
                let row: Vec<Symbol> = parents.iter().map(|&j| k[j]).collect();
                table[&row].get(&k[*i]).copied().unwrap_or(0.0)
            })
            .product();
        if (product - p).abs() > EQUALITY_TOL {
            return Ok(false);
        }
        product_mass += product;
    }
    Ok((product_mass - 1.0).abs() <= EQUALITY_TOL)
}

/// True iff `p(var | parents)` agrees between the two models wherever the
/// parent configuration has positive probability in both. Parents are read
/// from `before`.
pub fn mechanism_conditionals_agree(
    before: &Scm,
    after: &Scm,
    var: &str,
) -> Result<bool, ScmError> {
    let mech = before
        .mechanism(var)
        .ok_or_else(|| ScmError::UnknownVariable(var.to_string()))?;
    let ja = before.joint_distribution()?;
    let jb = after.joint_distribution()?;
    let t = position(&ja, var)?;
    let parents: Vec<usize> = mech
        .parents
        .iter()
        .map(|p| position(&ja, p))
        .collect::<Result<_, _>>()?;
    let ca = conditional(&ja, t, &parents);
    let cb = conditional(&jb, position(&jb, var)?, &parents);
    Ok(ca
        .iter()
        .filter_map(|(row, da)| cb.get(row).map(|db| (da, db)))
        .all(|(da, db)| dists_agree(da, db)))
}

/// True iff intervening on other variables leaves `p(var | parents)`
/// unchanged. An intervention that assigns `var` itself replaces its
/// mechanism and is reported as `false`.
pub fn check_mechanism_independence(
    scm: &Scm,
    var: &str,
    iv: &Intervention,
) -> Result<bool, ScmError> {
    if iv.assignments.contains_key(var) {
        return Ok(false);
    }
    let after = scm.apply_do(iv)?;
    mechanism_conditionals_agree(scm, &after, var)
}

fn content_given_repr<R: Ord>(
    joint: &Pmf,
    content: usize,
    repr: &impl Fn(&[Symbol]) -> R,
) -> BTreeMap<R, BTreeMap<Symbol, f64>> {
    let mut out: BTreeMap<R, BTreeMap<Symbol, f64>> = BTreeMap::new();
    for (k, p) in joint.iter() {
        *out.entry(repr(k))
            .or_default()
            .entry(k[content])
            .or_insert(0.0) += p;
    }
    for dist in out.values_mut() {
        let t: f64 = dist.values().sum();
        for v in dist.values_mut() {
            *v /= t;
        }
    }
    out
}

/// True iff `p(content | repr)` agrees across every pair of query
/// interventions, wherever a representation value has positive probability
/// under both.
pub fn check_generalizable<R: Ord>(
    scm: &Scm,
    content_var: &str,
    repr: impl Fn(&[Symbol]) -> R,
    queries: &[Intervention],
) -> Result<bool, ScmError> {
    let c = scm
        .index_of(content_var)
        .ok_or_else(|| ScmError::UnknownVariable(content_var.to_string()))?;
    let tables = queries
        .iter()
        .map(|q| Ok(content_given_repr(&scm.interventional_joint(q)?, c, &repr)))
        .collect::<Result<Vec<_>, ScmError>>()?;
    Ok(all_pairs_agree(&tables))
}

fn all_pairs_agree<K: Ord, V: Ord>(tables: &[BTreeMap<K, BTreeMap<V, f64>>]) -> bool {
    for (i, a) in tables.iter().enumerate() {
        for b in &tables[i + 1..] {
            for (key, da) in a {
                let Some(db) = b.get(key) else { continue };
                if !dists_agree(da, db) {
                    return false;
                }
            }
        }
    }
    true
}

/// True iff `p(repr | structure)` agrees across every pair of style
/// interventions. Style interventions may not assign
/// the structure variable.
pub fn check_style_invariance<R: Ord>(
    scm: &Scm,
    structure_var: &str,
    repr: impl Fn(&[Symbol]) -> R,
    style_interventions: &[Intervention],
) -> Result<bool, ScmError> {
    let s = scm
        .index_of(structure_var)
        .ok_or_else(|| ScmError::UnknownVariable(structure_var.to_string()))?;
    for iv in style_interventions {
        if iv.assignments.contains_key(structure_var) {
            return Err(ScmError::InvalidStyleIntervention(
                structure_var.to_string(),
            ));
        }
    }
    let repr_given_structure = |joint: &Pmf| {
        let mut out: BTreeMap<Symbol, BTreeMap<R, f64>> = BTreeMap::new();
        for (k, p) in joint.iter() {
            *out.entry(k[s]).or_default().entry(repr(k)).or_insert(0.0) += p;
        }
        for dist in out.values_mut() {
            let t: f64 = dist.values().sum();
            for v in dist.values_mut() {
                *v /= t;
            }
        }
        out
    };
    let tables = style_interventions
        .iter()
        .map(|iv| Ok(repr_given_structure(&scm.interventional_joint(iv)?)))
        .collect::<Result<Vec<_>, ScmError>>()?;
    Ok(all_pairs_agree(&tables))
}

/// True iff for every observable assignment `x` and every value `q` of
/// `q_var`, the representation of the counterfactual world under `do(q)`
/// given full evidence `x` equals `repr(x)` almost surely.
pub fn check_counterfactually_invariant<R: Ord>(
    scm: &Scm,
    repr: impl Fn(&[Symbol]) -> R,
    q_var: &str,
) -> Result<bool, ScmError> {
    let arity = scm
        .variable(q_var)
        .ok_or_else(|| ScmError::UnknownVariable(q_var.to_string()))?
        .arity();
    let joint = scm.joint_distribution()?;
    for (x, _) in joint.iter() {
        let z0 = repr(x);
        for q in 0..arity {
            let query = CounterfactualQuery {
                factual: scm.to_named(x),
                intervention: Intervention::none().set(q_var, q),
                target: q_var.to_string(),
            };
            let cf = scm.counterfactual_joint(&query)?;
            if cf.iter().any(|(y, _)| repr(y) != z0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
