//! Exact inference by enumeration of noise realizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    Assignment, CounterfactualQuery, Intervention, Mechanism, Pmf, Scm, ScmError, Symbol,
    MAX_STATES,
};

/// Index-based view of a validated model.
pub(crate) struct Compiled<'a> {
    arity: Vec<usize>,
    parents: Vec<Vec<usize>>,
    noise: Vec<&'a [f64]>,
    tables: Vec<&'a [Symbol]>,
    order: Vec<usize>,
}

impl<'a> Compiled<'a> {
    pub(crate) fn new(scm: &'a Scm) -> Result<Self, ScmError> {
        scm.validate().map_err(ScmError::Invalid)?;
        // After validation, mechanisms and variables align one-to-one by index.
        let arity: Vec<usize> = scm.variables().iter().map(|v| v.arity()).collect();
        let parents: Vec<Vec<usize>> = scm
            .mechanisms()
            .iter()
            .map(|m| m.parents.iter().map(|p| scm.index_of(p).unwrap()).collect())
            .collect();
        let noise = scm
            .mechanisms()
            .iter()
            .map(|m| m.noise.as_slice())
            .collect();
        let tables = scm
            .mechanisms()
            .iter()
            .map(|m| m.table.as_slice())
            .collect();
        let order = topological_order(&parents);
        Ok(Self {
            arity,
            parents,
            noise,
            tables,
            order,
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.arity.len()
    }

    fn row(&self, v: usize, values: &[Symbol]) -> usize {
        self.parents[v]
            .iter()
            .fold(0, |acc, &p| acc * self.arity[p] + values[p])
    }

    fn check_size(&self) -> Result<(), ScmError> {
        let worlds: u128 = self
            .noise
            .iter()
            .map(|n| n.iter().filter(|&&p| p > 0.0).count() as u128)
            .try_fold(1u128, |acc, k| acc.checked_mul(k))
            .unwrap_or(u128::MAX);
        let states: u128 = self
            .arity
            .iter()
            .try_fold(1u128, |acc, &k| acc.checked_mul(k as u128))
            .unwrap_or(u128::MAX);
        let big = worlds.max(states);
        if big > MAX_STATES {
            return Err(ScmError::StateSpaceTooLarge { states: big });
        }
        Ok(())
    }

    /// Pushes a full noise realization through the mechanisms.
    pub(crate) fn evaluate(&self, noise: &[usize]) -> Assignment {
        let mut values = vec![0; self.len()];
        for &v in &self.order {
            let k = self.noise[v].len();
            values[v] = self.tables[v][self.row(v, &values) * k + noise[v]];
        }
        values
    }

    /// Calls `f(noise, values, probability)` for every noise realization with
    /// positive probability.
    pub(crate) fn for_each_world(
        &self,
        mut f: impl FnMut(&[usize], &[Symbol], f64),
    ) -> Result<(), ScmError> {
        self.check_size()?;
        let mut noise = vec![0; self.len()];
        let mut values = vec![0; self.len()];
        self.walk(0, &mut noise, &mut values, 1.0, &mut f);
        Ok(())
    }

    fn walk(
        &self,
        pos: usize,
        noise: &mut Vec<usize>,
        values: &mut Vec<Symbol>,
        p: f64,
        f: &mut impl FnMut(&[usize], &[Symbol], f64),
    ) {
        if pos == self.order.len() {
            f(noise, values, p);
            return;
        }
        let v = self.order[pos];
        let row = self.row(v, values);
        let k = self.noise[v].len();
        for (e, &pe) in self.noise[v].iter().enumerate() {
            if pe <= 0.0 {
                continue;
            }
            noise[v] = e;
            values[v] = self.tables[v][row * k + e];
            self.walk(pos + 1, noise, values, p * pe, f);
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> Assignment {
        let noise: Vec<usize> = self
            .noise
            .iter()
            .map(|pmf| {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut last = 0;
                for (e, &p) in pmf.iter().enumerate() {
                    if p <= 0.0 {
                        continue;
                    }
                    acc += p;
                    last = e;
                    if u < acc {
                        return e;
                    }
                }
                last
            })
            .collect();
        self.evaluate(&noise)
    }
}

/// Kahn's algorithm, always releasing the smallest ready index first.
fn topological_order(parents: &[Vec<usize>]) -> Vec<usize> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (v, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(v);
        }
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    order
}

impl Scm {
    /// The full observational joint over all variables.
    pub fn joint_distribution(&self) -> Result<Pmf, ScmError> {
        let c = Compiled::new(self)?;
        let mut out = Pmf::new(self.variable_ids());
        c.for_each_world(|_, values, p| out.add(values.to_vec(), p))?;
        Ok(out)
    }

    /// One ancestral sample, reproducible from `seed`.
    pub fn sample(&self, seed: u64) -> Result<Assignment, ScmError> {
        let c = Compiled::new(self)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(c.sample(&mut rng))
    }

    /// `n` samples from one seeded stream.
    pub fn sample_n(&self, n: usize, seed: u64) -> Result<Vec<Assignment>, ScmError> {
        let c = Compiled::new(self)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n).map(|_| c.sample(&mut rng)).collect())
    }

    /// The mutilated model: each assigned variable's mechanism is replaced by
    /// a constant. Conditioning in `iv` is ignored here.
    pub fn apply_do(&self, iv: &Intervention) -> Result<Scm, ScmError> {
        let mut out = self.clone();
        for (var, &sym) in &iv.assignments {
            self.check_symbol(var, sym)?;
            let slot = out
                .mechanisms
                .iter_mut()
                .find(|m| &m.target == var)
                .ok_or_else(|| ScmError::UnknownVariable(var.clone()))?;
            *slot = Mechanism::constant(var.clone(), sym);
        }
        Ok(out)
    }

    fn check_intervention(&self, iv: &Intervention) -> Result<(), ScmError> {
        for (var, &sym) in &iv.assignments {
            self.check_symbol(var, sym)?;
            if iv.conditioning.contains_key(var) {
                return Err(ScmError::OverlappingIntervention(var.clone()));
            }
        }
        for (var, &sym) in &iv.conditioning {
            self.check_symbol(var, sym)?;
        }
        Ok(())
    }

    /// Joint over all variables after `do(iv.assignments)`, conditioned on
    /// `iv.conditioning`.
    pub fn interventional_joint(&self, iv: &Intervention) -> Result<Pmf, ScmError> {
        self.check_intervention(iv)?;
        let joint = self.apply_do(iv)?.joint_distribution()?;
        if iv.conditioning.is_empty() {
            Ok(joint)
        } else {
            joint.condition(&iv.conditioning)
        }
    }

    /// `p(target | do(assignments), conditioning)`.
    pub fn interventional_distribution(
        &self,
        iv: &Intervention,
        target: &str,
    ) -> Result<Pmf, ScmError> {
        self.index_of(target)
            .ok_or_else(|| ScmError::UnknownVariable(target.to_string()))?;
        self.interventional_joint(iv)?.marginal(&[target])
    }

    /// Joint over all variables in the counterfactual world: noise is abduced
    /// from the factual evidence, the intervention is applied, and the
    /// abduced noise is pushed through the mutilated model.
    pub fn counterfactual_joint(&self, q: &CounterfactualQuery) -> Result<Pmf, ScmError> {
        self.check_intervention(&q.intervention)?;
        let evidence: Vec<(usize, Symbol)> = q
            .factual
            .iter()
            .map(|(v, &s)| Ok((self.check_symbol(v, s)?, s)))
            .collect::<Result<_, ScmError>>()?;

        let factual = Compiled::new(self)?;
        let mut posterior: Vec<(Vec<usize>, f64)> = Vec::new();
        factual.for_each_world(|noise, values, p| {
            if evidence.iter().all(|&(i, s)| values[i] == s) {
                posterior.push((noise.to_vec(), p));
            }
        })?;
        let total: f64 = posterior.iter().map(|(_, p)| p).sum();
        if posterior.is_empty() || total <= 0.0 {
            return Err(ScmError::ImpossibleFactual);
        }

        let mutilated = self.apply_do(&q.intervention)?;
        let cf = Compiled::new(&mutilated)?;
        let intervened: Vec<usize> = q
            .intervention
            .assignments
            .keys()
            .map(|v| self.index_of(v).unwrap())
            .collect();
        let mut out = Pmf::new(self.variable_ids());
        for (mut noise, p) in posterior {
            for &i in &intervened {
                noise[i] = 0;
            }
            out.add(cf.evaluate(&noise), p / total);
        }
        if q.intervention.conditioning.is_empty() {
            Ok(out)
        } else {
            out.condition(&q.intervention.conditioning)
        }
    }

    /// The counterfactual distribution of `q.target`.
    pub fn counterfactual(&self, q: &CounterfactualQuery) -> Result<Pmf, ScmError> {
        self.index_of(&q.target)
            .ok_or_else(|| ScmError::UnknownVariable(q.target.clone()))?;
        self.counterfactual_joint(q)?.marginal(&[q.target.as_str()])
    }
}
