//! Small reference models and seeded random model generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Mechanism, Scm, Variable};

fn bit(id: &str) -> Variable {
    Variable::with_arity(id, 2)
}

fn bern(p: f64) -> Vec<f64> {
    vec![1.0 - p, p]
}

/// `X ~ Bern(p_x)`, `Y = X xor Bern(p_noise)`.
pub fn xor_chain(p_x: f64, p_noise: f64) -> Scm {
    Scm::new(
        vec![bit("X"), bit("Y")],
        vec![
            Mechanism::new("X", &[], bern(p_x), vec![0, 1]),
            Mechanism::new("Y", &["X"], bern(p_noise), vec![0, 1, 1, 0]),
        ],
    )
}

/// Seeded XOR-coupled pairs with noise level in `[0.05, 0.45]`.
pub fn xor_coupled_family(n: usize, seed: u64) -> Vec<Scm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| xor_chain(rng.gen_range(0.1..0.9), rng.gen_range(0.05..=0.45)))
        .collect()
}

/// Confounded triangle `Z -> X`, `Z -> Y`, `X -> Y`:
/// `Z ~ Bern(q)`, `X = Z xor Bern(p_x)`,
/// `Y = Z xor (gate and X) xor Bern(p_y)`.
pub fn confounded_triangle(q: f64, p_x: f64, p_y: f64, gate: bool) -> Scm {
    let mut y_table = Vec::with_capacity(8);
    for z in 0..2 {
        for x in 0..2 {
            let base = z ^ (usize::from(gate) & x);
            y_table.extend([base, base ^ 1]);
        }
    }
    Scm::new(
        vec![bit("X"), bit("Y"), bit("Z")],
        vec![
            Mechanism::new("Z", &[], bern(q), vec![0, 1]),
            Mechanism::new("X", &["Z"], bern(p_x), vec![0, 1, 1, 0]),
            Mechanism::new("Y", &["Z", "X"], bern(p_y), y_table),
        ],
    )
}

/// Seeded confounded triangles with confounder prior in `[0.2, 0.8]`,
/// treatment noise in `[0.05, 0.3]` and outcome noise in `[0.0, 0.2]`.
pub fn confounded_triangle_family(n: usize, seed: u64) -> Vec<Scm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            confounded_triangle(
                rng.gen_range(0.2..=0.8),
                rng.gen_range(0.05..=0.3),
                rng.gen_range(0.0..=0.2),
                rng.gen(),
            )
        })
        .collect()
}

/// Bounds for [`random_scm`].
#[derive(Debug, Clone, Copy)]
pub struct RandomScmSpec {
    pub max_variables: usize,
    pub max_alphabet: usize,
    pub max_noise: usize,
    pub max_parents: usize,
}

impl Default for RandomScmSpec {
    fn default() -> Self {
        Self {
            max_variables: 5,
            max_alphabet: 4,
            max_noise: 3,
            max_parents: 2,
        }
    }
}

/// A random valid acyclic model. Variables are named `v0, v1, ...`; each
/// draws its parents from earlier variables, so the naming order is a
/// topological order.
pub fn random_scm(rng: &mut impl Rng, spec: &RandomScmSpec) -> Scm {
    let n = rng.gen_range(1..=spec.max_variables.max(1));
    let arity: Vec<usize> = (0..n)
        .map(|_| rng.gen_range(1..=spec.max_alphabet.max(1)))
        .collect();
    let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut variables = Vec::with_capacity(n);
    let mut mechanisms = Vec::with_capacity(n);
    for i in 0..n {
        variables.push(Variable::with_arity(ids[i].clone(), arity[i]));
        let mut candidates: Vec<usize> = (0..i).collect();
        candidates.shuffle(rng);
        let k = rng.gen_range(0..=spec.max_parents.min(i));
        let mut parents: Vec<usize> = candidates[..k].to_vec();
        parents.sort_unstable();
        let rows: usize = parents.iter().map(|&p| arity[p]).product();
        let noise_len = rng.gen_range(1..=spec.max_noise.max(1));
        let raw: Vec<f64> = (0..noise_len).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let mut noise: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        // Absorb rounding into the last entry so the pmf is normalized.
        let head: f64 = noise[..noise_len - 1].iter().sum();
        noise[noise_len - 1] = 1.0 - head;
        let table = (0..rows * noise_len)
            .map(|_| rng.gen_range(0..arity[i]))
            .collect();
        mechanisms.push(Mechanism {
            target: ids[i].clone(),
            parents: parents.iter().map(|&p| ids[p].clone()).collect(),
            noise,
            table,
        });
    }
    Scm::new(variables, mechanisms)
}

/// `n` random models from one seed.
pub fn random_corpus(n: usize, seed: u64, spec: &RandomScmSpec) -> Vec<Scm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_scm(&mut rng, spec)).collect()
}
