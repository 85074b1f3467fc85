//! Random ground-truth content.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mdl::{ContentElement, MechanismGraph, MechanismNode};

use super::scenario::ContentSpec;
use super::HarnessError;

pub fn element_id(i: usize) -> String {
    format!("y{i:02}")
}

/// One random acyclic model per element. Node `j` draws up to `max_parents`
/// parents among nodes `0..j`. Noise symbol 0 always has weight 255; the
/// others get weights in `1..=max(1, 255 * noise)`.
pub fn generate_truth(spec: &ContentSpec, seed: u64) -> Result<Vec<ContentElement>, HarnessError> {
    if spec.elements == 0 || spec.variables == 0 || spec.alphabet == 0 || spec.noise_symbols == 0 {
        return Err(HarnessError::Infeasible(
            "elements, variables, alphabet and noise_symbols must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = ((255.0 * spec.noise).round() as u8).max(1);
    let mut out = Vec::with_capacity(spec.elements);
    for i in 0..spec.elements {
        let mut nodes: Vec<MechanismNode> = Vec::with_capacity(spec.variables);
        for j in 0..spec.variables {
            let k = rng.gen_range(0..=spec.max_parents.min(j));
            let mut parents = sample(&mut rng, j, k).into_vec();
            parents.sort_unstable();
            let mut noise_weights = vec![255u8];
            noise_weights.extend((1..spec.noise_symbols).map(|_| rng.gen_range(1..=top)));
            let rows: usize = parents.iter().map(|_| spec.alphabet).product();
            let table = (0..rows * spec.noise_symbols)
                .map(|_| rng.gen_range(0..spec.alphabet))
                .collect();
            nodes.push(MechanismNode {
                arity: spec.alphabet,
                parents,
                noise_weights,
                table,
            });
        }
        let element = ContentElement::new(element_id(i), MechanismGraph { nodes })?;
        element.truth.validate().map_err(|v| {
            HarnessError::Infeasible(format!("generated model failed validation: {v:?}"))
        })?;
        out.push(element);
    }
    Ok(out)
}
