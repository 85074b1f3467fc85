//! Conditional models `p(z | context)` with canonical serializations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::bits::{index_width, BitString};

use super::MdlError;

/// Fixed header shared by every canonical serialization: kind (8 bits),
/// order (8), input arity (16), output arity (16), row count (16).
pub const HEADER_BITS: usize = 64;
/// Quantization precision for table weights.
pub const WEIGHT_BITS: usize = 8;
pub const MAX_FAMILY_SIZE: usize = 4096;

const KIND_UNIFORM: u64 = 0;
const KIND_SUFFIX: u64 = 1;

/// One scored observation: the symbol `z` seen after `context` (oldest
/// first).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pair {
    pub context: Vec<u32>,
    pub z: u32,
}

/// Next-symbol pairs with up to `max_order` symbols of history. Early
/// positions get shorter contexts.
pub fn pairs_from_symbols(symbols: &[u32], max_order: usize) -> Vec<Pair> {
    (0..symbols.len())
        .map(|i| Pair {
            context: symbols[i.saturating_sub(max_order)..i].to_vec(),
            z: symbols[i],
        })
        .collect()
}

pub trait ConditionalModel: fmt::Debug + Send + Sync {
    fn id(&self) -> String;

    fn prob(&self, context: &[u32], z: u32) -> f64;

    fn canonical_bits(&self) -> BitString;

    /// `K`: the canonical serialization length in bits.
    fn description_length(&self) -> usize {
        self.canonical_bits().len()
    }

    /// True for parameter-free members that predict every symbol equally.
    fn is_uniform(&self) -> bool {
        false
    }
}

fn header(kind: u64, order: usize, in_arity: usize, out_arity: usize, rows: usize) -> BitString {
    let mut b = BitString::new();
    b.push_uint(kind, 8);
    b.push_uint(order as u64, 8);
    b.push_uint(in_arity as u64, 16);
    b.push_uint(out_arity as u64, 16);
    b.push_uint(rows as u64, 16);
    b
}

/// Predicts every output symbol with probability `1 / out_arity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformModel {
    pub in_arity: usize,
    pub out_arity: usize,
}

impl ConditionalModel for UniformModel {
    fn id(&self) -> String {
        "uniform".to_string()
    }

    fn prob(&self, _context: &[u32], z: u32) -> f64 {
        if (z as usize) < self.out_arity {
            1.0 / self.out_arity as f64
        } else {
            0.0
        }
    }

    fn canonical_bits(&self) -> BitString {
        header(KIND_UNIFORM, 0, self.in_arity, self.out_arity, 0)
    }

    fn is_uniform(&self) -> bool {
        true
    }
}

/// An order-`k` table model: the last `k` context symbols select a row of
/// 8-bit weights, and `p(z) = w_z / sum(w)`. Contexts shorter than `k` or
/// absent from the table fall back to uniform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixTableModel {
    order: usize,
    in_arity: usize,
    out_arity: usize,
    rows: BTreeMap<Vec<u32>, Vec<u8>>,
}

impl SuffixTableModel {
    pub fn new(
        order: usize,
        in_arity: usize,
        out_arity: usize,
        rows: BTreeMap<Vec<u32>, Vec<u8>>,
    ) -> Self {
        debug_assert!(rows.keys().all(|k| k.len() == order));
        debug_assert!(rows
            .values()
            .all(|w| w.len() == out_arity && w.iter().any(|&x| x > 0)));
        Self {
            order,
            in_arity,
            out_arity,
            rows,
        }
    }

    /// Fits weights from counts: `w = round(255 * c / max_c)`, with every
    /// observed symbol kept at weight at least 1.
    pub fn fit(pairs: &[Pair], order: usize, in_arity: usize, out_arity: usize) -> Self {
        let mut counts: BTreeMap<Vec<u32>, Vec<u64>> = BTreeMap::new();
        for p in pairs {
            if p.context.len() < order || (p.z as usize) >= out_arity {
                continue;
            }
            let key = p.context[p.context.len() - order..].to_vec();
            counts.entry(key).or_insert_with(|| vec![0; out_arity])[p.z as usize] += 1;
        }
        let rows = counts
            .into_iter()
            .map(|(k, c)| {
                let max = *c.iter().max().unwrap() as f64;
                let w = c
                    .iter()
                    .map(|&x| {
                        if x == 0 {
                            0
                        } else {
                            ((255.0 * x as f64 / max).round() as u8).max(1)
                        }
                    })
                    .collect();
                (k, w)
            })
            .collect();
        Self::new(order, in_arity, out_arity, rows)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Serialized size of one table row.
    pub fn row_bits(&self) -> usize {
        self.order * index_width(self.in_arity) + self.out_arity * WEIGHT_BITS
    }
}

impl ConditionalModel for SuffixTableModel {
    fn id(&self) -> String {
        format!("suffix-{}", self.order)
    }

    fn prob(&self, context: &[u32], z: u32) -> f64 {
        if (z as usize) >= self.out_arity {
            return 0.0;
        }
        if context.len() >= self.order {
            if let Some(w) = self.rows.get(&context[context.len() - self.order..]) {
                let total: u32 = w.iter().map(|&x| u32::from(x)).sum();
                return f64::from(w[z as usize]) / f64::from(total);
            }
        }
        1.0 / self.out_arity as f64
    }

    fn canonical_bits(&self) -> BitString {
        let mut b = header(
            KIND_SUFFIX,
            self.order,
            self.in_arity,
            self.out_arity,
            self.rows.len(),
        );
        let cw = index_width(self.in_arity);
        for (ctx, w) in &self.rows {
            for &s in ctx {
                b.push_uint(u64::from(s), cw);
            }
            for &x in w {
                b.push_uint(u64::from(x), WEIGHT_BITS);
            }
        }
        b
    }

    fn description_length(&self) -> usize {
        HEADER_BITS + self.rows.len() * self.row_bits()
    }
}

/// A finite, enumerable set of candidate models with unique ids.
#[derive(Debug)]
pub struct ModelFamily {
    members: Vec<Box<dyn ConditionalModel>>,
}

impl ModelFamily {
    pub fn new(members: Vec<Box<dyn ConditionalModel>>) -> Result<Self, MdlError> {
        if members.is_empty() {
            return Err(MdlError::EmptyFamily);
        }
        if members.len() > MAX_FAMILY_SIZE {
            return Err(MdlError::FamilyTooLarge(members.len()));
        }
        let mut ids = BTreeSet::new();
        for m in &members {
            if !ids.insert(m.id()) {
                return Err(MdlError::DuplicateModelId(m.id()));
            }
        }
        Ok(Self { members })
    }

    /// The uniform model plus table models of every order `0..=max_order`
    /// fitted to `pairs`. Orders whose table would exceed the 16-bit row
    /// count are left out.
    pub fn fit_markov(pairs: &[Pair], in_arity: usize, out_arity: usize, max_order: usize) -> Self {
        let mut members: Vec<Box<dyn ConditionalModel>> = vec![Box::new(UniformModel {
            in_arity,
            out_arity,
        })];
        for k in 0..=max_order {
            let m = SuffixTableModel::fit(pairs, k, in_arity, out_arity);
            if m.row_count() <= usize::from(u16::MAX) {
                members.push(Box::new(m));
            }
        }
        Self::new(members).expect("fitted family has unique ids and at least one member")
    }

    pub fn members(&self) -> &[Box<dyn ConditionalModel>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&dyn ConditionalModel> {
        self.members
            .iter()
            .find(|m| m.id() == id)
            .map(|m| m.as_ref())
    }
}
