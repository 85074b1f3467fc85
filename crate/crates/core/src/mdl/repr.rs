//! Bit-encoded representations of small mechanism graphs.
//!
//! Wire layout, most significant bit first:
//!
//! | field                  | width                         |
//! |------------------------|-------------------------------|
//! | representation id      | 16                            |
//! | node count - 1         | 4                             |
//! | per node: arity - 1    | 4                             |
//! | parent count           | 4                             |
//! | each parent index      | 4                             |
//! | noise length - 1       | 4                             |
//! | each noise weight      | 8                             |
//! | each table cell        | `index_width(arity)`          |

use std::fmt;

use crate::bits::{index_width, BitString};
use crate::scm::{Mechanism, Scm, Symbol, Variable};

use super::MdlError;

pub const MAX_NODES: usize = 16;
const MAX_ARITY: usize = 16;
const MAX_NOISE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReprId(pub u16);

impl fmt::Display for ReprId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismNode {
    pub arity: usize,
    /// Indices of earlier nodes, most significant first in the row index.
    pub parents: Vec<usize>,
    /// Unnormalized noise weights; canonical form has max weight 255 and no
    /// zero weights.
    pub noise_weights: Vec<u8>,
    pub table: Vec<Symbol>,
}

impl MechanismNode {
    pub fn rows(&self, nodes: &[MechanismNode]) -> usize {
        self.parents.iter().map(|&p| nodes[p].arity).product()
    }

    pub fn noise_pmf(&self) -> Vec<f64> {
        let total: f64 = self.noise_weights.iter().map(|&w| f64::from(w)).sum();
        self.noise_weights
            .iter()
            .map(|&w| f64::from(w) / total)
            .collect()
    }

    pub fn is_deterministic(&self) -> bool {
        self.noise_weights.len() == 1
    }
}

/// A topologically ordered list of finite mechanisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismGraph {
    pub nodes: Vec<MechanismNode>,
}

pub fn variable_id(index: usize) -> String {
    format!("v{index:02}")
}

impl MechanismGraph {
    pub fn validate(&self) -> Result<(), MdlError> {
        let bad = |m: String| Err(MdlError::NonCanonical(m));
        if self.nodes.is_empty() || self.nodes.len() > MAX_NODES {
            return bad(format!("{} nodes", self.nodes.len()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.arity == 0 || n.arity > MAX_ARITY {
                return bad(format!("node {i} has arity {}", n.arity));
            }
            if n.parents.len() >= MAX_NODES {
                return bad(format!("node {i} has {} parents", n.parents.len()));
            }
            for (j, &p) in n.parents.iter().enumerate() {
                if p >= i {
                    return bad(format!("node {i} lists non-earlier parent {p}"));
                }
                if n.parents[..j].contains(&p) {
                    return bad(format!("node {i} repeats parent {p}"));
                }
            }
            if n.noise_weights.is_empty() || n.noise_weights.len() > MAX_NOISE {
                return bad(format!(
                    "node {i} has {} noise symbols",
                    n.noise_weights.len()
                ));
            }
            if n.noise_weights.contains(&0) || n.noise_weights.iter().max() != Some(&255) {
                return bad(format!("node {i} noise weights are not normalized to 255"));
            }
            let cells = n.rows(&self.nodes) * n.noise_weights.len();
            if n.table.len() != cells {
                return bad(format!(
                    "node {i} table has {} cells, expected {cells}",
                    n.table.len()
                ));
            }
            if n.table.iter().any(|&s| s >= n.arity) {
                return bad(format!("node {i} table symbol out of range"));
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.nodes.iter().map(|n| n.table.len()).sum()
    }

    /// Total bits to spell out every table cell.
    pub fn table_bits(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.table.len() * index_width(n.arity))
            .sum()
    }

    pub fn is_deterministic(&self) -> bool {
        self.nodes.iter().all(MechanismNode::is_deterministic)
    }

    /// The model with variables `v00, v01, ...` and symbols `"0", "1", ...`.
    pub fn to_scm(&self) -> Scm {
        let variables = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| Variable::with_arity(variable_id(i), n.arity))
            .collect();
        let mechanisms = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| Mechanism {
                target: variable_id(i),
                parents: n.parents.iter().map(|&p| variable_id(p)).collect(),
                noise: n.noise_pmf(),
                table: n.table.clone(),
            })
            .collect();
        Scm::new(variables, mechanisms)
    }

    /// Reads a model whose sorted variable order is topological. Noise pmfs
    /// are quantized to 8-bit weights relative to the most likely symbol.
    pub fn from_scm(scm: &Scm) -> Result<Self, MdlError> {
        scm.validate()
            .map_err(|v| MdlError::NonCanonical(format!("invalid model: {v:?}")))?;
        let mut nodes = Vec::with_capacity(scm.len());
        for (i, (v, m)) in scm.variables().iter().zip(scm.mechanisms()).enumerate() {
            let parents: Vec<usize> = m.parents.iter().map(|p| scm.index_of(p).unwrap()).collect();
            if parents.iter().any(|&p| p >= i) {
                return Err(MdlError::NonCanonical(format!(
                    "variable {:?} has a parent later in id order",
                    v.id
                )));
            }
            if m.noise.contains(&0.0) {
                return Err(MdlError::NonCanonical(format!(
                    "variable {:?} has a zero-probability noise symbol",
                    v.id
                )));
            }
            let max = m.noise.iter().copied().fold(0.0, f64::max);
            let noise_weights = m
                .noise
                .iter()
                .map(|&p| ((255.0 * p / max).round() as u8).max(1))
                .collect();
            nodes.push(MechanismNode {
                arity: v.arity(),
                parents,
                noise_weights,
                table: m.table.clone(),
            });
        }
        let g = Self { nodes };
        g.validate()?;
        Ok(g)
    }

    /// Drops every parent the node's table ignores.
    pub fn minimize(&self) -> Self {
        let mut out = self.clone();
        for i in 0..out.nodes.len() {
            let mut j = out.nodes[i].parents.len();
            while j > 0 {
                j -= 1;
                if let Some(reduced) = drop_parent_if_ignored(&out.nodes, i, j) {
                    out.nodes[i] = reduced;
                }
            }
        }
        out
    }
}

/// Returns the node without parent slot `j` if its table never depends on
/// that parent's value.
fn drop_parent_if_ignored(nodes: &[MechanismNode], i: usize, j: usize) -> Option<MechanismNode> {
    let n = &nodes[i];
    let radix: Vec<usize> = n.parents.iter().map(|&p| nodes[p].arity).collect();
    let k = n.noise_weights.len();
    // Split the row index into (high, digit j, low).
    let low: usize = radix[j + 1..].iter().product();
    let high: usize = radix[..j].iter().product();
    let aj = radix[j];
    let mut table = Vec::with_capacity(n.table.len() / aj);
    for h in 0..high {
        for l in 0..low {
            for e in 0..k {
                let cell = |d: usize| n.table[((h * aj + d) * low + l) * k + e];
                let first = cell(0);
                if (1..aj).any(|d| cell(d) != first) {
                    return None;
                }
                table.push(first);
            }
        }
    }
    let mut parents = n.parents.clone();
    parents.remove(j);
    Some(MechanismNode {
        arity: n.arity,
        parents,
        noise_weights: n.noise_weights.clone(),
        table,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representation {
    pub id: ReprId,
    pub graph: MechanismGraph,
}

impl Representation {
    pub fn encode(&self) -> BitString {
        let mut b = BitString::new();
        b.push_uint(u64::from(self.id.0), 16);
        b.push_uint((self.graph.nodes.len() - 1) as u64, 4);
        for n in &self.graph.nodes {
            b.push_uint((n.arity - 1) as u64, 4);
            b.push_uint(n.parents.len() as u64, 4);
            for &p in &n.parents {
                b.push_uint(p as u64, 4);
            }
            b.push_uint((n.noise_weights.len() - 1) as u64, 4);
            for &w in &n.noise_weights {
                b.push_uint(u64::from(w), 8);
            }
            let w = index_width(n.arity);
            for &s in &n.table {
                b.push_uint(s as u64, w);
            }
        }
        b
    }

    pub fn encoded_len(&self) -> usize {
        self.encode().len()
    }

    pub fn decode(bits: &BitString) -> Result<Self, MdlError> {
        let malformed = |e: crate::bits::BitsError| MdlError::MalformedBits(e.to_string());
        let mut r = bits.reader();
        let id = ReprId(r.read_uint(16).map_err(malformed)? as u16);
        let count = r.read_uint(4).map_err(malformed)? as usize + 1;
        let mut nodes: Vec<MechanismNode> = Vec::with_capacity(count);
        for i in 0..count {
            let arity = r.read_uint(4).map_err(malformed)? as usize + 1;
            let np = r.read_uint(4).map_err(malformed)? as usize;
            let mut parents = Vec::with_capacity(np);
            for _ in 0..np {
                let p = r.read_uint(4).map_err(malformed)? as usize;
                if p >= i {
                    return Err(MdlError::MalformedBits(format!(
                        "node {i} refers to non-earlier node {p}"
                    )));
                }
                parents.push(p);
            }
            let nk = r.read_uint(4).map_err(malformed)? as usize + 1;
            let mut noise_weights = Vec::with_capacity(nk);
            for _ in 0..nk {
                noise_weights.push(r.read_uint(8).map_err(malformed)? as u8);
            }
            let rows: usize = parents.iter().map(|&p| nodes[p].arity).product();
            let w = index_width(arity);
            let mut table = Vec::with_capacity(rows * nk);
            for _ in 0..rows * nk {
                table.push(r.read_uint(w).map_err(malformed)? as usize);
            }
            nodes.push(MechanismNode {
                arity,
                parents,
                noise_weights,
                table,
            });
        }
        if r.remaining() != 0 {
            return Err(MdlError::MalformedBits(format!(
                "{} trailing bits",
                r.remaining()
            )));
        }
        let graph = MechanismGraph { nodes };
        graph
            .validate()
            .map_err(|e| MdlError::MalformedBits(e.to_string()))?;
        Ok(Self { id, graph })
    }
}
