//! The learning side of the link.

use std::collections::{BTreeMap, BTreeSet};

use crate::bits::BitString;
use crate::mdl::{variable_id, ContentElement, MechanismGraph, Representation, SemanticLanguage};
use crate::scm::{noise_variable_id, Mechanism, Scm, Symbol};

use super::message::{CausalQuery, QueryLevel};
use super::{cell_coordinates, CellId, ProtocolError};

/// Representations remembered for context-based error correction.
const RECENT_WINDOW: usize = 32;
/// A query answer pins a cell when one symbol carries this much mass.
const POINT_MASS: f64 = 1.0 - 1e-9;

/// What the apprentice knows about one content element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementKnowledge {
    /// Mechanism shape as received; table values are not trusted.
    pub shape: MechanismGraph,
    /// Grounded table cells, per node.
    pub cells: Vec<Vec<Option<Symbol>>>,
    /// The representation the shape came from.
    pub received: Representation,
}

impl ElementKnowledge {
    fn from_representation(repr: &Representation) -> Self {
        let mut shape = repr.graph.clone();
        let cells = shape
            .nodes
            .iter()
            .map(|n| {
                // A single-symbol alphabet leaves nothing to learn.
                let v = if n.arity == 1 { Some(0) } else { None };
                vec![v; n.table.len()]
            })
            .collect();
        for n in &mut shape.nodes {
            n.table.iter_mut().for_each(|s| *s = 0);
        }
        Self {
            shape,
            cells,
            received: repr.clone(),
        }
    }

    pub fn known_count(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_some()).count()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().flatten().all(Option::is_some)
    }

    /// The fully grounded graph, once every cell is known.
    pub fn complete_graph(&self) -> Option<MechanismGraph> {
        let mut g = self.shape.clone();
        for (n, cells) in g.nodes.iter_mut().zip(&self.cells) {
            for (slot, c) in n.table.iter_mut().zip(cells) {
                *slot = (*c)?;
            }
        }
        Some(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApprenticeState {
    universe: BTreeMap<String, usize>,
    knowledge: BTreeMap<String, ElementKnowledge>,
    pub learned_language: SemanticLanguage,
    pub query_budget: usize,
    recent: Vec<String>,
    unanswerable: BTreeSet<(CellId, QueryLevel)>,
}

impl ApprenticeState {
    /// A blank apprentice; `universe` gives each element's table-cell count.
    pub fn new(universe: BTreeMap<String, usize>, query_budget: usize) -> Self {
        Self {
            universe,
            knowledge: BTreeMap::new(),
            learned_language: SemanticLanguage::default(),
            query_budget,
            recent: Vec::new(),
            unanswerable: BTreeSet::new(),
        }
    }

    /// Known cells over all cells of the universe.
    pub fn maturity(&self) -> f64 {
        let total: usize = self.universe.values().sum();
        if total == 0 {
            return 0.0;
        }
        self.known_cells() as f64 / total as f64
    }

    pub fn known_cells(&self) -> usize {
        self.knowledge
            .values()
            .map(ElementKnowledge::known_count)
            .sum()
    }

    pub fn knowledge(&self, element: &str) -> Option<&ElementKnowledge> {
        self.knowledge.get(element)
    }

    pub fn recent(&self) -> &[String] {
        &self.recent
    }

    pub fn note_recent(&mut self, element: &str) {
        self.recent.push(element.to_string());
        if self.recent.len() > RECENT_WINDOW {
            self.recent.remove(0);
        }
    }

    /// Learns the element's mechanism shape from the first representation
    /// that arrives for it.
    pub fn receive_representation(&mut self, element: &str, repr: &Representation) {
        self.universe
            .entry(element.to_string())
            .or_insert_with(|| repr.graph.cell_count());
        self.knowledge
            .entry(element.to_string())
            .or_insert_with(|| ElementKnowledge::from_representation(repr));
    }

    /// Records a grounded cell; true if it was not known before.
    pub fn learn_cell(&mut self, cell: &CellId, symbol: Symbol) -> bool {
        let Some(k) = self.knowledge.get_mut(&cell.element) else {
            return false;
        };
        let Some(slot) = k
            .cells
            .get_mut(cell.node)
            .and_then(|n| n.get_mut(cell.index))
        else {
            return false;
        };
        let new = slot.is_none();
        *slot = Some(symbol);
        new
    }

    /// Adds a language entry for every fully known element.
    pub fn sync_language(&mut self) {
        for (id, k) in &self.knowledge {
            if k.is_complete() && !self.learned_language.contains(id) {
                // An id clash with a showered entry leaves the old entry.
                let _ = self.learned_language.insert(id.clone(), k.received.clone());
            }
        }
    }

    /// Up to `query_budget` queries about the least-known cells of the
    /// received elements. Uncertainty of a cell is `p(noise) * log2(arity)`;
    /// ties go to canonical cell order. The rung of the causal ladder follows
    /// maturity.
    pub fn pose_queries(&self, received: &[String]) -> Vec<CausalQuery> {
        if self.query_budget == 0 {
            return Vec::new();
        }
        let level = QueryLevel::for_maturity(self.maturity());
        let elements: BTreeSet<&String> = received.iter().collect();
        let mut candidates: Vec<(f64, CellId)> = Vec::new();
        for id in elements {
            let Some(k) = self.knowledge.get(id) else {
                continue;
            };
            for (node, (n, cells)) in k.shape.nodes.iter().zip(&k.cells).enumerate() {
                let noise = n.noise_pmf();
                for (index, c) in cells.iter().enumerate() {
                    if c.is_some() {
                        continue;
                    }
                    let cell = CellId {
                        element: id.clone(),
                        node,
                        index,
                    };
                    if self.unanswerable.contains(&(cell.clone(), level)) {
                        continue;
                    }
                    let u = noise[index % noise.len()] * (n.arity as f64).log2();
                    candidates.push((u, cell));
                }
            }
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        candidates
            .into_iter()
            .take(self.query_budget)
            .map(|(_, cell)| self.query_for(cell, level))
            .collect()
    }

    fn query_for(&self, cell: CellId, level: QueryLevel) -> CausalQuery {
        let shape = &self.knowledge[&cell.element].shape;
        let (digits, e) = cell_coordinates(shape, cell.node, cell.index);
        let target = variable_id(cell.node);
        let noise_var = noise_variable_id(&target);
        let parents: BTreeMap<String, Symbol> = shape.nodes[cell.node]
            .parents
            .iter()
            .zip(&digits)
            .map(|(&p, &d)| (variable_id(p), d))
            .collect();
        let (setting, factual) = match level {
            QueryLevel::Associational | QueryLevel::Interventional => {
                let mut s = parents;
                s.insert(noise_var, e);
                (s, BTreeMap::new())
            }
            QueryLevel::Counterfactual => (parents, BTreeMap::from([(noise_var, e)])),
        };
        CausalQuery {
            element: cell.element.clone(),
            level,
            target,
            setting,
            factual,
            cell: Some(cell),
        }
    }

    /// Applies an answer; true if it grounded a new cell.
    pub fn apply_answer(&mut self, query: &CausalQuery, result: &Result<Vec<f64>, String>) -> bool {
        let Some(cell) = &query.cell else {
            return false;
        };
        match result {
            Ok(pmf) => match pmf.iter().position(|&p| p >= POINT_MASS) {
                Some(s) => self.learn_cell(cell, s),
                None => false,
            },
            Err(_) => {
                self.unanswerable.insert((cell.clone(), query.level));
                false
            }
        }
    }

    /// The learned-language entry nearest to `bits` in Hamming distance;
    /// ties go to the element seen most often in `context`, then to the
    /// smaller element id.
    pub fn correct_representation(
        &self,
        bits: &BitString,
        context: &[String],
    ) -> Result<Representation, ProtocolError> {
        self.learned_language
            .iter()
            .map(|(id, r)| {
                let freq = context.iter().filter(|c| *c == id).count();
                (r.encode().hamming(bits), std::cmp::Reverse(freq), id, r)
            })
            .min_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)))
            .map(|(_, _, _, r)| r.clone())
            .ok_or(ProtocolError::NoCandidates)
    }

    /// The apprentice's own minimal representation of a fully known element,
    /// reusing its learned representation id.
    pub fn own_representation(&self, element: &str) -> Option<Representation> {
        let k = self.knowledge.get(element)?;
        let id = self.learned_language.get(element)?.id;
        Some(Representation {
            id,
            graph: k.complete_graph()?.minimize(),
        })
    }

    /// The apprentice's model of an element. Unknown cells are filled by a
    /// uniform guess over the target alphabet, drawn independently of
    /// everything else.
    pub fn regenerate(&self, element: &str) -> Result<Scm, ProtocolError> {
        let k = self
            .knowledge
            .get(element)
            .ok_or_else(|| ProtocolError::NoStructure(element.to_string()))?;
        if let Some(g) = k.complete_graph() {
            return Ok(g.to_scm());
        }
        let base = k.shape.to_scm();
        let mechanisms = base
            .mechanisms()
            .iter()
            .enumerate()
            .map(|(node, m)| {
                let cells = &k.cells[node];
                if cells.iter().all(Option::is_some) {
                    return Mechanism {
                        table: cells.iter().map(|c| c.unwrap()).collect(),
                        ..m.clone()
                    };
                }
                let arity = base.variables()[node].arity();
                let kn = m.noise.len();
                let rows = cells.len() / kn;
                let noise = m
                    .noise
                    .iter()
                    .flat_map(|&p| std::iter::repeat_n(p / arity as f64, arity))
                    .collect();
                let mut table = Vec::with_capacity(rows * kn * arity);
                for row in 0..rows {
                    for e in 0..kn {
                        for g in 0..arity {
                            table.push(cells[row * kn + e].unwrap_or(g));
                        }
                    }
                }
                Mechanism {
                    noise,
                    table,
                    ..m.clone()
                }
            })
            .collect();
        Ok(Scm::new(base.variables().to_vec(), mechanisms))
    }
}

/// Agreement between a regenerated model and the element's ground truth.
/// Deterministic content scores the mean per-variable probability of
/// reproducing the true value; stochastic content scores one minus the
/// total-variation distance between the joints.
pub fn score_fidelity(regenerated: &Scm, truth: &ContentElement) -> Result<f64, ProtocolError> {
    let target = truth.truth.joint_distribution()?;
    let regen = regenerated.joint_distribution()?;
    if truth.graph.is_deterministic() {
        let (x, _) = target.iter().next().expect("joint has support");
        let ids = truth.truth.variable_ids();
        let mut sum = 0.0;
        for (i, id) in ids.iter().enumerate() {
            let arity = truth.truth.variables()[i].arity();
            sum += regen.marginal_vector(id, arity)?[x[i]];
        }
        Ok(sum / ids.len() as f64)
    } else {
        Ok((1.0 - regen.tv_distance(&target)).clamp(0.0, 1.0))
    }
}

/// Installs a library: its entries replace the node's language entries and
/// the corresponding knowledge becomes fully grounded.
pub fn data_shower(library: &SemanticLanguage, node: &mut ApprenticeState) {
    for (element, repr) in library.iter() {
        let mut k = ElementKnowledge::from_representation(repr);
        for (cells, n) in k.cells.iter_mut().zip(&repr.graph.nodes) {
            for (c, &s) in cells.iter_mut().zip(&n.table) {
                *c = Some(s);
            }
        }
        node.universe
            .entry(element.clone())
            .or_insert_with(|| k.cell_count());
        node.knowledge.insert(element.clone(), k);
        if let Some(other) = node
            .learned_language
            .element_for(repr.id)
            .map(str::to_string)
        {
            node.learned_language.remove(&other);
        }
        node.learned_language
            .insert(element.clone(), repr.clone())
            .expect("clashing entry was removed");
    }
    if !library.is_empty() {
        node.learned_language.model_id = library.model_id.clone();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnowledgeGain {
    pub cells: usize,
    pub entries: usize,
    pub is_semantically_rich: bool,
}

/// Newly grounded cells and new language entries between two snapshots.
pub fn knowledge_gain(before: &ApprenticeState, after: &ApprenticeState) -> KnowledgeGain {
    let mut cells = 0;
    for (id, k) in &after.knowledge {
        let prior = before.knowledge.get(id);
        for (node, row) in k.cells.iter().enumerate() {
            for (i, c) in row.iter().enumerate() {
                let was = prior
                    .and_then(|p| p.cells.get(node))
                    .and_then(|r| r.get(i))
                    .is_some_and(Option::is_some);
                if c.is_some() && !was {
                    cells += 1;
                }
            }
        }
    }
    let entries = after
        .learned_language
        .iter()
        .filter(|(id, _)| !before.learned_language.contains(id))
        .count();
    KnowledgeGain {
        cells,
        entries,
        is_semantically_rich: cells + entries > 0,
    }
}
