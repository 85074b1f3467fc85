//! The knowledge-holding side of the link.

use std::collections::{BTreeMap, BTreeSet};

use crate::mdl::{ContentElement, ReprId, Representation, SemanticLanguage};
use crate::scm::{CounterfactualQuery, Intervention, Scm};

use super::apprentice::ApprenticeState;
use super::message::{CausalQuery, Message, MessageBody, MessageKind, QueryLevel, RAW_HEADER_BITS};
use super::{all_cells, raw_cell_bits, CellId, ProtocolError};

/// Share of the untaught table sent raw, as a function of apprentice
/// maturity: `max_raw_fraction * (1 - maturity)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DidacticsPolicy {
    pub max_raw_fraction: f64,
}

impl Default for DidacticsPolicy {
    fn default() -> Self {
        Self {
            max_raw_fraction: 0.9,
        }
    }
}

impl DidacticsPolicy {
    pub fn raw_fraction(&self, maturity: f64) -> f64 {
        (self.max_raw_fraction * (1.0 - maturity.clamp(0.0, 1.0))).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct TeacherState {
    elements: BTreeMap<String, ContentElement>,
    observable: BTreeMap<String, Scm>,
    pub language: SemanticLanguage,
    pub policy: DidacticsPolicy,
    pub lambda: f64,
    taught: BTreeSet<CellId>,
}

impl TeacherState {
    /// Builds the language with one entry per element; representation ids
    /// follow the element order.
    pub fn new(
        elements: Vec<ContentElement>,
        model_id: impl Into<String>,
        policy: DidacticsPolicy,
        lambda: f64,
    ) -> Result<Self, ProtocolError> {
        let mut language = SemanticLanguage::new(model_id);
        let mut map = BTreeMap::new();
        let mut observable = BTreeMap::new();
        for (i, e) in elements.into_iter().enumerate() {
            if map.contains_key(&e.id) {
                return Err(ProtocolError::DuplicateElement(e.id));
            }
            language.insert(
                e.id.clone(),
                Representation {
                    id: ReprId(i as u16),
                    graph: e.graph.clone(),
                },
            )?;
            observable.insert(e.id.clone(), e.truth.with_observable_noise());
            map.insert(e.id.clone(), e);
        }
        Ok(Self {
            elements: map,
            observable,
            language,
            policy,
            lambda,
            taught: BTreeSet::new(),
        })
    }

    pub fn element(&self, id: &str) -> Option<&ContentElement> {
        self.elements.get(id)
    }

    pub fn elements(&self) -> impl Iterator<Item = &ContentElement> {
        self.elements.values()
    }

    /// Table cells per element, the apprentice's learning universe.
    pub fn universe(&self) -> BTreeMap<String, usize> {
        self.elements
            .iter()
            .map(|(id, e)| (id.clone(), e.graph.cell_count()))
            .collect()
    }

    pub fn mark_taught(&mut self, cells: impl IntoIterator<Item = CellId>) {
        self.taught.extend(cells);
    }

    pub fn taught_count(&self) -> usize {
        self.taught.len()
    }

    pub fn untaught_cells(&self, element: &str) -> Vec<CellId> {
        self.elements
            .get(element)
            .map(|e| {
                all_cells(element, &e.graph)
                    .into_iter()
                    .filter(|c| !self.taught.contains(c))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn is_fully_taught(&self, element: &str) -> bool {
        self.untaught_cells(element).is_empty()
    }

    /// One session's teaching material for `content`, in send order. In
    /// shower mode an immature apprentice first receives the whole language
    /// as a single shower and no raw data is sent.
    pub fn compose_didactics(
        &self,
        maturity: f64,
        content: &[String],
        session: u32,
        shower: bool,
    ) -> Result<Vec<Message>, ProtocolError> {
        let mut out = Vec::new();
        for id in content {
            if self.language.get(id).is_none() || !self.elements.contains_key(id) {
                return Err(ProtocolError::UncoveredContent(id.clone()));
            }
        }
        if shower && maturity < 1.0 {
            out.push(Message {
                session,
                kind: MessageKind::LanguageShower,
                element: None,
                payload_bits: self.language.total_bits(),
                body: MessageBody::Shower(self.language.clone()),
            });
        }
        let fraction = self.policy.raw_fraction(maturity);
        for id in content {
            let repr = self.language.get(id).unwrap();
            out.push(Message {
                session,
                kind: MessageKind::Representation,
                element: Some(id.clone()),
                payload_bits: repr.encoded_len(),
                body: MessageBody::Representation(repr.clone()),
            });
            if shower {
                continue;
            }
            let graph = &self.elements[id].graph;
            let want = (fraction * graph.cell_count() as f64).ceil() as usize;
            let cells: Vec<_> = self
                .untaught_cells(id)
                .into_iter()
                .take(want)
                .map(|c| {
                    let sym = graph.nodes[c.node].table[c.index];
                    (c, sym)
                })
                .collect();
            if cells.is_empty() {
                continue;
            }
            let bits = RAW_HEADER_BITS
                + cells
                    .iter()
                    .map(|(c, _)| raw_cell_bits(graph, c.node))
                    .sum::<usize>();
            out.push(Message {
                session,
                kind: MessageKind::Raw,
                element: Some(id.clone()),
                payload_bits: bits,
                body: MessageBody::Raw(cells),
            });
        }
        Ok(out)
    }

    /// Answers `q` on the element's ground truth with its noise observable,
    /// as a dense pmf over the target's alphabet.
    pub fn answer_query(&self, q: &CausalQuery) -> Result<Vec<f64>, ProtocolError> {
        let scm = self
            .observable
            .get(&q.element)
            .ok_or_else(|| ProtocolError::UnknownElement(q.element.clone()))?;
        let pmf = match q.level {
            QueryLevel::Associational => {
                let iv = Intervention {
                    assignments: Default::default(),
                    conditioning: q.setting.clone(),
                };
                scm.interventional_distribution(&iv, &q.target)?
            }
            QueryLevel::Interventional => {
                let iv = Intervention {
                    assignments: q.setting.clone(),
                    conditioning: Default::default(),
                };
                scm.interventional_distribution(&iv, &q.target)?
            }
            QueryLevel::Counterfactual => scm.counterfactual(&CounterfactualQuery {
                factual: q.factual.clone(),
                intervention: Intervention {
                    assignments: q.setting.clone(),
                    conditioning: Default::default(),
                },
                target: q.target.clone(),
            })?,
        };
        let arity = scm.variable(&q.target).unwrap().arity();
        Ok(pmf.marginal_vector(&q.target, arity)?)
    }
}

/// The teacher adopts the apprentice's representation of `element` when it
/// is strictly shorter, or when the teacher has none.
pub fn reverse_mentorship(
    apprentice: &ApprenticeState,
    teacher: &mut TeacherState,
    element: &str,
) -> Result<(), ProtocolError> {
    let own = apprentice
        .own_representation(element)
        .ok_or_else(|| ProtocolError::NoApprenticeEntry(element.to_string()))?;
    if let Some(current) = teacher.language.get(element) {
        if own.encoded_len() >= current.encoded_len() {
            return Err(ProtocolError::NotSuperior(element.to_string()));
        }
    }
    teacher.language.insert(element, own)?;
    Ok(())
}
