//! Teacher/apprentice semantic protocol.
//!
//! The teacher owns each content element's ground-truth model and a semantic
//! language. Each session it sends every scheduled element's representation
//! plus a raw complement of table cells the apprentice has not been taught;
//! the apprentice asks causal queries about the cells it is least sure of,
//! then regenerates the content from what it knows.
//!
//! Knowledge is tracked per table cell. A representation teaches the shape
//! of an element's mechanisms (variables, parents, noise pmfs), but its table
//! cells only become known once grounded by raw data, a query answer, or a
//! language shower.

mod apprentice;
mod message;
mod session;
mod teacher;

use thiserror::Error;

use crate::mdl::{MdlError, MechanismGraph};
use crate::scm::{ScmError, Symbol};

pub use apprentice::{
    data_shower, knowledge_gain, score_fidelity, ApprenticeState, ElementKnowledge, KnowledgeGain,
};
pub use message::{
    CausalQuery, Message, MessageBody, MessageKind, MessageRecord, Plane, QueryLevel,
    ANSWER_HEADER_BITS, ANSWER_PROB_BITS, QUERY_BITS, RAW_HEADER_BITS, TRACE_HEADER,
};
pub use session::{run_session, SessionContent, SessionOptions, SessionTrace};
pub use teacher::{reverse_mentorship, DidacticsPolicy, TeacherState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("no language entry covers content element {0:?}")]
    UncoveredContent(String),
    #[error("unknown content element {0:?}")]
    UnknownElement(String),
    #[error("content element {0:?} is listed twice")]
    DuplicateElement(String),
    #[error("session has no content")]
    EmptyContent,
    #[error("no learned language entries to correct against")]
    NoCandidates,
    #[error("apprentice has no complete representation of {0:?}")]
    NoApprenticeEntry(String),
    #[error("apprentice representation of {0:?} is not shorter than the teacher's")]
    NotSuperior(String),
    #[error("apprentice has not received the structure of {0:?}")]
    NoStructure(String),
    #[error(transparent)]
    Mdl(#[from] MdlError),
    #[error(transparent)]
    Scm(#[from] ScmError),
}

/// Address of one mechanism-table cell of a content element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId {
    pub element: String,
    pub node: usize,
    pub index: usize,
}

/// Parent values and noise symbol addressed by `index` in `node`'s table.
pub fn cell_coordinates(graph: &MechanismGraph, node: usize, index: usize) -> (Vec<Symbol>, usize) {
    let n = &graph.nodes[node];
    let k = n.noise_weights.len();
    let mut row = index / k;
    let mut digits = vec![0; n.parents.len()];
    for (slot, &p) in n.parents.iter().enumerate().rev() {
        let a = graph.nodes[p].arity;
        digits[slot] = row % a;
        row /= a;
    }
    (digits, index % k)
}

/// Every cell of an element, in canonical order.
pub fn all_cells(element: &str, graph: &MechanismGraph) -> Vec<CellId> {
    graph
        .nodes
        .iter()
        .enumerate()
        .flat_map(|(node, n)| {
            (0..n.table.len()).map(move |index| CellId {
                element: element.to_string(),
                node,
                index,
            })
        })
        .collect()
}

/// Bits to address and spell one cell in a raw-data message.
pub fn raw_cell_bits(graph: &MechanismGraph, node: usize) -> usize {
    use crate::bits::index_width;
    let n = &graph.nodes[node];
    index_width(graph.nodes.len()) + index_width(n.table.len()) + index_width(n.arity)
}
