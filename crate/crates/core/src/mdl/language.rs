//! Content elements and the dictionary mapping them to representations.
//!
//! Dictionary file format, one record per line:
//!
//! ```text
//! semantic-language v1
//! model suffix-2
//! entry <element-id> <repr-id> <bit-length> <hex>
//! ```

use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::scm::Scm;

use super::repr::{MechanismGraph, ReprId, Representation};
use super::MdlError;

const MAGIC: &str = "semantic-language v1";

/// A meaning-bearing unit of content and the model that generates it.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentElement {
    pub id: String,
    pub graph: MechanismGraph,
    pub truth: Scm,
}

impl ContentElement {
    pub fn new(id: impl Into<String>, graph: MechanismGraph) -> Result<Self, MdlError> {
        graph.validate()?;
        let truth = graph.to_scm();
        Ok(Self {
            id: id.into(),
            graph,
            truth,
        })
    }

    /// Bits to spell out one full sample of the element's variables.
    pub fn bits_per_sample(&self) -> usize {
        self.graph
            .nodes
            .iter()
            .map(|n| crate::bits::index_width(n.arity))
            .sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SemanticLanguage {
    entries: BTreeMap<String, Representation>,
    pub model_id: String,
}

impl SemanticLanguage {
    pub fn new(model_id: impl Into<String>) -> Self {
        Self {
            entries: BTreeMap::new(),
            model_id: model_id.into(),
        }
    }

    /// Adds or replaces the entry for `element`. Representation ids stay
    /// unique across elements.
    pub fn insert(
        &mut self,
        element: impl Into<String>,
        repr: Representation,
    ) -> Result<(), MdlError> {
        let element = element.into();
        if self
            .entries
            .iter()
            .any(|(e, r)| *e != element && r.id == repr.id)
        {
            return Err(MdlError::DuplicateReprId(repr.id.0));
        }
        self.entries.insert(element, repr);
        Ok(())
    }

    pub fn remove(&mut self, element: &str) -> Option<Representation> {
        self.entries.remove(element)
    }

    pub fn get(&self, element: &str) -> Option<&Representation> {
        self.entries.get(element)
    }

    pub fn contains(&self, element: &str) -> bool {
        self.entries.contains_key(element)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Representation)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn element_for(&self, id: ReprId) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, r)| r.id == id)
            .map(|(e, _)| e.as_str())
    }

    /// Sum of all encoding lengths.
    pub fn total_bits(&self) -> usize {
        self.entries.values().map(Representation::encoded_len).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC}\nmodel {}\n", self.model_id);
        for (e, r) in &self.entries {
            let bits = r.encode();
            out.push_str(&format!(
                "entry {e} {} {} {}\n",
                r.id,
                bits.len(),
                bits.to_hex()
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, MdlError> {
        let err = |line: usize, message: &str| MdlError::LanguageFormat {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l == MAGIC => {}
            _ => return Err(err(1, "missing header line")),
        }
        let model_id = match lines.next() {
            Some((_, l)) => l
                .strip_prefix("model ")
                .ok_or_else(|| err(2, "expected `model <id>`"))?
                .to_string(),
            None => return Err(err(2, "missing model line")),
        };
        let mut lang = Self::new(model_id);
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [kw, element, id, len, hex] = fields[..] else {
                return Err(err(n, "expected `entry <element> <repr-id> <bits> <hex>`"));
            };
            if kw != "entry" {
                return Err(err(n, "unknown record"));
            }
            let id: u16 = id.parse().map_err(|_| err(n, "bad representation id"))?;
            let len: usize = len.parse().map_err(|_| err(n, "bad bit length"))?;
            let bits = BitString::from_hex(hex, len).map_err(|e| err(n, &e.to_string()))?;
            let repr = Representation::decode(&bits).map_err(|e| err(n, &e.to_string()))?;
            if repr.id.0 != id {
                return Err(err(n, "representation id does not match its encoding"));
            }
            lang.insert(element, repr)
                .map_err(|e| err(n, &e.to_string()))?;
        }
        Ok(lang)
    }
}

#[cfg(test)]
mod tests {
    use super::super::repr::MechanismNode;
    use super::*;

    fn repr(id: u16, table: Vec<usize>) -> Representation {
        Representation {
            id: ReprId(id),
            graph: MechanismGraph {
                nodes: vec![MechanismNode {
                    arity: 4,
                    parents: vec![],
                    noise_weights: vec![255; table.len()],
                    table,
                }],
            },
        }
    }

    #[test]
    fn injective_on_repr_ids() {
        let mut l = SemanticLanguage::new("uniform");
        l.insert("a", repr(1, vec![0])).unwrap();
        assert_eq!(
            l.insert("b", repr(1, vec![1])),
            Err(MdlError::DuplicateReprId(1))
        );
        l.insert("a", repr(1, vec![2])).unwrap();
        assert_eq!(l.len(), 1);
    }

    #[test]
    fn text_round_trip() {
        let mut l = SemanticLanguage::new("suffix-1");
        l.insert("e0", repr(3, vec![0, 3, 1])).unwrap();
        l.insert("e1", repr(9, vec![2])).unwrap();
        let text = l.to_text();
        let back = SemanticLanguage::from_text(&text).unwrap();
        assert_eq!(back, l);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn corrupted_file_reports_line() {
        let mut l = SemanticLanguage::new("m");
        l.insert("e0", repr(3, vec![0])).unwrap();
        let text = l.to_text().replace("entry e0 3", "entry e0 4");
        assert!(matches!(
            SemanticLanguage::from_text(&text),
            Err(MdlError::LanguageFormat { line: 3, .. })
        ));
    }
}
