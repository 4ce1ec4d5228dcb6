use std::collections::HashMap;
use std::io::BufRead;

use super::{data_lines, NodeIndex};
use crate::error::{parse_err, Error, Result};

/// Partial assignment of nodes to classes. Classes are indexed in
/// first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet {
    assignments: Vec<Option<usize>>,
    classes: Vec<String>,
}

impl LabelSet {
    pub fn unlabeled(num_nodes: usize) -> Self {
        Self { assignments: vec![None; num_nodes], classes: Vec::new() }
    }

    /// Builds from `(node, class index)` pairs with classes named `0..k`.
    pub fn from_assignments(num_nodes: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut set = Self::unlabeled(num_nodes);
        for (node, class) in pairs {
            if class >= set.classes.len() {
                set.classes.extend((set.classes.len()..=class).map(|c| c.to_string()));
            }
            set.assignments[node] = Some(class);
        }
        set
    }

    pub fn class_of(&self, node: usize) -> Option<usize> {
        self.assignments.get(node).copied().flatten()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.assignments.len()
    }

    pub fn num_labeled(&self) -> usize {
        self.assignments.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.num_labeled() == 0
    }

    /// Labeled `(node, class)` pairs in node order.
    pub fn labeled(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignments.iter().enumerate().filter_map(|(i, c)| c.map(|c| (i, c)))
    }

    /// Members of each class, each list in node order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.classes.len()];
        for (node, class) in self.labeled() {
            out[class].push(node);
        }
        out
    }
}

/// Reads `node class` lines. A node may be labeled at most once.
pub fn load_labels<R: BufRead>(source: R, nodes: &NodeIndex) -> Result<LabelSet> {
    let mut set = LabelSet::unlabeled(nodes.len());
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    for item in data_lines(source) {
        let (lineno, line) = item?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(lineno, format!("expected `node class`, found {} fields", tokens.len())));
        }
        let node = nodes.require(tokens[0])?;
        if set.assignments[node].is_some() {
            return Err(Error::DuplicateLabel(tokens[0].to_owned()));
        }
        let next = class_ids.len();
        let class = *class_ids.entry(tokens[1].to_owned()).or_insert_with(|| {
            set.classes.push(tokens[1].to_owned());
            next
        });
        set.assignments[node] = Some(class);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn index() -> NodeIndex {
        NodeIndex::from_ids(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn shared_class_has_one_entry() {
        let l = load_labels("a x\nc x\n".as_bytes(), &index()).unwrap();
        assert_eq!(l.classes(), &["x"]);
        assert_eq!(l.num_labeled(), 2);
        assert_eq!(l.class_of(1), None);
        assert_eq!(l.members(), vec![vec![0, 2]]);
    }

    #[test]
    fn empty_file_is_unsupervised() {
        let l = load_labels("".as_bytes(), &index()).unwrap();
        assert!(l.is_empty());
        assert_eq!(l.num_classes(), 0);
    }

    #[test]
    fn duplicate_label_line_rejected() {
        let err = load_labels("a x\na y\n".as_bytes(), &index()).unwrap_err();
        assert!(matches!(err, Error::DuplicateLabel(n) if n == "a"));
    }

    #[test]
    fn unknown_node_rejected() {
        assert!(matches!(load_labels("q x\n".as_bytes(), &index()), Err(Error::UnknownNode(_))));
    }
}
