//! Undirected weighted networks, their node content and labels.

mod content;
mod labels;

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{parse_err, Error, Result};
use crate::sparse::CsrMatrix;

pub use content::{load_dense_features, load_features, ContentMatrix};
pub use labels::{load_labels, LabelSet};

/// Bidirectional map between opaque external node identifiers and dense
/// indices, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeIndex {
    ids: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl NodeIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ids<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut index = Self::new();
        for id in ids {
            let id = id.into();
            if index.lookup.contains_key(&id) {
                return Err(Error::Config(format!("duplicate node identifier `{id}`")));
            }
            index.intern(&id);
        }
        Ok(index)
    }

    /// Returns the index of `id`, inserting it if unseen.
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.lookup.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_owned());
        self.lookup.insert(id.to_owned(), i);
        i
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.get(id).ok_or_else(|| Error::UnknownNode(id.to_owned()))
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Undirected network with a symmetric sparse adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    nodes: NodeIndex,
    adjacency: CsrMatrix<f64>,
    num_edges: usize,
}

impl Graph {
    /// Builds a graph from undirected weighted edges over `nodes`. Both
    /// orientations of a pair merge into one edge by summing weights.
    pub fn from_edges(nodes: NodeIndex, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let n = nodes.len();
        let mut triplets = Vec::new();
        for (u, v, w) in edges {
            let (a, b) = if u <= v { (u, v) } else { (v, u) };
            triplets.push((a as u32, b as u32, w));
        }
        let upper = CsrMatrix::from_triplets(n, n, triplets);
        let num_edges = upper.nnz();
        let mut sym = Vec::with_capacity(2 * num_edges);
        for (a, b, w) in upper.iter() {
            sym.push((a as u32, b as u32, w));
            if a != b {
                sym.push((b as u32, a as u32, w));
            }
        }
        Self { nodes, adjacency: CsrMatrix::from_triplets(n, n, sym), num_edges }
    }

    /// Unit-weight graph on nodes named `0..n`.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let nodes = NodeIndex::from_ids((0..n).map(|i| i.to_string())).expect("distinct ids");
        Self::from_edges(nodes, edges.iter().map(|&(u, v)| (u, v, 1.0)))
    }

    pub fn nodes(&self) -> &NodeIndex {
        &self.nodes
    }

    pub fn adjacency(&self) -> &CsrMatrix<f64> {
        &self.adjacency
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.adjacency.get(u, v)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v) > 0.0
    }

    /// Neighbour indices of `u` (sorted).
    pub fn neighbors(&self, u: usize) -> &[u32] {
        self.adjacency.row(u).0
    }

    /// Number of distinct neighbours of `u`.
    pub fn degree(&self, u: usize) -> usize {
        self.neighbors(u).len()
    }

    pub fn weighted_degree(&self, u: usize) -> f64 {
        self.adjacency.row(u).1.iter().sum()
    }

    /// Each undirected edge once, as `(u, v, w)` with `u <= v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().filter(|&(u, v, _)| u <= v)
    }

    /// Connected components as lists of node indices, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_nodes();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in self.neighbors(u) {
                    let v = v as usize;
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Writes the graph as an edge list using external identifiers. The
    /// weight column is written only when some weight differs from 1.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        let weighted = self.edges().any(|(_, _, w)| w != 1.0);
        for (u, v, w) in self.edges() {
            if weighted {
                writeln!(out, "{} {} {}", self.nodes.id(u), self.nodes.id(v), w)?;
            } else {
                writeln!(out, "{} {}", self.nodes.id(u), self.nodes.id(v))?;
            }
        }
        Ok(())
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
pub(crate) fn data_lines<R: BufRead>(source: R) -> impl Iterator<Item = Result<(usize, String)>> {
    source.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_owned())))
            }
        }
    })
}

/// Parses a whitespace-separated edge list (`u v` or, when `weighted`,
/// `u v w`). Node identifiers are indexed in first-seen order.
pub fn load_edge_list<R: BufRead>(source: R, weighted: bool) -> Result<Graph> {
    let mut nodes = NodeIndex::new();
    let mut edges = Vec::new();
    for item in data_lines(source) {
        let (lineno, line) = item?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let w = match (tokens.len(), weighted) {
            (2, _) => 1.0,
            (3, true) => {
                let w: f64 =
                    tokens[2].parse().map_err(|_| parse_err(lineno, format!("invalid weight `{}`", tokens[2])))?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(parse_err(lineno, format!("edge weight must be positive, got {w}")));
                }
                w
            }
            (3, false) => {
                return Err(parse_err(lineno, "weight column present but graph loaded as unweighted"));
            }
            (k, _) => return Err(parse_err(lineno, format!("expected `u v [w]`, found {k} fields"))),
        };
        let u = nodes.intern(tokens[0]);
        let v = nodes.intern(tokens[1]);
        edges.push((u, v, w));
    }
    if edges.is_empty() {
        return Err(Error::EmptyInput("edge list"));
    }
    Ok(Graph::from_edges(nodes, edges))
}

/// Row-stochastic one-step transition matrix `P[i][j] = w_ij / sum_k w_ik`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: CsrMatrix<f64>,
    isolated: Vec<usize>,
}

impl TransitionMatrix {
    pub fn rows(&self) -> &CsrMatrix<f64> {
        &self.rows
    }

    /// Degree-zero nodes; their rows are empty.
    pub fn isolated_nodes(&self) -> &[usize] {
        &self.isolated
    }

    pub fn num_nodes(&self) -> usize {
        self.rows.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows.get(i, j)
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.rows.row(i).0.is_empty()
    }

    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        let n = self.num_nodes();
        let mut m = ndarray::Array2::zeros((n, n));
        for (i, j, p) in self.rows.iter() {
            m[[i, j]] = p;
        }
        m
    }
}

pub fn transition_matrix(g: &Graph) -> TransitionMatrix {
    let n = g.num_nodes();
    let mut triplets = Vec::with_capacity(g.adjacency.nnz());
    let mut isolated = Vec::new();
    for i in 0..n {
        let total = g.weighted_degree(i);
        if total <= 0.0 {
            isolated.push(i);
            continue;
        }
        for (j, w) in g.adjacency.row_iter(i) {
            triplets.push((i as u32, j as u32, w / total));
        }
    }
    TransitionMatrix { rows: CsrMatrix::from_triplets(n, n, triplets), isolated }
}
