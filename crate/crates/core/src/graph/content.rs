use std::io::{BufRead, Read};

use super::{data_lines, NodeIndex};
use crate::error::{parse_err, Error, Result};
use crate::sparse::CsrMatrix;

/// Feature-by-node content matrix `F` (`num_features x num_nodes`).
///
/// Stored node-major: row `j` of the inner CSR holds the feature vector `f_j`,
/// i.e. column `j` of `F`. That is the access pattern of both the `F^T S`
/// product and the `grad_S` scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentMatrix {
    by_node: CsrMatrix<f64>,
}

impl ContentMatrix {
    /// `by_node` is `num_nodes x num_features`.
    pub fn from_node_major(by_node: CsrMatrix<f64>) -> Self {
        Self { by_node }
    }

    /// Identity content (`N_f = |V|`): every node is its own feature, which
    /// reduces the joint model to structure-only factorization.
    pub fn identity(num_nodes: usize) -> Self {
        let triplets = (0..num_nodes as u32).map(|i| (i, i, 1.0)).collect();
        Self { by_node: CsrMatrix::from_triplets(num_nodes, num_nodes, triplets) }
    }

    pub fn num_features(&self) -> usize {
        self.by_node.cols()
    }

    pub fn num_nodes(&self) -> usize {
        self.by_node.rows()
    }

    pub fn nnz(&self) -> usize {
        self.by_node.nnz()
    }

    /// Sparse feature vector `f_j` of node `j` as `(feature, value)` pairs.
    pub fn column(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.by_node.row_iter(node)
    }

    pub fn get(&self, feature: usize, node: usize) -> f64 {
        self.by_node.get(node, feature)
    }

    pub fn node_major(&self) -> &CsrMatrix<f64> {
        &self.by_node
    }

    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        let mut f = ndarray::Array2::zeros((self.num_features(), self.num_nodes()));
        for (j, k, v) in self.by_node.iter() {
            f[[k, j]] = v;
        }
        f
    }
}

/// Reads sparse `node feature_index value` triplets.
///
/// The feature count is `num_features` when given (indices at or beyond it are
/// rejected), otherwise one past the largest index seen. Nodes without any
/// triplet get an all-zero column; repeated coordinates are summed.
pub fn load_features<R: BufRead>(source: R, nodes: &NodeIndex, num_features: Option<usize>) -> Result<ContentMatrix> {
    let mut triplets = Vec::new();
    let mut max_index = None::<usize>;
    for item in data_lines(source) {
        let (lineno, line) = item?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(parse_err(lineno, format!("expected `node feature value`, found {} fields", tokens.len())));
        }
        let node = nodes.require(tokens[0])?;
        let feature: usize =
            tokens[1].parse().map_err(|_| parse_err(lineno, format!("invalid feature index `{}`", tokens[1])))?;
        let value: f64 =
            tokens[2].parse().map_err(|_| parse_err(lineno, format!("invalid feature value `{}`", tokens[2])))?;
        if !value.is_finite() {
            return Err(parse_err(lineno, "feature value must be finite"));
        }
        if let Some(limit) = num_features {
            if feature >= limit {
                return Err(Error::FeatureDimension(format!(
                    "line {lineno}: feature index {feature} outside a {limit}-feature schema"
                )));
            }
        }
        max_index = Some(max_index.map_or(feature, |m| m.max(feature)));
        triplets.push((node as u32, feature as u32, value));
    }
    let dim = match (num_features, max_index) {
        (_, None) => return Err(Error::EmptyInput("feature set")),
        (Some(0), _) => return Err(Error::EmptyInput("feature set")),
        (Some(d), _) => d,
        (None, Some(m)) => m + 1,
    };
    Ok(ContentMatrix { by_node: CsrMatrix::from_triplets(nodes.len(), dim, triplets) })
}

/// Reads a dense CSV whose header is `node,<feature names...>` and whose rows
/// are `id,v1,...,vF`. Zeros are not stored.
pub fn load_dense_features<R: Read>(source: R, nodes: &NodeIndex) -> Result<ContentMatrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(source);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.len() < 2 {
        return Err(Error::EmptyInput("feature set"));
    }
    let dim = header.len() - 1;
    let mut triplets = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let lineno = k + 2;
        let record = record.map_err(csv_err)?;
        if record.len() != dim + 1 {
            return Err(Error::FeatureDimension(format!(
                "line {lineno}: expected {dim} feature values, found {}",
                record.len().saturating_sub(1)
            )));
        }
        let node = nodes.require(record[0].trim())?;
        for (f, field) in record.iter().skip(1).enumerate() {
            let value: f64 =
                field.trim().parse().map_err(|_| parse_err(lineno, format!("invalid feature value `{field}`")))?;
            if value != 0.0 {
                triplets.push((node as u32, f as u32, value));
            }
        }
    }
    Ok(ContentMatrix { by_node: CsrMatrix::from_triplets(nodes.len(), dim, triplets) })
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    parse_err(line, e.to_string())
}
