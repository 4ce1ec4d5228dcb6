use crate::cooccur::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Per-pair binomial trial bound `Q[i][c] = k #(i) #(c) / |D| + #(i, c)`.
///
/// Kept in factored form (a rank-one shift plus the sparse counts) and
/// materialized on demand, so memory stays `O(nnz(D) + |V|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    negative_ratio: usize,
    /// `k #(i) / |D|`
    row_shift: Vec<f64>,
    /// `#(c)`
    col_sums: Vec<f64>,
    /// `#(i, c)` stored context-major (row `c`).
    counts_by_context: CsrMatrix<f64>,
}

pub fn build_q(dmat: &CooccurrenceMatrix, negative_ratio: usize) -> Result<QMatrix> {
    if dmat.total() == 0 {
        return Err(Error::EmptyInput("co-occurrence matrix"));
    }
    let total = dmat.total() as f64;
    let k = negative_ratio as f64;
    Ok(QMatrix {
        negative_ratio,
        row_shift: dmat.row_sums().iter().map(|&r| k * r as f64 / total).collect(),
        col_sums: dmat.col_sums().iter().map(|&c| c as f64).collect(),
        counts_by_context: dmat.counts().transpose().map(|v| v as f64),
    })
}

impl QMatrix {
    pub fn negative_ratio(&self) -> usize {
        self.negative_ratio
    }

    pub fn num_nodes(&self) -> usize {
        self.row_shift.len()
    }

    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.row_shift[i] * self.col_sums[c] + self.counts_by_context.get(c, i)
    }

    /// Fills `out[i] = Q[i][c]` for a fixed context `c`.
    pub(crate) fn context_column(&self, c: usize, out: &mut [f64]) {
        let scale = self.col_sums[c];
        for (o, &shift) in out.iter_mut().zip(&self.row_shift) {
            *o = shift * scale;
        }
        for (i, v) in self.counts_by_context.row_iter(c) {
            out[i] += v;
        }
    }

    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        let n = self.num_nodes();
        ndarray::Array2::from_shape_fn((n, n), |(i, c)| self.get(i, c))
    }
}
