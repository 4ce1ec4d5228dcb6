use ndarray::{s, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use super::{binomial_nll, sigmoid, QMatrix};
use crate::cooccur::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::graph::ContentMatrix;
use crate::sparse::CsrMatrix;

/// Context rows per materialized block of the score matrix.
pub const DEFAULT_BLOCK_ROWS: usize = 256;

/// Which gradients an evaluation should produce. The loss is always computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Request {
    pub grad_w: bool,
    pub grad_s: bool,
}

impl Request {
    pub const LOSS: Request = Request { grad_w: false, grad_s: false };
    pub const W: Request = Request { grad_w: true, grad_s: false };
    pub const S: Request = Request { grad_w: false, grad_s: true };
    pub const BOTH: Request = Request { grad_w: true, grad_s: true };
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub loss: f64,
    /// `S^T F R^T`, shape `d x |V|`.
    pub grad_w: Option<Array2<f64>>,
    /// `F R^T W^T`, shape `N_f x d`.
    pub grad_s: Option<Array2<f64>>,
    /// Scalar multiply-adds spent in matrix products.
    pub mul_adds: u64,
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub w: Array2<f64>,
    pub s: Array2<f64>,
}

/// Loss and gradient evaluator for a fixed `(D, F, Q)`.
///
/// Work proceeds over blocks of contexts `c`: the block of scores
/// `X^T[c, :] = (F^T S)[c, :] W` is materialized, turned into residuals
/// `R^T[c, i] = Q[i][c] sigmoid(x_ic) - D[i][c]`, and folded into the
/// gradients. Peak extra memory is `O(block_rows * |V|)` per worker, and
/// partial results are summed in block order so the outcome does not depend
/// on thread scheduling.
pub struct Objective<'a> {
    content: &'a ContentMatrix,
    q: &'a QMatrix,
    /// `D` stored context-major.
    observed_by_context: CsrMatrix<f64>,
    block_rows: usize,
}

struct BlockOut {
    loss: f64,
    grad_w: Option<Array2<f64>>,
    /// `R^T[block, :] W^T`, scattered into `grad_S` afterwards.
    residual_w: Option<Array2<f64>>,
}

impl<'a> Objective<'a> {
    pub fn new(dmat: &CooccurrenceMatrix, content: &'a ContentMatrix, q: &'a QMatrix) -> Result<Self> {
        let n = dmat.num_nodes();
        if q.num_nodes() != n {
            return Err(Error::Shape(format!("Q covers {} nodes, D covers {n}", q.num_nodes())));
        }
        if content.num_nodes() != n {
            return Err(Error::Shape(format!("F has {} node columns, D covers {n} nodes", content.num_nodes())));
        }
        for (i, c, d) in dmat.counts().iter() {
            let bound = q.get(i, c);
            if d as f64 > bound * (1.0 + 1e-12) {
                return Err(Error::Support { row: i, col: c, count: d as f64, bound });
            }
        }
        Ok(Self {
            content,
            q,
            observed_by_context: dmat.counts().transpose().map(|v| v as f64),
            block_rows: DEFAULT_BLOCK_ROWS,
        })
    }

    pub fn with_block_rows(mut self, rows: usize) -> Self {
        self.block_rows = rows.max(1);
        self
    }

    pub fn num_nodes(&self) -> usize {
        self.q.num_nodes()
    }

    pub fn num_features(&self) -> usize {
        self.content.num_features()
    }

    fn check_params(&self, s: ArrayView2<f64>, w: ArrayView2<f64>) -> Result<()> {
        let n = self.num_nodes();
        let nf = self.num_features();
        if s.nrows() != nf {
            return Err(Error::Shape(format!("S has {} rows, F has {nf} features", s.nrows())));
        }
        if w.ncols() != n {
            return Err(Error::Shape(format!("W has {} columns for {n} nodes", w.ncols())));
        }
        if s.ncols() != w.nrows() {
            return Err(Error::Shape(format!("S is {}-dimensional but W is {}-dimensional", s.ncols(), w.nrows())));
        }
        Ok(())
    }

    /// `F^T S` via the sparse columns of `F`: `nnz(F) * d` multiply-adds.
    fn content_embedding(&self, s: ArrayView2<f64>) -> Array2<f64> {
        let n = self.num_nodes();
        let mut out = Array2::zeros((n, s.ncols()));
        for (mut row, c) in out.axis_iter_mut(Axis(0)).zip(0..n) {
            for (f, v) in self.content.column(c) {
                row.scaled_add(v, &s.row(f));
            }
        }
        out
    }

    fn blocks(&self) -> Vec<(usize, usize)> {
        let n = self.num_nodes();
        (0..n).step_by(self.block_rows).map(|c0| (c0, (c0 + self.block_rows).min(n))).collect()
    }

    /// Visits every `(i, c)` of a context block with `Q > 0`, passing
    /// `(local row, i, q, d, x)`.
    fn for_each_pair(&self, c0: usize, scores: &Array2<f64>, mut visit: impl FnMut(usize, usize, f64, f64, f64)) {
        let n = self.num_nodes();
        let mut q_col = vec![0.0; n];
        let mut d_col = vec![0.0; n];
        for (r, x_row) in scores.axis_iter(Axis(0)).enumerate() {
            let c = c0 + r;
            self.q.context_column(c, &mut q_col);
            let observed = self.observed_by_context.row_iter(c).collect::<Vec<_>>();
            for &(i, d) in &observed {
                d_col[i] = d;
            }
            for i in 0..n {
                let q = q_col[i];
                if q > 0.0 {
                    visit(r, i, q, d_col[i], x_row[i]);
                }
            }
            for &(i, _) in &observed {
                d_col[i] = 0.0;
            }
        }
    }

    pub fn evaluate(&self, s: ArrayView2<f64>, w: ArrayView2<f64>, request: Request) -> Result<Evaluation> {
        self.check_params(s, w)?;
        let n = self.num_nodes();
        let dim = w.nrows() as u64;
        let embed = self.content_embedding(s);
        let blocks = self.blocks();

        let outs: Vec<BlockOut> = blocks
            .par_iter()
            .map(|&(c0, c1)| {
                let embed_blk = embed.slice(s![c0..c1, ..]);
                let scores = embed_blk.dot(&w);
                let mut loss = 0.0;
                let need_residual = request.grad_w || request.grad_s;
                let mut residual = if need_residual { Array2::zeros(scores.raw_dim()) } else { Array2::zeros((0, 0)) };
                self.for_each_pair(c0, &scores, |r, i, q, d, x| {
                    loss += binomial_nll(d, q, x);
                    if need_residual {
                        residual[[r, i]] = q * sigmoid(x) - d;
                    }
                });
                BlockOut {
                    loss,
                    grad_w: request.grad_w.then(|| embed_blk.t().dot(&residual)),
                    residual_w: request.grad_s.then(|| residual.dot(&w.t())),
                }
            })
            .collect();

        let mut loss = 0.0;
        let mut grad_w = request.grad_w.then(|| Array2::zeros((w.nrows(), n)));
        let mut grad_s = request.grad_s.then(|| Array2::zeros(s.raw_dim()));
        for (&(c0, _), out) in blocks.iter().zip(outs) {
            loss += out.loss;
            if let (Some(acc), Some(part)) = (grad_w.as_mut(), out.grad_w) {
                *acc += &part;
            }
            if let (Some(acc), Some(part)) = (grad_s.as_mut(), out.residual_w) {
                for (r, row) in part.axis_iter(Axis(0)).enumerate() {
                    for (f, v) in self.content.column(c0 + r) {
                        acc.row_mut(f).scaled_add(v, &row);
                    }
                }
            }
        }

        let nnz = self.content.nnz() as u64;
        let square = (n as u64) * (n as u64) * dim;
        let mut mul_adds = nnz * dim + square;
        if request.grad_w {
            mul_adds += square;
        }
        if request.grad_s {
            mul_adds += square + nnz * dim;
        }
        Ok(Evaluation { loss, grad_w, grad_s, mul_adds })
    }

    /// Dense `E[i][c] = Q[i][c] sigmoid(f_c^T S w_i)` and the number of scalar
    /// multiply-adds spent forming the scores.
    pub fn expected_counts(&self, s: ArrayView2<f64>, w: ArrayView2<f64>) -> Result<(Array2<f64>, u64)> {
        self.check_params(s, w)?;
        let n = self.num_nodes();
        let embed = self.content_embedding(s);
        let mut ops = (self.content.nnz() * s.ncols()) as u64;
        let mut out = Array2::zeros((n, n));
        for (c0, c1) in self.blocks() {
            let scores = embed.slice(s![c0..c1, ..]).dot(&w);
            ops += ((c1 - c0) * w.nrows() * n) as u64;
            self.for_each_pair(c0, &scores, |r, i, q, _, x| out[[i, c0 + r]] = q * sigmoid(x));
        }
        Ok((out, ops))
    }
}

/// Closed-form expectation `E[D' | F^T S W]`, indexed `[i][c]`.
pub fn expected_counts(
    dmat: &CooccurrenceMatrix,
    content: &ContentMatrix,
    s: &Array2<f64>,
    w: &Array2<f64>,
    q: &QMatrix,
) -> Result<Array2<f64>> {
    Ok(Objective::new(dmat, content, q)?.expected_counts(s.view(), w.view())?.0)
}

pub fn loss(
    dmat: &CooccurrenceMatrix,
    content: &ContentMatrix,
    s: &Array2<f64>,
    w: &Array2<f64>,
    q: &QMatrix,
) -> Result<f64> {
    Ok(Objective::new(dmat, content, q)?.evaluate(s.view(), w.view(), Request::LOSS)?.loss)
}

pub fn gradients(
    dmat: &CooccurrenceMatrix,
    content: &ContentMatrix,
    s: &Array2<f64>,
    w: &Array2<f64>,
    q: &QMatrix,
) -> Result<Gradients> {
    let eval = Objective::new(dmat, content, q)?.evaluate(s.view(), w.view(), Request::BOTH)?;
    Ok(Gradients { w: eval.grad_w.expect("requested"), s: eval.grad_s.expect("requested") })
}
