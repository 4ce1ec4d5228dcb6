//! Exact dense proximities: high-order transition sums, rooted PageRank, and
//! numerical checks relating them to the sampled co-occurrence matrix.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cooccur::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;

/// Largest node count for which dense `|V| x |V|` proximities are built.
pub const DEFAULT_DENSE_LIMIT: usize = 20_000;

const POWER_ITERATIONS: usize = 1000;
const POWER_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProximityKind {
    /// `sum_{k=1..order} P^k`.
    Order(usize),
    /// `(1 - beta)(I - beta P)^{-1}`.
    RootedPageRank { beta: f64 },
    /// Row-normalized co-occurrence counts.
    RowNormalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix {
    pub matrix: Array2<f64>,
    pub kind: ProximityKind,
}

impl ProximityMatrix {
    pub fn row_sums(&self) -> Array1<f64> {
        self.matrix.sum_axis(Axis(1))
    }
}

fn guard(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::TooLarge { nodes: n, limit });
    }
    Ok(())
}

pub fn high_order_proximity(p: &TransitionMatrix, order: usize) -> Result<ProximityMatrix> {
    high_order_proximity_with_limit(p, order, DEFAULT_DENSE_LIMIT)
}

/// Sums `P^1 .. P^order` by repeated multiplication.
pub fn high_order_proximity_with_limit(p: &TransitionMatrix, order: usize, limit: usize) -> Result<ProximityMatrix> {
    guard(p.num_nodes(), limit)?;
    if order == 0 {
        return Err(Error::Config("proximity order must be positive".into()));
    }
    let dense = p.to_dense();
    Ok(ProximityMatrix { matrix: power_sum(&dense, order), kind: ProximityKind::Order(order) })
}

fn power_sum(p: &Array2<f64>, order: usize) -> Array2<f64> {
    let mut power = p.clone();
    let mut sum = p.clone();
    for _ in 1..order {
        power = power.dot(p);
        sum += &power;
    }
    sum
}

pub fn rooted_pagerank(p: &TransitionMatrix, beta: f64) -> Result<ProximityMatrix> {
    rooted_pagerank_with_limit(p, beta, DEFAULT_DENSE_LIMIT)
}

/// Solves `(I - beta P) X = (1 - beta) I` directly.
pub fn rooted_pagerank_with_limit(p: &TransitionMatrix, beta: f64, limit: usize) -> Result<ProximityMatrix> {
    guard(p.num_nodes(), limit)?;
    Ok(ProximityMatrix { matrix: rpr_dense(&p.to_dense(), beta)?, kind: ProximityKind::RootedPageRank { beta } })
}

fn rpr_dense(p: &Array2<f64>, beta: f64) -> Result<Array2<f64>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Config(format!("beta must lie in (0, 1), got {beta}")));
    }
    let n = p.nrows();
    let system = nalgebra::DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - beta * p[[i, j]]);
    let rhs = nalgebra::DMatrix::<f64>::identity(n, n) * (1.0 - beta);
    let solution =
        system.lu().solve(&rhs).ok_or_else(|| Error::Config(format!("I - beta P is singular for beta = {beta}")))?;
    Ok(Array2::from_shape_fn((n, n), |(i, j)| solution[(i, j)]))
}

/// Row-normalized co-occurrence matrix together with the rows that were
/// left at zero because they hold no counts.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedRows {
    pub proximity: ProximityMatrix,
    pub zero_rows: Vec<usize>,
}

pub fn normalize_rows(dmat: &CooccurrenceMatrix) -> NormalizedRows {
    let n = dmat.num_nodes();
    let mut m = Array2::zeros((n, n));
    for (i, c, v) in dmat.counts().iter() {
        m[[i, c]] = v as f64 / dmat.row_sums()[i] as f64;
    }
    NormalizedRows {
        proximity: ProximityMatrix { matrix: m, kind: ProximityKind::RowNormalized },
        zero_rows: dmat.empty_rows(),
    }
}

/// Maximum entrywise deviation `|order * D^nor - S^order|` between sampled
/// counts and the exact high-order proximity.
pub fn empirical_deviation(dmat: &CooccurrenceMatrix, p: &TransitionMatrix, order: usize) -> Result<f64> {
    if dmat.num_nodes() != p.num_nodes() {
        return Err(Error::Shape(format!(
            "{}-node counts vs {}-node transition matrix",
            dmat.num_nodes(),
            p.num_nodes()
        )));
    }
    let exact = high_order_proximity(p, order)?.matrix;
    let normalized = normalize_rows(dmat).proximity.matrix;
    let scale = order as f64;
    Ok(normalized.iter().zip(exact.iter()).map(|(d, s)| (scale * d - s).abs()).fold(0.0, f64::max))
}

/// Largest singular value by power iteration on `M^T M`.
pub fn spectral_norm(m: &Array2<f64>) -> f64 {
    let cols = m.ncols();
    if cols == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v = Array1::from_shape_fn(cols, |_| rng.random::<f64>() + 0.5);
    let norm = v.dot(&v).sqrt();
    v /= norm;
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = m.t().dot(&m.dot(&v));
        let next = w.dot(&w).sqrt();
        if next == 0.0 {
            return 0.0;
        }
        v = w / next;
        let converged = (next - lambda).abs() <= POWER_TOLERANCE * next;
        lambda = next;
        if converged {
            break;
        }
    }
    lambda.sqrt()
}

/// Outcome of comparing rooted PageRank with the expected normalized
/// co-occurrence matrix `(1/l) sum_{k=1..l} P^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub beta: f64,
    pub l: usize,
    #[serde(rename = "K")]
    pub k: u64,
    pub bound: f64,
    pub measured_norm: f64,
    pub pass: bool,
    /// Whether `l (1 - beta) >= 1`, the regime the bound is derived for. Below
    /// it `K` clamps to zero and the bound can fail.
    pub precondition: bool,
}

impl BoundReport {
    /// Flat `key = value` lines.
    pub fn to_key_value(&self) -> String {
        format!(
            "beta = {}\nl = {}\nK = {}\nbound = {:.6}\nmeasured_norm = {:.6}\npass = {}\nprecondition = {}\n",
            self.beta, self.l, self.k, self.bound, self.measured_norm, self.pass, self.precondition
        )
    }
}

/// `K = floor(-log(l (1 - beta)) / log beta)`, clamped at zero.
pub fn split_index(order: usize, beta: f64) -> u64 {
    let k = (-(order as f64 * (1.0 - beta)).ln() / beta.ln()).floor();
    if k.is_finite() && k > 0.0 {
        k as u64
    } else {
        0
    }
}

/// `2 - 2 beta^(K + 1)`.
pub fn rpr_bound(order: usize, beta: f64) -> f64 {
    2.0 - 2.0 * beta.powi(split_index(order, beta) as i32 + 1)
}

pub fn verify_rpr_bound(p: &TransitionMatrix, order: usize, beta: f64) -> Result<BoundReport> {
    verify_rpr_bound_with_limit(p, order, beta, DEFAULT_DENSE_LIMIT)
}

/// Measures `||S^RPR - D^nor||_2` with isolated nodes removed.
pub fn verify_rpr_bound_with_limit(p: &TransitionMatrix, order: usize, beta: f64, limit: usize) -> Result<BoundReport> {
    if order == 0 {
        return Err(Error::Config("proximity order must be positive".into()));
    }
    let keep: Vec<usize> = (0..p.num_nodes()).filter(|&i| !p.is_isolated(i)).collect();
    if keep.is_empty() {
        return Err(Error::AllIsolated);
    }
    guard(keep.len(), limit)?;
    let full = p.to_dense();
    let dense = full.select(Axis(0), &keep).select(Axis(1), &keep);
    let rpr = rpr_dense(&dense, beta)?;
    let expected = power_sum(&dense, order) / order as f64;
    let measured_norm = spectral_norm(&(rpr - expected));
    let bound = rpr_bound(order, beta);
    Ok(BoundReport {
        beta,
        l: order,
        k: split_index(order, beta),
        bound,
        measured_norm,
        pass: measured_norm <= bound,
        precondition: order as f64 * (1.0 - beta) >= 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{transition_matrix, Graph, NodeIndex};

    fn triangle() -> TransitionMatrix {
        transition_matrix(&Graph::from_index_edges(3, &[(0, 1), (1, 2), (0, 2)]))
    }

    #[test]
    fn triangle_order_two() {
        let s = high_order_proximity(&triangle(), 2).unwrap().matrix;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.5 } else { 0.75 };
                assert!((s[[i, j]] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn order_one_is_transition() {
        let p = triangle();
        assert_eq!(high_order_proximity(&p, 1).unwrap().matrix, p.to_dense());
    }

    #[test]
    fn path_two_step_return() {
        let p = transition_matrix(&Graph::from_index_edges(3, &[(0, 1), (1, 2)]));
        let s = high_order_proximity(&p, 2).unwrap().matrix;
        assert!((s[[0, 0]] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn size_guard() {
        let p = triangle();
        assert!(matches!(high_order_proximity_with_limit(&p, 2, 2), Err(Error::TooLarge { nodes: 3, limit: 2 })));
        assert!(matches!(rooted_pagerank_with_limit(&p, 0.5, 2), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn rpr_two_nodes() {
        let p = transition_matrix(&Graph::from_index_edges(2, &[(0, 1)]));
        let s = rooted_pagerank(&p, 0.5).unwrap().matrix;
        let want = [[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((s[[i, j]] - want[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rpr_small_beta_is_identity() {
        let s = rooted_pagerank(&triangle(), 1e-9).unwrap().matrix;
        for ((i, j), v) in s.indexed_iter() {
            assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
        }
    }

    #[test]
    fn rpr_rejects_beta_outside_unit_interval() {
        for beta in [0.0, 1.0, -0.2, 1.5] {
            assert!(rooted_pagerank(&triangle(), beta).is_err());
        }
    }

    #[test]
    fn normalize_rows_reports_zero_rows() {
        let counts = crate::sparse::CsrMatrix::from_triplets(3, 3, vec![(0, 0, 2u64), (0, 1, 2), (1, 0, 2)]);
        let out = normalize_rows(&CooccurrenceMatrix::from_counts(counts));
        assert_eq!(out.zero_rows, vec![2]);
        let m = &out.proximity.matrix;
        assert_eq!([m[[0, 0]], m[[0, 1]], m[[0, 2]]], [0.5, 0.5, 0.0]);
        assert_eq!(m[[1, 0]], 1.0);
        assert_eq!(m.row(2).sum(), 0.0);
    }

    #[test]
    fn split_index_and_bound_for_reference_setting() {
        assert_eq!(split_index(100, 0.85), 16);
        assert!((rpr_bound(100, 0.85) - 1.8738).abs() < 1e-4);
        // l(1 - beta) < 1 makes the raw index negative
        assert_eq!(split_index(10, 0.99), 0);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = Array2::from_diag(&Array1::from(vec![1.0, -3.0, 2.0]));
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-8);
        assert_eq!(spectral_norm(&Array2::zeros((3, 3))), 0.0);
    }

    #[test]
    fn bound_report_drops_isolated_nodes() {
        let nodes = NodeIndex::from_ids(["a", "b", "c", "x"]).unwrap();
        let g = Graph::from_edges(nodes, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        let r = verify_rpr_bound(&transition_matrix(&g), 1, 0.5).unwrap();
        assert!(r.measured_norm >= 0.0);
        assert!(r.pass);
        let json = serde_json::to_value(r).unwrap();
        for key in ["beta", "l", "K", "bound", "measured_norm", "pass"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
