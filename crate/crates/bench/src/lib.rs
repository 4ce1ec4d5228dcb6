//! Synthetic inputs shared by the benchmarks.

use apne::sparse::CsrMatrix;
use apne::{ContentMatrix, Graph};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Planted partition graph with `blocks` equal blocks.
pub fn planted_partition(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if u * blocks / n == v * blocks / n { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_index_edges(n, &edges)
}

/// Sparse binary content with `active` random features per node.
pub fn sparse_content(n: usize, features: usize, active: usize, seed: u64) -> ContentMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triplets = (0..n)
        .flat_map(|node| (0..active).map(move |_| node))
        .map(|node| (node as u32, rng.random_range(0..features) as u32, 1.0))
        .collect();
    ContentMatrix::from_node_major(CsrMatrix::from_triplets(n, features, triplets))
}

pub fn uniform(rows: usize, cols: usize, scale: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-scale..scale))
}
