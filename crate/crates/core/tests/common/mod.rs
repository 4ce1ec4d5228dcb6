#![allow(dead_code)]

use apne::sparse::CsrMatrix;
use apne::{ContentMatrix, Graph, LabelSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdős–Rényi graph with a random spanning tree overlaid so it is connected.
pub fn connected_random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_index_edges(n, &edges)
}

/// The Petersen graph: 10 nodes, 3-regular, connected.
pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::from_index_edges(10, &edges)
}

pub struct Sbm {
    pub graph: Graph,
    pub labels: LabelSet,
    pub features: ContentMatrix,
    pub blocks: Vec<usize>,
}

/// Planted partition with `blocks` equal blocks. Each node carries
/// `active` features; each is drawn from its own block's group of
/// `per_block` features with probability `fidelity`, else uniformly.
pub fn sbm(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Sbm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block: Vec<usize> = (0..n).map(|i| i * blocks / n).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_index_edges(n, &edges);
    let labels = LabelSet::from_assignments(n, block.iter().copied().enumerate());
    let features = noisy_block_features(&block, blocks, 10, 3, 0.8, &mut rng);
    Sbm { graph, labels, features, blocks: block }
}

pub fn noisy_block_features(
    block: &[usize],
    blocks: usize,
    per_block: usize,
    active: usize,
    fidelity: f64,
    rng: &mut ChaCha8Rng,
) -> ContentMatrix {
    let nf = blocks * per_block;
    let mut triplets = Vec::new();
    for (node, &b) in block.iter().enumerate() {
        for _ in 0..active {
            let f = if rng.random::<f64>() < fidelity {
                b * per_block + rng.random_range(0..per_block)
            } else {
                rng.random_range(0..nf)
            };
            triplets.push((node as u32, f as u32, 1.0));
        }
    }
    ContentMatrix::from_node_major(CsrMatrix::from_triplets(block.len(), nf, triplets))
}
