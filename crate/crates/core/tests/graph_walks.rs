mod common;

use apne::cooccur::{build_cooccurrence, sample_cooccurrence, sample_walks};
use apne::graph::{load_edge_list, transition_matrix};
use apne::{Graph, WalkConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn edge_lists() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..25).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 1..60)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transition_rows_are_stochastic((n, edges) in edge_lists()) {
        let g = Graph::from_index_edges(n, &edges);
        let p = transition_matrix(&g);
        let dense = p.to_dense();
        for i in 0..n {
            let sum: f64 = dense.row(i).sum();
            if p.is_isolated(i) {
                prop_assert_eq!(sum, 0.0);
            } else {
                prop_assert!((sum - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn adjacency_is_symmetric((n, edges) in edge_lists()) {
        let g = Graph::from_index_edges(n, &edges);
        for (i, j, w) in g.adjacency().iter() {
            prop_assert_eq!(g.adjacency().get(j, i), w);
        }
    }

    #[test]
    fn edge_list_order_does_not_matter((_, edges) in edge_lists(), seed in any::<u64>()) {
        let lines: Vec<String> = edges.iter().map(|(u, v)| format!("n{u} n{v}")).collect();
        let mut shuffled = lines.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = load_edge_list(lines.join("\n").as_bytes(), false).unwrap();
        let b = load_edge_list(shuffled.join("\n").as_bytes(), false).unwrap();
        prop_assert_eq!(a.num_nodes(), b.num_nodes());
        prop_assert_eq!(a.num_edges(), b.num_edges());
        for (u, v, w) in a.edges() {
            let bu = b.nodes().get(a.nodes().id(u)).unwrap();
            let bv = b.nodes().get(a.nodes().id(v)).unwrap();
            prop_assert_eq!(b.weight(bu, bv), w);
        }
    }

    #[test]
    fn cooccurrence_symmetric_and_conserving((n, edges) in edge_lists(), window in 1usize..6, seed in any::<u64>()) {
        let g = Graph::from_index_edges(n, &edges);
        let p = transition_matrix(&g);
        let cfg = WalkConfig { walk_length: 12, walks_per_node: 3, window, seed };
        let walks = sample_walks(&p, &cfg).unwrap();
        let dmat = build_cooccurrence(&walks, window);
        prop_assert!(dmat.is_symmetric());
        let events: usize = walks
            .walks
            .iter()
            .map(|w| (1..=window).map(|k| w.len().saturating_sub(k)).sum::<usize>())
            .sum();
        prop_assert_eq!(dmat.total(), 2 * events as u64);
    }
}

#[test]
fn identical_seeds_reproduce_counts() {
    let g = common::connected_random_graph(60, 0.08, 4);
    let p = transition_matrix(&g);
    let cfg = WalkConfig { walk_length: 30, walks_per_node: 20, window: 4, seed: 99 };
    let a = sample_cooccurrence(&p, &cfg).unwrap();
    let b = sample_cooccurrence(&p, &cfg).unwrap();
    assert_eq!(a, b);
    let other = sample_cooccurrence(&p, &WalkConfig { seed: 100, ..cfg }).unwrap();
    assert_ne!(a, other);
}

#[test]
fn thread_count_does_not_change_counts() {
    let g = common::connected_random_graph(80, 0.05, 6);
    let p = transition_matrix(&g);
    let cfg = WalkConfig { walk_length: 20, walks_per_node: 10, window: 5, seed: 1 };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = single.install(|| sample_cooccurrence(&p, &cfg).unwrap());
    let b = many.install(|| sample_cooccurrence(&p, &cfg).unwrap());
    assert_eq!(a, b);
}
