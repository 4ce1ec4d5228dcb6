use std::collections::HashSet;
use std::io::Write;
use std::str::FromStr;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeIndex};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSplitConfig {
    pub fraction: f64,
    pub seed: u64,
}

impl Default for LinkSplitConfig {
    fn default() -> Self {
        Self { fraction: 0.5, seed: 0 }
    }
}

/// Held-out edges, sampled non-edges, and the graph that remains.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSplit {
    pub residual: Graph,
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
    pub fraction: f64,
    pub achieved: f64,
    pub seed: u64,
    order: Vec<(usize, usize, bool)>,
}

impl LinkSplit {
    /// Positives and negatives interleaved in a seeded random order, so score
    /// ties are not resolved in favour of either side.
    pub fn labeled_pairs(&self) -> &[(usize, usize, bool)] {
        &self.order
    }
}

fn reachable_without(
    adj: &[HashSet<usize>],
    from: usize,
    to: usize,
    seen: &mut [bool],
    queue: &mut Vec<usize>,
) -> bool {
    seen.iter_mut().for_each(|s| *s = false);
    queue.clear();
    queue.push(from);
    seen[from] = true;
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        for &v in &adj[u] {
            if v == to {
                return true;
            }
            if !seen[v] {
                seen[v] = true;
                queue.push(v);
            }
        }
    }
    false
}

/// Removes up to `fraction` of the largest component's edges in one seeded
/// shuffled pass, skipping any removal that would disconnect it, then draws
/// as many non-adjacent node pairs as negatives.
pub fn make_link_split(g: &Graph, cfg: &LinkSplitConfig) -> Result<LinkSplit> {
    if !(cfg.fraction > 0.0 && cfg.fraction < 1.0) {
        return Err(Error::Config(format!("removal fraction must lie in (0, 1), got {}", cfg.fraction)));
    }
    let components = g.components();
    let largest = components.iter().max_by_key(|c| (c.len(), std::cmp::Reverse(c[0]))).expect("graph has nodes");
    let in_largest: HashSet<usize> = largest.iter().copied().collect();
    let mut candidates: Vec<(usize, usize)> =
        g.edges().filter(|&(u, v, _)| u != v && in_largest.contains(&u)).map(|(u, v, _)| (u, v)).collect();
    if candidates.len() < (2.0 / (1.0 - cfg.fraction)).floor() as usize {
        return Err(Error::Split(format!("largest component has only {} edges", candidates.len())));
    }
    let target = (cfg.fraction * candidates.len() as f64).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    candidates.shuffle(&mut rng);

    let n = g.num_nodes();
    let mut adj: Vec<HashSet<usize>> = (0..n).map(|u| g.neighbors(u).iter().map(|&v| v as usize).collect()).collect();
    let mut seen = vec![false; n];
    let mut queue = Vec::with_capacity(n);
    let mut positives = Vec::with_capacity(target);
    for &(u, v) in &candidates {
        if positives.len() >= target {
            break;
        }
        adj[u].remove(&v);
        adj[v].remove(&u);
        if reachable_without(&adj, u, v, &mut seen, &mut queue) {
            positives.push((u, v));
        } else {
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    let achieved = positives.len() as f64 / candidates.len() as f64;
    if positives.len() < target {
        log::warn!(
            "only {} of {} requested edges removable without disconnecting (fraction {achieved:.3})",
            positives.len(),
            target
        );
    }

    let removed: HashSet<(usize, usize)> = positives.iter().copied().collect();
    let residual = Graph::from_edges(g.nodes().clone(), g.edges().filter(|&(u, v, _)| !removed.contains(&(u, v))));

    let non_edges = n * (n - 1) / 2 - g.edges().filter(|&(u, v, _)| u != v).count();
    let mut negatives = Vec::with_capacity(positives.len());
    if non_edges <= positives.len() {
        if non_edges < positives.len() {
            log::warn!("only {non_edges} non-adjacent pairs available for {} negatives", positives.len());
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if !g.has_edge(u, v) {
                    negatives.push((u, v));
                }
            }
        }
    } else {
        let mut chosen = HashSet::new();
        while negatives.len() < positives.len() {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u == v || g.has_edge(u, v) {
                continue;
            }
            let pair = (u.min(v), u.max(v));
            if chosen.insert(pair) {
                negatives.push(pair);
            }
        }
    }

    let mut order: Vec<(usize, usize, bool)> =
        positives.iter().map(|&(u, v)| (u, v, true)).chain(negatives.iter().map(|&(u, v)| (u, v, false))).collect();
    order.shuffle(&mut rng);

    Ok(LinkSplit { residual, positives, negatives, fraction: cfg.fraction, achieved, seed: cfg.seed, order })
}

/// Cosine similarity; a zero vector scores 0.
pub fn cosine(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(&b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Cosine similarity of each pair; `vectors` holds one row per node.
pub fn score_pairs(vectors: ArrayView2<f64>, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs.iter().map(|&(u, v)| cosine(vectors.row(u), vectors.row(v))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    CommonNeighbors,
    Jaccard,
    AdamicAdar,
    PreferentialAttachment,
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cn" => Ok(Heuristic::CommonNeighbors),
            "jaccard" => Ok(Heuristic::Jaccard),
            "aa" => Ok(Heuristic::AdamicAdar),
            "pa" => Ok(Heuristic::PreferentialAttachment),
            other => Err(Error::UnknownMethod(other.to_owned())),
        }
    }
}

impl Heuristic {
    pub fn name(self) -> &'static str {
        match self {
            Heuristic::CommonNeighbors => "cn",
            Heuristic::Jaccard => "jaccard",
            Heuristic::AdamicAdar => "aa",
            Heuristic::PreferentialAttachment => "pa",
        }
    }
}

fn common_neighbors(a: &[u32], b: &[u32]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i] as usize);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Classic neighbourhood scores of the pair `(u, v)` on `g`.
pub fn heuristic_score(g: &Graph, u: usize, v: usize, method: Heuristic) -> f64 {
    let nu = g.neighbors(u);
    let nv = g.neighbors(v);
    match method {
        Heuristic::CommonNeighbors => common_neighbors(nu, nv).len() as f64,
        Heuristic::Jaccard => {
            let shared = common_neighbors(nu, nv).len();
            let union = nu.len() + nv.len() - shared;
            if union == 0 {
                0.0
            } else {
                shared as f64 / union as f64
            }
        }
        Heuristic::AdamicAdar => common_neighbors(nu, nv)
            .into_iter()
            .map(|z| g.degree(z))
            .filter(|&d| d > 1)
            .map(|d| 1.0 / (d as f64).ln())
            .sum(),
        Heuristic::PreferentialAttachment => (nu.len() * nv.len()) as f64,
    }
}

/// CSV `u,v,label,score` using node identifiers.
pub fn write_pair_scores<W: Write>(
    out: W,
    nodes: &NodeIndex,
    pairs: &[(usize, usize, bool)],
    scores: &[f64],
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["u", "v", "label", "score"]).map_err(|e| Error::Io(e.into()))?;
    for (&(u, v, label), score) in pairs.iter().zip(scores) {
        writer
            .write_record([nodes.id(u), nodes.id(v), if label { "1" } else { "0" }, &score.to_string()])
            .map_err(|e| Error::Io(e.into()))?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, Array2};

    #[test]
    fn tree_has_no_removable_edge() {
        let g = Graph::from_index_edges(6, &[(0, 1), (1, 2), (1, 3), (3, 4), (4, 5)]);
        let split = make_link_split(&g, &LinkSplitConfig { fraction: 0.5, seed: 3 }).unwrap();
        assert!(split.positives.is_empty());
        assert_eq!(split.achieved, 0.0);
        assert_eq!(split.residual, g);
    }

    #[test]
    fn triangle_loses_exactly_one_edge() {
        // only the triangle edges are candidates and removing one turns the other two into bridges
        let g = Graph::from_index_edges(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]);
        for seed in 0..10 {
            let split = make_link_split(&g, &LinkSplitConfig { fraction: 0.34, seed }).unwrap();
            assert_eq!(split.positives.len(), 1);
            assert!(split.residual.is_connected());
        }
        let tri = Graph::from_index_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let split = make_link_split(&tri, &LinkSplitConfig { fraction: 0.34, seed: 1 }).unwrap();
        assert_eq!(split.positives.len(), 1);
        assert_eq!(split.residual.num_edges(), 2);
        assert!(split.residual.is_connected());
        assert!(split.negatives.is_empty());
    }

    #[test]
    fn split_invariants_on_dense_graph() {
        let mut edges = Vec::new();
        for u in 0..30 {
            for v in (u + 1)..30 {
                if (u * 7 + v * 11) % 5 < 2 {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_index_edges(30, &edges);
        let split = make_link_split(&g, &LinkSplitConfig { fraction: 0.5, seed: 8 }).unwrap();
        assert!(split.residual.is_connected());
        assert_eq!(split.positives.len(), split.negatives.len());
        assert_eq!(split.positives.len(), (g.num_edges() as f64 * 0.5).round() as usize);
        for &(u, v) in &split.positives {
            assert!(g.has_edge(u, v) && !split.residual.has_edge(u, v));
        }
        for &(u, v) in &split.negatives {
            assert!(u != v && !g.has_edge(u, v));
        }
        assert_eq!(split.labeled_pairs().len(), 2 * split.positives.len());
        let again = make_link_split(&g, &LinkSplitConfig { fraction: 0.5, seed: 8 }).unwrap();
        assert_eq!(split, again);
    }

    #[test]
    fn tiny_graph_rejected() {
        let g = Graph::from_index_edges(2, &[(0, 1)]);
        assert!(matches!(make_link_split(&g, &LinkSplitConfig::default()), Err(Error::Split(_))));
        assert!(matches!(make_link_split(&g, &LinkSplitConfig { fraction: 1.0, seed: 0 }), Err(Error::Config(_))));
    }

    #[test]
    fn cosine_cases() {
        assert!((cosine(arr1(&[1.0, 2.0]).view(), arr1(&[1.0, 2.0]).view()) - 1.0).abs() < 1e-15);
        assert_eq!(cosine(arr1(&[1.0, 0.0]).view(), arr1(&[0.0, 3.0]).view()), 0.0);
        let c = cosine(arr1(&[1.0, 1.0]).view(), arr1(&[1.0, 0.0]).view());
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(cosine(arr1(&[0.0, 0.0]).view(), arr1(&[1.0, 0.0]).view()), 0.0);
        let v = Array2::from_shape_vec((2, 2), vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(score_pairs(v.view(), &[(0, 1)]).len(), 1);
    }

    #[test]
    fn heuristics_on_hand_graph() {
        // u=0 and v=1 share a=2 and b=3, each of degree 2
        let g = Graph::from_index_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]);
        assert_eq!(heuristic_score(&g, 0, 1, Heuristic::CommonNeighbors), 2.0);
        let aa = heuristic_score(&g, 0, 1, Heuristic::AdamicAdar);
        assert!((aa - 2.0 / 2f64.ln()).abs() < 1e-12);
        assert!((aa - 2.885).abs() < 1e-3);
        assert_eq!(heuristic_score(&g, 0, 1, Heuristic::Jaccard), 1.0);
        assert_eq!(heuristic_score(&g, 0, 1, Heuristic::PreferentialAttachment), 4.0);

        let h = Graph::from_index_edges(9, &[(0, 2), (0, 3), (0, 4), (1, 5), (1, 6), (1, 7), (1, 8)]);
        for m in [Heuristic::CommonNeighbors, Heuristic::Jaccard, Heuristic::AdamicAdar] {
            assert_eq!(heuristic_score(&h, 0, 1, m), 0.0);
        }
        assert_eq!(heuristic_score(&h, 0, 1, Heuristic::PreferentialAttachment), 12.0);
    }

    #[test]
    fn method_names_parse() {
        for m in ["cn", "jaccard", "aa", "pa"] {
            assert_eq!(m.parse::<Heuristic>().unwrap().name(), m);
        }
        assert!(matches!("katz".parse::<Heuristic>(), Err(Error::UnknownMethod(_))));
    }
}
