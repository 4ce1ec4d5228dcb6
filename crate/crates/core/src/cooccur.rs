//! Random-walk sampling and the node co-occurrence matrix `D`, optionally
//! enriched with label context.
//!
//! For every walk and every position pair `(a, b)` with `1 <= b - a <= window`,
//! both `D[v_a][v_b]` and `D[v_b][v_a]` are incremented, so `D` is symmetric
//! and its row-normalized expectation times `window` is `sum_{k=1..window} P^k`.
//! Pairs are enumerated exhaustively rather than subsampled.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{parse_err, Error, Result};
use crate::graph::{data_lines, LabelSet, NodeIndex, TransitionMatrix};
use crate::sparse::CsrMatrix;

/// Stream id reserved for label-context sampling so it never aliases a walk stream.
const LABEL_STREAM: u64 = u64::MAX;

/// Below this node count, per-worker accumulators are dense `n x n` arrays.
const DENSE_ACCUMULATOR_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    /// Nodes per walk, start included.
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub window: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { walk_length: 40, walks_per_node: 80, window: 5, seed: 0 }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walk_length < 2 {
            return Err(Error::Config(format!("walk length must be at least 2, got {}", self.walk_length)));
        }
        if self.walks_per_node == 0 {
            return Err(Error::Config("walks per node must be positive".into()));
        }
        if self.window == 0 || self.window >= self.walk_length {
            return Err(Error::Config(format!(
                "window must satisfy 1 <= window < walk length ({}), got {}",
                self.walk_length, self.window
            )));
        }
        Ok(())
    }
}

/// Sampled node sequences over a graph with `num_nodes` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkSet {
    pub num_nodes: usize,
    pub walks: Vec<Vec<u32>>,
}

impl WalkSet {
    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    /// One walk per line, space-separated node identifiers.
    pub fn write<W: Write>(&self, nodes: &NodeIndex, mut out: W) -> Result<()> {
        for walk in &self.walks {
            let line: Vec<&str> = walk.iter().map(|&v| nodes.id(v as usize)).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Inverse-CDF sampler over transition rows.
struct Walker<'a> {
    p: &'a TransitionMatrix,
    cumulative: Vec<f64>,
}

impl<'a> Walker<'a> {
    fn new(p: &'a TransitionMatrix) -> Self {
        let rows = p.rows();
        let mut cumulative = Vec::with_capacity(rows.nnz());
        for r in 0..rows.rows() {
            let mut acc = 0.0;
            for &w in rows.row(r).1 {
                acc += w;
                cumulative.push(acc);
            }
        }
        Self { p, cumulative }
    }

    fn rng_for(seed: u64, walk_id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(walk_id);
        rng
    }

    fn step(&self, from: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
        let rows = self.p.rows();
        let (targets, _) = rows.row(from);
        if targets.is_empty() {
            return None;
        }
        let cum = &self.cumulative[rows.row_range(from)];
        let u = rng.random::<f64>() * cum[cum.len() - 1];
        let k = cum.partition_point(|&c| c <= u).min(targets.len() - 1);
        Some(targets[k] as usize)
    }

    fn walk_into(&self, start: usize, length: usize, seed: u64, walk_id: u64, buf: &mut Vec<u32>) {
        buf.clear();
        let mut rng = Self::rng_for(seed, walk_id);
        let mut cur = start;
        buf.push(cur as u32);
        while buf.len() < length {
            match self.step(cur, &mut rng) {
                Some(next) => {
                    cur = next;
                    buf.push(cur as u32);
                }
                None => break,
            }
        }
    }
}

fn start_nodes(p: &TransitionMatrix) -> Result<Vec<usize>> {
    let starts: Vec<usize> = (0..p.num_nodes()).filter(|&i| !p.is_isolated(i)).collect();
    if starts.is_empty() {
        return Err(Error::AllIsolated);
    }
    Ok(starts)
}

/// Samples `walks_per_node` walks from every non-isolated node. Epochs are
/// outermost and start nodes cycle in index order within each epoch; walk
/// `k` draws from its own RNG stream, so the result does not depend on how
/// work is scheduled across threads.
pub fn sample_walks(p: &TransitionMatrix, cfg: &WalkConfig) -> Result<WalkSet> {
    cfg.validate()?;
    let starts = start_nodes(p)?;
    let walker = Walker::new(p);
    let total = starts.len() * cfg.walks_per_node;
    let walks = (0..total)
        .into_par_iter()
        .map(|k| {
            let mut buf = Vec::with_capacity(cfg.walk_length);
            walker.walk_into(starts[k % starts.len()], cfg.walk_length, cfg.seed, k as u64, &mut buf);
            buf
        })
        .collect();
    Ok(WalkSet { num_nodes: p.num_nodes(), walks })
}

/// Counts of unordered co-occurrence events. A pair `(a, b)` seen `e` times
/// contributes `e` to both `D[a][b]` and `D[b][a]`, or `2e` to `D[a][a]`.
enum PairCounter {
    Dense { n: usize, counts: Vec<u64> },
    Sparse(HashMap<u64, u64>),
}

impl PairCounter {
    fn new(n: usize) -> Self {
        if n <= DENSE_ACCUMULATOR_LIMIT {
            PairCounter::Dense { n, counts: vec![0; n * n] }
        } else {
            PairCounter::Sparse(HashMap::new())
        }
    }

    #[inline]
    fn add(&mut self, a: u32, b: u32, times: u64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        match self {
            PairCounter::Dense { n, counts } => counts[lo as usize * *n + hi as usize] += times,
            PairCounter::Sparse(map) => *map.entry(((lo as u64) << 32) | hi as u64).or_insert(0) += times,
        }
    }

    fn add_walk(&mut self, walk: &[u32], window: usize) {
        for (a, &u) in walk.iter().enumerate() {
            for &v in walk.iter().skip(a + 1).take(window) {
                self.add(u, v, 1);
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        match (&mut self, other) {
            (PairCounter::Dense { counts, .. }, PairCounter::Dense { counts: theirs, .. }) => {
                counts.iter_mut().zip(theirs).for_each(|(x, y)| *x += y);
            }
            (PairCounter::Sparse(map), PairCounter::Sparse(theirs)) => {
                let (mut big, small) = if map.len() >= theirs.len() {
                    (std::mem::take(map), theirs)
                } else {
                    (theirs, std::mem::take(map))
                };
                for (k, v) in small {
                    *big.entry(k).or_insert(0) += v;
                }
                *map = big;
            }
            _ => unreachable!("accumulators are created with the same node count"),
        }
        self
    }

    fn events(self) -> Vec<(u32, u32, u64)> {
        match self {
            PairCounter::Dense { n, counts } => counts
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(k, c)| ((k / n) as u32, (k % n) as u32, c))
                .collect(),
            PairCounter::Sparse(map) => map.into_iter().map(|(k, c)| ((k >> 32) as u32, k as u32, c)).collect(),
        }
    }

    fn into_matrix(self, n: usize) -> CooccurrenceMatrix {
        let mut triplets = Vec::new();
        for (a, b, e) in self.events() {
            if a == b {
                triplets.push((a, a, 2 * e));
            } else {
                triplets.push((a, b, e));
                triplets.push((b, a, e));
            }
        }
        CooccurrenceMatrix::from_counts(CsrMatrix::from_triplets(n, n, triplets))
    }
}

/// Sparse integer co-occurrence counts with exact marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    counts: CsrMatrix<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl CooccurrenceMatrix {
    pub fn from_counts(counts: CsrMatrix<u64>) -> Self {
        let mut row_sums = vec![0u64; counts.rows()];
        let mut col_sums = vec![0u64; counts.cols()];
        for (i, c, v) in counts.iter() {
            row_sums[i] += v;
            col_sums[c] += v;
        }
        let total = row_sums.iter().sum();
        Self { counts, row_sums, col_sums, total }
    }

    pub fn counts(&self) -> &CsrMatrix<u64> {
        &self.counts
    }

    pub fn get(&self, i: usize, c: usize) -> u64 {
        self.counts.get(i, c)
    }

    /// `#(i)`.
    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    /// `#(c)`.
    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    /// `|D|`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn num_nodes(&self) -> usize {
        self.counts.rows()
    }

    pub fn nnz(&self) -> usize {
        self.counts.nnz()
    }

    pub fn is_symmetric(&self) -> bool {
        self.counts.iter().all(|(i, c, v)| self.counts.get(c, i) == v)
    }

    /// Nodes whose row holds no co-occurrence at all.
    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&i| self.row_sums[i] == 0).collect()
    }

    /// Returns `self` plus `extra`, where `extra[(a, b)]` counts symmetric
    /// events (see [`PairCounter`]).
    fn with_events(&self, extra: HashMap<(u32, u32), u64>) -> Self {
        let mut triplets: Vec<(u32, u32, u64)> = self.counts.iter().map(|(i, c, v)| (i as u32, c as u32, v)).collect();
        for ((a, b), e) in extra {
            if a == b {
                triplets.push((a, a, 2 * e));
            } else {
                triplets.push((a, b, e));
                triplets.push((b, a, e));
            }
        }
        let n = self.num_nodes();
        Self::from_counts(CsrMatrix::from_triplets(n, n, triplets))
    }

    /// Writes `# node <id>` header lines in index order, then `i j count`
    /// triplets in row-major order using node identifiers.
    pub fn write_triplets<W: Write>(&self, nodes: &NodeIndex, mut out: W) -> Result<()> {
        if nodes.len() != self.num_nodes() {
            return Err(Error::Shape(format!("{} node ids for a {}-node matrix", nodes.len(), self.num_nodes())));
        }
        for id in nodes.ids() {
            writeln!(out, "# node {id}")?;
        }
        for (i, c, v) in self.counts.iter() {
            writeln!(out, "{} {} {}", nodes.id(i), nodes.id(c), v)?;
        }
        Ok(())
    }

    /// Reads the format of [`write_triplets`](Self::write_triplets). Without
    /// `# node` headers, nodes are indexed in first-seen order.
    pub fn read_triplets<R: BufRead>(source: R) -> Result<(NodeIndex, Self)> {
        let mut nodes = NodeIndex::new();
        let mut triplets = Vec::new();
        for (k, line) in source.lines().enumerate() {
            let line = line?;
            let lineno = k + 1;
            let t = line.trim();
            if let Some(id) = t.strip_prefix("# node ") {
                let id = id.trim();
                if nodes.get(id).is_some() {
                    return Err(parse_err(lineno, format!("node `{id}` declared twice")));
                }
                nodes.intern(id);
                continue;
            }
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = t.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(parse_err(lineno, format!("expected `i j count`, found {} fields", tokens.len())));
            }
            let count: u64 =
                tokens[2].parse().map_err(|_| parse_err(lineno, format!("invalid count `{}`", tokens[2])))?;
            let i = nodes.intern(tokens[0]);
            let c = nodes.intern(tokens[1]);
            triplets.push((i as u32, c as u32, count));
        }
        if triplets.is_empty() {
            return Err(Error::EmptyInput("co-occurrence matrix"));
        }
        let n = nodes.len();
        Ok((nodes, Self::from_counts(CsrMatrix::from_triplets(n, n, triplets))))
    }
}

/// Accumulates windowed co-occurrences of `walks` (offsets `1..=window`).
pub fn build_cooccurrence(walks: &WalkSet, window: usize) -> CooccurrenceMatrix {
    let n = walks.num_nodes;
    walks
        .walks
        .par_chunks(256)
        .fold(
            || PairCounter::new(n),
            |mut acc, chunk| {
                chunk.iter().for_each(|w| acc.add_walk(w, window));
                acc
            },
        )
        .reduce(|| PairCounter::new(n), PairCounter::merge)
        .into_matrix(n)
}

/// Samples walks and accumulates co-occurrences without materializing the
/// walk set. Equal to `build_cooccurrence(&sample_walks(p, cfg)?, cfg.window)`.
pub fn sample_cooccurrence(p: &TransitionMatrix, cfg: &WalkConfig) -> Result<CooccurrenceMatrix> {
    cfg.validate()?;
    let starts = start_nodes(p)?;
    let walker = Walker::new(p);
    let n = p.num_nodes();
    let total = starts.len() * cfg.walks_per_node;
    let counter = (0..total)
        .into_par_iter()
        .fold(
            || (PairCounter::new(n), Vec::with_capacity(cfg.walk_length)),
            |(mut acc, mut buf), k| {
                walker.walk_into(starts[k % starts.len()], cfg.walk_length, cfg.seed, k as u64, &mut buf);
                acc.add_walk(&buf, cfg.window);
                (acc, buf)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(|| PairCounter::new(n), PairCounter::merge);
    Ok(counter.into_matrix(n))
}

/// Adds `m` label-context events: pick a labeled node uniformly among classes
/// with at least two members, pick a distinct node of the same class
/// uniformly, and increment both orientations of the pair.
pub fn inject_label_context(
    dmat: &CooccurrenceMatrix,
    labels: &LabelSet,
    m: usize,
    seed: u64,
) -> Result<CooccurrenceMatrix> {
    if m == 0 {
        return Ok(dmat.clone());
    }
    if labels.num_nodes() != dmat.num_nodes() {
        return Err(Error::Shape(format!(
            "labels cover {} nodes, co-occurrence matrix has {}",
            labels.num_nodes(),
            dmat.num_nodes()
        )));
    }
    let members = labels.members();
    // (node, class) for every node whose class has a partner.
    let eligible: Vec<(usize, usize)> = labels.labeled().filter(|&(_, c)| members[c].len() >= 2).collect();
    if eligible.is_empty() {
        return Err(Error::NoLabelPairs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(LABEL_STREAM);
    let mut extra: HashMap<(u32, u32), u64> = HashMap::new();
    for _ in 0..m {
        let (vi, class) = eligible[rng.random_range(0..eligible.len())];
        let peers = &members[class];
        let own = peers.binary_search(&vi).expect("node is a member of its class");
        let mut k = rng.random_range(0..peers.len() - 1);
        if k >= own {
            k += 1;
        }
        let vj = peers[k];
        let key = if vi <= vj { (vi as u32, vj as u32) } else { (vj as u32, vi as u32) };
        *extra.entry(key).or_insert(0) += 1;
    }
    Ok(dmat.with_events(extra))
}

/// Reads walks written by [`WalkSet::write`].
pub fn read_walks<R: BufRead>(source: R, nodes: &NodeIndex) -> Result<WalkSet> {
    let mut walks = Vec::new();
    for item in data_lines(source) {
        let (_, line) = item?;
        let walk = line.split_whitespace().map(|id| nodes.require(id).map(|i| i as u32)).collect::<Result<Vec<_>>>()?;
        walks.push(walk);
    }
    Ok(WalkSet { num_nodes: nodes.len(), walks })
}
