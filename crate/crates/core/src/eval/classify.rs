use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::LabelSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifyConfig {
    pub per_class: usize,
    pub test_size: usize,
    pub seed: u64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { per_class: 20, test_size: 1000, seed: 0 }
    }
}

/// Disjoint train/test `(node, class)` lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifySplit {
    pub train: Vec<(usize, usize)>,
    pub test: Vec<(usize, usize)>,
    pub per_class: usize,
    pub test_size: usize,
    pub seed: u64,
}

/// Draws `per_class` training nodes from every class, then `test_size` test
/// nodes from the remaining labeled pool, all without replacement.
pub fn make_classify_split(labels: &LabelSet, cfg: &ClassifyConfig) -> Result<ClassifySplit> {
    if labels.num_classes() == 0 {
        return Err(Error::Split("no labeled nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut train = Vec::with_capacity(cfg.per_class * labels.num_classes());
    let mut pool = Vec::new();
    for (class, mut members) in labels.members().into_iter().enumerate() {
        if members.len() < cfg.per_class {
            return Err(Error::Split(format!(
                "class `{}` has {} labeled nodes, {} required",
                labels.classes()[class],
                members.len(),
                cfg.per_class
            )));
        }
        members.shuffle(&mut rng);
        train.extend(members[..cfg.per_class].iter().map(|&n| (n, class)));
        pool.extend(members[cfg.per_class..].iter().map(|&n| (n, class)));
    }
    if pool.is_empty() || pool.len() < cfg.test_size {
        return Err(Error::Split(format!("test pool holds {} nodes, {} requested", pool.len(), cfg.test_size)));
    }
    pool.sort_unstable();
    pool.shuffle(&mut rng);
    pool.truncate(cfg.test_size);
    Ok(ClassifySplit { train, test: pool, per_class: cfg.per_class, test_size: cfg.test_size, seed: cfg.seed })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    pub l2: f64,
    pub learning_rate: f64,
    pub steps: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { l2: 0.01, learning_rate: 0.1, steps: 500 }
    }
}

/// One-vs-rest logistic regression on standardized embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    mean: Array1<f64>,
    scale: Array1<f64>,
    /// `classes x d`
    weights: Array2<f64>,
    bias: Array1<f64>,
}

impl Classifier {
    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    /// Per-class decision values for one embedding.
    pub fn scores(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let z = (&x - &self.mean) / &self.scale;
        self.weights.dot(&z) + &self.bias
    }

    /// Highest-scoring class; ties go to the lowest class index.
    pub fn predict(&self, x: ArrayView1<f64>) -> usize {
        let scores = self.scores(x);
        let mut best = 0;
        for (k, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = k;
            }
        }
        best
    }

    /// Fraction of `(node, class)` pairs predicted correctly; `vectors` has one row per node.
    pub fn accuracy(&self, vectors: ArrayView2<f64>, pairs: &[(usize, usize)]) -> f64 {
        if pairs.is_empty() {
            return 0.0;
        }
        let hits = pairs.iter().filter(|&&(n, c)| self.predict(vectors.row(n)) == c).count();
        hits as f64 / pairs.len() as f64
    }
}

/// Fits one binary L2-regularized logistic model per class by full-batch
/// gradient descent. Features are standardized with training statistics;
/// the bias is not penalized.
pub fn train_classifier(
    vectors: ArrayView2<f64>,
    split: &ClassifySplit,
    num_classes: usize,
    cfg: &LogisticConfig,
) -> Result<Classifier> {
    if let Some(&(n, _)) = split.train.iter().chain(&split.test).find(|&&(n, _)| n >= vectors.nrows()) {
        return Err(Error::Shape(format!("node {n} has no embedding ({} rows)", vectors.nrows())));
    }
    let mut seen = vec![false; num_classes];
    for &(_, c) in &split.train {
        if c >= num_classes {
            return Err(Error::Shape(format!("class index {c} outside {num_classes} classes")));
        }
        seen[c] = true;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::Split(format!("class {missing} has no training node")));
    }

    let rows: Vec<usize> = split.train.iter().map(|&(n, _)| n).collect();
    let raw = vectors.select(Axis(0), &rows);
    let mean = raw.mean_axis(Axis(0)).expect("non-empty training set");
    let scale = raw.std_axis(Axis(0), 0.0).mapv(|s| if s > 1e-12 { s } else { 1.0 });
    let x = (&raw - &mean) / &scale;
    let m = x.nrows() as f64;
    let dim = x.ncols();

    let mut weights = Array2::zeros((num_classes, dim));
    let mut bias = Array1::zeros(num_classes);
    for class in 0..num_classes {
        let y = Array1::from_iter(split.train.iter().map(|&(_, c)| if c == class { 1.0 } else { 0.0 }));
        let y_x = y.dot(&x);
        let y_sum = y.sum();
        let mut w = Array1::<f64>::zeros(dim);
        let mut b = 0.0;
        for _ in 0..cfg.steps {
            let p = (x.dot(&w) + b).mapv(crate::emf::sigmoid);
            let grad_w = (p.dot(&x) - &y_x) / m + &(&w * cfg.l2);
            let grad_b = (p.sum() - y_sum) / m;
            w.scaled_add(-cfg.learning_rate, &grad_w);
            b -= cfg.learning_rate * grad_b;
        }
        weights.row_mut(class).assign(&w);
        bias[class] = b;
    }
    Ok(Classifier { mean, scale, weights, bias })
}
