use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::build_q;
use super::objective::{Objective, Request, DEFAULT_BLOCK_ROWS};
use crate::cooccur::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::graph::ContentMatrix;

/// Relative loss increase tolerated per accepted step (floating-point noise).
const DESCENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub step_size: f64,
    pub outer_iters: usize,
    pub inner_max: usize,
    /// Inner loop stops once the relative loss decrease of a step falls below this.
    pub inner_tol: f64,
    pub negative_ratio: usize,
    pub seed: u64,
    pub init_scale: f64,
    pub block_rows: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 200,
            step_size: 1e-7,
            outer_iters: 200,
            inner_max: 50,
            inner_tol: 1e-4,
            negative_ratio: 5,
            seed: 0,
            init_scale: 0.01,
            block_rows: DEFAULT_BLOCK_ROWS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::Config(format!("step size must be positive, got {}", self.step_size)));
        }
        if self.dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        if self.inner_max == 0 {
            return Err(Error::Config("inner step limit must be positive".into()));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config(format!("init scale must be non-negative, got {}", self.init_scale)));
        }
        Ok(())
    }
}

/// Node embeddings `W` (`d x |V|`, column per node) and the feature
/// embedding dictionary `S` (`N_f x d`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub w: Array2<f64>,
    pub s: Array2<f64>,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn num_nodes(&self) -> usize {
        self.w.ncols()
    }

    /// Node embeddings one row per node (`|V| x d`).
    pub fn node_vectors(&self) -> Array2<f64> {
        self.w.t().to_owned()
    }

    fn is_finite(&self) -> bool {
        self.w.iter().chain(self.s.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: EmbeddingModel,
    /// Loss at initialization followed by the loss after each outer iteration.
    pub trajectory: Vec<f64>,
    /// Accepted `[W, S]` steps per outer iteration.
    pub inner_steps: Vec<[usize; 2]>,
}

/// Uniform noise in `[-init_scale, init_scale]`; `W` is filled before `S`.
pub fn init_model(num_nodes: usize, num_features: usize, cfg: &TrainConfig) -> EmbeddingModel {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = cfg.init_scale;
    let mut draw = move |_| if scale > 0.0 { rng.random_range(-scale..=scale) } else { 0.0 };
    let w = Array2::from_shape_fn((cfg.dim, num_nodes), &mut draw);
    let s = Array2::from_shape_fn((num_features, cfg.dim), &mut draw);
    EmbeddingModel { w, s }
}

#[derive(Clone, Copy)]
enum Block {
    W,
    S,
}

impl Block {
    fn name(self) -> &'static str {
        match self {
            Block::W => "W",
            Block::S => "S",
        }
    }

    fn request(self) -> Request {
        match self {
            Block::W => Request::W,
            Block::S => Request::S,
        }
    }
}

/// Alternating minimization: each outer iteration runs fixed-step gradient
/// descent on `W` until the relative decrease drops below `inner_tol` (or
/// `inner_max` steps), then the same on `S`.
///
/// A step that makes the loss non-finite or larger than before aborts with
/// [`Error::Diverged`]; both block subproblems are convex, so an increase
/// means the step size is beyond the stable range.
pub fn train_alm(dmat: &CooccurrenceMatrix, content: &ContentMatrix, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let q = build_q(dmat, cfg.negative_ratio)?;
    let objective = Objective::new(dmat, content, &q)?.with_block_rows(cfg.block_rows);
    let mut model = init_model(dmat.num_nodes(), content.num_features(), cfg);

    let mut current = objective.evaluate(model.s.view(), model.w.view(), Request::LOSS)?.loss;
    if !current.is_finite() {
        return Err(Error::Diverged { outer: 0, block: "init", before: current, after: current });
    }
    let mut trajectory = vec![current];
    let mut inner_steps = Vec::with_capacity(cfg.outer_iters);

    for outer in 1..=cfg.outer_iters {
        let mut steps = [0usize; 2];
        for (slot, block) in [Block::W, Block::S].into_iter().enumerate() {
            let mut eval = objective.evaluate(model.s.view(), model.w.view(), block.request())?;
            for _ in 0..cfg.inner_max {
                let grad = match block {
                    Block::W => eval.grad_w.take(),
                    Block::S => eval.grad_s.take(),
                }
                .expect("requested gradient");
                let param = match block {
                    Block::W => &mut model.w,
                    Block::S => &mut model.s,
                };
                param.scaled_add(-cfg.step_size, &grad);
                eval = objective.evaluate(model.s.view(), model.w.view(), block.request())?;
                let next = eval.loss;
                let grew = next - current > DESCENT_TOLERANCE * current.abs().max(1.0);
                if !next.is_finite() || grew || !model.is_finite() {
                    return Err(Error::Diverged { outer, block: block.name(), before: current, after: next });
                }
                steps[slot] += 1;
                let relative = (current - next) / current.abs().max(f64::MIN_POSITIVE);
                current = next;
                if relative < cfg.inner_tol {
                    break;
                }
            }
        }
        log::debug!("outer {outer}: loss {current:.6e} after {steps:?} steps");
        trajectory.push(current);
        inner_steps.push(steps);
    }
    Ok(TrainOutcome { model, trajectory, inner_steps })
}
