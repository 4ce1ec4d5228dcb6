//! Joint explicit matrix factorization of the co-occurrence matrix `D` and
//! the content matrix `F`.
//!
//! The score of node `i` with context `c` is `x_ic = f_c^T S w_i`. Each count
//! `D[i][c]` is modelled as binomial with `Q[i][c]` trials and success
//! probability `sigmoid(x_ic)`; the loss is the negative log-likelihood with
//! the combinatorial constant dropped.

mod io;
mod objective;
mod q;
mod train;

pub use io::{read_word2vec, write_trajectory_csv, write_word2vec, Word2Vec};
pub use objective::{expected_counts, gradients, loss, Evaluation, Gradients, Objective, Request};
pub use q::{build_q, QMatrix};
pub use train::{init_model, train_alm, EmbeddingModel, TrainConfig, TrainOutcome};

/// Logistic function, evaluated without overflow for large `|x|`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)`; note `-ln sigmoid(x) = softplus(-x)`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Binomial negative log-likelihood of `d` successes out of `q` trials at
/// logit `x`, without the binomial coefficient.
#[inline]
pub fn binomial_nll(d: f64, q: f64, x: f64) -> f64 {
    d * softplus(-x) + (q - d) * softplus(x)
}

/// Smallest attainable value of [`binomial_nll`] over `x`: `q * H(d / q)`.
pub fn binomial_nll_floor(d: f64, q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let p = d / q;
    let h = |t: f64| if t <= 0.0 { 0.0 } else { -t * t.ln() };
    q * (h(p) + h(1.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable_in_both_tails() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(3f64.ln()) - 0.75).abs() < 1e-15);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((softplus(-800.0)).abs() < 1e-300);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
    }

    #[test]
    fn nll_at_its_minimum_matches_entropy_floor() {
        let x = (3.0f64 / 10.0).ln();
        let v = binomial_nll(3.0, 13.0, x);
        assert!((v - binomial_nll_floor(3.0, 13.0)).abs() < 1e-12);
        assert!((v - 7.022).abs() < 1e-3, "{v}");
    }
}
