//! Relative entropy, cross-entropy and the goal-exploration distribution.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smoothing mass added to every histogram bin before normalisation.
pub const SMOOTHING: f64 = 1e-6;

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::SupportMismatch(x.len(), y.len()));
    }
    Ok(())
}

/// `Σ x ln(x/y)` in nats. Terms with `x = 0` contribute 0.
pub fn kl_divergence(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    let d: f64 = x.iter().zip(y).filter(|(&p, _)| p > 0.0).map(|(&p, &q)| p * (p / q).ln()).sum();
    // Round-off can push identical inputs a hair below zero.
    Ok(d.max(0.0))
}

/// Shannon entropy in nats.
pub fn entropy(x: &[f64]) -> f64 {
    -x.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

/// `−Σ x ln y` in nats; equals `entropy(x) + kl_divergence(x, y)`.
pub fn cross_entropy(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    Ok(-x.iter().zip(y).filter(|(&p, _)| p > 0.0).map(|(&p, &q)| p * q.ln()).sum::<f64>())
}

/// Counts to probabilities with [`SMOOTHING`] added to every bin.
pub fn smoothed(counts: &[f64]) -> Vec<f64> {
    let total: f64 = counts.iter().sum::<f64>() + SMOOTHING * counts.len() as f64;
    counts.iter().map(|c| (c + SMOOTHING) / total).collect()
}

/// Action counts of one sub-controller under one goal: everything before the
/// current window (`history`) and the current window itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionHistogram {
    pub history: Vec<f64>,
    pub window: Vec<f64>,
}

impl ActionHistogram {
    pub fn new(n_actions: usize) -> Self {
        Self { history: vec![0.0; n_actions], window: vec![0.0; n_actions] }
    }

    pub fn n_actions(&self) -> usize {
        self.history.len()
    }

    pub fn record(&mut self, action: usize) {
        self.window[action] += 1.0;
    }

    pub fn history_probs(&self) -> Vec<f64> {
        smoothed(&self.history)
    }

    pub fn window_probs(&self) -> Vec<f64> {
        smoothed(&self.window)
    }

    pub fn has_history(&self) -> bool {
        self.history.iter().any(|&c| c > 0.0)
    }

    /// `I(X, Y)` of the history against the current window.
    pub fn cross_entropy(&self) -> f64 {
        cross_entropy(&self.history_probs(), &self.window_probs()).expect("equal supports")
    }

    /// Fold the window into the history and start a new window.
    pub fn close_window(&mut self) {
        for (h, w) in self.history.iter_mut().zip(self.window.iter_mut()) {
            *h += *w;
            *w = 0.0;
        }
    }
}

/// `pr(g) = tanh(s_g) / Σ tanh(s_g')` over per-goal summed cross-entropies.
/// Falls back to uniform when every score is zero.
pub fn goal_probability(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::InvalidParameter { name: "scores", reason: "no goals".into() });
    }
    if scores.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidParameter { name: "scores", reason: "cross-entropies must be finite and >= 0".into() });
    }
    let t: Vec<f64> = scores.iter().map(|s| s.tanh()).collect();
    let z: f64 = t.iter().sum();
    if z <= 0.0 {
        return Ok(vec![1.0 / scores.len() as f64; scores.len()]);
    }
    Ok(t.into_iter().map(|v| v / z).collect())
}
