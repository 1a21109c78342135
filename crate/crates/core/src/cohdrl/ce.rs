//! Correlated equilibrium over the joint actions of awake sub-controllers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lp::{LinearProgram, LpStatus};
use crate::{Error, Result};

/// CE constraint tolerance a returned distribution must meet.
pub const CE_TOL: f64 = 1e-7;

/// Per-agent payoffs over a mixed-radix joint action space (agent 0 is the
/// least significant digit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeGame {
    pub n_actions: Vec<usize>,
    /// `payoffs[agent][joint]`.
    pub payoffs: Vec<Vec<f64>>,
}

impl CeGame {
    pub fn new(n_actions: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let size: usize = n_actions.iter().product();
        if payoffs.len() != n_actions.len() {
            return Err(Error::DimensionMismatch { expected: n_actions.len(), actual: payoffs.len() });
        }
        if let Some(p) = payoffs.iter().find(|p| p.len() != size) {
            return Err(Error::DimensionMismatch { expected: size, actual: p.len() });
        }
        if payoffs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("CE payoff".into()));
        }
        Ok(Self { n_actions, payoffs })
    }

    pub fn n_agents(&self) -> usize {
        self.n_actions.len()
    }

    pub fn joint_size(&self) -> usize {
        self.n_actions.iter().product()
    }

    pub fn decode(&self, mut joint: usize) -> Vec<usize> {
        self.n_actions
            .iter()
            .map(|&n| {
                let a = joint % n;
                joint /= n;
                a
            })
            .collect()
    }

    pub fn encode(&self, actions: &[usize]) -> usize {
        actions.iter().zip(&self.n_actions).rev().fold(0, |acc, (&a, &n)| acc * n + a)
    }

    /// Joint index with agent `b`'s action replaced by `a`.
    pub fn deviate(&self, joint: usize, b: usize, a: usize) -> usize {
        let mut acts = self.decode(joint);
        acts[b] = a;
        self.encode(&acts)
    }

    /// The CE program: maximise expected total payoff subject to the
    /// obedience constraints `Σ_{a₋b} pr(a_b, a₋b)(u_b(a'_b, a₋b) − u_b(a_b, a₋b)) ≤ 0`
    /// for every agent and every pair `a_b ≠ a'_b`, plus the simplex.
    pub fn program(&self) -> LinearProgram {
        let size = self.joint_size();
        let c = (0..size).map(|j| self.payoffs.iter().map(|p| p[j]).sum()).collect();
        let mut a_ub = Vec::new();
        for (b, &nb) in self.n_actions.iter().enumerate() {
            for rec in 0..nb {
                for dev in (0..nb).filter(|&d| d != rec) {
                    let mut row = vec![0.0; size];
                    for (j, r) in row.iter_mut().enumerate() {
                        if self.decode(j)[b] == rec {
                            let jd = self.deviate(j, b, dev);
                            *r = self.payoffs[b][jd] - self.payoffs[b][j];
                        }
                    }
                    a_ub.push(row);
                }
            }
        }
        let b_ub = vec![0.0; a_ub.len()];
        LinearProgram { c, a_ub, b_ub, a_eq: vec![vec![1.0; size]], b_eq: vec![1.0] }
    }

    /// Worst violation of the simplex and obedience constraints.
    pub fn violation(&self, probs: &[f64]) -> f64 {
        self.program().max_violation(probs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeDistribution {
    pub probs: Vec<f64>,
    /// Whether the LP failed and the uniform fallback was returned.
    pub fallback: bool,
    pub violation: f64,
}

impl CeDistribution {
    /// Draw a joint index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.probs, rng)
    }
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Equivalent program with better pivoting behaviour: all-zero obedience rows
/// are dropped, the remaining rows are scaled to unit max-norm, and the
/// objective is centred (a constant shift on the simplex) and scaled likewise.
fn conditioned(lp: &LinearProgram) -> LinearProgram {
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut a_ub = Vec::new();
    let mut b_ub = Vec::new();
    for (row, &b) in lp.a_ub.iter().zip(&lp.b_ub) {
        let m = max_abs(row);
        if m > 0.0 {
            a_ub.push(row.iter().map(|v| v / m).collect());
            b_ub.push(b / m);
        }
    }
    let mean = lp.c.iter().sum::<f64>() / lp.c.len().max(1) as f64;
    let centred: Vec<f64> = lp.c.iter().map(|v| v - mean).collect();
    let m = max_abs(&centred);
    let c = if m > 0.0 { centred.iter().map(|v| v / m).collect() } else { centred };
    LinearProgram { c, a_ub, b_ub, a_eq: lp.a_eq.clone(), b_eq: lp.b_eq.clone() }
}

/// Solve the CE program by dense simplex, first on the conditioned program
/// and then on the raw one. If neither returns an optimal vertex within
/// tolerance, the uniform distribution is returned and flagged.
pub fn solve_correlated_equilibrium(game: &CeGame) -> CeDistribution {
    let size = game.joint_size();
    let lp = game.program();
    let mut last = LpStatus::Stalled;
    for attempt in [conditioned(&lp), lp.clone()] {
        let sol = attempt.solve();
        last = sol.status;
        if sol.status != LpStatus::Optimal {
            continue;
        }
        let total: f64 = sol.x.iter().sum();
        if total > 0.0 {
            let probs: Vec<f64> = sol.x.iter().map(|v| v / total).collect();
            let violation = lp.max_violation(&probs);
            if violation <= CE_TOL {
                return CeDistribution { probs, fallback: false, violation };
            }
        }
    }
    log::warn!("CE program failed ({last:?}); using uniform fallback");
    let probs = vec![1.0 / size as f64; size];
    let violation = lp.max_violation(&probs);
    CeDistribution { probs, fallback: true, violation }
}
