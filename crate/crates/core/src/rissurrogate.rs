//! Derivative-free surrogate search over discrete RIS phase indices.
//!
//! A cubic radial basis function with a linear tail interpolates the samples
//! seen so far. After a random construction design, each step perturbs the
//! incumbent, scores the candidates by a weighted mix of predicted value and
//! distance to existing samples, and evaluates the best one.

use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{DenseMatrix, LuFactors};
use crate::{Error, Result};

/// Cubic RBF interpolant `s(x) = Σ λ_i |x − x_i|³ + c₀ + cᵀx`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    tail: Vec<f64>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl RbfModel {
    pub fn fit(points: &[Vec<f64>], values: &[f64]) -> Result<Self> {
        let n = points.len();
        if n == 0 || values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: values.len() });
        }
        let d = points[0].len();
        let size = n + d + 1;
        let mut a = DenseMatrix::<f64>::zeros(size, size);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = distance(&points[i], &points[j]).powi(3);
            }
            a[(i, n)] = 1.0;
            a[(n, i)] = 1.0;
            for t in 0..d {
                a[(i, n + 1 + t)] = points[i][t];
                a[(n + 1 + t, i)] = points[i][t];
            }
        }
        let mut rhs = vec![0.0; size];
        rhs[..n].copy_from_slice(values);
        let lu = match LuFactors::factorize(&a) {
            Ok(lu) => lu,
            Err(_) => {
                // Points do not span the tail space: regularise the tail block.
                let scale = (0..n).map(|i| a[(i, i)].abs()).fold(1.0, f64::max);
                for t in n..size {
                    a[(t, t)] = -1e-10 * scale;
                }
                LuFactors::factorize(&a)?
            }
        };
        let sol = lu.solve(&rhs);
        Ok(Self { points: points.to_vec(), weights: sol[..n].to_vec(), tail: sol[n..].to_vec() })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let rbf: f64 = self.points.iter().zip(&self.weights).map(|(p, w)| w * distance(x, p).powi(3)).sum();
        let lin: f64 = self.tail[1..].iter().zip(x).map(|(c, v)| c * v).sum();
        rbf + self.tail[0] + lin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    /// Evaluator calls.
    pub budget: usize,
    pub candidates_per_dim: usize,
    pub perturb_prob: f64,
    pub merit_weights: Vec<f64>,
    /// Restart after `restart_factor · dims` evaluations without improvement.
    pub restart_factor: usize,
    pub dedup: bool,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            budget: 200,
            candidates_per_dim: 100,
            perturb_prob: 0.1,
            merit_weights: vec![0.3, 0.5, 0.8, 0.95],
            restart_factor: 5,
            dedup: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleKind {
    Random,
    Adaptive,
}

impl SampleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Adaptive => "adaptive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub index: usize,
    pub value: f64,
    pub best: f64,
    pub kind: SampleKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateResult {
    pub best: Vec<u32>,
    pub best_value: f64,
    pub trace: Vec<TraceEntry>,
    /// Evaluations that returned a non-finite value.
    pub discarded: usize,
}

impl SurrogateResult {
    /// Best-so-far after `evals` evaluations (or the final value).
    pub fn best_after(&self, evals: usize) -> f64 {
        self.trace
            .get(evals.saturating_sub(1))
            .or(self.trace.last())
            .map_or(f64::NEG_INFINITY, |e| e.best)
    }
}

fn search_space_size(dims: usize, levels: u32) -> Option<u64> {
    (levels as u64).checked_pow(dims as u32)
}

fn decode(mut index: u64, dims: usize, levels: u32) -> Vec<u32> {
    (0..dims)
        .map(|_| {
            let z = (index % levels as u64) as u32;
            index /= levels as u64;
            z
        })
        .collect()
}

struct Search<'a, F, R: ?Sized> {
    f: F,
    rng: &'a mut R,
    dims: usize,
    levels: u32,
    config: &'a SurrogateConfig,
    visited: HashSet<Vec<u32>>,
    trace: Vec<TraceEntry>,
    best: Option<(Vec<u32>, f64)>,
    discarded: usize,
    /// Finite samples of the current restart cycle.
    samples: Vec<(Vec<u32>, f64)>,
    since_improvement: usize,
}

impl<F: FnMut(&[u32]) -> f64, R: Rng + ?Sized> Search<'_, F, R> {
    fn random_point(&mut self) -> Vec<u32> {
        (0..self.dims).map(|_| self.rng.gen_range(0..self.levels)).collect()
    }

    /// A point not yet evaluated, if dedup is enabled and one exists.
    fn fresh_random_point(&mut self) -> Option<Vec<u32>> {
        if !self.config.dedup {
            return Some(self.random_point());
        }
        for _ in 0..1000 {
            let p = self.random_point();
            if !self.visited.contains(&p) {
                return Some(p);
            }
        }
        self.unvisited_by_enumeration()
    }

    fn unvisited_by_enumeration(&mut self) -> Option<Vec<u32>> {
        let size = search_space_size(self.dims, self.levels).filter(|&s| s <= 1 << 20)?;
        let free: Vec<Vec<u32>> = (0..size)
            .map(|i| decode(i, self.dims, self.levels))
            .filter(|p| !self.visited.contains(p))
            .collect();
        free.choose(self.rng).cloned()
    }

    fn evaluate(&mut self, z: Vec<u32>, kind: SampleKind) {
        let value = (self.f)(&z);
        self.visited.insert(z.clone());
        let index = self.trace.len();
        if !value.is_finite() {
            self.discarded += 1;
            log::warn!("surrogate evaluator returned {value} at sample {index}; discarded");
        } else {
            match &self.best {
                Some((_, b)) if *b >= value => self.since_improvement += 1,
                _ => {
                    self.best = Some((z.clone(), value));
                    self.since_improvement = 0;
                }
            }
            self.samples.push((z, value));
        }
        let best = self.best.as_ref().map_or(f64::NEG_INFINITY, |(_, b)| *b);
        self.trace.push(TraceEntry { index, value, best, kind });
    }

    fn remaining(&self) -> usize {
        self.config.budget - self.trace.len()
    }

    fn random_design(&mut self, n: usize) {
        for _ in 0..n.min(self.remaining()) {
            match self.fresh_random_point() {
                Some(p) => self.evaluate(p, SampleKind::Random),
                None => return,
            }
        }
    }

    fn cycle_incumbent(&self) -> Option<Vec<u32>> {
        self.samples
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(z, _)| z.clone())
    }

    fn propose(&mut self, step: usize) -> Option<Vec<u32>> {
        let incumbent = self.cycle_incumbent()?;
        let n_cand = self.config.candidates_per_dim * self.dims;
        let mut candidates: Vec<Vec<u32>> = Vec::with_capacity(n_cand);
        for _ in 0..n_cand {
            let mut c = incumbent.clone();
            let mut changed = false;
            for v in c.iter_mut() {
                if self.rng.gen::<f64>() < self.config.perturb_prob {
                    *v = self.rng.gen_range(0..self.levels);
                    changed = true;
                }
            }
            if !changed {
                let i = self.rng.gen_range(0..self.dims);
                c[i] = (c[i] + self.rng.gen_range(1..self.levels.max(2))) % self.levels;
            }
            if !self.config.dedup || !self.visited.contains(&c) {
                candidates.push(c);
            }
        }
        candidates.sort();
        candidates.dedup();
        if candidates.is_empty() {
            return self.fresh_random_point();
        }
        let pts: Vec<Vec<f64>> = self.samples.iter().map(|(z, _)| z.iter().map(|&v| v as f64).collect()).collect();
        let vals: Vec<f64> = self.samples.iter().map(|(_, v)| *v).collect();
        let model = RbfModel::fit(&pts, &vals).ok();
        let as_f = |c: &[u32]| -> Vec<f64> { c.iter().map(|&v| v as f64).collect() };
        let preds: Vec<f64> = candidates
            .iter()
            .map(|c| model.as_ref().map_or(0.0, |m| m.predict(&as_f(c))))
            .collect();
        let dists: Vec<f64> = candidates
            .iter()
            .map(|c| {
                let x = as_f(c);
                pts.iter().map(|p| distance(&x, p)).fold(f64::INFINITY, f64::min)
            })
            .collect();
        let range = |v: &[f64]| {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let (smin, smax) = range(&preds);
        let (dmin, dmax) = range(&dists);
        let w = self.config.merit_weights[step % self.config.merit_weights.len()];
        let merit = |i: usize| {
            let vs = if smax > smin { (smax - preds[i]) / (smax - smin) } else { 1.0 };
            let vd = if dmax > dmin { (dmax - dists[i]) / (dmax - dmin) } else { 1.0 };
            w * vs + (1.0 - w) * vd
        };
        let best = (0..candidates.len()).min_by(|&a, &b| merit(a).total_cmp(&merit(b)))?;
        Some(candidates.swap_remove(best))
    }
}

/// Maximise `f` over `{0..levels-1}^dims`.
pub fn surrogate_optimize<F, R>(f: F, dims: usize, levels: u32, config: &SurrogateConfig, rng: &mut R) -> Result<SurrogateResult>
where
    F: FnMut(&[u32]) -> f64,
    R: Rng + ?Sized,
{
    if dims == 0 || levels < 2 {
        return Err(Error::InvalidParameter { name: "dims/levels", reason: format!("dims={dims}, levels={levels}") });
    }
    if config.budget == 0 || config.merit_weights.is_empty() {
        return Err(Error::InvalidParameter { name: "surrogate", reason: "budget and merit weights must be non-empty".into() });
    }
    let mut s = Search {
        f,
        rng,
        dims,
        levels,
        config,
        visited: HashSet::new(),
        trace: Vec::new(),
        best: None,
        discarded: 0,
        samples: Vec::new(),
        since_improvement: 0,
    };
    let n0 = if config.budget < dims + 1 { config.budget } else { config.budget.min(2 * (dims + 1)) };
    s.random_design(n0);
    let mut step = 0;
    while s.remaining() > 0 {
        if s.since_improvement >= config.restart_factor * dims {
            s.samples.clear();
            s.since_improvement = 0;
            let before = s.trace.len();
            s.random_design(n0.min(s.remaining()));
            if s.trace.len() == before {
                break;
            }
            continue;
        }
        let next = if s.samples.is_empty() { s.fresh_random_point() } else { s.propose(step) };
        match next {
            Some(z) => {
                let kind = if s.samples.is_empty() { SampleKind::Random } else { SampleKind::Adaptive };
                s.evaluate(z, kind);
            }
            None => break,
        }
        step += 1;
    }
    let (best, best_value) = s.best.unwrap_or_else(|| (vec![0; dims], f64::NEG_INFINITY));
    Ok(SurrogateResult { best, best_value, trace: s.trace, discarded: s.discarded })
}

/// CSV rows `index,value,best,kind`.
pub fn write_trace_csv<W: Write>(mut w: W, result: &SurrogateResult) -> std::io::Result<()> {
    writeln!(w, "index,value,best,kind")?;
    for e in &result.trace {
        writeln!(w, "{},{:.12e},{:.12e},{}", e.index, e.value, e.best, e.kind.as_str())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_interpolates_samples() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 1.0], vec![2.0, 2.0]];
        let vals = vec![1.0, -2.0, 0.5, 4.0, 3.0];
        let m = RbfModel::fit(&pts, &vals).unwrap();
        for (p, v) in pts.iter().zip(&vals) {
            assert!((m.predict(p) - v).abs() < 1e-6);
        }
    }

    #[test]
    fn budget_one_returns_single_sample() {
        let mut rng = crate::rng_from_seed(3);
        let cfg = SurrogateConfig { budget: 1, ..Default::default() };
        let r = surrogate_optimize(|z| z[0] as f64 + z[1] as f64, 2, 4, &cfg, &mut rng).unwrap();
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.best_value, r.trace[0].value);
        assert_eq!(r.trace[0].kind, SampleKind::Random);
    }

    #[test]
    fn exhaustive_budget_finds_optimum() {
        let f = |z: &[u32]| -((z[0] as f64 - 2.0).powi(2));
        for seed in 0..10 {
            let mut rng = crate::rng_from_seed(seed);
            let cfg = SurrogateConfig { budget: 8, ..Default::default() };
            let r = surrogate_optimize(f, 1, 4, &cfg, &mut rng).unwrap();
            assert_eq!(r.best, vec![2]);
        }
    }

    #[test]
    fn non_finite_evaluations_discarded() {
        let mut rng = crate::rng_from_seed(1);
        let cfg = SurrogateConfig { budget: 16, ..Default::default() };
        let r = surrogate_optimize(|z| if z[0] == 0 { f64::NAN } else { z[0] as f64 + z[1] as f64 }, 2, 4, &cfg, &mut rng).unwrap();
        assert!(r.best_value.is_finite());
        assert_eq!(r.best_value, 6.0);
        assert!(r.discarded > 0);
    }
}
