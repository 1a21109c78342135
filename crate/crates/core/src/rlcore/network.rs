//! Q-network: linear input layer, two LSTM layers, linear head.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn init_uniform<R: Rng + ?Sized>(n: usize, bound: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-bound..=bound)).collect()
}

/// He-uniform bound for layers feeding a nonlinearity. The stacked cells
/// start from a zero state, so a narrower range shrinks the input signal
/// at every layer until the head cannot tell states apart.
fn hidden_bound(fan_in: usize) -> f64 {
    (6.0 / fan_in as f64).sqrt()
}

/// Initial bias of the input and output gates, so both start mostly open.
const GATE_BIAS: f64 = 1.0;

/// Dense layer `y = W x + b`, `W` row-major `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Linear {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, w: vec![0.0; in_dim * out_dim], b: vec![0.0; out_dim] }
    }

    /// Uniform weights in `±bound`, zero bias.
    pub fn random_with<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, bound: f64, rng: &mut R) -> Self {
        Self { in_dim, out_dim, w: init_uniform(in_dim * out_dim, bound, rng), b: vec![0.0; out_dim] }
    }

    /// Weights in `±1/sqrt(in)`, zero bias.
    pub fn random<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        Self::random_with(in_dim, out_dim, 1.0 / (in_dim as f64).sqrt(), rng)
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.out_dim)
            .map(|o| {
                let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b[o]
            })
            .collect()
    }

    /// Accumulate parameter gradients into `grad`; return `dL/dx`.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Linear) -> Vec<f64> {
        let mut dx = vec![0.0; self.in_dim];
        for o in 0..self.out_dim {
            let d = dy[o];
            if d == 0.0 {
                continue;
            }
            grad.b[o] += d;
            let row = o * self.in_dim;
            for i in 0..self.in_dim {
                grad.w[row + i] += d * x[i];
                dx[i] += d * self.w[row + i];
            }
        }
        dx
    }
}

/// LSTM cell with gate blocks ordered input, forget, candidate, output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    pub in_dim: usize,
    pub hidden: usize,
    /// `4h × in`.
    pub wx: Vec<f64>,
    /// `4h × h`.
    pub wh: Vec<f64>,
    pub b: Vec<f64>,
}

/// Intermediate values of one cell step.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

impl LstmCell {
    pub fn zeros(in_dim: usize, hidden: usize) -> Self {
        Self { in_dim, hidden, wx: vec![0.0; 4 * hidden * in_dim], wh: vec![0.0; 4 * hidden * hidden], b: vec![0.0; 4 * hidden] }
    }

    pub fn random<R: Rng + ?Sized>(in_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = hidden_bound(in_dim + hidden);
        let mut b = vec![0.0; 4 * hidden];
        b[..hidden].fill(GATE_BIAS);
        b[3 * hidden..].fill(GATE_BIAS);
        Self {
            in_dim,
            hidden,
            wx: init_uniform(4 * hidden * in_dim, bound, rng),
            wh: init_uniform(4 * hidden * hidden, bound, rng),
            b,
        }
    }

    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> LstmCache {
        let h = self.hidden;
        let mut z = self.b.clone();
        for (r, zr) in z.iter_mut().enumerate() {
            let rx = &self.wx[r * self.in_dim..(r + 1) * self.in_dim];
            let rh = &self.wh[r * h..(r + 1) * h];
            *zr += rx.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            *zr += rh.iter().zip(h_prev).map(|(w, v)| w * v).sum::<f64>();
        }
        let i: Vec<f64> = z[..h].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<f64> = z[h..2 * h].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<f64> = z[2 * h..3 * h].iter().map(|&v| v.tanh()).collect();
        let o: Vec<f64> = z[3 * h..].iter().map(|&v| sigmoid(v)).collect();
        let c: Vec<f64> = (0..h).map(|j| f[j] * c_prev[j] + i[j] * g[j]).collect();
        let hh: Vec<f64> = (0..h).map(|j| o[j] * c[j].tanh()).collect();
        LstmCache { x: x.to_vec(), h_prev: h_prev.to_vec(), c_prev: c_prev.to_vec(), i, f, g, o, c, h: hh }
    }

    /// Backward through one step given `dL/dh` and `dL/dc` of its outputs.
    /// Returns `(dL/dx, dL/dh_prev, dL/dc_prev)`.
    pub fn backward(&self, cache: &LstmCache, dh: &[f64], dc_next: &[f64], grad: &mut LstmCell) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.hidden;
        let mut dz = vec![0.0; 4 * h];
        let mut dc_prev = vec![0.0; h];
        for j in 0..h {
            let tc = cache.c[j].tanh();
            let d_o = dh[j] * tc;
            let dc = dh[j] * cache.o[j] * (1.0 - tc * tc) + dc_next[j];
            let d_i = dc * cache.g[j];
            let d_g = dc * cache.i[j];
            let d_f = dc * cache.c_prev[j];
            dc_prev[j] = dc * cache.f[j];
            dz[j] = d_i * cache.i[j] * (1.0 - cache.i[j]);
            dz[h + j] = d_f * cache.f[j] * (1.0 - cache.f[j]);
            dz[2 * h + j] = d_g * (1.0 - cache.g[j] * cache.g[j]);
            dz[3 * h + j] = d_o * cache.o[j] * (1.0 - cache.o[j]);
        }
        let mut dx = vec![0.0; self.in_dim];
        let mut dh_prev = vec![0.0; h];
        for (r, &d) in dz.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grad.b[r] += d;
            let bx = r * self.in_dim;
            for k in 0..self.in_dim {
                grad.wx[bx + k] += d * cache.x[k];
                dx[k] += d * self.wx[bx + k];
            }
            let bh = r * h;
            for k in 0..h {
                grad.wh[bh + k] += d * cache.h_prev[k];
                dh_prev[k] += d * self.wh[bh + k];
            }
        }
        (dx, dh_prev, dc_prev)
    }
}

/// Four-layer Q-network. Each forward call is a length-one sequence from a
/// zero recurrent state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    pub input: Linear,
    pub lstm1: LstmCell,
    pub lstm2: LstmCell,
    pub output: Linear,
}

/// Intermediates of one forward pass, for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub x: Vec<f64>,
    pub a0: Vec<f64>,
    pub l1: LstmCache,
    pub l2: LstmCache,
    pub q: Vec<f64>,
}

impl QNetwork {
    pub const HIDDEN: usize = 10;

    pub fn new<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        Self::with_hidden(in_dim, Self::HIDDEN, out_dim, rng)
    }

    pub fn with_hidden<R: Rng + ?Sized>(in_dim: usize, hidden: usize, out_dim: usize, rng: &mut R) -> Self {
        Self {
            input: Linear::random_with(in_dim, hidden, hidden_bound(in_dim), rng),
            lstm1: LstmCell::random(hidden, hidden, rng),
            lstm2: LstmCell::random(hidden, hidden, rng),
            output: Linear::random(hidden, out_dim, rng),
        }
    }

    pub fn zeros(in_dim: usize, hidden: usize, out_dim: usize) -> Self {
        Self {
            input: Linear::zeros(in_dim, hidden),
            lstm1: LstmCell::zeros(hidden, hidden),
            lstm2: LstmCell::zeros(hidden, hidden),
            output: Linear::zeros(hidden, out_dim),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.in_dim(), self.hidden(), self.out_dim())
    }

    pub fn in_dim(&self) -> usize {
        self.input.in_dim
    }

    pub fn hidden(&self) -> usize {
        self.input.out_dim
    }

    pub fn out_dim(&self) -> usize {
        self.output.out_dim
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        if x.len() != self.in_dim() {
            return Err(Error::DimensionMismatch { expected: self.in_dim(), actual: x.len() });
        }
        let h = self.hidden();
        let zero = vec![0.0; h];
        let a0 = self.input.forward(x);
        let l1 = self.lstm1.step(&a0, &zero, &zero);
        let l2 = self.lstm2.step(&l1.h, &zero, &zero);
        let q = self.output.forward(&l2.h);
        Ok(ForwardCache { x: x.to_vec(), a0, l1, l2, q })
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(x)?.q)
    }

    /// Accumulate gradients of a loss with `dL/dq = dq` into `grad`.
    pub fn backward(&self, cache: &ForwardCache, dq: &[f64], grad: &mut QNetwork) {
        let h = self.hidden();
        let zero = vec![0.0; h];
        let dh2 = self.output.backward(&cache.l2.h, dq, &mut grad.output);
        let (dh1, _, _) = self.lstm2.backward(&cache.l2, &dh2, &zero, &mut grad.lstm2);
        let (da0, _, _) = self.lstm1.backward(&cache.l1, &dh1, &zero, &mut grad.lstm1);
        self.input.backward(&cache.x, &da0, &mut grad.input);
    }

    /// Parameter tensors in a fixed order.
    pub fn tensors(&self) -> [&Vec<f64>; 10] {
        [
            &self.input.w,
            &self.input.b,
            &self.lstm1.wx,
            &self.lstm1.wh,
            &self.lstm1.b,
            &self.lstm2.wx,
            &self.lstm2.wh,
            &self.lstm2.b,
            &self.output.w,
            &self.output.b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 10] {
        [
            &mut self.input.w,
            &mut self.input.b,
            &mut self.lstm1.wx,
            &mut self.lstm1.wh,
            &mut self.lstm1.b,
            &mut self.lstm2.wx,
            &mut self.lstm2.wh,
            &mut self.lstm2.b,
            &mut self.output.w,
            &mut self.output.b,
        ]
    }

    pub fn params(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|t| t.iter().copied()).collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        let n = self.param_count();
        if flat.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: flat.len() });
        }
        let mut off = 0;
        for t in self.tensors_mut() {
            let len = t.len();
            t.copy_from_slice(&flat[off..off + len]);
            off += len;
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `self ← self − lr · grad`.
    pub fn sgd_step(&mut self, grad: &QNetwork, lr: f64) {
        for (p, g) in self.tensors_mut().into_iter().zip(grad.tensors()) {
            for (pv, gv) in p.iter_mut().zip(g.iter()) {
                *pv -= lr * gv;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
