//! RIS phase optimisation by fractional programming.
//!
//! The weighted sum-log-rate is rewritten with a Lagrangian dual transform
//! (auxiliary `β`) and a quadratic transform (auxiliary `η`), which leaves a
//! unit-modulus constrained quadratic in the phase vector `θ`. The three
//! blocks are updated in closed form in turn:
//!
//! ```text
//! f1(θ)      = Σ w_k ln(1 + ψ_k)
//! f2(θ,β)    = Σ w_k [ln(1+β_k) − β_k + (1+β_k) ψ_k/(1+ψ_k)]
//! f3(θ,β)    = Σ w_k (1+β_k) |θᵀs_k|² / D_k
//! f4(θ,β,η)  = Σ 2√(w_k(1+β_k)) Re{η_k* θᵀs_k} − |η_k|² D_k
//! ```
//!
//! where `D_k = |θᵀs_k|² + Σ_j |θᵀi_{k,j}|² + N_k`. Logs are natural and the
//! weights are bandwidth fractions; rates are reported in bits/s.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{link_budgets, ChannelParams, ComplexVec, Links, PhaseShiftConfig, PowerAllocation};
use crate::linalg::{DenseMatrix, LuFactors};
use crate::netmodel::{Association, Topology};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Per-(b, k) effective channels `V_{b,k}` with `θᵀV_{b,k} = g_{b,k}√P_b`.
pub fn precompute_v(topology: &Topology, links: &Links, bs_powers: &[f64]) -> Result<Vec<Vec<ComplexVec>>> {
    let amplitudes: Vec<f64> = topology.ris_list.iter().map(|r| r.amplitude).collect();
    (0..topology.n_bs())
        .map(|b| {
            let scale = bs_powers[b].sqrt();
            (0..topology.ues.len())
                .map(|k| {
                    let c = links.element_coefficients(b, k, &amplitudes)?;
                    Ok(c.into_iter().map(|v| v * scale).collect::<Vec<_>>().into())
                })
                .collect()
        })
        .collect()
}

/// One UE's contribution to the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct UeTerms {
    /// Serving-link coefficients scaled by the square root of the signal power.
    pub signal: Vec<Complex64>,
    /// Interfering-link coefficients scaled by the square root of their power.
    pub interferers: Vec<Vec<Complex64>>,
    pub noise: f64,
    /// Bandwidth fraction.
    pub weight: f64,
    /// Bandwidth, Hz.
    pub bandwidth: f64,
}

/// Sum-rate problem in the phase vector `θ` with fixed powers.
#[derive(Debug, Clone, PartialEq)]
pub struct FpProblem {
    pub dim: usize,
    pub ues: Vec<UeTerms>,
}

impl FpProblem {
    pub fn new(dim: usize, ues: Vec<UeTerms>) -> Result<Self> {
        for u in &ues {
            for v in std::iter::once(&u.signal).chain(u.interferers.iter()) {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, actual: v.len() });
                }
            }
            if !(u.noise > 0.0) || !(u.weight >= 0.0) {
                return Err(Error::InvalidParameter { name: "ue_terms", reason: "noise must be > 0, weight >= 0".into() });
            }
        }
        Ok(Self { dim, ues })
    }

    /// Build the problem for the current association and powers.
    pub fn from_network(
        topology: &Topology,
        links: &Links,
        association: &Association,
        powers: &PowerAllocation,
        params: &ChannelParams,
    ) -> Result<Self> {
        powers.validate(topology)?;
        let amplitudes: Vec<f64> = topology.ris_list.iter().map(|r| r.amplitude).collect();
        let bw_total = topology.bandwidth_total;
        let bandwidths = association.bandwidths(bw_total);
        let budgets = link_budgets(association, &bandwidths, powers, bw_total, params);
        let mut coeff_cache: Vec<Vec<Option<Vec<Complex64>>>> = vec![vec![None; topology.ues.len()]; topology.n_bs()];
        let mut coeff = |b: usize, k: usize| -> Result<Vec<Complex64>> {
            if coeff_cache[b][k].is_none() {
                coeff_cache[b][k] = Some(links.element_coefficients(b, k, &amplitudes)?);
            }
            Ok(coeff_cache[b][k].clone().unwrap())
        };
        let scaled = |c: Vec<Complex64>, p: f64| -> Vec<Complex64> {
            let s = p.sqrt();
            c.into_iter().map(|v| v * s).collect()
        };
        let mut ues = Vec::with_capacity(budgets.len());
        for (k, lb) in budgets.iter().enumerate() {
            let signal = scaled(coeff(lb.serving, k)?, lb.signal_power);
            let interferers = lb
                .interferers
                .iter()
                .map(|&(b, w)| Ok(scaled(coeff(b, k)?, w)))
                .collect::<Result<Vec<_>>>()?;
            ues.push(UeTerms {
                signal,
                interferers,
                noise: lb.noise,
                weight: lb.bandwidth / bw_total,
                bandwidth: lb.bandwidth,
            });
        }
        Self::new(topology.total_elements(), ues)
    }

    fn bilinear(theta: &[Complex64], v: &[Complex64]) -> Complex64 {
        theta.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `(|θᵀs|², D)` for UE `k`.
    pub fn signal_and_denominator(&self, k: usize, theta: &[Complex64]) -> (f64, f64) {
        let u = &self.ues[k];
        let sig = Self::bilinear(theta, &u.signal).norm_sqr();
        let interf: f64 = u.interferers.iter().map(|i| Self::bilinear(theta, i).norm_sqr()).sum();
        (sig, sig + interf + u.noise)
    }

    pub fn sinrs(&self, theta: &[Complex64]) -> Vec<f64> {
        (0..self.ues.len())
            .map(|k| {
                let (s, d) = self.signal_and_denominator(k, theta);
                s / (d - s)
            })
            .collect()
    }

    /// Rates in bits/s.
    pub fn rates(&self, theta: &[Complex64]) -> Vec<f64> {
        self.sinrs(theta).iter().zip(&self.ues).map(|(&s, u)| u.bandwidth * (1.0 + s).log2()).collect()
    }

    pub fn f1(&self, theta: &[Complex64]) -> f64 {
        self.sinrs(theta).iter().zip(&self.ues).map(|(&s, u)| u.weight * (1.0 + s).ln()).sum()
    }

    pub fn f2(&self, theta: &[Complex64], beta: &[f64]) -> f64 {
        self.sinrs(theta)
            .iter()
            .zip(&self.ues)
            .zip(beta)
            .map(|((&psi, u), &b)| u.weight * ((1.0 + b).ln() - b + (1.0 + b) * psi / (1.0 + psi)))
            .sum()
    }

    pub fn f3(&self, theta: &[Complex64], beta: &[f64]) -> f64 {
        (0..self.ues.len())
            .map(|k| {
                let (s, d) = self.signal_and_denominator(k, theta);
                self.ues[k].weight * (1.0 + beta[k]) * s / d
            })
            .sum()
    }

    pub fn f4(&self, theta: &[Complex64], beta: &[f64], eta: &[Complex64]) -> f64 {
        (0..self.ues.len())
            .map(|k| {
                let u = &self.ues[k];
                let a = Self::bilinear(theta, &u.signal);
                let (_, d) = self.signal_and_denominator(k, theta);
                2.0 * (u.weight * (1.0 + beta[k])).sqrt() * (eta[k].conj() * a).re - eta[k].norm_sqr() * d
            })
            .sum()
    }
}

/// `β* = ψ`.
pub fn update_beta(problem: &FpProblem, theta: &[Complex64]) -> Vec<f64> {
    problem.sinrs(theta)
}

/// `η*_k = √(w_k(1+β_k)) θᵀs_k / D_k`.
pub fn update_eta(problem: &FpProblem, theta: &[Complex64], beta: &[f64]) -> Vec<Complex64> {
    (0..problem.ues.len())
        .map(|k| {
            let u = &problem.ues[k];
            let a = FpProblem::bilinear(theta, &u.signal);
            let (_, d) = problem.signal_and_denominator(k, theta);
            a * ((u.weight * (1.0 + beta[k])).sqrt() / d)
        })
        .collect()
}

/// The `θ`-subproblem `−xᴴΛx + 2Re{xᴴΨ} − c`, stored matrix-free as
/// `Λ = Σ_j λ_j conj(c_j) c_jᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub dim: usize,
    /// `(λ_j, c_j)`.
    pub terms: Vec<(f64, Vec<Complex64>)>,
    pub psi: Vec<Complex64>,
    pub constant: f64,
}

impl Quadratic {
    pub fn assemble(problem: &FpProblem, beta: &[f64], eta: &[Complex64]) -> Self {
        let mut terms = Vec::new();
        let mut psi = vec![ZERO; problem.dim];
        let mut constant = 0.0;
        for (k, u) in problem.ues.iter().enumerate() {
            let e2 = eta[k].norm_sqr();
            constant += e2 * u.noise;
            if e2 > 0.0 {
                terms.push((e2, u.signal.clone()));
                for i in &u.interferers {
                    terms.push((e2, i.clone()));
                }
            }
            let coef = eta[k] * (u.weight * (1.0 + beta[k])).sqrt();
            for (p, s) in psi.iter_mut().zip(&u.signal) {
                *p += coef * s.conj();
            }
        }
        Self { dim: problem.dim, terms, psi, constant }
    }

    pub fn lambda(&self) -> DenseMatrix<Complex64> {
        let n = self.dim;
        let mut m = DenseMatrix::zeros(n, n);
        for (w, c) in &self.terms {
            for i in 0..n {
                let ci = c[i].conj() * *w;
                if ci == ZERO {
                    continue;
                }
                let row = m.row_mut(i);
                for (r, cj) in row.iter_mut().zip(c) {
                    *r += ci * cj;
                }
            }
        }
        m
    }

    pub fn value(&self, x: &[Complex64]) -> f64 {
        let quad: f64 = self.terms.iter().map(|(w, c)| w * FpProblem::bilinear(x, c).norm_sqr()).sum();
        let lin: f64 = x.iter().zip(&self.psi).map(|(xi, p)| (xi.conj() * p).re).sum();
        -quad + 2.0 * lin - self.constant
    }

    /// Cyclic exact coordinate ascent over unit-modulus entries; each step
    /// sets `x_n = c_n/|c_n|` with `c_n = Ψ_n − (Λx)_n + Λ_nn x_n`.
    pub fn coordinate_ascent(&self, x: &mut [Complex64], max_sweeps: usize, rel_tol: f64) {
        let diag: Vec<f64> = (0..self.dim)
            .map(|n| self.terms.iter().map(|(w, c)| w * c[n].norm_sqr()).sum())
            .collect();
        let mut u: Vec<Complex64> = self.terms.iter().map(|(_, c)| FpProblem::bilinear(x, c)).collect();
        let mut prev = self.value(x);
        for _ in 0..max_sweeps {
            for n in 0..self.dim {
                let mut lx = ZERO;
                for ((w, c), uj) in self.terms.iter().zip(&u) {
                    lx += c[n].conj() * uj * *w;
                }
                let cn = self.psi[n] - lx + x[n] * diag[n];
                if cn.norm() <= f64::MIN_POSITIVE {
                    continue;
                }
                let new = cn / cn.norm();
                let d = new - x[n];
                if d == ZERO {
                    continue;
                }
                for ((_, c), uj) in self.terms.iter().zip(u.iter_mut()) {
                    *uj += c[n] * d;
                }
                x[n] = new;
            }
            let v = self.value(x);
            if (v - prev).abs() <= rel_tol * v.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            prev = v;
        }
    }
}

/// Bisection steps of the per-element multiplier search.
pub const SIGMA_BISECTION_STEPS: usize = 50;
const DUAL_RESIDUAL_TOL: f64 = 1e-9;

/// Solve `θ = (Λ + diag σ)⁻¹Ψ` with one multiplier per element chosen so
/// that `|θ_n| = 1` (or `σ_n = 0` and `|θ_n| < 1`).
///
/// Multipliers are updated one element at a time. With the others fixed,
/// `θ_n(σ'_n) = θ_n / (1 + (σ'_n − σ_n) G_nn)` where `G = (Λ + diag σ)⁻¹`,
/// which is bisected for unit modulus; `G` follows by a rank-one update.
/// At most `max_sweeps` passes are made over the elements.
/// `sigma` is used as a warm start and overwritten. Entries are normalised to
/// unit modulus on return; zero entries become 1.
pub fn update_theta_sigma(
    lambda: &DenseMatrix<Complex64>,
    psi: &[Complex64],
    sigma: &mut Vec<f64>,
    max_sweeps: usize,
) -> Result<Vec<Complex64>> {
    let n = psi.len();
    if lambda.rows() != n || lambda.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: lambda.rows() });
    }
    let scale = (0..n)
        .map(|i| lambda[(i, i)].re.abs())
        .chain(psi.iter().map(|p| p.norm()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        sigma.clear();
        sigma.resize(n, 0.0);
        return Ok(vec![ONE; n]);
    }
    let floor = 1e-12 * scale;
    if sigma.len() != n {
        *sigma = (0..n).map(|i| (psi[i].norm() - lambda[(i, i)].re).max(0.0)).collect();
    }
    for s in sigma.iter_mut() {
        *s = s.max(floor);
    }

    let factor = |sigma: &[f64]| -> Result<DenseMatrix<Complex64>> {
        let mut m = lambda.clone();
        for i in 0..n {
            m[(i, i)] += sigma[i];
        }
        Ok(LuFactors::factorize(&m)?.inverse())
    };

    let mut ginv = factor(sigma)?;
    let mut x = ginv.mul_vec(psi);
    for _ in 0..max_sweeps.max(1) {
        for i in 0..n {
            let g = ginv[(i, i)].re;
            let xi = x[i].norm();
            if !(g > 0.0) || !xi.is_finite() {
                return Err(Error::NonFinite(format!("dual update, element {i}: G_nn={g}, |x|={xi}")));
            }
            let s0 = sigma[i];
            let modulus = |s: f64| xi / (1.0 + (s - s0) * g);
            let target = if modulus(floor) <= 1.0 {
                floor
            } else {
                let (mut lo, mut hi) = (floor, s0 + xi / g + 1.0);
                while modulus(hi) > 1.0 {
                    hi *= 2.0;
                }
                for _ in 0..SIGMA_BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if modulus(mid) > 1.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let delta = target - s0;
            if delta == 0.0 {
                continue;
            }
            let col: Vec<Complex64> = (0..n).map(|r| ginv[(r, i)]).collect();
            let row: Vec<Complex64> = ginv.row(i).to_vec();
            let denom = 1.0 + delta * g;
            let xs = x[i] * (delta / denom);
            for r in 0..n {
                let cr = col[r] * (delta / denom);
                for (v, rc) in ginv.row_mut(r).iter_mut().zip(&row) {
                    *v -= cr * rc;
                }
                x[r] -= col[r] * xs;
            }
            sigma[i] = target;
        }
        ginv = factor(sigma)?;
        x = ginv.mul_vec(psi);
        let residual = (0..n)
            .filter(|&i| sigma[i] > floor)
            .map(|i| (x[i].norm() - 1.0).abs())
            .fold(0.0, f64::max);
        if residual < DUAL_RESIDUAL_TOL {
            break;
        }
    }
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("theta after dual update".into()));
    }
    Ok(x.into_iter().map(|v| if v.norm() > 1e-300 { v / v.norm() } else { ONE }).collect())
}

/// How the `θ`-subproblem is solved each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaSolver {
    /// Per-element multiplier search on the dense system, then coordinate polish.
    DualBisection,
    /// Matrix-free coordinate ascent only.
    Coordinate,
}

impl std::str::FromStr for ThetaSolver {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dual" => Ok(Self::DualBisection),
            "coordinate" => Ok(Self::Coordinate),
            other => Err(format!("unknown theta solver `{other}` (dual|coordinate)")),
        }
    }
}

impl std::fmt::Display for ThetaSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::DualBisection => "dual",
            Self::Coordinate => "coordinate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpConfig {
    pub max_iters: usize,
    /// Relative change of the objective that counts as converged.
    pub tol: f64,
    pub solver: ThetaSolver,
    /// Coordinate sweeps per outer iteration.
    pub polish_sweeps: usize,
    /// `η`/`θ` rounds per `β` update.
    pub inner_rounds: usize,
    /// Multiplier sweeps per dual `θ` step.
    pub dual_sweeps: usize,
}

impl Default for FpConfig {
    fn default() -> Self {
        Self { max_iters: 200, tol: 1e-6, solver: ThetaSolver::DualBisection, polish_sweeps: 10, inner_rounds: 20, dual_sweeps: 2 }
    }
}

/// Result of the alternating scheme on an [`FpProblem`].
#[derive(Debug, Clone, PartialEq)]
pub struct FpSolution {
    pub theta: Vec<Complex64>,
    pub beta: Vec<f64>,
    pub eta: Vec<Complex64>,
    pub sigma: Vec<f64>,
    /// Objective after each outer iteration, starting with the initial point.
    pub trace: Vec<f64>,
    /// Worst `||θ_n| − 1|` after each outer iteration.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn modulus_residual(theta: &[Complex64]) -> f64 {
    theta.iter().map(|t| (t.norm() - 1.0).abs()).fold(0.0, f64::max)
}

/// Alternate `β → (η → θ)` until the objective stalls, with `inner_rounds`
/// `η`/`θ` rounds per `β` update.
pub fn fp_solve(problem: &FpProblem, theta0: &[Complex64], config: &FpConfig) -> Result<FpSolution> {
    if theta0.len() != problem.dim {
        return Err(Error::DimensionMismatch { expected: problem.dim, actual: theta0.len() });
    }
    let mut theta = theta0.to_vec();
    let mut beta = update_beta(problem, &theta);
    let mut eta = update_eta(problem, &theta, &beta);
    let mut sigma = Vec::new();
    let mut f = problem.f1(&theta);
    let mut trace = vec![f];
    let mut residuals = vec![modulus_residual(&theta)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iters {
        iterations += 1;
        beta = update_beta(problem, &theta);
        let mut candidate = theta.clone();
        for _ in 0..config.inner_rounds.max(1) {
            eta = update_eta(problem, &candidate, &beta);
            let q = Quadratic::assemble(problem, &beta, &eta);
            if config.solver == ThetaSolver::DualBisection {
                let x = update_theta_sigma(&q.lambda(), &q.psi, &mut sigma, config.dual_sweeps)?;
                if q.value(&x) >= q.value(&candidate) {
                    candidate = x;
                }
            }
            q.coordinate_ascent(&mut candidate, config.polish_sweeps.max(1), 1e-12);
        }
        let f_new = problem.f1(&candidate);
        if !f_new.is_finite() {
            return Err(Error::NonFinite(format!("objective at iteration {iterations}")));
        }
        // Guard against round-off regressions at the fixed point.
        if f_new >= f {
            theta = candidate;
        }
        let f_next = f_new.max(f);
        trace.push(f_next);
        residuals.push(modulus_residual(&theta));
        let stalled = (f_next - f).abs() <= config.tol * f_next.abs().max(f64::MIN_POSITIVE);
        f = f_next;
        if stalled {
            converged = true;
            break;
        }
    }
    beta = update_beta(problem, &theta);
    Ok(FpSolution { theta, beta, eta, sigma, trace, residuals, iterations, converged })
}

/// Nearest discrete phase index `z` with phase `z·2π/2^μ`; exact ties go to
/// the smaller index.
pub fn project_discrete(theta: &[Complex64], resolution_bits: u32) -> Vec<u32> {
    let levels = 1u32 << resolution_bits;
    let step = 2.0 * std::f64::consts::PI / levels as f64;
    theta
        .iter()
        .map(|t| {
            let a = t.arg().rem_euclid(2.0 * std::f64::consts::PI);
            let pos = a / step;
            let base = pos.floor();
            let z = if pos - base > 0.5 + 1e-9 { base + 1.0 } else { base };
            (z as u32) % levels
        })
        .collect()
}

pub fn discrete_phases(z: &[u32], resolution_bits: u32) -> Vec<Complex64> {
    let step = 2.0 * std::f64::consts::PI / (1u32 << resolution_bits) as f64;
    z.iter().map(|&zi| Complex64::from_polar(1.0, zi as f64 * step)).collect()
}

/// Continuous optimum, its quantisation, and rates for both.
#[derive(Debug, Clone, PartialEq)]
pub struct FpOutcome {
    pub continuous: PhaseShiftConfig,
    pub quantized: PhaseShiftConfig,
    pub z: Vec<u32>,
    /// Per-UE rates of the continuous solution, bits/s.
    pub rates: Vec<f64>,
    /// Per-UE rates of the quantised solution, bits/s.
    pub quantized_rates: Vec<f64>,
    pub solution: FpSolution,
}

/// Optimise the RIS phases for fixed powers. `warm_start` replaces the
/// zero-phase initial point.
pub fn fp_optimize(
    topology: &Topology,
    links: &Links,
    association: &Association,
    powers: &PowerAllocation,
    params: &ChannelParams,
    config: &FpConfig,
    warm_start: Option<&[Complex64]>,
) -> Result<FpOutcome> {
    let problem = FpProblem::from_network(topology, links, association, powers, params)?;
    let init = PhaseShiftConfig::zero_phase(topology);
    let theta0 = warm_start.map_or_else(|| init.flatten(), <[Complex64]>::to_vec);
    let solution = fp_solve(&problem, &theta0, config)?;
    let mu = init.resolution_bits;
    let z = project_discrete(&solution.theta, mu);
    let q = discrete_phases(&z, mu);
    Ok(FpOutcome {
        continuous: init.with_flat(&solution.theta),
        quantized: PhaseShiftConfig::from_discrete(topology, &z, mu),
        rates: problem.rates(&solution.theta),
        quantized_rates: problem.rates(&q),
        z,
        solution,
    })
}

/// CSV rows `iteration,f2,max_constraint_residual`.
pub fn write_trace_csv<W: Write>(mut w: W, solution: &FpSolution) -> std::io::Result<()> {
    writeln!(w, "iteration,f2,max_constraint_residual")?;
    for (i, (f, r)) in solution.trace.iter().zip(&solution.residuals).enumerate() {
        writeln!(w, "{i},{f:.12e},{r:.3e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_eta() {
        let p = FpProblem::new(1, vec![UeTerms { signal: vec![c(2.0, 0.0)], interferers: vec![], noise: 1.0, weight: 1.0, bandwidth: 1.0 }])
            .unwrap();
        let theta = [ONE];
        let beta = update_beta(&p, &theta);
        assert!((beta[0] - 4.0).abs() < 1e-15);
        let eta = update_eta(&p, &theta, &beta);
        let expect = (1.0f64 * 5.0).sqrt() * 2.0 / 5.0;
        assert!((eta[0] - c(expect, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_channels_zero_eta() {
        let p = FpProblem::new(2, vec![UeTerms { signal: vec![ZERO; 2], interferers: vec![vec![ZERO; 2]], noise: 1.0, weight: 0.5, bandwidth: 1.0 }])
            .unwrap();
        let theta = [ONE; 2];
        let beta = update_beta(&p, &theta);
        assert_eq!(beta, vec![0.0]);
        assert_eq!(update_eta(&p, &theta, &beta), vec![ZERO]);
    }

    #[test]
    fn diagonal_lambda_closed_form() {
        let diag = [0.5, 2.0, 0.1];
        let psi = [c(1.0, 1.0), c(0.3, -0.2), c(0.0, 4.0)];
        let mut lam = DenseMatrix::zeros(3, 3);
        for i in 0..3 {
            lam[(i, i)] = c(diag[i], 0.0);
        }
        let mut sigma = Vec::new();
        let theta = update_theta_sigma(&lam, &psi, &mut sigma, 50).unwrap();
        for i in 0..3 {
            let expect_sigma = (psi[i].norm() - diag[i]).max(0.0);
            let expect = psi[i] / psi[i].norm();
            assert!((theta[i] - expect).norm() < 1e-9, "{i}");
            assert!((theta[i].norm() - 1.0).abs() < 1e-12);
            if expect_sigma > 0.0 {
                assert!((sigma[i] - expect_sigma).abs() < 1e-9 * expect_sigma.max(1.0));
            }
        }
    }

    #[test]
    fn zero_lambda_aligns_phase() {
        let psi = [c(0.0, 2.0), c(-1.0, 0.0)];
        let mut sigma = Vec::new();
        let theta = update_theta_sigma(&DenseMatrix::zeros(2, 2), &psi, &mut sigma, 50).unwrap();
        assert!((theta[0] - c(0.0, 1.0)).norm() < 1e-9);
        assert!((theta[1] - c(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn zero_psi_falls_back_to_one() {
        let mut sigma = Vec::new();
        let theta = update_theta_sigma(&DenseMatrix::zeros(2, 2), &[ZERO, ZERO], &mut sigma, 50).unwrap();
        assert_eq!(theta, vec![ONE, ONE]);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_discrete(&[Complex64::from_polar(1.0, 0.1)], 2), vec![0]);
        assert_eq!(project_discrete(&[Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)], 2), vec![0]);
        assert_eq!(project_discrete(&[Complex64::from_polar(1.0, -0.1)], 2), vec![0]);
        assert_eq!(project_discrete(&[Complex64::from_polar(1.0, 3.0)], 2), vec![2]);
        assert_eq!(project_discrete(&[Complex64::from_polar(1.0, -1.5)], 2), vec![3]);
    }

    #[test]
    fn zero_iterations_returns_start() {
        let p = FpProblem::new(2, vec![UeTerms { signal: vec![c(1.0, 0.0), c(0.0, 1.0)], interferers: vec![], noise: 1.0, weight: 1.0, bandwidth: 1.0 }])
            .unwrap();
        let theta0 = [ONE, c(0.0, 1.0)];
        let sol = fp_solve(&p, &theta0, &FpConfig { max_iters: 0, ..Default::default() }).unwrap();
        assert_eq!(sol.theta, theta0.to_vec());
        assert_eq!(sol.trace.len(), 1);
    }

    #[test]
    fn two_element_alignment() {
        // Optimum aligns both element contributions: θ_n = conj(s_n)/|s_n|.
        let s = vec![c(1.0, 1.0), c(-0.5, 2.0)];
        let p = FpProblem::new(2, vec![UeTerms { signal: s.clone(), interferers: vec![], noise: 0.1, weight: 1.0, bandwidth: 1.0 }])
            .unwrap();
        let sol = fp_solve(&p, &[ONE, ONE], &FpConfig::default()).unwrap();
        let best = (s[0].norm() + s[1].norm()).powi(2) / 0.1;
        let got = p.sinrs(&sol.theta)[0];
        assert!((got - best).abs() < 1e-6 * best);
    }
}
