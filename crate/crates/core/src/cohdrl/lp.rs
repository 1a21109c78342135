//! Dense two-phase primal simplex for small linear programs.
//!
//! Solves `max cᵀx` subject to `A_ub x ≤ b_ub`, `A_eq x = b_eq`, `x ≥ 0`.
//! Pivoting uses Dantzig's rule and falls back to Bland's rule (lowest
//! eligible index enters and leaves) on runs of degenerate pivots, so the
//! method terminates on degenerate problems. The leaving row comes from a
//! Harris two-pass ratio test, and the optimal basis is reinverted from the
//! original rows to remove round-off drift.

use serde::{Deserialize, Serialize};

use crate::linalg::{DenseMatrix, LuFactors};

/// Pivot and feasibility tolerance.
pub const PIVOT_TOL: f64 = 1e-9;

/// Smallest admissible pivot element; smaller entries are treated as
/// round-off zeros.
const PIVOT_ELEMENT_TOL: f64 = 1e-7;

/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_SWITCH: usize = 20;

/// Reinversions allowed after phase 2 reports optimality.
const MAX_REINVERSIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot limit reached.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Rebuild the tableau as `B⁻¹ t0` from the original rows, discarding
    /// round-off accumulated by pivoting. Returns false when the basis matrix
    /// is singular or the refreshed basic values are infeasible.
    fn reinvert(&mut self, t0: &[Vec<f64>]) -> bool {
        let m = t0.len();
        let mut b = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for (k, &col) in self.basis.iter().enumerate() {
                b.row_mut(i)[k] = t0[i][col];
            }
        }
        let Ok(lu) = LuFactors::factorize(&b) else {
            return false;
        };
        let mut fresh = vec![vec![0.0; self.cols + 1]; m];
        for j in 0..=self.cols {
            let column: Vec<f64> = t0.iter().map(|r| r[j]).collect();
            for (i, v) in lu.solve(&column).into_iter().enumerate() {
                fresh[i][j] = v;
            }
        }
        if fresh.iter().any(|r| !r.iter().all(|v| v.is_finite()) || r[self.cols] < -PIVOT_TOL) {
            return false;
        }
        for (i, row) in fresh.iter_mut().enumerate() {
            row[self.basis[i]] = 1.0;
            row[self.cols] = row[self.cols].max(0.0);
        }
        self.t = fresh;
        true
    }

    /// Maximise `obj·x` over the current basis, letting only `allowed`
    /// columns enter. Dantzig's rule picks the entering column; after a run
    /// of degenerate pivots Bland's rule takes over until progress resumes.
    fn optimise(&mut self, obj: &[f64], allowed: &dyn Fn(usize) -> bool, max_pivots: usize) -> LpStatus {
        let rhs = self.cols;
        let mut degenerate_run = 0;
        loop {
            if self.pivots >= max_pivots {
                return LpStatus::Stalled;
            }
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            // Reduced cost d_j = obj_j − Σ_i obj_{basis_i} t_ij.
            let mut entering: Option<(usize, f64)> = None;
            for j in (0..self.cols).filter(|&j| allowed(j) && !self.basis.contains(&j)) {
                let z: f64 = self.basis.iter().enumerate().map(|(i, &bi)| obj[bi] * self.t[i][j]).sum();
                let d = obj[j] - z;
                if d > PIVOT_TOL && entering.map_or(true, |(_, best)| d > best) {
                    entering = Some((j, d));
                    if bland {
                        break;
                    }
                }
            }
            let Some((j, _)) = entering else {
                return LpStatus::Optimal;
            };
            // Harris two-pass ratio test: among rows whose ratio lies within
            // the tolerance-relaxed minimum, take the largest pivot element
            // (lowest basic index under Bland).
            let rows: Vec<(usize, f64)> =
                (0..self.t.len()).filter(|&i| self.t[i][j] > PIVOT_ELEMENT_TOL).map(|i| (i, self.t[i][j])).collect();
            let bound = rows.iter().map(|&(i, a)| (self.t[i][rhs].max(0.0) + PIVOT_TOL) / a).fold(f64::INFINITY, f64::min);
            let mut leave: Option<(usize, f64)> = None;
            for &(i, a) in &rows {
                let ratio = self.t[i][rhs].max(0.0) / a;
                if ratio > bound {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((li, _)) => if bland { self.basis[i] < self.basis[li] } else { a > self.t[li][j] },
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return LpStatus::Unbounded,
                Some((i, ratio)) => {
                    degenerate_run = if ratio <= PIVOT_TOL { degenerate_run + 1 } else { 0 };
                    self.pivot(i, j);
                }
            }
        }
    }
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    /// Largest violation of the constraints (including `x ≥ 0`) at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |a: &[f64]| a.iter().zip(x).map(|(u, v)| u * v).sum::<f64>();
        let ub = self.a_ub.iter().zip(&self.b_ub).map(|(a, b)| (dot(a) - b).max(0.0));
        let eq = self.a_eq.iter().zip(&self.b_eq).map(|(a, b)| (dot(a) - b).abs());
        let nn = x.iter().map(|v| (-v).max(0.0));
        ub.chain(eq).chain(nn).fold(0.0, f64::max)
    }

    pub fn solve(&self) -> LpSolution {
        let n = self.n_vars();
        // Rows normalised to a non-negative right-hand side.
        // kind: 0 = slack (≤), 1 = surplus + artificial (≥), 2 = artificial (=).
        let mut rows: Vec<(Vec<f64>, f64, u8)> = Vec::new();
        for (a, &b) in self.a_ub.iter().zip(&self.b_ub) {
            if b >= 0.0 {
                rows.push((a.clone(), b, 0));
            } else {
                rows.push((a.iter().map(|v| -v).collect(), -b, 1));
            }
        }
        for (a, &b) in self.a_eq.iter().zip(&self.b_eq) {
            if b >= 0.0 {
                rows.push((a.clone(), b, 2));
            } else {
                rows.push((a.iter().map(|v| -v).collect(), -b, 2));
            }
        }
        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.2 != 2).count();
        let n_art = rows.iter().filter(|r| r.2 != 0).count();
        let cols = n + n_slack + n_art;
        let art_start = n + n_slack;
        let mut t = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut a_idx) = (n, art_start);
        for (i, (a, b, kind)) in rows.iter().enumerate() {
            t[i][..n].copy_from_slice(a);
            t[i][cols] = *b;
            match kind {
                0 => {
                    t[i][s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                1 => {
                    t[i][s] = -1.0;
                    s += 1;
                    t[i][a_idx] = 1.0;
                    basis[i] = a_idx;
                    a_idx += 1;
                }
                _ => {
                    t[i][a_idx] = 1.0;
                    basis[i] = a_idx;
                    a_idx += 1;
                }
            }
        }
        let t0 = t.clone();
        let mut tab = Tableau { t, basis, cols, pivots: 0 };
        let max_pivots = 50 * (m + cols).max(10);

        if n_art > 0 {
            let mut phase1 = vec![0.0; cols];
            for v in phase1.iter_mut().skip(art_start) {
                *v = -1.0;
            }
            let status = tab.optimise(&phase1, &|_| true, max_pivots);
            let infeas: f64 = tab.basis.iter().enumerate().filter(|(_, &b)| b >= art_start).map(|(i, _)| tab.t[i][cols]).sum();
            if status == LpStatus::Stalled {
                return self.failed(LpStatus::Stalled, tab.pivots);
            }
            if infeas > PIVOT_TOL * (1.0 + m as f64) {
                return self.failed(LpStatus::Infeasible, tab.pivots);
            }
            // Drive zero-valued artificials out of the basis where possible.
            for i in 0..m {
                if tab.basis[i] >= art_start {
                    if let Some(j) = (0..art_start).find(|&j| tab.t[i][j].abs() > PIVOT_ELEMENT_TOL) {
                        tab.pivot(i, j);
                    }
                }
            }
        }
        let mut obj = vec![0.0; cols];
        obj[..n].copy_from_slice(&self.c);
        let mut status = tab.optimise(&obj, &|j| j < art_start, max_pivots);
        for _ in 0..MAX_REINVERSIONS {
            if status != LpStatus::Optimal {
                return self.failed(status, tab.pivots);
            }
            let before = tab.pivots;
            if !tab.reinvert(&t0) {
                break;
            }
            status = tab.optimise(&obj, &|j| j < art_start, max_pivots);
            if tab.pivots == before {
                break;
            }
        }
        if status != LpStatus::Optimal {
            return self.failed(status, tab.pivots);
        }
        let mut x = vec![0.0; n];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.t[i][cols].max(0.0);
            }
        }
        let objective = self.c.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpSolution { status, x, objective, pivots: tab.pivots }
    }

    fn failed(&self, status: LpStatus, pivots: usize) -> LpSolution {
        LpSolution { status, x: vec![0.0; self.n_vars()], objective: f64::NAN, pivots }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: Vec<f64>, a_ub: Vec<Vec<f64>>, b_ub: Vec<f64>, a_eq: Vec<Vec<f64>>, b_eq: Vec<f64>) -> LinearProgram {
        LinearProgram { c, a_ub, b_ub, a_eq, b_eq }
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36.
        let p = lp(vec![3.0, 5.0], vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]], vec![4.0, 12.0, 18.0], vec![], vec![]);
        let s = p.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x − y, x + y = 1, x ≥ 0.25 (as −x ≤ −0.25), x ≤ 0.75.
        let p = lp(vec![1.0, -1.0], vec![vec![-1.0, 0.0], vec![1.0, 0.0]], vec![-0.25, 0.75], vec![vec![1.0, 1.0]], vec![1.0]);
        let s = p.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 0.75).abs() < 1e-12);
        assert!(p.max_violation(&s.x) < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = lp(vec![1.0], vec![vec![1.0]], vec![1.0], vec![vec![1.0]], vec![2.0]);
        assert_eq!(p.solve().status, LpStatus::Infeasible);
        let q = lp(vec![1.0, 0.0], vec![vec![-1.0, 1.0]], vec![1.0], vec![], vec![]);
        assert_eq!(q.solve().status, LpStatus::Unbounded);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example; Bland's rule must terminate.
        let p = lp(
            vec![0.75, -150.0, 0.02, -6.0],
            vec![vec![0.25, -60.0, -0.04, 9.0], vec![0.5, -90.0, -0.02, 3.0], vec![0.0, 0.0, 1.0, 0.0]],
            vec![0.0, 0.0, 1.0],
            vec![],
            vec![],
        );
        let s = p.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 0.05).abs() < 1e-9);
    }
}
