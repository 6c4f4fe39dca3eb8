//! Sequential minimal optimisation for the soft-margin SVM dual
//!
//! ```text
//! min  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C_i,  y'a = 0,  Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Working pairs are the maximal violating pair; kernel columns live in a
//! small LRU cache.

use alloc::vec;
use alloc::vec::Vec;

use super::Kernel;
use crate::error::{Error, Result};

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmoParams {
    /// Stop once the maximal KKT violation drops to this value.
    pub tol: f64,
    /// Iteration cap; `None` means `max(10^7, 100 n)`.
    pub max_iter: Option<usize>,
    /// Kernel column cache budget in MiB.
    pub cache_mb: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iter: None,
            cache_mb: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `sum_i alpha_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    /// Dual objective `sum a - 1/2 a'Qa` (to be maximised).
    pub objective: f64,
    pub iterations: usize,
    /// Final maximal violation `m(a) - M(a)`.
    pub max_violation: f64,
    pub converged: bool,
}

struct KernelCache<'a> {
    rows: &'a [Vec<f64>],
    y: &'a [f64],
    kernel: Kernel,
    cols: Vec<Option<Vec<f64>>>,
    stamp: Vec<u64>,
    clock: u64,
    cached: usize,
    capacity: usize,
}

impl<'a> KernelCache<'a> {
    fn new(rows: &'a [Vec<f64>], y: &'a [f64], kernel: Kernel, cache_mb: usize) -> Self {
        let n = rows.len();
        let per_col = 8 * n.max(1);
        let capacity = ((cache_mb << 20) / per_col).max(2);
        Self {
            rows,
            y,
            kernel,
            cols: vec![None; n],
            stamp: vec![0; n],
            clock: 0,
            cached: 0,
            capacity,
        }
    }

    /// Column `i` of Q.
    fn column(&mut self, i: usize) -> &[f64] {
        self.clock += 1;
        self.stamp[i] = self.clock;
        if self.cols[i].is_none() {
            if self.cached >= self.capacity {
                let victim = (0..self.cols.len())
                    .filter(|&j| j != i && self.cols[j].is_some())
                    .min_by_key(|&j| self.stamp[j])
                    .expect("cache holds at least one other column");
                self.cols[victim] = None;
                self.cached -= 1;
            }
            let xi = &self.rows[i];
            let yi = self.y[i];
            let col = self
                .rows
                .iter()
                .zip(self.y)
                .map(|(xj, &yj)| yi * yj * self.kernel.eval(xi, xj))
                .collect();
            self.cols[i] = Some(col);
            self.cached += 1;
        }
        self.cols[i].as_deref().expect("column just filled")
    }
}

fn in_up(y: f64, a: f64, c: f64) -> bool {
    if y > 0.0 {
        a < c
    } else {
        a > 0.0
    }
}

fn in_low(y: f64, a: f64, c: f64) -> bool {
    if y > 0.0 {
        a > 0.0
    } else {
        a < c
    }
}

/// Maximal violating pair `(i, j, m - M)`, or `None` when one side is empty.
fn select_pair(y: &[f64], alpha: &[f64], c: &[f64], grad: &[f64]) -> Option<(usize, usize, f64)> {
    let mut best_up = None::<(usize, f64)>;
    let mut best_low = None::<(usize, f64)>;
    for t in 0..y.len() {
        let v = -y[t] * grad[t];
        if in_up(y[t], alpha[t], c[t]) && best_up.is_none_or(|(_, b)| v > b) {
            best_up = Some((t, v));
        }
        if in_low(y[t], alpha[t], c[t]) && best_low.is_none_or(|(_, b)| v < b) {
            best_low = Some((t, v));
        }
    }
    let ((i, m), (j, mm)) = (best_up?, best_low?);
    Some((i, j, m - mm))
}

/// Maximal KKT violation of a feasible `alpha` given the gradient `Qa - e`.
pub fn kkt_violation(y: &[f64], alpha: &[f64], c: &[f64], grad: &[f64]) -> f64 {
    select_pair(y, alpha, c, grad).map_or(0.0, |(_, _, gap)| gap.max(0.0))
}

/// Solves the dual for labels `y` in {-1, +1} and per-sample box bounds `c`.
pub fn solve(rows: &[Vec<f64>], y: &[f64], c: &[f64], kernel: Kernel, params: &SmoParams) -> Result<SmoSolution> {
    let n = rows.len();
    if y.len() != n {
        return Err(Error::LengthMismatch(n, y.len()));
    }
    if c.len() != n {
        return Err(Error::LengthMismatch(n, c.len()));
    }
    if c.iter().any(|&ci| !(ci > 0.0 && ci.is_finite())) {
        return Err(Error::param("C", "box bounds must be positive and finite"));
    }
    if !(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0)) {
        return Err(Error::SingleClass);
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::param("y", "labels must be -1 or +1"));
    }
    kernel.validate()?;

    let diag: Vec<f64> = rows.iter().map(|x| kernel.eval(x, x)).collect();
    let mut cache = KernelCache::new(rows, y, kernel, params.cache_mb);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = params.max_iter.unwrap_or_else(|| (100 * n).max(10_000_000));

    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    while iterations < max_iter {
        let Some((i, j, g)) = select_pair(y, &alpha, c, &grad) else {
            gap = 0.0;
            break;
        };
        gap = g;
        if gap <= params.tol {
            break;
        }
        iterations += 1;
        let qi: Vec<f64> = cache.column(i).to_vec();
        let qj = cache.column(j);
        let (ci, cj) = (c[i], c[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let quad = (diag[i] + diag[j] + 2.0 * qi[j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * qi[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..n {
            grad[t] += qi[t] * di + qj[t] * dj;
        }
    }
    let converged = gap <= params.tol;
    if !converged {
        log::warn!("SMO stopped after {iterations} iterations with violation {gap:.3e}");
    }

    let objective = -alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>() / 2.0;
    Ok(SmoSolution {
        rho: rho(y, &alpha, c, &grad),
        alpha,
        objective,
        iterations,
        max_violation: gap.max(0.0),
        converged,
    })
}

/// Offset from the free support vectors, or the midpoint of the feasible
/// interval when every multiplier sits at a bound.
fn rho(y: &[f64], alpha: &[f64], c: &[f64], grad: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum) = (0usize, 0.0);
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
