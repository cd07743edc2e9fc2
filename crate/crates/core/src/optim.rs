//! Bound-constrained limited-memory BFGS with finite-difference gradients.
//!
//! Each iteration fixes the variables held at a bound by their gradient,
//! builds a quasi-Newton direction on the remaining (free) variables from
//! the stored curvature pairs, and backtracks along the projected path
//! `P(x + t·d)` until the Armijo condition holds. Iterates never leave the
//! box and the objective never increases.

use std::cell::Cell;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OptimError {
    #[error("dimension mismatch: start has {start} entries, bounds have {bounds}")]
    Dimension { start: usize, bounds: usize },
    #[error("empty or inverted bound for variable {0}")]
    BadBound(usize),
    #[error("objective is not finite at the start point ({0})")]
    NonFiniteStart(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(pairs: &[(f64, f64)]) -> Self {
        Self {
            lower: pairs.iter().map(|p| p.0).collect(),
            upper: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbfgsbOptions {
    /// Number of stored curvature pairs.
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop once an iteration lowers the objective by no more than this.
    pub ftol: f64,
    /// Stop once the projected gradient's largest entry is below this.
    pub pgtol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for LbfgsbOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iterations: 500,
            ftol: 1e-10,
            pgtol: 1e-12,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub message: String,
}

fn dot(a: &[f64], b: &[f64], free: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .zip(free)
        .filter(|(_, f)| **f)
        .map(|((x, y), _)| x * y)
        .sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Central differences, one-sided where a step would leave the box.
fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64, bounds: &Bounds, step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step * x[i].abs().max(1.0);
            let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
            let eval = |probe: &mut Vec<f64>, v: f64| {
                probe[i] = v;
                let r = f(probe);
                probe[i] = x[i];
                r
            };
            if x[i] - h < lo {
                (eval(&mut probe, x[i] + h) - fx) / h
            } else if x[i] + h > hi {
                (fx - eval(&mut probe, x[i] - h)) / h
            } else {
                (eval(&mut probe, x[i] + h) - eval(&mut probe, x[i] - h)) / (2.0 * h)
            }
        })
        .collect()
}

/// Minimizes `f` over the box, starting from `x0` (projected into the box).
pub fn minimize<F>(f: F, x0: &[f64], bounds: &Bounds, opts: &LbfgsbOptions) -> Result<Minimum, OptimError>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    if bounds.len() != n || bounds.upper.len() != n {
        return Err(OptimError::Dimension {
            start: n,
            bounds: bounds.len(),
        });
    }
    for i in 0..n {
        if !(bounds.lower[i] <= bounds.upper[i]) {
            return Err(OptimError::BadBound(i));
        }
    }
    let evals = Cell::new(0usize);
    let f = |x: &[f64]| {
        evals.set(evals.get() + 1);
        f(x)
    };

    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err(OptimError::NonFiniteStart(fx));
    }
    let mut g = gradient(&f, &x, fx, bounds, opts.fd_step);
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::with_capacity(opts.memory);

    let finish = |x: Vec<f64>, fx: f64, iterations: usize, converged: bool, message: &str| Minimum {
        x,
        fx,
        iterations,
        evaluations: evals.get(),
        converged,
        message: message.to_string(),
    };

    for iter in 0..opts.max_iterations {
        let free: Vec<bool> = (0..n)
            .map(|i| {
                let at_lo = x[i] <= bounds.lower[i] && g[i] > 0.0;
                let at_hi = x[i] >= bounds.upper[i] && g[i] < 0.0;
                !(at_lo || at_hi)
            })
            .collect();
        let pg: Vec<f64> = (0..n).map(|i| if free[i] { g[i] } else { 0.0 }).collect();
        if inf_norm(&pg) <= opts.pgtol {
            return Ok(finish(x, fx, iter, true, "projected gradient below tolerance"));
        }

        let mut d = two_loop(&pg, &memory, &free);
        if dot(&d, &pg, &free) >= 0.0 {
            memory.clear();
            d = pg.iter().map(|v| -v).collect();
        }

        let fresh = memory.is_empty();
        let mut t = if fresh { (1.0 / inf_norm(&d)).min(1.0) } else { 1.0 };
        let mut accepted: Option<(Vec<f64>, f64)> = None;
        for _ in 0..60 {
            let cand = step_to(&x, &d, t, bounds);
            let gs: f64 = (0..n).map(|i| g[i] * (cand[i] - x[i])).sum();
            if gs >= 0.0 && cand == x {
                break;
            }
            let fc = f(&cand);
            if fc.is_finite() && fc <= fx + 1e-4 * gs && fc <= fx {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((mut x_new, mut f_new)) = accepted else {
            if !memory.is_empty() {
                memory.clear();
                continue;
            }
            return Ok(finish(x, fx, iter, true, "no further decrease along the search direction"));
        };
        // Without curvature information the unit step can be far too short
        // for wide boxes; stretch it while the objective keeps falling.
        if fresh {
            for _ in 0..30 {
                t *= 2.0;
                let cand = step_to(&x, &d, t, bounds);
                if cand == x_new {
                    break;
                }
                let fc = f(&cand);
                if fc.is_finite() && fc < f_new {
                    x_new = cand;
                    f_new = fc;
                } else {
                    break;
                }
            }
        }

        let g_new = gradient(&f, &x_new, f_new, bounds, opts.fd_step);
        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let all = vec![true; n];
        let sy = dot(&s, &y, &all);
        if sy > f64::EPSILON * dot(&y, &y, &all) && sy > 0.0 {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back((s, y));
        }
        let decrease = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if decrease <= opts.ftol {
            return Ok(finish(x, fx, iter + 1, true, "objective decrease below tolerance"));
        }
    }
    Ok(finish(x, fx, opts.max_iterations, false, "iteration limit reached"))
}

fn step_to(x: &[f64], d: &[f64], t: f64, bounds: &Bounds) -> Vec<f64> {
    let mut c: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
    bounds.project(&mut c);
    c
}

/// `-H·g` on the free variables using the stored pairs.
fn two_loop(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>)>, free: &[bool]) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y) in memory.iter().rev() {
        let sy = dot(s, y, free);
        if sy <= 0.0 {
            alphas.push(None);
            continue;
        }
        let rho = 1.0 / sy;
        let a = rho * dot(s, &q, free);
        for i in 0..q.len() {
            if free[i] {
                q[i] -= a * y[i];
            }
        }
        alphas.push(Some((a, rho)));
    }
    let scale = memory
        .back()
        .map(|(s, y)| {
            let yy = dot(y, y, free);
            let sy = dot(s, y, free);
            if yy > 0.0 && sy > 0.0 {
                sy / yy
            } else {
                1.0
            }
        })
        .unwrap_or(1.0);
    for v in q.iter_mut() {
        *v *= scale;
    }
    for ((s, y), coef) in memory.iter().zip(alphas.iter().rev()) {
        if let Some((a, rho)) = coef {
            let b = rho * dot(y, &q, free);
            for i in 0..q.len() {
                if free[i] {
                    q[i] += s[i] * (a - b);
                }
            }
        }
    }
    q.iter()
        .zip(free)
        .map(|(v, f)| if *f { -v } else { 0.0 })
        .collect()
}
