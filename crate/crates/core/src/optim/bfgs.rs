use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Central-difference step.
    pub grad_step: f64,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
    /// Number of starts; the first is the caller's initial point.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            grad_step: 1e-5,
            tol: 1e-8,
            restarts: 3,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_step > 0.0 && self.grad_step.is_finite()) {
            return invalid("grad_step must be positive");
        }
        if self.restarts == 0 {
            return invalid("restarts must be at least 1");
        }
        if !(self.tol >= 0.0) {
            return invalid("tol must be non-negative");
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// Iterations summed over all restarts.
    pub iters_used: usize,
    /// The best restart met the gradient tolerance.
    pub converged: bool,
}

/// A scalar objective with an optional specialised gradient.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> f64;

    /// Central differences with step `h`.
    fn gradient(&mut self, x: &[f64], h: f64, grad: &mut [f64]) {
        central_difference(|p| self.value(p), x, h, grad);
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for F {
    fn value(&mut self, x: &[f64]) -> f64 {
        self(x)
    }
}

pub fn central_difference(
    mut f: impl FnMut(&[f64]) -> f64,
    x: &[f64],
    h: f64,
    grad: &mut [f64],
) {
    let mut p = x.to_vec();
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let fp = f(&p);
        p[i] = x[i] - h;
        let fm = f(&p);
        p[i] = x[i];
        grad[i] = (fp - fm) / (2.0 * h);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Run {
    x: Vec<f64>,
    f: f64,
    iters: usize,
    converged: bool,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;
// Consecutive iterations with relative improvement below STALL_REL end a run.
const STALL_REL: f64 = 1e-13;
const MAX_STALLS: usize = 8;

/// One BFGS descent from `x0`. Returns `None` if the objective or its
/// gradient is non-finite at the start.
fn bfgs_run<O: Objective + ?Sized>(obj: &mut O, x0: &[f64], cfg: &OptimizerConfig) -> Option<Run> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f = obj.value(&x);
    if !f.is_finite() {
        return None;
    }
    if n == 0 {
        return Some(Run {
            x,
            f,
            iters: 0,
            converged: true,
        });
    }
    let mut g = vec![0.0; n];
    obj.gradient(&x, cfg.grad_step, &mut g);
    if g.iter().any(|v| !v.is_finite()) {
        return None;
    }
    // Inverse Hessian approximation, row-major.
    let mut h = identity(n);
    let mut fresh = true;
    let mut p = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut hy = vec![0.0; n];
    let mut converged = false;
    let mut iters = 0;
    let mut stalls = 0;

    while iters < cfg.max_iters {
        if dot(&g, &g).sqrt() < cfg.tol {
            converged = true;
            break;
        }
        iters += 1;
        matvec(&h, &g, &mut p);
        p.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            reset(&mut h, n);
            fresh = true;
            p.iter_mut().zip(&g).for_each(|(pi, gi)| *pi = -gi);
            slope = -dot(&g, &g);
        }

        // Backtracking line search under the Armijo condition.
        let mut alpha = if fresh {
            (1.0 / dot(&g, &g).sqrt()).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for i in 0..n {
                x_new[i] = x[i] + alpha * p[i];
            }
            let f_new = obj.value(&x_new);
            if f_new.is_finite() && f_new <= f + ARMIJO_C1 * alpha * slope {
                accepted = Some(f_new);
                break;
            }
            alpha *= 0.5;
        }
        let Some(f_new) = accepted else {
            if fresh {
                break;
            }
            // Retry along steepest descent before giving up.
            reset(&mut h, n);
            fresh = true;
            continue;
        };

        obj.gradient(&x_new, cfg.grad_step, &mut g_new);
        if g_new.iter().any(|v| !v.is_finite()) {
            break;
        }
        for i in 0..n {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
        }
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                let scale = sy / dot(&y, &y);
                reset(&mut h, n);
                h.iter_mut().for_each(|v| *v *= scale);
            }
            bfgs_update(&mut h, &s, &y, sy, &mut hy);
            fresh = false;
        }
        if f - f_new <= STALL_REL * f.abs() {
            stalls += 1;
        } else {
            stalls = 0;
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        if stalls >= MAX_STALLS {
            break;
        }
    }
    if !converged {
        converged = dot(&g, &g).sqrt() < cfg.tol;
    }
    Some(Run {
        x,
        f,
        iters,
        converged,
    })
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    reset(&mut h, n);
    h
}

fn reset(h: &mut [f64], n: usize) {
    h.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
}

fn matvec(h: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for i in 0..n {
        out[i] = dot(&h[i * n..(i + 1) * n], v);
    }
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / sᵀy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, hy: &mut [f64]) {
    let n = s.len();
    let rho = 1.0 / sy;
    matvec(h, y, hy);
    let yhy = dot(y, hy);
    let coeff = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coeff * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

/// Multi-start BFGS: the first start is `x0`, further starts are uniform in
/// `[−π, π]^n` drawn from `cfg.seed`. A restart whose objective turns
/// non-finite is dropped; the best finite result is kept.
pub fn bfgs_minimize<O: Objective + ?Sized>(
    obj: &mut O,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<Run> = None;
    let mut total_iters = 0;
    for r in 0..cfg.restarts {
        let start: Vec<f64> = if r == 0 {
            x0.to_vec()
        } else {
            (0..x0.len()).map(|_| rng.gen_range(-PI..PI)).collect()
        };
        let Some(run) = bfgs_run(obj, &start, cfg) else {
            continue;
        };
        total_iters += run.iters;
        if best.as_ref().map_or(true, |b| run.f < b.f) {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| {
        Error::Validation("objective is non-finite at every start point".into())
    })?;
    Ok(OptResult {
        best_params: best.x,
        best_value: best.f,
        iters_used: total_iters,
        converged: best.converged,
    })
}
