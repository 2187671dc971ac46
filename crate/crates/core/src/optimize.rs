//! Projected limited-memory BFGS for box-constrained minimisation.
//!
//! Iterates stay feasible, the objective never increases between accepted
//! iterates, and the iteration count is capped.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    pub max_iters: usize,
    pub memory: usize,
    /// Stop when the infinity norm of the projected gradient drops below this.
    pub pgtol: f64,
    /// Stop when the relative decrease of `f` in one step drops below this.
    pub ftol: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig {
            max_iters: 1000,
            memory: 10,
            pgtol: 1e-5,
            ftol: 2.220446049250313e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub f_start: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
}

impl Minimum {
    /// Infinity norm of the gradient projected onto the feasible box.
    pub fn projected_gradient_norm(&self, lower: &[f64], upper: &[f64]) -> f64 {
        projected_gradient(&self.x, &self.gradient, lower, upper)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, l), u) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(*l, *u);
    }
}

fn projected_gradient(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((&xi, &gi), (&l, &u))| {
            if (xi <= l && gi > 0.0) || (xi >= u && gi < 0.0) {
                0.0
            } else {
                gi
            }
        })
        .collect()
}

/// Minimises `f` over the box `[lower, upper]` starting from `x0`.
///
/// `f(x, grad)` returns the objective and writes the gradient. A non-finite
/// return is treated as an infeasible trial point during line search; at the
/// start point it ends the run immediately with `f = +inf`.
pub fn minimize_bounded<F>(
    mut f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    cfg: &LbfgsConfig,
) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut evaluations = 1;
    let f_start = fx;
    if !fx.is_finite() {
        return Minimum {
            x,
            f: f64::INFINITY,
            f_start: f64::INFINITY,
            gradient: g,
            iterations: 0,
            evaluations,
        };
    }

    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut xt = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        let pg = projected_gradient(&x, &g, lower, upper);
        if pg.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= cfg.pgtol {
            break;
        }
        let free: Vec<bool> = x
            .iter()
            .zip(&g)
            .zip(lower.iter().zip(upper))
            .map(|((&xi, &gi), (&l, &u))| !((xi <= l && gi > 0.0) || (xi >= u && gi < 0.0)))
            .collect();

        // two-loop recursion on the free components
        let mut q: Vec<f64> = pg.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * masked_dot(s, &q, &free);
            for i in 0..n {
                if free[i] {
                    q[i] -= a * y[i];
                }
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = memory.back() {
            let sy = masked_dot(s, y, &free);
            let yy = masked_dot(y, y, &free);
            if sy > 0.0 && yy > 0.0 {
                let gamma = sy / yy;
                q.iter_mut().for_each(|v| *v *= gamma);
            }
        }
        for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = rho * masked_dot(y, &q, &free);
            for i in 0..n {
                if free[i] {
                    q[i] += s[i] * (a - b);
                }
            }
        }
        let mut d: Vec<f64> = q
            .iter()
            .zip(&free)
            .map(|(v, &fr)| if fr { -v } else { 0.0 })
            .collect();
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            memory.clear();
            d = pg.iter().map(|v| -v).collect();
        }

        let mut step = if memory.is_empty() {
            let norm = libm::sqrt(d.iter().map(|v| v * v).sum::<f64>());
            (1.0 / norm).min(1.0)
        } else {
            1.0
        };

        let mut accepted = false;
        let mut ft = fx;
        for _ in 0..40 {
            for i in 0..n {
                xt[i] = x[i] + step * d[i];
            }
            project(&mut xt, lower, upper);
            if xt == x {
                break;
            }
            ft = f(&xt, &mut gt);
            evaluations += 1;
            let decrease: f64 = g.iter().zip(xt.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if ft.is_finite() && ft <= fx + 1e-4 * decrease.min(0.0) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }

        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        if sy > 1e-10 * libm::sqrt(yy) * libm::sqrt(s.iter().map(|v| v * v).sum::<f64>()) {
            if memory.len() == cfg.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }

        let rel = (fx - ft) / fx.abs().max(ft.abs()).max(1.0);
        x.copy_from_slice(&xt);
        g.copy_from_slice(&gt);
        fx = ft;
        if rel <= cfg.ftol {
            break;
        }
    }

    Minimum {
        x,
        f: fx,
        f_start,
        gradient: g,
        iterations,
        evaluations,
    }
}

fn masked_dot(a: &[f64], b: &[f64], mask: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|((x, y), _)| x * y)
        .sum()
}
