//! Lower-confidence-bound acquisition with a linearly decaying weight, and
//! multi-start bounded minimisation of it over the parameter box.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::FittedGP;
use crate::optimize::{minimize_bounded, LbfgsConfig};

/// Floor of the acquisition weight.
pub const KAPPA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcqConfig {
    pub kappa0: f64,
    /// Denominator of the weight schedule.
    pub n_max: u32,
    pub n_starts: usize,
    pub max_iters: usize,
    /// Every coordinate lives in `[lower, upper]`.
    pub lower: f64,
    pub upper: f64,
}

impl Default for AcqConfig {
    fn default() -> Self {
        AcqConfig {
            kappa0: 1.0,
            n_max: 100,
            n_starts: 10,
            max_iters: 100,
            lower: 0.0,
            upper: TAU,
        }
    }
}

impl AcqConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa0 > 0.0) || !self.kappa0.is_finite() {
            return Err(Error::InvalidConfig("kappa0 must be positive".into()));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidConfig("n_max must be at least 1".into()));
        }
        if self.n_starts < 1 {
            return Err(Error::InvalidConfig("n_starts must be at least 1".into()));
        }
        if !(self.lower < self.upper) {
            return Err(Error::InvalidConfig("empty parameter box".into()));
        }
        Ok(())
    }
}

/// `max(1e-6, kappa0 (1 - n / n_max))`.
pub fn kappa(cfg: &AcqConfig, n: u32) -> f64 {
    KAPPA_FLOOR.max(cfg.kappa0 * (1.0 - n as f64 / cfg.n_max as f64))
}

/// `mu(x) - kappa sigma(x)` in raw target units.
pub fn lcb(g: &FittedGP, x: &[f64], kappa: f64) -> Result<f64> {
    let (mu, var) = g.posterior(x)?;
    Ok(mu - kappa * libm::sqrt(var))
}

/// Minimises the LCB from `n_starts` uniform starts plus the best training
/// point. Ties go to the earliest start.
pub fn next_point<R: Rng + ?Sized>(g: &FittedGP, kappa: f64, cfg: &AcqConfig, rng: &mut R) -> Vec<f64> {
    let dim = g.data().dim();
    let lower = vec![cfg.lower; dim];
    let upper = vec![cfg.upper; dim];
    let lbfgs = LbfgsConfig {
        max_iters: cfg.max_iters,
        ..LbfgsConfig::default()
    };

    let mut starts: Vec<Vec<f64>> = (0..cfg.n_starts)
        .map(|_| {
            (0..dim)
                .map(|_| cfg.lower + (cfg.upper - cfg.lower) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let y = g.data().y_raw();
    let best = (0..y.len()).fold(0, |b, i| if y[i] < y[b] { i } else { b });
    starts.push(
        g.data()
            .point(best)
            .iter()
            .map(|v| v.clamp(cfg.lower, cfg.upper))
            .collect(),
    );

    let mut best_x: Option<(f64, Vec<f64>)> = None;
    for s in &starts {
        let m = minimize_bounded(
            |x: &[f64], grad: &mut [f64]| g.lcb_with_gradient(x, kappa, grad),
            s,
            &lower,
            &upper,
            &lbfgs,
        );
        if m.f.is_finite() && best_x.as_ref().map_or(true, |(bf, _)| m.f < *bf) {
            best_x = Some((m.f, m.x));
        }
    }
    match best_x {
        Some((_, x)) => x,
        None => starts.swap_remove(starts.len() - 1),
    }
}
