//! Gaussian-process surrogate: isotropic Matérn-5/2 or RBF kernel, marginal
//! likelihood fit with multi-start bounded quasi-Newton, posterior prediction.
//!
//! Targets are standardised (zero mean, unit variance) before fitting and the
//! prior mean is zero in standardised space. Hyperparameters are optimised in
//! log space.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::optimize::{minimize_bounded, LbfgsConfig};

const SQRT5: f64 = 2.23606797749979;
const LN_2PI: f64 = 1.8378770664093453;

/// Noise floor used when the noise variance is frozen; also the first jitter step.
pub const JITTER_FLOOR: f64 = 1e-10;
const JITTER_LADDER: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Matern52,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub signal_variance: f64,
    pub lengthscale: f64,
    pub noise_variance: f64,
}

impl Hyperparams {
    fn from_log(v: &[f64]) -> Self {
        Hyperparams {
            signal_variance: libm::exp(v[0]),
            lengthscale: libm::exp(v[1]),
            noise_variance: libm::exp(v[2]),
        }
    }
}

/// Box constraints on the hyperparameters, in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperBounds {
    pub signal_variance: (f64, f64),
    pub lengthscale: (f64, f64),
    pub noise_variance: (f64, f64),
}

impl Default for HyperBounds {
    fn default() -> Self {
        HyperBounds {
            signal_variance: (1e-6, 1e3),
            lengthscale: (1e-2, 1e2),
            noise_variance: (JITTER_FLOOR, 1.0),
        }
    }
}

impl HyperBounds {
    pub fn contains(&self, hp: &Hyperparams) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12);
        inside(hp.signal_variance, self.signal_variance)
            && inside(hp.lengthscale, self.lengthscale)
            && inside(hp.noise_variance, self.noise_variance)
    }

    fn log_box(&self) -> ([f64; 3], [f64; 3]) {
        (
            [
                libm::log(self.signal_variance.0),
                libm::log(self.lengthscale.0),
                libm::log(self.noise_variance.0),
            ],
            [
                libm::log(self.signal_variance.1),
                libm::log(self.lengthscale.1),
                libm::log(self.noise_variance.1),
            ],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseMode {
    /// Noise variance frozen at [`JITTER_FLOOR`].
    Fixed,
    /// Noise variance optimised with the other hyperparameters.
    Optimise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub kernel: KernelKind,
    pub noise: NoiseMode,
    pub restarts: usize,
    pub max_iters: usize,
    pub bounds: HyperBounds,
}

impl GpConfig {
    pub fn new(kernel: KernelKind, noise: NoiseMode) -> Self {
        GpConfig {
            kernel,
            noise,
            restarts: 5,
            max_iters: 1000,
            bounds: HyperBounds::default(),
        }
    }
}

impl KernelKind {
    #[inline]
    fn value_d2(self, d2: f64, sf2: f64, ell: f64) -> f64 {
        match self {
            KernelKind::Matern52 => {
                let s = SQRT5 * libm::sqrt(d2) / ell;
                sf2 * (1.0 + s + s * s / 3.0) * libm::exp(-s)
            }
            KernelKind::Rbf => sf2 * libm::exp(-0.5 * d2 / (ell * ell)),
        }
    }

    /// Kernel value and its derivative with respect to `log ell`.
    #[inline]
    fn value_and_dlog_ell(self, d2: f64, sf2: f64, ell: f64) -> (f64, f64) {
        match self {
            KernelKind::Matern52 => {
                let s = SQRT5 * libm::sqrt(d2) / ell;
                let e = libm::exp(-s);
                (
                    sf2 * (1.0 + s + s * s / 3.0) * e,
                    sf2 * s * s * (1.0 + s) * e / 3.0,
                )
            }
            KernelKind::Rbf => {
                let r2 = d2 / (ell * ell);
                let k = sf2 * libm::exp(-0.5 * r2);
                (k, k * r2)
            }
        }
    }

    /// Factor `c` such that `dk/dx1 = c * (x1 - x2)`.
    #[inline]
    fn gradient_factor(self, d2: f64, sf2: f64, ell: f64) -> f64 {
        match self {
            KernelKind::Matern52 => {
                let s = SQRT5 * libm::sqrt(d2) / ell;
                -sf2 * 5.0 / (3.0 * ell * ell) * (1.0 + s) * libm::exp(-s)
            }
            KernelKind::Rbf => -sf2 * libm::exp(-0.5 * d2 / (ell * ell)) / (ell * ell),
        }
    }
}

/// Covariance between two points.
pub fn kernel(kind: KernelKind, hp: &Hyperparams, x1: &[f64], x2: &[f64]) -> f64 {
    kind.value_d2(sq_dist(x1, x2), hp.signal_variance, hp.lengthscale)
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Training inputs and standardised targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    dim: usize,
    x: Vec<f64>,
    y_raw: Vec<f64>,
    y: Vec<f64>,
    mean: f64,
    scale: f64,
}

impl Dataset {
    pub fn new(points: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        if points.is_empty() || points.len() != y.len() {
            return Err(Error::EmptyDataset);
        }
        let dim = points[0].len();
        let mut x = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            x.extend_from_slice(p);
        }
        Self::from_flat(dim, x, y.to_vec())
    }

    /// Row-major inputs, `x.len() == dim * y.len()`.
    pub fn from_flat(dim: usize, x: Vec<f64>, y_raw: Vec<f64>) -> Result<Self> {
        let m = y_raw.len();
        if m == 0 {
            return Err(Error::EmptyDataset);
        }
        if x.len() != dim * m {
            return Err(Error::DimensionMismatch {
                expected: dim * m,
                found: x.len(),
            });
        }
        let mean = y_raw.iter().sum::<f64>() / m as f64;
        let var = y_raw.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m as f64;
        let sd = libm::sqrt(var);
        let scale = if sd > 0.0 && sd.is_finite() { sd } else { 1.0 };
        let y = y_raw.iter().map(|v| (v - mean) / scale).collect();
        Ok(Dataset {
            dim,
            x,
            y_raw,
            y,
            mean,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y_raw(&self) -> &[f64] {
        &self.y_raw
    }

    pub fn standardised_y(&self) -> &[f64] {
        &self.y
    }

    /// `(mean, scale)` of the raw targets.
    pub fn standardisation(&self) -> (f64, f64) {
        (self.mean, self.scale)
    }

    fn sq_distances(&self) -> Vec<f64> {
        let m = self.len();
        let mut d = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..i {
                d[i * m + j] = sq_dist(self.point(i), self.point(j));
            }
        }
        d
    }
}

struct Factorised {
    chol: Vec<f64>,
    alpha: Vec<f64>,
    jitter: f64,
    nlml: f64,
}

/// Builds `K + (noise + jitter) I`, factorises it with escalating jitter and
/// returns the pieces needed for the likelihood. `dl` receives the
/// `d K / d log ell` lower triangle when provided.
fn factorise(
    d2: &[f64],
    y: &[f64],
    kind: KernelKind,
    hp: &Hyperparams,
    mut kf_out: Option<&mut Vec<f64>>,
    mut dl_out: Option<&mut Vec<f64>>,
) -> Result<Factorised> {
    let m = y.len();
    let sf2 = hp.signal_variance;
    let ell = hp.lengthscale;
    let mut base = vec![0.0; m * m];
    if let Some(dl) = dl_out.as_deref_mut() {
        dl.clear();
        dl.resize(m * m, 0.0);
    }
    for i in 0..m {
        for j in 0..i {
            let idx = i * m + j;
            match dl_out.as_deref_mut() {
                Some(dl) => {
                    let (k, dk) = kind.value_and_dlog_ell(d2[idx], sf2, ell);
                    base[idx] = k;
                    dl[idx] = dk;
                }
                None => base[idx] = kind.value_d2(d2[idx], sf2, ell),
            }
        }
        base[i * m + i] = sf2;
    }
    if let Some(kf) = kf_out.as_deref_mut() {
        kf.clone_from(&base);
    }
    let mut chol = vec![0.0; m * m];
    for &jitter in JITTER_LADDER.iter() {
        chol.copy_from_slice(&base);
        for i in 0..m {
            chol[i * m + i] += hp.noise_variance + jitter;
        }
        if linalg::cholesky_in_place(&mut chol, m) {
            let mut alpha = y.to_vec();
            linalg::solve_lower(&chol, m, &mut alpha);
            let fit: f64 = alpha.iter().map(|v| v * v).sum();
            let logdet: f64 = (0..m).map(|i| libm::log(chol[i * m + i])).sum();
            linalg::solve_lower_transposed(&chol, m, &mut alpha);
            let nlml = 0.5 * fit + logdet + 0.5 * m as f64 * LN_2PI;
            return Ok(Factorised {
                chol,
                alpha,
                jitter,
                nlml,
            });
        }
    }
    Err(Error::NotPositiveDefinite {
        jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
    })
}

fn nlml_with_gradient(
    d2: &[f64],
    y: &[f64],
    kind: KernelKind,
    hp: &Hyperparams,
) -> Result<(f64, [f64; 3])> {
    let m = y.len();
    let mut kf = Vec::new();
    let mut dl = Vec::new();
    let fac = factorise(d2, y, kind, hp, Some(&mut kf), Some(&mut dl))?;
    let inv = linalg::inverse_from_cholesky(&fac.chol, m);
    let a = &fac.alpha;
    // tr(W dK) with W = a a^T - K^{-1}, summed over the symmetric matrix
    let mut t_sf = 0.0;
    let mut t_ell = 0.0;
    let mut t_noise = 0.0;
    for i in 0..m {
        let ai = a[i];
        let row = &inv[i * m..i * m + i];
        let kf_row = &kf[i * m..i * m + i];
        let dl_row = &dl[i * m..i * m + i];
        for j in 0..i {
            let w = ai * a[j] - row[j];
            t_sf += 2.0 * w * kf_row[j];
            t_ell += 2.0 * w * dl_row[j];
        }
        let wii = ai * ai - inv[i * m + i];
        t_sf += wii * hp.signal_variance;
        t_noise += wii;
    }
    Ok((
        fac.nlml,
        [-0.5 * t_sf, -0.5 * t_ell, -0.5 * t_noise * hp.noise_variance],
    ))
}

/// Negative log marginal likelihood of the standardised targets.
pub fn nlml(data: &Dataset, kind: KernelKind, hp: &Hyperparams) -> Result<f64> {
    let d2 = data.sq_distances();
    Ok(factorise(&d2, &data.y, kind, hp, None, None)?.nlml)
}

/// Gradient of [`nlml`] with respect to `(log sf2, log ell, log noise)`.
pub fn nlml_gradient(data: &Dataset, kind: KernelKind, hp: &Hyperparams) -> Result<[f64; 3]> {
    let d2 = data.sq_distances();
    Ok(nlml_with_gradient(&d2, &data.y, kind, hp)?.1)
}

/// Outcome of one hyperparameter restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub start: Hyperparams,
    pub nlml_start: f64,
    pub nlml_end: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub end: Hyperparams,
}

/// A conditioned Gaussian process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedGP {
    kind: KernelKind,
    hp: Hyperparams,
    data: Dataset,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    jitter: f64,
    nlml: f64,
}

/// Posterior at one point, in raw target units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
    /// Latent variance before clamping at zero.
    pub unclamped_variance: f64,
}

impl FittedGP {
    /// Conditions the GP on `data` with fixed hyperparameters.
    pub fn condition(data: Dataset, kind: KernelKind, hp: Hyperparams) -> Result<Self> {
        let d2 = data.sq_distances();
        let fac = factorise(&d2, &data.y, kind, &hp, None, None)?;
        Ok(FittedGP {
            kind,
            hp,
            data,
            chol: fac.chol,
            alpha: fac.alpha,
            jitter: fac.jitter,
            nlml: fac.nlml,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn nlml(&self) -> f64 {
        self.nlml
    }

    /// Lower Cholesky factor of `K + (noise + jitter) I`, row-major.
    pub fn cholesky_factor(&self) -> &[f64] {
        &self.chol
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.data.dim {
            return Err(Error::DimensionMismatch {
                expected: self.data.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Posterior mean and variance in raw target units.
    pub fn posterior(&self, x: &[f64]) -> Result<(f64, f64)> {
        let p = self.predict(x)?;
        Ok((p.mean, p.variance))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.check_dim(x)?;
        let m = self.data.len();
        let (sf2, ell) = (self.hp.signal_variance, self.hp.lengthscale);
        let mut v: Vec<f64> = (0..m)
            .map(|i| self.kind.value_d2(sq_dist(x, self.data.point(i)), sf2, ell))
            .collect();
        let mu = linalg::dot(&v, &self.alpha);
        linalg::solve_lower(&self.chol, m, &mut v);
        let var = sf2 - linalg::dot(&v, &v);
        let s2 = self.data.scale * self.data.scale;
        Ok(Prediction {
            mean: self.data.mean + self.data.scale * mu,
            variance: var.max(0.0) * s2,
            unclamped_variance: var * s2,
        })
    }

    /// `mean - kappa * sd` and its gradient with respect to `x`.
    pub(crate) fn lcb_with_gradient(&self, x: &[f64], kappa: f64, grad: &mut [f64]) -> f64 {
        let m = self.data.len();
        let dim = self.data.dim;
        let (sf2, ell) = (self.hp.signal_variance, self.hp.lengthscale);
        let mut k = vec![0.0; m];
        let mut fac = vec![0.0; m];
        for i in 0..m {
            let d2 = sq_dist(x, self.data.point(i));
            k[i] = self.kind.value_d2(d2, sf2, ell);
            fac[i] = self.kind.gradient_factor(d2, sf2, ell);
        }
        let mu = linalg::dot(&k, &self.alpha);
        let mut w = k.clone();
        linalg::solve_lower(&self.chol, m, &mut w);
        let var = sf2 - linalg::dot(&w, &w);
        linalg::solve_lower_transposed(&self.chol, m, &mut w);
        let sd = libm::sqrt(var.max(0.0));
        // d mu = sum_i alpha_i c_i (x - x_i); d var = -2 sum_i w_i c_i (x - x_i)
        for g in grad.iter_mut() {
            *g = 0.0;
        }
        let sd_floor = sd.max(1e-12);
        for i in 0..m {
            let coef = fac[i] * (self.alpha[i] + kappa * w[i] / sd_floor);
            if coef == 0.0 {
                continue;
            }
            let p = self.data.point(i);
            for d in 0..dim {
                grad[d] += coef * (x[d] - p[d]);
            }
        }
        let scale = self.data.scale;
        for g in grad.iter_mut() {
            *g *= scale;
        }
        self.data.mean + scale * (mu - kappa * sd)
    }
}

// bounds are already in log space, so this is log-uniform in natural units
fn sample_log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

/// Fits hyperparameters by multi-start bounded quasi-Newton on the NLML and
/// conditions the GP on the best restart.
pub fn fit<R: Rng + ?Sized>(data: Dataset, cfg: &GpConfig, rng: &mut R) -> Result<FittedGP> {
    fit_with_trace(data, cfg, rng).map(|(g, _)| g)
}

pub fn fit_with_trace<R: Rng + ?Sized>(
    data: Dataset,
    cfg: &GpConfig,
    rng: &mut R,
) -> Result<(FittedGP, Vec<RestartTrace>)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d2 = data.sq_distances();
    let (lo, hi) = cfg.bounds.log_box();
    let optimise_noise = cfg.noise == NoiseMode::Optimise;
    let n_free = if optimise_noise { 3 } else { 2 };
    let frozen_noise = libm::log(JITTER_FLOOR.max(cfg.bounds.noise_variance.0));
    let lbfgs = LbfgsConfig {
        max_iters: cfg.max_iters,
        ..LbfgsConfig::default()
    };

    let mut best: Option<(f64, [f64; 3])> = None;
    let mut traces = Vec::with_capacity(cfg.restarts);
    for _ in 0..cfg.restarts.max(1) {
        let mut start = [0.0; 3];
        for p in 0..3 {
            start[p] = sample_log_uniform(rng, lo[p], hi[p]);
        }
        if !optimise_noise {
            start[2] = frozen_noise;
        }
        let objective = |v: &[f64], g: &mut [f64]| -> f64 {
            let full = [v[0], v[1], if optimise_noise { v[2] } else { frozen_noise }];
            match nlml_with_gradient(&d2, &data.y, cfg.kernel, &Hyperparams::from_log(&full)) {
                Ok((f, grad)) => {
                    g.copy_from_slice(&grad[..g.len()]);
                    f
                }
                Err(_) => f64::INFINITY,
            }
        };
        let res = minimize_bounded(objective, &start[..n_free], &lo[..n_free], &hi[..n_free], &lbfgs);
        traces.push(RestartTrace {
            start: Hyperparams::from_log(&start),
            nlml_start: res.f_start,
            nlml_end: res.f,
            iterations: res.iterations,
            evaluations: res.evaluations,
            end: Hyperparams::from_log(&{
                let mut v = [frozen_noise; 3];
                v[..n_free].copy_from_slice(&res.x);
                v
            }),
        });
        if res.f.is_finite() {
            let mut v = [0.0; 3];
            v[..n_free].copy_from_slice(&res.x);
            if !optimise_noise {
                v[2] = frozen_noise;
            }
            if best.map_or(true, |(bf, _)| res.f < bf) {
                best = Some((res.f, v));
            }
        }
    }
    let (_, v) = best.ok_or(Error::FitFailed)?;
    let hp = Hyperparams::from_log(&v);
    let hp = Hyperparams {
        signal_variance: hp.signal_variance.clamp(cfg.bounds.signal_variance.0, cfg.bounds.signal_variance.1),
        lengthscale: hp.lengthscale.clamp(cfg.bounds.lengthscale.0, cfg.bounds.lengthscale.1),
        noise_variance: hp.noise_variance.clamp(cfg.bounds.noise_variance.0, cfg.bounds.noise_variance.1),
    };
    let g = FittedGP::condition(data, cfg.kernel, hp)?;
    Ok((g, traces))
}
