use bois_core::gp::{self, Dataset, FittedGP, GpConfig, Hyperparams, KernelKind, NoiseMode};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn hp(s: f64, l: f64, n: f64) -> Hyperparams {
    Hyperparams {
        signal_variance: s,
        lengthscale: l,
        noise_variance: n,
    }
}

fn toy(rng: &mut ChaCha8Rng, m: usize, dim: usize) -> Dataset {
    let x: Vec<Vec<f64>> = (0..m).map(|_| (0..dim).map(|_| rng.random_range(0.0..6.0)).collect()).collect();
    let y: Vec<f64> = x.iter().map(|p| p.iter().map(|v| (1.3 * v).cos()).sum()).collect();
    Dataset::new(&x, &y).unwrap()
}

/// Direct textbook posterior with nalgebra, on standardised targets.
fn oracle_posterior(data: &Dataset, kind: KernelKind, h: &Hyperparams, x: &[f64]) -> (f64, f64) {
    let m = data.len();
    let k = DMatrix::from_fn(m, m, |i, j| {
        gp::kernel(kind, h, data.point(i), data.point(j)) + if i == j { h.noise_variance } else { 0.0 }
    });
    let ks = DVector::from_fn(m, |i, _| gp::kernel(kind, h, data.point(i), x));
    let y = DVector::from_column_slice(data.standardised_y());
    let kinv = k.try_inverse().unwrap();
    let mean = (ks.transpose() * &kinv * y)[0];
    let var = h.signal_variance - (ks.transpose() * &kinv * &ks)[0];
    let (mu, sd) = data.standardisation();
    (mu + sd * mean, sd * sd * var)
}

#[test]
fn posterior_matches_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kind in [KernelKind::Matern52, KernelKind::Rbf] {
        let data = toy(&mut rng, 15, 2);
        let h = hp(1.7, 0.9, 1e-3);
        let g = FittedGP::condition(data.clone(), kind, h).unwrap();
        for _ in 0..20 {
            let x = [rng.random_range(0.0..6.0), rng.random_range(0.0..6.0)];
            let (m, v) = g.posterior(&x).unwrap();
            let (mo, vo) = oracle_posterior(&data, kind, &h, &x);
            assert!((m - mo).abs() < 1e-8, "{m} {mo}");
            assert!((v - vo.max(0.0)).abs() < 1e-8, "{v} {vo}");
        }
    }
}

#[test]
fn nlml_matches_dense_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data = toy(&mut rng, 12, 3);
    let h = hp(0.8, 1.4, 0.05);
    let m = data.len();
    let k = DMatrix::from_fn(m, m, |i, j| {
        gp::kernel(KernelKind::Matern52, &h, data.point(i), data.point(j)) + if i == j { h.noise_variance } else { 0.0 }
    });
    let y = DVector::from_column_slice(data.standardised_y());
    let chol = k.clone().cholesky().unwrap();
    let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let want = 0.5 * (y.transpose() * chol.solve(&y))[0] + 0.5 * logdet + 0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln();
    let got = gp::nlml(&data, KernelKind::Matern52, &h).unwrap();
    assert!((got - want).abs() < 1e-9, "{got} {want}");
}

#[test]
fn far_from_data_reverts_to_prior() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data = toy(&mut rng, 10, 1);
    let h = hp(2.0, 0.5, 1e-6);
    let g = FittedGP::condition(data.clone(), KernelKind::Matern52, h).unwrap();
    let (mu, sd) = data.standardisation();
    let (m, v) = g.posterior(&[6.0 + 20.0 * 0.5 * 10.0]).unwrap();
    assert!((m - mu).abs() < 1e-6 * sd.max(1.0));
    assert!((v - sd * sd * 2.0).abs() < 1e-6 * sd * sd * 2.0);
}

#[test]
fn symmetric_pair_midpoint() {
    let data = Dataset::new(&[vec![0.0], vec![2.0]], &[1.0, 3.0]).unwrap();
    for kind in [KernelKind::Matern52, KernelKind::Rbf] {
        let g = FittedGP::condition(data.clone(), kind, hp(1.0, 1.0, 1e-10)).unwrap();
        let (m, v) = g.posterior(&[1.0]).unwrap();
        assert!((m - 2.0).abs() < 1e-12);
        let (_, v0) = g.posterior(&[0.0]).unwrap();
        assert!(v > v0);
    }
}

#[test]
fn recovers_generating_hyperparameters() {
    // draw one sample path of a known GP with nalgebra and fit it back
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let truth = hp(1.0, 1.0, 0.01);
    let m = 200;
    let x: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.random_range(0.0..20.0)]).collect();
    let k = DMatrix::from_fn(m, m, |i, j| {
        gp::kernel(KernelKind::Matern52, &truth, &x[i], &x[j]) + if i == j { 1e-10 } else { 0.0 }
    });
    let l = k.cholesky().unwrap().l();
    let z = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
    let f = l * z;
    let y: Vec<f64> = (0..m)
        .map(|i| f[i] + truth.noise_variance.sqrt() * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
        .collect();
    let data = Dataset::new(&x, &y).unwrap();
    let (_, sd) = data.standardisation();
    let g = gp::fit(data, &GpConfig::new(KernelKind::Matern52, NoiseMode::Optimise), &mut rng).unwrap();
    let got = g.hyperparams();
    // fitted values live in standardised units
    let s2 = got.signal_variance * sd * sd;
    let n2 = got.noise_variance * sd * sd;
    assert!((got.lengthscale.ln() - 0.0).abs() < 0.5, "{got:?}");
    assert!((n2.ln() - 0.01f64.ln()).abs() < 0.5, "{n2}");
    assert!(s2.ln().abs() < 1.0, "{s2}");
}

#[test]
fn fit_is_deterministic_and_best_of_restarts() {
    let data = toy(&mut ChaCha8Rng::seed_from_u64(5), 40, 3);
    let cfg = GpConfig::new(KernelKind::Matern52, NoiseMode::Optimise);
    let (a, tr) = gp::fit_with_trace(data.clone(), &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let (b, _) = gp::fit_with_trace(data.clone(), &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(tr.len(), 5);
    for t in &tr {
        assert!(t.nlml_end <= t.nlml_start + 1e-12);
        assert!(a.nlml() <= t.nlml_end + 1e-9);
        assert!(cfg.bounds.contains(&t.end));
    }
    assert!(cfg.bounds.contains(a.hyperparams()));
}

#[test]
fn fixed_noise_stays_at_floor() {
    let data = toy(&mut ChaCha8Rng::seed_from_u64(6), 25, 2);
    let cfg = GpConfig::new(KernelKind::Rbf, NoiseMode::Fixed);
    let g = gp::fit(data.clone(), &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(g.hyperparams().noise_variance, 1e-10);
    for i in 0..data.len() {
        let (m, _) = g.posterior(data.point(i)).unwrap();
        assert!((m - data.y_raw()[i]).abs() < 1e-6);
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..50 {
        let kind = if k % 2 == 0 { KernelKind::Matern52 } else { KernelKind::Rbf };
        let (m, dim) = (rng.random_range(4..30), rng.random_range(1..5));
        let data = toy(&mut rng, m, dim);
        let l = [rng.random_range(-2.0..2.0f64), rng.random_range(-1.5..1.5f64), rng.random_range(-8.0..-0.5f64)];
        let at = |v: [f64; 3]| hp(v[0].exp(), v[1].exp(), v[2].exp());
        let g = gp::nlml_gradient(&data, kind, &at(l)).unwrap();
        for j in 0..3 {
            let (mut a, mut b) = (l, l);
            a[j] += 1e-5;
            b[j] -= 1e-5;
            let fd = (gp::nlml(&data, kind, &at(a)).unwrap() - gp::nlml(&data, kind, &at(b)).unwrap()) / 2e-5;
            assert!((g[j] - fd).abs() <= 1e-4 * fd.abs().max(1.0), "{k} {j}: {} vs {fd}", g[j]);
        }
    }
}
