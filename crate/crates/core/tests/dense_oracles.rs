//! Simulator and Hamiltonian checks against an independent dense linear
//! algebra path (explicit Kronecker products and gate matrices in nalgebra).

use bois_core::hamiltonian::Hamiltonian;
use bois_core::pauli::PauliString;
use bois_core::simulator::{AnsatzKind, AnsatzSpec, ShotConfig, StateVector};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn single(ch: char) -> DMatrix<C> {
    let (a, b, cc, d) = match ch {
        'I' => (c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)),
        'X' => (c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
        'Y' => (c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
        'Z' => (c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
        _ => panic!("bad pauli"),
    };
    DMatrix::from_row_slice(2, 2, &[a, b, cc, d])
}

/// Leftmost character is the most significant tensor factor.
fn kron_word(word: &str) -> DMatrix<C> {
    word.chars()
        .map(single)
        .reduce(|acc, m| acc.kronecker(&m))
        .unwrap()
}

fn kron_hamiltonian(terms: &[(&str, f64)]) -> DMatrix<C> {
    let n = terms[0].0.len();
    let mut m = DMatrix::zeros(1 << n, 1 << n);
    for (w, k) in terms {
        m += kron_word(w) * c(*k, 0.0);
    }
    m
}

fn ry(a: f64) -> DMatrix<C> {
    let (s, co) = (a / 2.0).sin_cos();
    DMatrix::from_row_slice(2, 2, &[c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)])
}

/// Single-qubit gate on qubit `q` of `n` (qubit q is bit q of the index).
fn on_qubit(g: &DMatrix<C>, q: usize, n: usize) -> DMatrix<C> {
    let mut m = DMatrix::from_element(1, 1, c(1., 0.));
    for pos in (0..n).rev() {
        let f = if pos == q { g.clone() } else { DMatrix::identity(2, 2) };
        m = m.kronecker(&f);
    }
    m
}

fn cnot(ctrl: usize, tgt: usize, n: usize) -> DMatrix<C> {
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let out = if b >> ctrl & 1 == 1 { b ^ (1 << tgt) } else { b };
        m[(out, b)] = c(1., 0.);
    }
    m
}

fn oracle_state(spec: &AnsatzSpec, theta: &[f64]) -> DVector<C> {
    let n = spec.n_qubits;
    let mut u = DMatrix::<C>::identity(1 << n, 1 << n);
    let mut apply = |g: DMatrix<C>| u = &g * &u;
    match spec.kind {
        AnsatzKind::H2Fixed => {
            apply(on_qubit(&ry(theta[0]), 0, 2));
            apply(on_qubit(&ry(theta[1]), 1, 2));
            apply(cnot(0, 1, 2));
            apply(on_qubit(&ry(theta[2]), 0, 2));
            apply(on_qubit(&ry(theta[3]), 1, 2));
            apply(cnot(0, 1, 2));
            apply(on_qubit(&ry(theta[4]), 0, 2));
            apply(on_qubit(&ry(theta[5]), 1, 2));
        }
        AnsatzKind::RealAmplitudes => {
            for q in 0..n {
                apply(on_qubit(&ry(theta[q]), q, n));
            }
            for r in 1..=spec.reps {
                for ctl in (0..n - 1).rev() {
                    apply(cnot(ctl, ctl + 1, n));
                }
                for q in 0..n {
                    apply(on_qubit(&ry(theta[n * r + q]), q, n));
                }
            }
        }
    }
    let mut zero = DVector::zeros(1 << n);
    zero[0] = c(1., 0.);
    u * zero
}

fn random_word(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)]).collect()
}

fn random_theta(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

fn ansatze() -> [AnsatzSpec; 3] {
    [
        AnsatzSpec::h2_fixed(),
        AnsatzSpec::real_amplitudes(6, 2),
        AnsatzSpec::real_amplitudes(3, 1),
    ]
}

#[test]
fn dense_matrix_matches_kronecker_oracle() {
    let h2 = [
        ("II", -1.04391252),
        ("IZ", 0.42045568),
        ("ZI", -0.42045568),
        ("ZZ", -0.0115074),
        ("XX", 0.17900058),
    ];
    let mine = Hamiltonian::from_words(4, &h2).unwrap().dense_matrix().unwrap();
    let oracle = kron_hamiltonian(&h2);
    for r in 0..4 {
        for col in 0..4 {
            assert!((mine.get(r, col) - oracle[(r, col)]).norm() < 1e-15);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let words: Vec<(String, f64)> = (0..8)
            .map(|_| (random_word(&mut rng, 3), rng.random_range(-1.0..1.0)))
            .collect::<std::collections::BTreeMap<_, _>>()
            .into_iter()
            .collect();
        let terms: Vec<(&str, f64)> = words.iter().map(|(w, k)| (w.as_str(), *k)).collect();
        let mine = Hamiltonian::from_words(0, &terms).unwrap().dense_matrix().unwrap();
        assert!(mine.is_hermitian(1e-12));
        let oracle = kron_hamiltonian(&terms);
        for r in 0..8 {
            for col in 0..8 {
                assert!((mine.get(r, col) - oracle[(r, col)]).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn ground_energies_match_hermitian_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=4 {
        for _ in 0..10 {
            let words: Vec<(String, f64)> = (0..(3 * n))
                .map(|_| (random_word(&mut rng, n), rng.random_range(-2.0..2.0)))
                .collect::<std::collections::BTreeMap<_, _>>()
                .into_iter()
                .collect();
            let terms: Vec<(&str, f64)> = words.iter().map(|(w, k)| (w.as_str(), *k)).collect();
            let h = Hamiltonian::from_words(0, &terms).unwrap();
            let oracle = kron_hamiltonian(&terms)
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            let mine = h.exact_ground_energy().unwrap();
            assert!((mine - oracle).abs() < 1e-10 * (1.0 + oracle.abs()), "{mine} vs {oracle}");
        }
    }
}

#[test]
fn h2_golden_ground_energy() {
    // independently diagonalised once; kept as a golden number
    let h = Hamiltonian::from_words(
        4,
        &[
            ("II", -1.04391252),
            ("IZ", 0.42045568),
            ("ZI", -0.42045568),
            ("ZZ", -0.0115074),
            ("XX", 0.17900058),
        ],
    )
    .unwrap();
    let oracle = kron_hamiltonian(&[
        ("II", -1.04391252),
        ("IZ", 0.42045568),
        ("ZI", -0.42045568),
        ("ZZ", -0.0115074),
        ("XX", 0.17900058),
    ])
    .symmetric_eigenvalues()
    .min();
    let golden = -1.892156899886;
    assert!((oracle - golden).abs() < 1e-11);
    assert!((h.exact_ground_energy().unwrap() - golden).abs() < 1e-11);
}

#[test]
fn statevectors_stay_normalised() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for spec in ansatze() {
        for _ in 0..1000 {
            let t = random_theta(&mut rng, spec.n_params());
            let s = spec.prepare_state(&t).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn states_match_gate_matrix_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for spec in ansatze() {
        for _ in 0..20 {
            let t = random_theta(&mut rng, spec.n_params());
            let mine = spec.prepare_state(&t).unwrap();
            let oracle = oracle_state(&spec, &t);
            for (a, b) in mine.amplitudes().iter().zip(oracle.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn expectations_match_quadratic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for spec in ansatze() {
        for _ in 0..100 {
            let t = random_theta(&mut rng, spec.n_params());
            let w = random_word(&mut rng, spec.n_qubits);
            let psi = oracle_state(&spec, &t);
            let q = (psi.adjoint() * kron_word(&w) * &psi)[(0, 0)];
            assert!(q.im.abs() < 1e-12);
            let mine = spec
                .prepare_state(&t)
                .unwrap()
                .exact_expectation(&PauliString::parse(&w, spec.n_qubits).unwrap())
                .unwrap();
            assert!((mine - q.re).abs() < 1e-9, "{w}: {mine} vs {}", q.re);
            assert!((-1.0..=1.0).contains(&mine));
        }
    }
}

#[test]
fn hand_traced_basis_state() {
    // Ry(pi) flips q0; the first CNOT sets q1 and the second clears it again
    let mut t = [0.0; 6];
    t[0] = std::f64::consts::PI;
    let s = AnsatzSpec::h2_fixed().prepare_state(&t).unwrap();
    let amps = s.amplitudes();
    assert!((amps[1].norm() - 1.0).abs() < 1e-12);
    assert!(amps[0].norm() < 1e-12 && amps[2].norm() < 1e-12 && amps[3].norm() < 1e-12);
    let oracle = oracle_state(&AnsatzSpec::h2_fixed(), &t);
    assert!((oracle[1].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn h2_energy_is_periodic() {
    let h = Hamiltonian::from_words(
        0,
        &[("II", -0.9), ("IZ", 0.4), ("ZI", -0.4), ("ZZ", 0.01), ("XX", 0.18)],
    )
    .unwrap();
    let spec = AnsatzSpec::h2_fixed();
    let energy = |t: &[f64]| -> f64 {
        let s = spec.prepare_state(t).unwrap();
        h.terms()
            .iter()
            .map(|(p, k)| k * s.exact_expectation(p).unwrap())
            .sum()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let t = random_theta(&mut rng, 6);
        for j in 0..6 {
            let mut u = t.clone();
            u[j] += std::f64::consts::TAU;
            assert!((energy(&t) - energy(&u)).abs() < 1e-9);
        }
    }
}

#[test]
fn shot_estimator_is_unbiased_on_xx() {
    let s = StateVector::zero(2);
    let xx = PauliString::parse("XX", 2).unwrap();
    let cfg = ShotConfig::shots(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draws = 10_000;
    let mean: f64 = (0..draws)
        .map(|_| s.sampled_expectation(&xx, &cfg, &mut rng).unwrap())
        .sum::<f64>()
        / draws as f64;
    let se = (1.0 / 1000f64).sqrt() / (draws as f64).sqrt();
    assert!(mean.abs() < 3.0 * se, "mean {mean}, se {se}");
    let zz = PauliString::parse("ZZ", 2).unwrap();
    assert_eq!(s.sampled_expectation(&zz, &cfg, &mut rng).unwrap(), 1.0);
}

#[test]
fn many_shots_approach_damped_exact_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec = AnsatzSpec::h2_fixed();
    let s = spec.prepare_state(&[0.3, 1.1, 2.0, 0.2, 0.9, 1.7]).unwrap();
    for w in ["XX", "ZI", "YY", "ZZ"] {
        let p = PauliString::parse(w, 2).unwrap();
        let e = s.exact_expectation(&p).unwrap();
        for dp in [0.0, 0.1] {
            let cfg = ShotConfig {
                depolarizing_p: dp,
                ..ShotConfig::shots(1_000_000)
            };
            let v = s.sampled_expectation(&p, &cfg, &mut rng).unwrap();
            let sd = (1.0 - e * e).max(0.0).sqrt() / 1000.0;
            assert!((v - e * (1.0 - dp)).abs() < 3.0 * sd + 1e-12, "{w} {v} {e}");
        }
    }
}
