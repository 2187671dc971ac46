//! Statevector preparation for the two ansatz circuits and Pauli expectation
//! estimation, exact or shot-sampled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnsatzKind {
    /// Two-qubit circuit: Ry layer, CNOT, Ry layer, CNOT, Ry layer.
    H2Fixed,
    /// Ry layers separated by reverse-linear CNOT cascades.
    RealAmplitudes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub n_qubits: usize,
    #[serde(default)]
    pub reps: usize,
}

impl AnsatzSpec {
    pub fn h2_fixed() -> Self {
        AnsatzSpec {
            kind: AnsatzKind::H2Fixed,
            n_qubits: 2,
            reps: 0,
        }
    }

    pub fn real_amplitudes(n_qubits: usize, reps: usize) -> Self {
        AnsatzSpec {
            kind: AnsatzKind::RealAmplitudes,
            n_qubits,
            reps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            AnsatzKind::H2Fixed if self.n_qubits != 2 => Err(Error::InvalidAnsatz(format!(
                "H2Fixed acts on 2 qubits, not {}",
                self.n_qubits
            ))),
            AnsatzKind::RealAmplitudes if self.n_qubits == 0 || self.n_qubits > 24 => Err(
                Error::InvalidAnsatz(format!("unsupported register of {} qubits", self.n_qubits)),
            ),
            _ => Ok(()),
        }
    }

    pub fn n_params(&self) -> usize {
        match self.kind {
            AnsatzKind::H2Fixed => 6,
            AnsatzKind::RealAmplitudes => self.n_qubits * (self.reps + 1),
        }
    }

    /// Applies the circuit to `|0...0>`.
    pub fn prepare_state(&self, theta: &[f64]) -> Result<StateVector> {
        self.validate()?;
        if theta.len() != self.n_params() {
            return Err(Error::ParameterCount {
                expected: self.n_params(),
                found: theta.len(),
            });
        }
        if let Some(i) = theta.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFiniteParameter(i));
        }
        let mut s = StateVector::zero(self.n_qubits);
        match self.kind {
            AnsatzKind::H2Fixed => {
                s.ry(0, theta[0]);
                s.ry(1, theta[1]);
                s.cnot(0, 1);
                s.ry(0, theta[2]);
                s.ry(1, theta[3]);
                s.cnot(0, 1);
                s.ry(0, theta[4]);
                s.ry(1, theta[5]);
            }
            AnsatzKind::RealAmplitudes => {
                let n = self.n_qubits;
                for q in 0..n {
                    s.ry(q, theta[q]);
                }
                for r in 1..=self.reps {
                    for c in (0..n.saturating_sub(1)).rev() {
                        s.cnot(c, c + 1);
                    }
                    for q in 0..n {
                        s.ry(q, theta[n * r + q]);
                    }
                }
            }
        }
        Ok(s)
    }
}

/// Amplitudes over the computational basis; bit `q` of the index is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidAnsatz(format!(
                "amplitude vector of length {len}"
            )));
        }
        Ok(StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>())
    }

    fn ry(&mut self, q: usize, angle: f64) {
        let c = libm::cos(angle / 2.0);
        let s = libm::sin(angle / 2.0);
        let bit = 1usize << q;
        for b in 0..self.amps.len() {
            if b & bit == 0 {
                let a0 = self.amps[b];
                let a1 = self.amps[b | bit];
                self.amps[b] = a0 * c - a1 * s;
                self.amps[b | bit] = a0 * s + a1 * c;
            }
        }
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let cb = 1usize << control;
        let tb = 1usize << target;
        for b in 0..self.amps.len() {
            if b & cb != 0 && b & tb == 0 {
                self.amps.swap(b, b | tb);
            }
        }
    }

    /// `<s|P|s>`. The imaginary residue must vanish for a Hermitian word.
    pub fn exact_expectation(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                state: self.n_qubits,
                word: p.n_qubits(),
            });
        }
        if p.is_identity() {
            return Ok(1.0);
        }
        let x = p.x_mask() as usize;
        let z = p.z_mask() as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in self.amps.iter().enumerate() {
            let v = self.amps[b ^ x].conj() * a;
            if (b & z).count_ones() % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        // multiply by i^{#Y}
        let acc = match p.y_count() % 4 {
            0 => acc,
            1 => Complex64::new(-acc.im, acc.re),
            2 => -acc,
            _ => Complex64::new(acc.im, -acc.re),
        };
        debug_assert!(acc.im.abs() < 1e-10, "imaginary residue {}", acc.im);
        Ok(acc.re.clamp(-1.0, 1.0))
    }

    /// Estimate of `<P>` under `cfg`: a binomial draw over the two
    /// eigenspaces of the word, damped by the global depolarising factor.
    pub fn sampled_expectation<R: Rng + ?Sized>(
        &self,
        p: &PauliString,
        cfg: &ShotConfig,
        rng: &mut R,
    ) -> Result<f64> {
        let e = self.exact_expectation(p)?;
        if p.is_identity() {
            return Ok(1.0);
        }
        let damp = 1.0 - cfg.depolarizing_p;
        match cfg.shots {
            Shots::Exact => Ok(e * damp),
            Shots::Count(n) => {
                let q = ((1.0 + e) / 2.0).clamp(0.0, 1.0);
                let k = Binomial::new(n as u64, q)
                    .expect("probability clamped to [0, 1]")
                    .sample(rng);
                Ok((2.0 * k as f64 / n as f64 - 1.0) * damp)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shots {
    Exact,
    Count(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotConfig {
    pub shots: Shots,
    pub depolarizing_p: f64,
}

impl ShotConfig {
    pub const EXACT: ShotConfig = ShotConfig {
        shots: Shots::Exact,
        depolarizing_p: 0.0,
    };

    pub fn shots(n: u32) -> Self {
        assert!(n >= 1, "at least one shot");
        ShotConfig {
            shots: Shots::Count(n),
            depolarizing_p: 0.0,
        }
    }

    pub fn shot_count(&self) -> u64 {
        match self.shots {
            Shots::Exact => 0,
            Shots::Count(n) => n as u64,
        }
    }
}
