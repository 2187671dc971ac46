//! Hamiltonians as weighted sums of Pauli words.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::PauliString;

/// Largest register for which [`Hamiltonian::dense_matrix`] will allocate.
pub const DENSE_QUBIT_LIMIT: usize = 12;

/// Observable of one geometry: `H = sum_i h_i P_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    geometry_id: usize,
    label: String,
    coords: Vec<f64>,
    n_qubits: usize,
    terms: Vec<(PauliString, f64)>,
}

impl Hamiltonian {
    pub fn new(
        geometry_id: usize,
        label: impl Into<String>,
        coords: Vec<f64>,
        terms: Vec<(PauliString, f64)>,
    ) -> Result<Self> {
        let n_qubits = terms.first().map(|(p, _)| p.n_qubits()).unwrap_or(0);
        let mut seen = BTreeSet::new();
        for (p, c) in &terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch {
                    expected: n_qubits,
                    found: p.n_qubits(),
                });
            }
            if !seen.insert(*p) {
                return Err(Error::DuplicateTerm(p.to_string()));
            }
            if !c.is_finite() {
                return Err(Error::NonFiniteCoefficient(p.to_string()));
            }
        }
        Ok(Hamiltonian {
            geometry_id,
            label: label.into(),
            coords,
            n_qubits,
            terms,
        })
    }

    /// Convenience constructor from textual words, used heavily in tests.
    pub fn from_words(geometry_id: usize, words: &[(&str, f64)]) -> Result<Self> {
        let terms = words
            .iter()
            .map(|(w, c)| Ok((PauliString::parse_any(w)?, *c)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(geometry_id, "", Vec::new(), terms)
    }

    pub fn geometry_id(&self) -> usize {
        self.geometry_id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn coefficient(&self, word: &PauliString) -> Option<f64> {
        self.terms.iter().find(|(p, _)| p == word).map(|(_, c)| *c)
    }

    /// Returns a copy with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut h = self.clone();
        for (_, c) in h.terms.iter_mut() {
            *c *= factor;
        }
        h
    }

    /// The set of words that must be measured to evaluate this Hamiltonian.
    pub fn required_paulis(&self) -> BTreeSet<PauliString> {
        self.terms.iter().map(|(p, _)| *p).collect()
    }

    /// Dense `2^n x 2^n` matrix, row-major.
    pub fn dense_matrix(&self) -> Result<DenseMatrix> {
        if self.n_qubits > DENSE_QUBIT_LIMIT {
            return Err(Error::DenseGuard {
                n_qubits: self.n_qubits,
                limit: DENSE_QUBIT_LIMIT,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (p, c) in &self.terms {
            let x = p.x_mask() as usize;
            let z = p.z_mask() as usize;
            let base = match p.y_count() % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            } * *c;
            for col in 0..dim {
                let row = col ^ x;
                let sign = if (col & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                data[row * dim + col] += base * sign;
            }
        }
        Ok(DenseMatrix { dim, data })
    }

    /// Smallest eigenvalue of the dense matrix.
    pub fn exact_ground_energy(&self) -> Result<f64> {
        let m = self.dense_matrix()?;
        Ok(m.min_eigenvalue())
    }

    /// `sum_i h_i <P_i>` from a table of expectation values.
    pub fn energy_from_expectations(&self, values: &BTreeMap<PauliString, f64>) -> Result<f64> {
        let mut e = 0.0;
        for (p, c) in &self.terms {
            let v = if p.is_identity() {
                1.0
            } else {
                *values
                    .get(p)
                    .ok_or_else(|| Error::MissingPauli(p.to_string()))?
            };
            e += c * v;
        }
        Ok(e)
    }

    /// `1 - phi / pi`, with `phi` the angle between the two coefficient
    /// vectors embedded in the union of their Pauli supports.
    pub fn similarity(&self, other: &Hamiltonian) -> Result<f64> {
        let a: BTreeMap<_, _> = self.terms.iter().copied().collect();
        let b: BTreeMap<_, _> = other.terms.iter().copied().collect();
        let na: f64 = a.values().map(|c| c * c).sum::<f64>();
        let nb: f64 = b.values().map(|c| c * c).sum::<f64>();
        if na == 0.0 || nb == 0.0 {
            return Err(Error::ZeroHamiltonian);
        }
        let inner: f64 = a
            .iter()
            .filter_map(|(p, ca)| b.get(p).map(|cb| ca * cb))
            .sum();
        let cos = (inner / (libm::sqrt(na) * libm::sqrt(nb))).clamp(-1.0, 1.0);
        let phi = libm::acos(cos);
        Ok(1.0 - phi / core::f64::consts::PI)
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol)
        })
    }

    /// Minimum eigenvalue of a Hermitian matrix. Real matrices are diagonalised
    /// directly; complex ones through the real embedding `[[A, -B], [B, A]]`,
    /// whose spectrum is the original one with doubled multiplicities.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim;
        let real = self.data.iter().all(|c| c.im == 0.0);
        let eig = if real {
            let a: Vec<f64> = self.data.iter().map(|c| c.re).collect();
            linalg::symmetric_eigenvalues(a, n)
        } else {
            let m = 2 * n;
            let mut a = vec![0.0; m * m];
            for i in 0..n {
                for j in 0..n {
                    let c = self.get(i, j);
                    a[i * m + j] = c.re;
                    a[(i + n) * m + j + n] = c.re;
                    a[i * m + j + n] = -c.im;
                    a[(i + n) * m + j] = c.im;
                }
            }
            linalg::symmetric_eigenvalues(a, m)
        };
        eig[0]
    }

    /// `<psi| M |psi>` (real part).
    pub fn quadratic_form(&self, psi: &[Complex64]) -> f64 {
        let n = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += self.data[i * n + j] * psi[j];
            }
            acc += psi[i].conj() * row;
        }
        acc.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h2_07() -> Hamiltonian {
        Hamiltonian::from_words(
            4,
            &[
                ("II", -1.04391252),
                ("IZ", 0.42045568),
                ("ZI", -0.42045568),
                ("ZZ", -0.0115074),
                ("XX", 0.17900058),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zz_matrix_is_diagonal() {
        let h = Hamiltonian::from_words(0, &[("ZZ", 1.0)]).unwrap();
        let m = h.dense_matrix().unwrap();
        let diag = [1.0, -1.0, -1.0, 1.0];
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { diag[i] } else { 0.0 };
                assert_eq!(m.get(i, j), Complex64::new(e, 0.0));
            }
        }
    }

    #[test]
    fn identity_term_scales_identity() {
        let h = Hamiltonian::from_words(0, &[("II", 2.5)]).unwrap();
        let m = h.dense_matrix().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 2.5 } else { 0.0 };
                assert_eq!(m.get(i, j).re, e);
            }
        }
    }

    #[test]
    fn y_matrix_convention() {
        // Y = [[0, -i], [i, 0]]
        let h = Hamiltonian::from_words(0, &[("Y", 1.0)]).unwrap();
        let m = h.dense_matrix().unwrap();
        assert_eq!(m.get(0, 1), Complex64::new(0.0, -1.0));
        assert_eq!(m.get(1, 0), Complex64::new(0.0, 1.0));
        // IZ acts on qubit 0 (the low bit of the basis index)
        let h = Hamiltonian::from_words(0, &[("IZ", 1.0)]).unwrap();
        let m = h.dense_matrix().unwrap();
        assert_eq!(m.get(1, 1).re, -1.0);
        assert_eq!(m.get(2, 2).re, 1.0);
    }

    #[test]
    fn ground_energies_of_simple_terms() {
        let h = Hamiltonian::from_words(0, &[("ZZ", 1.0)]).unwrap();
        assert!((h.exact_ground_energy().unwrap() + 1.0).abs() < 1e-14);
        let h = Hamiltonian::from_words(0, &[("X", 2.5)]).unwrap();
        assert!((h.exact_ground_energy().unwrap() + 2.5).abs() < 1e-14);
        // complex path: Y has eigenvalues +-1
        let h = Hamiltonian::from_words(0, &[("XY", 0.7), ("ZI", 0.1)]).unwrap();
        let e = h.exact_ground_energy().unwrap();
        assert!((e + libm::sqrt(0.49 + 0.01)).abs() < 1e-12, "{e}");
    }

    #[test]
    fn dense_guard() {
        let w: String = core::iter::repeat('Z').take(13).collect();
        let h = Hamiltonian::from_words(0, &[(&w, 1.0)]).unwrap();
        assert!(matches!(h.dense_matrix(), Err(Error::DenseGuard { .. })));
    }

    #[test]
    fn energy_assembly() {
        let h = h2_07();
        let mut v = BTreeMap::new();
        for w in ["II", "IZ", "ZI", "ZZ"] {
            v.insert(PauliString::parse_any(w).unwrap(), 1.0);
        }
        v.insert(PauliString::parse_any("XX").unwrap(), 0.0);
        let e = h.energy_from_expectations(&v).unwrap();
        assert!((e - -1.05541992).abs() < 1e-12);

        let mut only_id = BTreeMap::new();
        for (p, _) in h.terms() {
            only_id.insert(*p, if p.is_identity() { 1.0 } else { 0.0 });
        }
        assert_eq!(h.energy_from_expectations(&only_id).unwrap(), -1.04391252);

        v.remove(&PauliString::parse_any("XX").unwrap());
        assert_eq!(
            h.energy_from_expectations(&v).unwrap_err(),
            Error::MissingPauli("XX".into())
        );
    }

    #[test]
    fn similarity_extremes() {
        let h = h2_07();
        assert!((h.similarity(&h).unwrap() - 1.0).abs() < 1e-12);
        assert!(h.similarity(&h.scaled(-1.0)).unwrap().abs() < 1e-12);
        let a = Hamiltonian::from_words(0, &[("XX", 1.0), ("ZZ", 2.0)]).unwrap();
        let b = Hamiltonian::from_words(1, &[("YY", 3.0)]).unwrap();
        assert!((a.similarity(&b).unwrap() - 0.5).abs() < 1e-12);
        let zero = Hamiltonian::from_words(2, &[("YY", 0.0)]).unwrap();
        assert_eq!(a.similarity(&zero).unwrap_err(), Error::ZeroHamiltonian);
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(matches!(
            Hamiltonian::from_words(0, &[("XX", 1.0), ("XX", 2.0)]),
            Err(Error::DuplicateTerm(_))
        ));
        assert!(matches!(
            Hamiltonian::from_words(0, &[("XX", 1.0), ("XXX", 2.0)]),
            Err(Error::QubitMismatch { .. })
        ));
        assert!(matches!(
            Hamiltonian::from_words(0, &[("XX", f64::NAN)]),
            Err(Error::NonFiniteCoefficient(_))
        ));
    }

    #[test]
    fn required_words() {
        let req = h2_07().required_paulis();
        assert_eq!(req.len(), 5);
        assert!(req.contains(&PauliString::identity(2)));
    }
}
