//! A family of geometries of one molecule laid out on a rectangular grid.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;
use crate::simulator::AnsatzSpec;

/// How geometries exchange evaluated points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartnerRule {
    NoSharing,
    NearestNeighbor,
    AllToAll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFamily {
    pub molecule: String,
    pub ansatz: AnsatzSpec,
    pub grid_shape: Vec<usize>,
    pub geometries: Vec<Hamiltonian>,
}

impl ProblemFamily {
    /// Checks grid consistency, qubit counts and the ansatz. Geometry ids
    /// must equal their position in the list.
    pub fn new(
        molecule: impl Into<String>,
        ansatz: AnsatzSpec,
        grid_shape: Vec<usize>,
        geometries: Vec<Hamiltonian>,
    ) -> Result<Self> {
        let f = ProblemFamily {
            molecule: molecule.into(),
            ansatz,
            grid_shape,
            geometries,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        self.ansatz.validate()?;
        if self.geometries.is_empty() {
            return Ok(());
        }
        if self.grid_shape.iter().any(|&s| s == 0) {
            return Err(Error::InvalidFamily("grid axis of length zero".into()));
        }
        let cells: usize = self.grid_shape.iter().product();
        if cells != self.geometries.len() {
            return Err(Error::InvalidFamily(format!(
                "grid {:?} has {} cells but the family has {} geometries",
                self.grid_shape,
                cells,
                self.geometries.len()
            )));
        }
        for (i, g) in self.geometries.iter().enumerate() {
            if g.geometry_id() != i {
                return Err(Error::InvalidFamily(format!(
                    "geometry at position {i} has id {}",
                    g.geometry_id()
                )));
            }
            if g.n_qubits() != self.ansatz.n_qubits {
                return Err(Error::InvalidFamily(format!(
                    "geometry {i} acts on {} qubits, ansatz on {}",
                    g.n_qubits(),
                    self.ansatz.n_qubits
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.geometries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geometries.is_empty()
    }

    pub fn geometry(&self, d: usize) -> Result<&Hamiltonian> {
        self.geometries.get(d).ok_or(Error::UnknownGeometry(d))
    }

    /// Row-major multi-index of geometry `d` (last axis fastest).
    pub fn grid_index(&self, d: usize) -> Result<Vec<usize>> {
        if d >= self.len() {
            return Err(Error::UnknownGeometry(d));
        }
        let mut idx = Vec::with_capacity(self.grid_shape.len());
        let mut rest = d;
        for &s in self.grid_shape.iter().rev() {
            idx.push(rest % s);
            rest /= s;
        }
        idx.reverse();
        Ok(idx)
    }

    pub fn union_required(&self) -> BTreeSet<PauliString> {
        self.geometries
            .iter()
            .flat_map(|g| g.terms().iter().map(|(p, _)| *p))
            .collect()
    }

    /// Sharing partners of `d`, ascending.
    pub fn partners(&self, d: usize, rule: PartnerRule) -> Result<Vec<usize>> {
        let own = self.grid_index(d)?;
        Ok(match rule {
            PartnerRule::NoSharing => Vec::new(),
            PartnerRule::AllToAll => (0..self.len()).filter(|&e| e != d).collect(),
            PartnerRule::NearestNeighbor => (0..self.len())
                .filter(|&e| {
                    let other = self.grid_index(e).expect("in range");
                    let diffs: Vec<usize> = own
                        .iter()
                        .zip(&other)
                        .map(|(a, b)| a.abs_diff(*b))
                        .collect();
                    diffs.iter().filter(|&&x| x != 0).count() == 1 && diffs.iter().all(|&x| x <= 1)
                })
                .collect(),
        })
    }
}
