//! The JSON family format: one file per molecule, parallel `paulis`/`coeffs`
//! arrays per geometry.

use std::path::Path;

use bois_core::family::ProblemFamily;
use bois_core::hamiltonian::Hamiltonian;
use bois_core::pauli::PauliString;
use bois_core::simulator::AnsatzSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum FamilyError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed family document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("geometry {geometry}: field `{field}`: {message}")]
    Geometry {
        geometry: usize,
        field: &'static str,
        message: String,
    },
    #[error("{0}")]
    Family(#[from] bois_core::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryRecord {
    pub id: usize,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub coords: Vec<f64>,
    pub paulis: Vec<String>,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub molecule: String,
    pub ansatz: AnsatzSpec,
    pub grid_shape: Vec<usize>,
    pub geometries: Vec<GeometryRecord>,
}

/// A validated family plus the hash of the bytes it came from.
#[derive(Debug, Clone)]
pub struct LoadedFamily {
    pub family: ProblemFamily,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl FamilyFile {
    pub fn into_family(self) -> Result<ProblemFamily, FamilyError> {
        let n = self.ansatz.n_qubits;
        let mut geometries = Vec::with_capacity(self.geometries.len());
        for (pos, g) in self.geometries.into_iter().enumerate() {
            let err = |field, message: String| FamilyError::Geometry {
                geometry: g.id,
                field,
                message,
            };
            if g.id != pos {
                return Err(err("id", format!("expected {pos} (ids follow file order)")));
            }
            if g.paulis.len() != g.coeffs.len() {
                return Err(err(
                    "coeffs",
                    format!("{} coefficients for {} pauli words", g.coeffs.len(), g.paulis.len()),
                ));
            }
            let mut terms = Vec::with_capacity(g.paulis.len());
            for (w, c) in g.paulis.iter().zip(&g.coeffs) {
                let p = PauliString::parse(w, n).map_err(|e| err("paulis", e.to_string()))?;
                terms.push((p, *c));
            }
            let h = Hamiltonian::new(g.id, g.label.clone(), g.coords.clone(), terms)
                .map_err(|e| err("paulis", e.to_string()))?;
            geometries.push(h);
        }
        Ok(ProblemFamily::new(self.molecule, self.ansatz, self.grid_shape, geometries)?)
    }

    pub fn from_family(f: &ProblemFamily) -> Self {
        FamilyFile {
            molecule: f.molecule.clone(),
            ansatz: f.ansatz,
            grid_shape: f.grid_shape.clone(),
            geometries: f
                .geometries
                .iter()
                .map(|h| GeometryRecord {
                    id: h.geometry_id(),
                    label: h.label().to_string(),
                    coords: h.coords().to_vec(),
                    paulis: h.terms().iter().map(|(p, _)| p.to_string()).collect(),
                    coeffs: h.terms().iter().map(|(_, c)| *c).collect(),
                })
                .collect(),
        }
    }
}

pub fn parse_family(bytes: &[u8]) -> Result<LoadedFamily, FamilyError> {
    let file: FamilyFile = serde_json::from_slice(bytes)?;
    Ok(LoadedFamily {
        family: file.into_family()?,
        sha256: sha256_hex(bytes),
    })
}

pub fn load_family(path: &Path) -> Result<LoadedFamily, FamilyError> {
    let bytes = std::fs::read(path).map_err(|source| FamilyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_family(&bytes)
}
