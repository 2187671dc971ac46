//! On-disk run records and flat trace tables.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use bois_core::family::PartnerRule;
use bois_core::orchestrator::{RunConfig, RunResult, Timing};
use serde::{Deserialize, Serialize};

use crate::family_file::sha256_hex;

/// Bumped whenever the record layout changes.
pub const SCHEMA_VERSION: u32 = 1;

/// The five scheme names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    None,
    Nn,
    All,
    ImmediateNn,
    ImmediateAll,
}

impl SchemeName {
    pub fn parts(self) -> (Timing, PartnerRule) {
        match self {
            SchemeName::None => (Timing::Deferred, PartnerRule::NoSharing),
            SchemeName::Nn => (Timing::Deferred, PartnerRule::NearestNeighbor),
            SchemeName::All => (Timing::Deferred, PartnerRule::AllToAll),
            SchemeName::ImmediateNn => (Timing::Immediate, PartnerRule::NearestNeighbor),
            SchemeName::ImmediateAll => (Timing::Immediate, PartnerRule::AllToAll),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeName::None => "none",
            SchemeName::Nn => "nn",
            SchemeName::All => "all",
            SchemeName::ImmediateNn => "immediate-nn",
            SchemeName::ImmediateAll => "immediate-all",
        }
    }

    pub fn sharing(self) -> bool {
        self != SchemeName::None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub molecule: String,
    pub family_sha256: String,
    pub x_init_sha256: String,
    pub scheme: SchemeName,
    pub kernel: String,
    pub mode: String,
    pub seed: u64,
    pub iters: u32,
    pub epsilon: f64,
    pub kappa0: f64,
    pub nmax_schedule: u32,
    pub n_init: usize,
    pub acquisition_starts: usize,
    pub hyperparameter_restarts: usize,
    pub restart_distribution: String,
    pub geometry_order: String,
    pub strategy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    pub result: RunResult,
}

/// Hash of the initial points at full precision (little-endian bit patterns).
pub fn x_init_hash(x: &[Vec<f64>]) -> String {
    let mut bytes = Vec::with_capacity(x.len() * x.first().map_or(0, Vec::len) * 8);
    for p in x {
        for v in p {
            bytes.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }
    sha256_hex(&bytes)
}

impl RunRecord {
    pub fn new(
        result: RunResult,
        molecule: &str,
        family_sha256: &str,
        scheme: SchemeName,
        mode: &str,
    ) -> Self {
        let c: &RunConfig = &result.config;
        let metadata = RunMetadata {
            molecule: molecule.to_string(),
            family_sha256: family_sha256.to_string(),
            x_init_sha256: x_init_hash(&result.x_init),
            scheme,
            kernel: format!("{:?}", c.gp.kernel).to_lowercase(),
            mode: mode.to_string(),
            seed: c.scheme.seed,
            iters: c.scheme.n_max,
            epsilon: c.scheme.epsilon,
            kappa0: c.acq.kappa0,
            nmax_schedule: c.acq.n_max,
            n_init: c.scheme.n_init,
            acquisition_starts: c.acq.n_starts,
            hyperparameter_restarts: c.gp.restarts,
            restart_distribution: "log-uniform".into(),
            geometry_order: "ascending".into(),
            strategy: format!("{:?}", c.strategy).to_lowercase(),
        };
        RunRecord {
            schema_version: SCHEMA_VERSION,
            metadata,
            result,
        }
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        match v.get("schema_version").and_then(|x| x.as_u64()) {
            Some(n) if n == SCHEMA_VERSION as u64 => {}
            Some(n) => bail!("unsupported schema version {n} (expected {SCHEMA_VERSION})"),
            None => bail!("not a run record: missing schema_version"),
        }
        Ok(serde_json::from_value(v)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.to_json()?).with_context(|| format!("writing {}", path.display()))
    }
}

/// `geometry_id, energy_eval_index, best_seen, rel_deviation` rows of every geometry.
pub fn write_traces<W: Write>(result: &RunResult, out: W) -> anyhow::Result<usize> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["geometry_id", "energy_eval_index", "best_seen", "rel_deviation"])?;
    let mut rows = 0;
    for g in &result.geometries {
        for (i, best, dev) in g.trace() {
            w.write_record([
                g.geometry_id.to_string(),
                i.to_string(),
                best.to_string(),
                dev.to_string(),
            ])?;
            rows += 1;
        }
    }
    w.flush()?;
    Ok(rows)
}
