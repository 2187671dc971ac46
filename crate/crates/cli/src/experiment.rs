//! Turning command-line knobs into run configurations, and seeded sweeps.

use std::collections::BTreeMap;

use bois_core::gp::KernelKind;
use bois_core::orchestrator::{self, RunConfig, SchemeConfig, ShotSchedule, Strategy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::family_file::LoadedFamily;
use crate::record::{RunRecord, SchemeName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Shots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    Matern52,
    Rbf,
}

impl From<KernelName> for KernelKind {
    fn from(k: KernelName) -> Self {
        match k {
            KernelName::Matern52 => KernelKind::Matern52,
            KernelName::Rbf => KernelKind::Rbf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyName {
    Bo,
    Random,
}

/// Knobs shared by `run` and `sweep`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knobs {
    pub kernel: KernelName,
    pub mode: Mode,
    pub iters: u32,
    /// Defaults to 1e-3 in exact mode and 2e-2 with shot noise.
    pub epsilon: Option<f64>,
    pub kappa0: f64,
    pub nmax_schedule: u32,
    pub n_init: usize,
    pub strategy: StrategyName,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            kernel: KernelName::Matern52,
            mode: Mode::Exact,
            iters: 100,
            epsilon: None,
            kappa0: 1.0,
            nmax_schedule: 100,
            n_init: 30,
            strategy: StrategyName::Bo,
        }
    }
}

impl Knobs {
    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(match self.mode {
            Mode::Exact => 1e-3,
            Mode::Shots => 2e-2,
        })
    }

    pub fn mode_str(&self) -> &'static str {
        match self.mode {
            Mode::Exact => "exact",
            Mode::Shots => "shots",
        }
    }

    pub fn run_config(&self, scheme: SchemeName, seed: u64) -> RunConfig {
        let (timing, partners) = scheme.parts();
        let mut s = SchemeConfig::new(timing, partners);
        s.n_max = self.iters;
        s.epsilon = self.epsilon();
        s.seed = seed;
        s.n_init = self.n_init;
        s.shots = match self.mode {
            Mode::Exact => ShotSchedule::EXACT,
            Mode::Shots => ShotSchedule::standard(),
        };
        let mut c = RunConfig::new(s, self.kernel.into());
        c.acq.kappa0 = self.kappa0;
        c.acq.n_max = self.nmax_schedule;
        c.strategy = match self.strategy {
            StrategyName::Bo => Strategy::Bayesian,
            StrategyName::Random => Strategy::Random,
        };
        c
    }
}

pub fn run_one(
    family: &LoadedFamily,
    references: &[f64],
    scheme: SchemeName,
    knobs: &Knobs,
    seed: u64,
) -> anyhow::Result<RunRecord> {
    let config = knobs.run_config(scheme, seed);
    let result = orchestrator::run_with_references(&family.family, config, references.to_vec())?;
    Ok(RunRecord::new(
        result,
        &family.family.molecule,
        &family.sha256,
        scheme,
        knobs.mode_str(),
    ))
}

/// Runs every scheme for seeds `base..base + reps`. Repetition `k` of every
/// scheme shares its initial points.
pub fn sweep(
    family: &LoadedFamily,
    references: &[f64],
    schemes: &[SchemeName],
    knobs: &Knobs,
    base_seed: u64,
    reps: u64,
) -> anyhow::Result<Vec<RunRecord>> {
    let jobs: Vec<(SchemeName, u64)> = schemes
        .iter()
        .flat_map(|&s| (0..reps).map(move |k| (s, base_seed + k)))
        .collect();
    jobs.par_iter()
        .map(|&(s, seed)| run_one(family, references, s, knobs, seed))
        .collect()
}

/// Iteration-of-convergence statistics over one scheme's repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub scheme: SchemeName,
    pub kernel: String,
    pub nmax_schedule: u32,
    pub seeds: Vec<u64>,
    /// `None` where the run hit the iteration cap.
    pub iterations: Vec<Option<u32>>,
    pub converged: usize,
    pub did_not_converge: usize,
    /// Over converged repetitions only.
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub total_pauli_evals: Vec<u64>,
    /// `(iteration, count)` over converged repetitions.
    pub histogram: Vec<(u32, usize)>,
}

impl SweepSummary {
    pub fn from_records(records: &[&RunRecord]) -> anyhow::Result<Self> {
        let first = records.first().ok_or_else(|| anyhow::anyhow!("no runs to summarise"))?;
        let iterations: Vec<Option<u32>> = records.iter().map(|r| r.result.iteration_of_convergence).collect();
        let mut done: Vec<u32> = iterations.iter().flatten().copied().collect();
        done.sort_unstable();
        let mean = (!done.is_empty()).then(|| done.iter().map(|&v| v as f64).sum::<f64>() / done.len() as f64);
        let median = (!done.is_empty()).then(|| {
            let k = done.len();
            if k % 2 == 1 {
                done[k / 2] as f64
            } else {
                (done[k / 2 - 1] as f64 + done[k / 2] as f64) / 2.0
            }
        });
        let mut hist = BTreeMap::new();
        for &v in &done {
            *hist.entry(v).or_insert(0usize) += 1;
        }
        Ok(SweepSummary {
            scheme: first.metadata.scheme,
            kernel: first.metadata.kernel.clone(),
            nmax_schedule: first.metadata.nmax_schedule,
            seeds: records.iter().map(|r| r.metadata.seed).collect(),
            converged: done.len(),
            did_not_converge: iterations.len() - done.len(),
            iterations,
            mean,
            median,
            total_pauli_evals: records.iter().map(|r| r.result.ledger.total_pauli_evals).collect(),
            histogram: hist.into_iter().collect(),
        })
    }
}

/// One summary per scheme, in the order the schemes first appear.
pub fn summarise(records: &[RunRecord]) -> anyhow::Result<Vec<SweepSummary>> {
    let mut order: Vec<(SchemeName, String, u32)> = Vec::new();
    for r in records {
        let key = (r.metadata.scheme, r.metadata.kernel.clone(), r.metadata.nmax_schedule);
        if !order.contains(&key) {
            order.push(key);
        }
    }
    order
        .iter()
        .map(|key| {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| (r.metadata.scheme, r.metadata.kernel.clone(), r.metadata.nmax_schedule) == *key)
                .collect();
            SweepSummary::from_records(&group)
        })
        .collect()
}
