//! Flat CSV tables built from one or more run records.

use std::io::Write;

use anyhow::bail;

use crate::experiment::SweepSummary;
use crate::record::RunRecord;

/// Refuses records that were produced from different family files.
pub fn check_same_family(records: &[RunRecord]) -> anyhow::Result<()> {
    let Some(first) = records.first() else {
        bail!("no run files given");
    };
    for r in &records[1..] {
        if r.metadata.family_sha256 != first.metadata.family_sha256 {
            bail!(
                "runs use different families ({} {} vs {} {})",
                first.metadata.molecule,
                &first.metadata.family_sha256[..12.min(first.metadata.family_sha256.len())],
                r.metadata.molecule,
                &r.metadata.family_sha256[..12.min(r.metadata.family_sha256.len())],
            );
        }
    }
    Ok(())
}

/// Traces of every record, prefixed with run identity columns.
pub fn write_merged_traces<W: Write>(records: &[RunRecord], out: W) -> anyhow::Result<usize> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "run",
        "scheme",
        "kernel",
        "seed",
        "geometry_id",
        "energy_eval_index",
        "best_seen",
        "rel_deviation",
    ])?;
    let mut rows = 0;
    for (k, r) in records.iter().enumerate() {
        for g in &r.result.geometries {
            for (i, best, dev) in g.trace() {
                w.write_record([
                    k.to_string(),
                    r.metadata.scheme.as_str().to_string(),
                    r.metadata.kernel.clone(),
                    r.metadata.seed.to_string(),
                    g.geometry_id.to_string(),
                    i.to_string(),
                    best.to_string(),
                    dev.to_string(),
                ])?;
                rows += 1;
            }
        }
    }
    w.flush()?;
    Ok(rows)
}

/// One demand row per record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandRow {
    pub scheme: String,
    pub sharing: bool,
    pub seed: u64,
    pub iterations: u32,
    pub init: u64,
    /// Per-iteration demand when it is the same in every iteration.
    pub per_iteration: Option<u64>,
    pub total: u64,
}

pub fn demand_rows(records: &[RunRecord]) -> Vec<DemandRow> {
    records
        .iter()
        .map(|r| {
            let l = &r.result.ledger;
            let per = &l.per_iteration_pauli_evals;
            let per_iteration = match per.first() {
                Some(&v) if per.iter().all(|&x| x == v) => Some(v),
                _ => None,
            };
            DemandRow {
                scheme: r.metadata.scheme.as_str().to_string(),
                sharing: r.metadata.scheme.sharing(),
                seed: r.metadata.seed,
                iterations: r.result.iterations_run,
                init: l.init_pauli_evals,
                per_iteration,
                total: l.total_pauli_evals,
            }
        })
        .collect()
}

pub fn write_demand<W: Write>(records: &[RunRecord], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "sharing", "seed", "iterations", "init", "per_iteration", "total"])?;
    for d in demand_rows(records) {
        w.write_record([
            d.scheme,
            if d.sharing { "with sharing" } else { "without sharing" }.to_string(),
            d.seed.to_string(),
            d.iterations.to_string(),
            d.init.to_string(),
            d.per_iteration.map(|v| v.to_string()).unwrap_or_default(),
            d.total.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_histogram<W: Write>(summaries: &[SweepSummary], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "kernel", "nmax_schedule", "iteration", "count"])?;
    for s in summaries {
        for (it, n) in &s.histogram {
            w.write_record([
                s.scheme.as_str().to_string(),
                s.kernel.clone(),
                s.nmax_schedule.to_string(),
                it.to_string(),
                n.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_table<W: Write>(summaries: &[SweepSummary], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "kernel",
        "nmax_schedule",
        "repetitions",
        "converged",
        "did_not_converge",
        "mean",
        "median",
    ])?;
    for s in summaries {
        w.write_record([
            s.scheme.as_str().to_string(),
            s.kernel.clone(),
            s.nmax_schedule.to_string(),
            s.iterations.len().to_string(),
            s.converged.to_string(),
            s.did_not_converge.to_string(),
            s.mean.map(|v| v.to_string()).unwrap_or_default(),
            s.median.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
