//! CSV renderings of experiment output.

use std::path::Path;

use super::{ExperimentResult, ReplicateRecord};
use crate::error::{Error, Result};

pub const REPLICATES_CSV_HEADER: [&str; 6] =
    ["replicate", "chi2", "u", "s", "standardized", "collisions"];

pub const SWEEP_CSV_HEADER: [&str; 8] = [
    "n",
    "m",
    "lambda_hat",
    "ks_normal",
    "tv_poisson",
    "prob_at_zero",
    "emp_mean",
    "emp_var",
];

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("CSV output: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
}

/// Per-replicate table, one row per record in the given order.
pub fn replicates_csv(records: &[ReplicateRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPLICATES_CSV_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.replicate.to_string(),
            r.chi2.to_string(),
            r.u.to_string(),
            r.s.to_string(),
            r.standardized.to_string(),
            r.collisions.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// One row per sweep point; `tv_poisson` is empty when not defined.
pub fn sweep_csv(results: &[ExperimentResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_CSV_HEADER).map_err(csv_err)?;
    for r in results {
        w.write_record([
            r.config.n.to_string(),
            r.config.m.to_string(),
            r.lambda_hat.to_string(),
            r.ks_normal.to_string(),
            r.tv_poisson.map(|v| v.to_string()).unwrap_or_default(),
            r.prob_at_zero.to_string(),
            r.empirical_mean.to_string(),
            r.empirical_var.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

fn write(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_replicates_csv(path: &Path, records: &[ReplicateRecord]) -> Result<()> {
    write(path, &replicates_csv(records)?)
}

pub fn write_sweep_csv(path: &Path, results: &[ExperimentResult]) -> Result<()> {
    write(path, &sweep_csv(results)?)
}
