//! CSV tables for sweeps, comparisons and validation runs.
//!
//! Columns follow the row types' field order. A failed sweep point keeps its
//! key column and leaves the rest empty.

use std::io::Write;
use std::path::Path;

use qnet_alloc_core::experiments::{CompareRow, RowError, SweepRow};
use qnet_alloc_core::validation::CaseOutcome;
use serde::de::DeserializeOwned;

use crate::error::CliError;

pub const SWEEP_HEADER: [&str; 8] = [
    "p1",
    "reservation_cost",
    "expected_on_demand_cost",
    "expected_qubit_cost",
    "expected_bell_cost",
    "total",
    "reserved_count",
    "on_demand_used",
];

pub const COMPARE_HEADER: [&str; 4] = ["on_demand_cost", "proposed_total", "evf_total", "random_mean"];

pub const VALIDATION_HEADER: [&str; 5] = ["index", "milp_objective", "oracle_objective", "matched", "verified"];

pub type RowResult<T> = Result<T, RowError>;

/// Shortest decimal that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn sweep_record(row: &RowResult<SweepRow>) -> Vec<String> {
    match row {
        Ok(r) => vec![
            num(r.p1),
            num(r.reservation_cost),
            num(r.expected_on_demand_cost),
            num(r.expected_qubit_cost),
            num(r.expected_bell_cost),
            num(r.total),
            r.reserved_count.to_string(),
            r.on_demand_used.to_string(),
        ],
        Err(e) => padded(num(e.at), SWEEP_HEADER.len()),
    }
}

fn compare_record(row: &RowResult<CompareRow>) -> Vec<String> {
    match row {
        Ok(r) => vec![
            num(r.on_demand_cost),
            num(r.proposed_total),
            num(r.evf_total),
            num(r.random_mean),
        ],
        Err(e) => padded(num(e.at), COMPARE_HEADER.len()),
    }
}

fn padded(key: String, width: usize) -> Vec<String> {
    let mut record = vec![String::new(); width];
    record[0] = key;
    record
}

fn write_table<W: Write>(out: W, header: &[&str], records: impl Iterator<Item = Vec<String>>) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for record in records {
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(out: W, rows: &[RowResult<SweepRow>]) -> csv::Result<()> {
    write_table(out, &SWEEP_HEADER, rows.iter().map(sweep_record))
}

pub fn write_compare<W: Write>(out: W, rows: &[RowResult<CompareRow>]) -> csv::Result<()> {
    write_table(out, &COMPARE_HEADER, rows.iter().map(compare_record))
}

pub fn write_validation<W: Write>(out: W, outcomes: &[CaseOutcome]) -> csv::Result<()> {
    let records = outcomes.iter().enumerate().map(|(i, o)| {
        vec![
            i.to_string(),
            opt_num(o.milp_objective),
            opt_num(o.oracle_objective),
            o.matched.to_string(),
            o.verified.to_string(),
        ]
    });
    write_table(out, &VALIDATION_HEADER, records)
}

pub fn sweep_csv(rows: &[RowResult<SweepRow>]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_sweep(&mut buf, rows).expect("writing to memory");
    buf
}

pub fn compare_csv(rows: &[RowResult<CompareRow>]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_compare(&mut buf, rows).expect("writing to memory");
    buf
}

pub fn validation_csv(outcomes: &[CaseOutcome]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_validation(&mut buf, outcomes).expect("writing to memory");
    buf
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a table written by this module. Failed rows come back as `None`.
pub fn read_rows<T: DeserializeOwned, R: std::io::Read>(input: R) -> csv::Result<Vec<Option<T>>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    reader
        .records()
        .map(|record| {
            let record = record?;
            if record.iter().skip(1).all(str::is_empty) && record.len() > 1 {
                Ok(None)
            } else {
                record.deserialize(Some(&headers)).map(Some)
            }
        })
        .collect()
}
