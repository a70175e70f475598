//! Results, trace and reconstruction CSV files.

use std::path::{Path, PathBuf};

use crate::diagnostics::write_diagnostics_csv;
use crate::error::{Error, Result};
use crate::io::{csv_err, csv_writer, flush, format_float};

use super::{ExperimentOutcome, ResultRow};

pub const RESULTS_HEADER: [&str; 5] = ["method", "k_star", "time_s", "rel_error", "stop_reason"];
pub const RECONSTRUCTION_HEADER: [&str; 3] = ["k", "series", "value"];

/// Files written by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputPaths {
    pub results: PathBuf,
    pub traces: Vec<PathBuf>,
    pub reconstruction: Option<PathBuf>,
}

/// Writes the results table. `time_s` is left empty unless `record_time` is
/// set, so that repeated runs produce identical files.
pub fn write_results_csv(path: &Path, rows: &[ResultRow], record_time: bool) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(RESULTS_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.k_star.to_string(),
            if record_time {
                format_float(r.time_s)
            } else {
                String::new()
            },
            format_float(r.rel_error),
            r.stop_reason.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    flush(w, path)
}

/// Parses a results table. Missing times read as `NaN`.
pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    if headers.iter().ne(RESULTS_HEADER) {
        return Err(Error::Config(format!(
            "{}: unexpected header {:?}",
            path.display(),
            headers
        )));
    }
    let bad = |what: &str| Error::Config(format!("{}: bad {what}", path.display()));
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        let time = &rec[2];
        rows.push(ResultRow {
            method: rec[0].to_string(),
            k_star: rec[1].parse().map_err(|_| bad("k_star"))?,
            time_s: if time.is_empty() {
                f64::NAN
            } else {
                time.parse().map_err(|_| bad("time_s"))?
            },
            rel_error: rec[3].parse().map_err(|_| bad("rel_error"))?,
            stop_reason: rec[4].parse()?,
        });
    }
    Ok(rows)
}

/// Long-format nodal values: one line per `(node, series)`.
pub fn write_reconstruction_csv(path: &Path, series: &[(&str, &crate::hilbert::Vector)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(RECONSTRUCTION_HEADER).map_err(csv_err(path))?;
    for (name, v) in series {
        for (k, value) in v.iter().enumerate() {
            w.write_record([k.to_string(), name.to_string(), format_float(*value)])
                .map_err(csv_err(path))?;
        }
    }
    flush(w, path)
}

fn file_stem(method: &str) -> String {
    method.replace('/', "_")
}

/// Writes `results.csv`, one `trace_<method>.csv` per run and
/// `reconstruction.csv` into `dir`.
pub fn emit_outputs(outcome: &ExperimentOutcome, dir: &Path, record_time: bool) -> Result<OutputPaths> {
    let results = dir.join("results.csv");
    write_results_csv(&results, &outcome.rows(), record_time)?;
    let mut paths = OutputPaths {
        results,
        ..Default::default()
    };
    if outcome.spec.output.traces {
        for run in &outcome.runs {
            let path = dir.join(format!("trace_{}.csv", file_stem(&run.row.method)));
            write_diagnostics_csv(&path, &run.trace, run.energy.as_deref())?;
            paths.traces.push(path);
        }
    }
    if outcome.spec.output.reconstruction {
        let path = dir.join("reconstruction.csv");
        let mut series = vec![("x0", &outcome.x0), ("xdag", &outcome.xdag)];
        for run in &outcome.runs {
            series.push((run.row.method.as_str(), &run.x));
        }
        write_reconstruction_csv(&path, &series)?;
        paths.reconstruction = Some(path);
    }
    Ok(paths)
}
