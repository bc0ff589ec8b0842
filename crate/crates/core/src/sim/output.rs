use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::SimConfig;
use super::sweep::{run_sweep_with, PointFailure, ResultRow, SweepOutcome, TraceRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "scheme",
    "ptx_dbm",
    "idd_iteration",
    "ber",
    "sum_rate",
    "frames",
    "bit_errors",
    "seed",
];

/// Paths written by [`run_to_files`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub trace: Option<PathBuf>,
}

impl OutputPaths {
    pub fn for_config(config: &SimConfig) -> Self {
        let csv = config.run.output.clone();
        let sidecar = csv.with_extension("json");
        let trace = config.run.diagnostics.then(|| {
            let stem = csv.file_stem().unwrap_or_default().to_string_lossy();
            csv.with_file_name(format!("{stem}_trace.csv"))
        });
        Self {
            csv,
            sidecar,
            trace,
        }
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a SimConfig,
    csv: &'a Path,
    rows: usize,
    failures: &'a [PointFailure],
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn headerless<W: std::io::Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out)
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Writes rows, header first, to any writer.
pub fn write_rows<W: std::io::Write>(out: W, rows: &[ResultRow]) -> csv::Result<()> {
    let mut w = headerless(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: &Path, traces: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for t in traces {
        w.serialize(t).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs the sweep, appending each finished point to the CSV, then writes
/// the JSON sidecar and, with diagnostics on, the optimiser trace.
pub fn run_to_files(config: &SimConfig) -> Result<(SweepOutcome, OutputPaths)> {
    config.validate()?;
    let paths = OutputPaths::for_config(config);
    let mut w = headerless(create(&paths.csv)?);
    w.write_record(CSV_HEADER).map_err(csv_err(&paths.csv))?;
    let outcome = run_sweep_with(config, |rows| {
        for row in rows {
            w.serialize(row).map_err(csv_err(&paths.csv))?;
        }
        w.flush().map_err(|e| Error::io(&paths.csv, e))
    })?;
    drop(w);

    let sidecar = Sidecar {
        config,
        csv: &paths.csv,
        rows: outcome.rows.len(),
        failures: &outcome.failures,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises");
    std::fs::write(&paths.sidecar, json).map_err(|e| Error::io(&paths.sidecar, e))?;

    if let Some(trace) = &paths.trace {
        write_trace(trace, &outcome.traces)?;
    }
    Ok((outcome, paths))
}
