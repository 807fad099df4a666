use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{CompareReport, CostReport, ExperimentError, PointSummary, ResultRow, ROW_HEADER};

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> ExperimentError + '_ {
    move |e| ExperimentError::Io { path: path.to_path_buf(), source: e.into() }
}

/// Gnuplot companion next to a CSV: same stem, `.dat` extension.
pub fn dat_path(csv: &Path) -> PathBuf {
    csv.with_extension("dat")
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Per-trial CSV plus a `.dat` file of per-budget medians.
pub fn write_rows(path: &Path, rows: &[ResultRow], points: &[PointSummary]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(ROW_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.n_target.to_string(),
            r.n_realized.to_string(),
            r.trial.to_string(),
            r.estimate.to_string(),
            r.reference.to_string(),
            r.abs_error.to_string(),
            r.queries.to_string(),
            r.wall_ms.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    let dat = dat_path(path);
    let mut out = create(&dat)?;
    writeln!(out, "# n_target n_realized median_abs_error").map_err(io_err(&dat))?;
    for p in points {
        writeln!(out, "{} {} {:e}", p.n_target, p.n_realized, p.median_abs_error).map_err(io_err(&dat))?;
    }
    out.flush().map_err(io_err(&dat))
}

pub fn write_compare(path: &Path, report: &CompareReport) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["n", "quantum_n_realized", "deterministic", "residual_mc", "plain_mc", "quantum"]).map_err(csv_err(path))?;
    for p in &report.points {
        w.write_record([
            p.n.to_string(),
            p.quantum_n_realized.to_string(),
            p.deterministic.to_string(),
            p.residual_mc.to_string(),
            p.plain_mc.to_string(),
            p.quantum.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    let dat = dat_path(path);
    let mut out = create(&dat)?;
    writeln!(out, "# n quantum_n_realized deterministic residual_mc plain_mc quantum").map_err(io_err(&dat))?;
    for p in &report.points {
        writeln!(out, "{} {} {:e} {:e} {:e} {:e}", p.n, p.quantum_n_realized, p.deterministic, p.residual_mc, p.plain_mc, p.quantum)
            .map_err(io_err(&dat))?;
    }
    out.flush().map_err(io_err(&dat))
}

pub fn write_cost(path: &Path, report: &CostReport) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["n", "n_realized", "level", "len", "budget", "reps", "queries", "qubits", "qubits_with_ancilla", "measurements"])
        .map_err(csv_err(path))?;
    for p in &report.points {
        for l in &p.levels {
            w.write_record([
                p.n.to_string(),
                p.n_realized.to_string(),
                l.l.to_string(),
                l.len.to_string(),
                l.budget.to_string(),
                l.reps.to_string(),
                l.queries.to_string(),
                l.qubits.to_string(),
                l.qubits_with_ancilla.to_string(),
                l.measurements.to_string(),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))?;
    let dat = dat_path(path);
    let mut out = create(&dat)?;
    writeln!(out, "# n n_realized overhead max_qubits qubits_per_log2n measurements stages").map_err(io_err(&dat))?;
    for p in &report.points {
        writeln!(
            out,
            "{} {} {} {} {} {} {}",
            p.n,
            p.n_realized,
            p.overhead(),
            p.max_qubits,
            p.qubits_per_log2n(),
            p.measurements,
            p.stages
        )
        .map_err(io_err(&dat))?;
    }
    out.flush().map_err(io_err(&dat))
}
