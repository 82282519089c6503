//! CSV output and companion plot-data files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::experiment::{CellResult, ExperimentReport};

pub const COLUMNS: [&str; 15] = [
    "experiment_id",
    "model",
    "statistic",
    "n",
    "alpha",
    "p",
    "m",
    "seed",
    "delta_hat",
    "delta_band",
    "nn_total",
    "nn_method",
    "bound_core",
    "ratio",
    "degenerate_count",
];

pub const RATE_COLUMNS: [&str; 3] = ["ln_n", "ln_delta_hat", "ln_bound_core"];
pub const SHARPNESS_COLUMNS: [&str; 3] = ["alpha", "shift", "prediction"];

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn record(config: &ExperimentConfig, c: &CellResult) -> [String; 15] {
    let e = &c.eval;
    [
        config.experiment_id.clone(),
        c.cell.spec.label(),
        config.statistic.name().to_string(),
        c.cell.n.to_string(),
        c.cell.alpha.map(fmt_f64).unwrap_or_default(),
        fmt_f64(e.p),
        config.m.to_string(),
        config.seed.to_string(),
        fmt_f64(e.delta_hat),
        fmt_f64(e.delta_band),
        fmt_f64(e.nn.total),
        e.nn.method.name().to_string(),
        fmt_f64(e.bound_core),
        fmt_f64(e.ratio),
        c.degenerate_count.to_string(),
    ]
}

pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(COLUMNS)?;
    for c in &report.cells {
        w.write_record(record(&report.config, c))?;
    }
    w.flush().map_err(|e| LabError::Csv(e.into()))?;
    Ok(())
}

pub fn csv_bytes(report: &ExperimentReport) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(report, &mut buf)?;
    Ok(buf)
}

pub fn write_csv_file(report: &ExperimentReport, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| LabError::io(path, e))?;
    write_csv(report, BufWriter::new(f)).map_err(|e| match e {
        LabError::Csv(c) if c.is_io_error() => LabError::io(path, std::io::Error::other(c.to_string())),
        other => other,
    })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Writes `<stem>.rate.csv` (every cell) and `<stem>.sharpness.csv` (cells
/// with an α) next to `output`, returning both paths.
pub fn emit_plot_data(report: &ExperimentReport, output: &Path) -> Result<(PathBuf, PathBuf)> {
    let rate_path = with_suffix(output, "rate.csv");
    let sharp_path = with_suffix(output, "sharpness.csv");
    let rows = |cols: [&str; 3], data: Vec<[f64; 3]>, path: &Path| -> Result<()> {
        let f = File::create(path).map_err(|e| LabError::io(path, e))?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(BufWriter::new(f));
        let io = |e: csv::Error| LabError::io(path, std::io::Error::other(e.to_string()));
        w.write_record(cols).map_err(io)?;
        for r in data {
            w.write_record(r.map(fmt_f64)).map_err(io)?;
        }
        w.flush().map_err(|e| LabError::io(path, e))
    };
    let rate = report
        .cells
        .iter()
        .map(|c| [(c.cell.n as f64).ln(), c.eval.delta_hat.ln(), c.eval.bound_core.ln()])
        .collect();
    rows(RATE_COLUMNS, rate, &rate_path)?;
    let sharp = report
        .cells
        .iter()
        .filter_map(|c| {
            c.cell
                .alpha
                .map(|a| [a, c.p_nonpositive - 0.5, sharpness_prediction(a)])
        })
        .collect();
    rows(SHARPNESS_COLUMNS, sharp, &sharp_path)?;
    Ok((rate_path, sharp_path))
}

/// Leading-order shift `sqrt(alpha) / (4 sqrt(2 pi))` of `P(W <= 0)` above 1/2.
pub fn sharpness_prediction(alpha: f64) -> f64 {
    alpha.sqrt() / (4.0 * (2.0 * std::f64::consts::PI).sqrt())
}

/// Run metadata kept out of the CSV: config echo, workers, wall-clock.
pub fn metadata(report: &ExperimentReport) -> String {
    format!(
        "{}workers = {}\nelapsed_seconds = {:.3}\n",
        report.config.to_text(),
        report.workers,
        report.elapsed.as_secs_f64()
    )
}

pub fn write_metadata(report: &ExperimentReport, output: &Path) -> Result<PathBuf> {
    let path = with_suffix(output, "meta.txt");
    std::fs::write(&path, metadata(report)).map_err(|e| LabError::io(&path, e))?;
    Ok(path)
}

/// One row of a previously written report, as read back for rate fits.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment_id: String,
    pub model: String,
    pub statistic: String,
    pub n: usize,
    pub alpha: Option<f64>,
    pub p: f64,
    pub delta_hat: f64,
    pub bound_core: f64,
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>> {
    let f = File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut r = csv::Reader::from_reader(f);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != COLUMNS {
        return Err(LabError::config(
            "report",
            format!("{}: unexpected header", path.display()),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |col: &str| LabError::config("report", format!("{}: row {}: bad `{col}`", path.display(), i + 1));
        let num = |idx: usize| rec[idx].parse::<f64>().map_err(|_| bad(COLUMNS[idx]));
        rows.push(ReportRow {
            experiment_id: rec[0].to_string(),
            model: rec[1].to_string(),
            statistic: rec[2].to_string(),
            n: rec[3].parse().map_err(|_| bad("n"))?,
            alpha: if rec[4].is_empty() { None } else { Some(num(4)?) },
            p: num(5)?,
            delta_hat: num(8)?,
            bound_core: num(12)?,
        });
    }
    Ok(rows)
}
