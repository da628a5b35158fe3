//! CSV and JSON rendering.
//!
//! CSV columns, in order: `axis_value, total_phase, dynamic_phase,
//! geometric_phase, predicted_geometric, solid_angle, leakage, norm_defect,
//! status`. Missing values are left empty. JSON uses the report field
//! names unchanged.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use spinberry_core::verify::VerifySummary;
use spinberry_core::Trajectory;

use crate::config::{OutputFormat, RunConfig};
use crate::error::CliError;
use crate::run::{Entry, SweepResult};

#[derive(Serialize)]
struct CsvRow<'a> {
    axis_value: Option<f64>,
    total_phase: Option<f64>,
    dynamic_phase: Option<f64>,
    geometric_phase: Option<f64>,
    predicted_geometric: Option<f64>,
    solid_angle: Option<f64>,
    leakage: Option<f64>,
    norm_defect: Option<f64>,
    status: &'a str,
}

impl<'a> CsvRow<'a> {
    fn new(axis_value: Option<f64>, entry: &'a Entry) -> Self {
        let r = entry.report.as_ref();
        CsvRow {
            axis_value,
            total_phase: r.map(|r| r.total_phase),
            dynamic_phase: r.map(|r| r.dynamic_phase),
            geometric_phase: r.map(|r| r.geometric_phase),
            predicted_geometric: r.map(|r| r.predicted_geometric),
            solid_angle: r.map(|r| r.solid_angle),
            leakage: r.map(|r| r.leakage),
            norm_defect: r.map(|r| r.final_norm_defect),
            status: &entry.status,
        }
    }
}

fn csv_document<'a>(rows: impl IntoIterator<Item = CsvRow<'a>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn json_document<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn render_simulate(format: OutputFormat, entry: &Entry) -> Result<String, CliError> {
    match format {
        OutputFormat::Csv => csv_document([CsvRow::new(None, entry)]),
        OutputFormat::Json => json_document(entry),
    }
}

pub fn render_sweep(format: OutputFormat, result: &SweepResult) -> Result<String, CliError> {
    match format {
        OutputFormat::Csv => csv_document(
            result
                .axis_values
                .iter()
                .zip(&result.reports)
                .map(|(&v, e)| CsvRow::new(Some(v), e)),
        ),
        OutputFormat::Json => json_document(result),
    }
}

/// Plain-text table for the terminal, JSON when asked for.
pub fn render_verify(format: OutputFormat, summary: &VerifySummary) -> Result<String, CliError> {
    if format == OutputFormat::Json {
        return json_document(summary);
    }
    let width = summary
        .checks
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut out = format!(
        "{:<width$}  {:>10}  {:>10}  status\n",
        "check", "tolerance", "defect"
    );
    for c in &summary.checks {
        out.push_str(&format!(
            "{:<width$}  {:>10.1e}  {:>10.2e}  {}\n",
            c.name,
            c.tolerance,
            c.defect,
            if c.passed { "pass" } else { "FAIL" }
        ));
    }
    Ok(out)
}

#[derive(Serialize)]
struct TrajectoryRow {
    time: f64,
    overlap_re: f64,
    overlap_im: f64,
    overlap_abs: f64,
    norm: f64,
}

pub fn render_trajectory(traj: &Trajectory) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for ((&t, z), psi) in traj
        .times
        .iter()
        .zip(&traj.reference_overlaps)
        .zip(&traj.states)
    {
        w.serialize(TrajectoryRow {
            time: t,
            overlap_re: z.re,
            overlap_im: z.im,
            overlap_abs: z.norm(),
            norm: psi.norm(),
        })?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// Writes to the configured output path, or stdout without one.
pub fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.output_path {
        Some(path) => write_file(path, text),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    Ok(fs::write(path, text)?)
}
