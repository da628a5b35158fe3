use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use spinberry_core::phase::simulate;
use spinberry_core::verify::{run_checks, VerifyOptions, VerifySummary};
use spinberry_core::{GeneratorSet, PhaseReport, SimulationConfig, Trajectory};

use crate::config::{Axis, Mode, RunConfig};
use crate::error::CliError;

/// One result row: the report, or why there is none.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    #[serde(flatten)]
    pub report: Option<PhaseReport>,
    pub status: String,
}

impl Entry {
    fn from_result(result: Result<PhaseReport, CliError>) -> Self {
        match result {
            Ok(report) => Entry {
                report: Some(report),
                status: "ok".to_string(),
            },
            Err(e) => Entry {
                report: None,
                status: e.to_string(),
            },
        }
    }

    pub fn is_ok(&self) -> bool {
        self.report.is_some()
    }
}

#[derive(Debug)]
pub struct SimulateOutcome {
    pub entry: Entry,
    pub trajectory: Option<Trajectory>,
    pub failure: Option<CliError>,
}

pub fn run_simulate(cfg: &RunConfig) -> SimulateOutcome {
    debug_assert_eq!(cfg.mode, Mode::Simulate);
    match simulate(&cfg.params, &cfg.field, &cfg.sim) {
        Ok((traj, report)) => SimulateOutcome {
            entry: Entry::from_result(Ok(report)),
            trajectory: Some(traj),
            failure: None,
        },
        Err(e) => {
            let failure = CliError::from(e);
            SimulateOutcome {
                entry: Entry {
                    report: None,
                    status: failure.to_string(),
                },
                trajectory: None,
                failure: Some(failure),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` pins it.
    pub timestamp: u64,
    pub version: &'static str,
    pub config: RunConfig,
}

impl Metadata {
    pub fn capture(cfg: &RunConfig) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or_else(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        Self {
            timestamp,
            version: env!("CARGO_PKG_VERSION"),
            config: cfg.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: Axis,
    pub axis_values: Vec<f64>,
    pub reports: Vec<Entry>,
    pub metadata: Metadata,
}

impl SweepResult {
    pub fn failed_points(&self) -> usize {
        self.reports.iter().filter(|e| !e.is_ok()).count()
    }
}

/// Runs every grid point (in parallel) and returns rows in axis order.
/// Failed points keep their place with the error as status.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepResult, CliError> {
    let (axis, grid) = cfg
        .sweep
        .ok_or_else(|| CliError::Usage("sweep requires an axis and a grid".to_string()))?;
    let axis_values = grid.values();
    let reports = axis_values
        .par_iter()
        .map(|&v| Entry::from_result(sweep_point(cfg, axis, v)))
        .collect();
    Ok(SweepResult {
        axis,
        axis_values,
        reports,
        metadata: Metadata::capture(cfg),
    })
}

fn sweep_point(cfg: &RunConfig, axis: Axis, value: f64) -> Result<PhaseReport, CliError> {
    let mut field = cfg.field;
    let mut sim = cfg.sim;
    match axis {
        Axis::Omega => field.omega = value,
        Axis::Theta => field.theta = value,
        Axis::Steps => sim.steps_per_period = value.round() as u32,
    }
    field.validate()?;
    let sim = SimulationConfig::new(
        sim.periods,
        sim.steps_per_period,
        sim.record_stride,
        sim.state,
    )?;
    let (_, report) = simulate(&cfg.params, &field, &sim)?;
    Ok(report)
}

pub fn run_verify(cfg: &RunConfig) -> VerifySummary {
    let generators = if cfg.flip_j1 {
        GeneratorSet::spin_one().with_flipped_j1()
    } else {
        GeneratorSet::spin_one()
    };
    run_checks(&VerifyOptions {
        seed: cfg.seed,
        tolerance_scale: cfg.tolerance_scale,
        generators,
        params: cfg.params,
        e_mag: cfg.field.e_mag,
    })
}
