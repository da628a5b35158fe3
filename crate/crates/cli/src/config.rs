//! Run configuration: defaults, overlaid by a flat `key = value` file,
//! overlaid by command-line flags.
//!
//! File keys are dotted (`field.theta`); each has a flag twin (`--theta`).
//! Numeric values accept plain floats or simple multiples of pi such as
//! `pi/3`, `2*pi/1000` or `-0.5pi`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use spinberry_core::{FieldConfig, LevelParams, SimulationConfig, StateLabel};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Sweep,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Omega,
    Theta,
    Steps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    /// Grid points from `min` to `max` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let s = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * s,
                    Spacing::Log => self.min * (self.max / self.min).powf(s),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: LevelParams,
    pub field: FieldConfig,
    pub sim: SimulationConfig,
    pub sweep: Option<(Axis, Grid)>,
    pub output_path: Option<PathBuf>,
    pub trajectory_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
    pub tolerance_scale: f64,
    /// Test fixture: run the verify suite with the sign of `J_1` flipped.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub flip_j1: bool,
}

/// Where a setting came from, for error messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag(&'static str),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag(name) => write!(f, "flag {name}"),
        }
    }
}

/// Every accepted key with its flag twin.
pub const KEYS: &[(&str, &str)] = &[
    ("physics.e1", "--e1"),
    ("physics.d", "--d"),
    ("field.efield", "--efield"),
    ("field.theta", "--theta"),
    ("field.omega", "--omega"),
    ("field.phi0", "--phi0"),
    ("sim.periods", "--periods"),
    ("sim.steps", "--steps"),
    ("sim.stride", "--stride"),
    ("sim.state", "--state"),
    ("sweep.axis", "--axis"),
    ("sweep.grid", "--grid"),
    ("output.path", "--out"),
    ("output.format", "--format"),
    ("output.trajectory", "--trajectory"),
    ("verify.seed", "--seed"),
    ("verify.tolerance_scale", "--tolerance-scale"),
];

pub fn flag_for(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, f)| *f)
}

fn key_for_flag(flag: &str) -> Option<&'static str> {
    KEYS.iter().find(|(_, f)| *f == flag).map(|(k, _)| *k)
}

/// Settings collected from all sources; later insertions win.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<&'static str, (String, Origin)>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads a config document. Blank lines and `#` comments are skipped.
    pub fn merge_document(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin::Line(i + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(&origin, line, "expected `key = value`".to_string())
            })?;
            let key = key.trim();
            let known = KEYS
                .iter()
                .map(|(k, _)| *k)
                .find(|k| *k == key)
                .ok_or_else(|| CliError::usage(&origin, key, "unknown key".to_string()))?;
            self.values
                .insert(known, (value.trim().to_string(), origin));
        }
        Ok(())
    }

    /// Records a command-line flag such as `--theta`.
    pub fn merge_flag(&mut self, flag: &'static str, value: &str) -> Result<(), CliError> {
        let key =
            key_for_flag(flag).ok_or_else(|| CliError::Usage(format!("unknown flag {flag}")))?;
        self.values
            .insert(key, (value.to_string(), Origin::Flag(flag)));
        Ok(())
    }

    fn get(&self, key: &'static str) -> Option<&(String, Origin)> {
        self.values.get(key)
    }

    fn parsed<T>(
        &self,
        key: &'static str,
        default: T,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some((raw, origin)) => {
                parse(raw).map_err(|reason| CliError::usage(origin, key, reason))
            }
        }
    }

    fn origin_of(&self, key: &'static str) -> Origin {
        self.get(key)
            .map(|(_, o)| o.clone())
            .unwrap_or(Origin::Flag(flag_for(key).unwrap_or("?")))
    }

    pub fn build(&self, mode: Mode) -> Result<RunConfig, CliError> {
        let e1 = self.parsed("physics.e1", 1.0, parse_real)?;
        let d = self.parsed("physics.d", 1.0, parse_real)?;
        let params = LevelParams::new(e1, d).map_err(|e| self.core_error(e))?;

        let efield = self.parsed("field.efield", 0.5, parse_real)?;
        let theta = self.parsed("field.theta", PI / 3.0, parse_real)?;
        let omega = self.parsed("field.omega", 2.0 * PI / 1000.0, parse_real)?;
        let phi0 = self.parsed("field.phi0", 0.0, parse_real)?;
        self.check("field.efield", efield >= 0.0, "must be non-negative")?;
        self.check(
            "field.theta",
            (0.0..=PI).contains(&theta),
            "must lie in [0, pi]",
        )?;
        let field = FieldConfig::new(efield, theta, omega, phi0).map_err(|e| self.core_error(e))?;

        let periods = self.parsed("sim.periods", 1, parse_count::<u32>)?;
        let steps = self.parsed("sim.steps", 20_000, parse_count::<u32>)?;
        let stride = self.parsed("sim.stride", 1, parse_count::<u32>)?;
        let state = self.parsed("sim.state", StateLabel::Plus1, |s| {
            s.parse::<StateLabel>().map_err(|e| e.to_string())
        })?;
        self.check("sim.periods", periods >= 1, "must be at least 1")?;
        self.check("sim.steps", steps >= 100, "must be at least 100")?;
        self.check(
            "sim.stride",
            stride >= 1 && steps % stride == 0,
            "must be positive and divide sim.steps",
        )?;
        let sim = SimulationConfig::new(periods, steps, stride, state)
            .map_err(|e| CliError::Usage(e.to_string()))?;

        let axis = self.parsed("sweep.axis", None, |s| parse_axis(s).map(Some))?;
        let grid = self.parsed("sweep.grid", None, |s| parse_grid(s).map(Some))?;
        let sweep = match (mode, axis, grid) {
            (Mode::Sweep, Some(a), Some(g)) => {
                self.check_grid(a, &g)?;
                Some((a, g))
            }
            (Mode::Sweep, None, _) => {
                return Err(CliError::Usage(
                    "sweep.axis (--axis) is required for a sweep".to_string(),
                ))
            }
            (Mode::Sweep, _, None) => {
                return Err(CliError::Usage(
                    "sweep.grid (--grid) is required for a sweep".to_string(),
                ))
            }
            _ => None,
        };

        let output_path = self.get("output.path").map(|(s, _)| PathBuf::from(s));
        let trajectory_path = self.get("output.trajectory").map(|(s, _)| PathBuf::from(s));
        let format = self.parsed("output.format", OutputFormat::Csv, |s| match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        })?;
        let seed = self.parsed("verify.seed", 0, parse_count::<u64>)?;
        let tolerance_scale = self.parsed("verify.tolerance_scale", 1.0, parse_real)?;
        self.check(
            "verify.tolerance_scale",
            tolerance_scale > 0.0,
            "must be positive",
        )?;

        Ok(RunConfig {
            mode,
            params,
            field,
            sim,
            sweep,
            output_path,
            trajectory_path,
            format,
            seed,
            tolerance_scale,
            flip_j1: false,
        })
    }

    /// Attributes a validation error from the core crate to its setting.
    fn core_error(&self, e: spinberry_core::Error) -> CliError {
        let key = match &e {
            spinberry_core::Error::InvalidParameter { name, .. } => match *name {
                "e1" => Some("physics.e1"),
                "d" => Some("physics.d"),
                "efield" => Some("field.efield"),
                "theta" => Some("field.theta"),
                "phi" => Some("field.phi0"),
                "omega" => Some("field.omega"),
                _ => None,
            },
            _ => None,
        };
        match key {
            Some(key) => CliError::usage(&self.origin_of(key), key, e.to_string()),
            None => CliError::Usage(e.to_string()),
        }
    }

    fn check(&self, key: &'static str, ok: bool, reason: &str) -> Result<(), CliError> {
        if ok {
            Ok(())
        } else {
            let shown = self.get(key).map(|(v, _)| v.as_str()).unwrap_or("default");
            Err(CliError::usage(
                &self.origin_of(key),
                key,
                format!("value {shown} {reason}"),
            ))
        }
    }

    fn check_grid(&self, axis: Axis, g: &Grid) -> Result<(), CliError> {
        let fail = |reason: &str| {
            Err(CliError::usage(
                &self.origin_of("sweep.grid"),
                "sweep.grid",
                reason.to_string(),
            ))
        };
        match axis {
            Axis::Theta if g.min < 0.0 || g.max > PI => fail("theta grid must lie in [0, pi]"),
            Axis::Steps if g.min < 100.0 => fail("steps grid must start at 100 or more"),
            Axis::Omega if g.min == 0.0 || g.max == 0.0 => fail("omega grid must avoid zero"),
            _ => Ok(()),
        }
    }
}

/// Parses `1.5`, `pi`, `-pi/2`, `2*pi/1000` or `0.5pi`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = compact.to_ascii_lowercase();
    let (num, den) = match lower.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (lower.as_str(), None),
    };
    let numerator = match num.strip_suffix("pi") {
        Some(coeff) => {
            let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
            let k = match coeff {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c
                    .parse::<f64>()
                    .map_err(|_| format!("cannot parse `{s}` as a number"))?,
            };
            k * PI
        }
        None => num
            .parse::<f64>()
            .map_err(|_| format!("cannot parse `{s}` as a number"))?,
    };
    let value = match den {
        None => numerator,
        Some(d) => {
            let d: f64 = d
                .parse()
                .map_err(|_| format!("cannot parse `{s}` as a number"))?;
            numerator / d
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_count<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim()
        .parse::<T>()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    match s {
        "omega" => Ok(Axis::Omega),
        "theta" => Ok(Axis::Theta),
        "steps" => Ok(Axis::Steps),
        other => Err(format!(
            "unknown axis `{other}` (expected omega, theta or steps)"
        )),
    }
}

/// Parses `min:max:count:{lin|log}`.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [min, max, count, spacing] = parts[..] else {
        return Err(format!(
            "grid `{s}` must look like min:max:count:lin or min:max:count:log"
        ));
    };
    let grid = Grid {
        min: parse_real(min)?,
        max: parse_real(max)?,
        count: parse_count(count)?,
        spacing: match spacing {
            "lin" | "linear" => Spacing::Linear,
            "log" => Spacing::Log,
            other => {
                return Err(format!(
                    "unknown grid spacing `{other}` (expected lin or log)"
                ))
            }
        },
    };
    if grid.count < 2 {
        return Err(format!("grid count must be at least 2, got {}", grid.count));
    }
    if grid.spacing == Spacing::Log && (grid.min <= 0.0 || grid.max <= 0.0) {
        return Err("log grids need positive bounds".to_string());
    }
    Ok(grid)
}
