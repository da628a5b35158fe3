use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Mode, RunConfig, Settings};
use crate::error::CliError;
use crate::output::{
    emit, render_simulate, render_sweep, render_trajectory, render_verify, write_file,
};
use crate::run::{run_simulate, run_sweep, run_verify};

#[derive(Parser, Debug)]
#[command(
    name = "spinberry",
    version,
    about = "Berry phase of a spin-one system in a rotating field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Propagate one eigenstate over whole periods and report its phases
    Simulate(RunArgs),
    /// Repeat the simulation over a grid of omega, theta or step counts
    Sweep(RunArgs),
    /// Run the identity and invariance checks
    Verify(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Flat `key = value` configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    e1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    /// Field magnitude
    #[arg(long, allow_hyphen_values = true)]
    efield: Option<String>,
    /// Cone half-angle in [0, pi]
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Angular velocity of the field
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phi0: Option<String>,
    #[arg(long)]
    periods: Option<String>,
    /// Integration steps per period
    #[arg(long)]
    steps: Option<String>,
    /// Record every n-th step
    #[arg(long)]
    stride: Option<String>,
    /// Initial eigenstate: +1, 0, -1 or 00
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// Sweep axis: omega, theta or steps
    #[arg(long)]
    axis: Option<String>,
    /// min:max:count:{lin|log}
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Also write the recorded overlaps of a single simulation as CSV
    #[arg(long)]
    trajectory: Option<String>,
    /// Seed for the random draws of the verify suite
    #[arg(long)]
    seed: Option<String>,
    /// Multiply every verify tolerance by this factor
    #[arg(long = "tolerance-scale")]
    tolerance_scale: Option<String>,
    #[arg(long = "inject-j1-flip", hide = true)]
    inject_j1_flip: bool,
}

impl RunArgs {
    fn flags(&self) -> [(&'static str, &Option<String>); 17] {
        [
            ("--e1", &self.e1),
            ("--d", &self.d),
            ("--efield", &self.efield),
            ("--theta", &self.theta),
            ("--omega", &self.omega),
            ("--phi0", &self.phi0),
            ("--periods", &self.periods),
            ("--steps", &self.steps),
            ("--stride", &self.stride),
            ("--state", &self.state),
            ("--axis", &self.axis),
            ("--grid", &self.grid),
            ("--out", &self.out),
            ("--format", &self.format),
            ("--trajectory", &self.trajectory),
            ("--seed", &self.seed),
            ("--tolerance-scale", &self.tolerance_scale),
        ]
    }

    fn into_config(self, mode: Mode) -> Result<RunConfig, CliError> {
        let mut settings = Settings::new();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            settings.merge_document(&text)?;
        }
        for (flag, value) in self.flags() {
            if let Some(v) = value {
                settings.merge_flag(flag, v)?;
            }
        }
        let mut cfg = settings.build(mode)?;
        cfg.flip_j1 = self.inject_j1_flip;
        Ok(cfg)
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{e}");
            return 1;
        }
        Err(e) => {
            // --help and --version
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    let (mode, args) = match cli.command {
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Verify(a) => (Mode::Verify, a),
    };
    match args
        .into_config(mode)
        .and_then(|cfg| dispatch(&cfg, stdout, stderr))
    {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "spinberry: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    match cfg.mode {
        Mode::Simulate => {
            let outcome = run_simulate(cfg);
            emit(cfg, &render_simulate(cfg.format, &outcome.entry)?, stdout)?;
            if let (Some(path), Some(traj)) = (&cfg.trajectory_path, &outcome.trajectory) {
                write_file(path, &render_trajectory(traj)?)?;
            }
            outcome.failure.map_or(Ok(()), Err)
        }
        Mode::Sweep => {
            let result = run_sweep(cfg)?;
            emit(cfg, &render_sweep(cfg.format, &result)?, stdout)?;
            let failed = result.failed_points();
            if failed > 0 {
                writeln!(
                    stderr,
                    "spinberry: {failed} of {} grid points failed; see the status column",
                    result.reports.len()
                )?;
            }
            Ok(())
        }
        Mode::Verify => {
            let summary = run_verify(cfg);
            emit(cfg, &render_verify(cfg.format, &summary)?, stdout)?;
            let failed: Vec<_> = summary.failures().map(|c| c.name).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                writeln!(stderr, "spinberry: failing checks: {}", failed.join(", "))?;
                Err(CliError::VerifyFailed {
                    failed: failed.len(),
                })
            }
        }
    }
}
