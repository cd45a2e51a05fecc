//! Command-line front end: configuration, dispatch and CSV output.

pub mod commands;
pub mod config;
pub mod csvout;
mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Parser};

pub use commands::{run, Command, Output};
pub use config::{parse_config, parse_config_with, RunConfig};
pub use error::{CliError, ConfigError};

#[derive(Debug, Parser)]
#[command(name = "iontrap", version, about = "Decoherence estimates for linear ion-trap quantum computers")]
#[command(group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
pub struct Args {
    /// What to compute.
    #[arg(value_enum)]
    pub command: Command,
    /// Configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Bundled configuration (`ba_example`).
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Write CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Flags that replace the matching configuration keys.
#[derive(Debug, Default, clap::Args)]
pub struct Overrides {
    /// [trap] n_ions
    #[arg(long)]
    pub n_ions: Option<String>,
    /// [species] multipole (E1 or E2)
    #[arg(long)]
    pub multipole: Option<String>,
    /// [species] tau_s_s
    #[arg(long)]
    pub tau_s: Option<String>,
    /// [model] continuum (dubin or nearest-neighbor)
    #[arg(long)]
    pub model: Option<String>,
    /// [model] qsq_constant
    #[arg(long)]
    pub qsq_constant: Option<String>,
    /// [sums] exponent
    #[arg(long)]
    pub exponent: Option<String>,
    /// [continuum] samples
    #[arg(long)]
    pub samples: Option<String>,
    /// [adiabatic] eps_over_omega0
    #[arg(long)]
    pub eps: Option<String>,
    /// [adiabatic] rate_over_omega0
    #[arg(long)]
    pub rate: Option<String>,
    /// [adiabatic] omega0_t_end
    #[arg(long)]
    pub t_end: Option<String>,
    /// [adiabatic] dt_omega0
    #[arg(long)]
    pub dt: Option<String>,
    /// [adiabatic] store_every
    #[arg(long)]
    pub store_every: Option<String>,
    /// [decohere] mode (discrete-sum or closed-form)
    #[arg(long)]
    pub mode: Option<String>,
    /// [scaling] policy (fixed-voltage or fixed-spacing)
    #[arg(long)]
    pub policy: Option<String>,
    /// [scaling] n_min
    #[arg(long)]
    pub n_min: Option<String>,
    /// [scaling] n_max
    #[arg(long)]
    pub n_max: Option<String>,
    /// [scaling] points_per_decade
    #[arg(long)]
    pub points_per_decade: Option<String>,
    /// [scaling] s0_target_m
    #[arg(long)]
    pub s0_target: Option<String>,
}

impl Overrides {
    pub fn entries(&self) -> Vec<config::Override> {
        let pairs: [(&'static str, &'static str, &Option<String>); 18] = [
            ("trap", "n_ions", &self.n_ions),
            ("species", "multipole", &self.multipole),
            ("species", "tau_s_s", &self.tau_s),
            ("model", "continuum", &self.model),
            ("model", "qsq_constant", &self.qsq_constant),
            ("sums", "exponent", &self.exponent),
            ("continuum", "samples", &self.samples),
            ("adiabatic", "eps_over_omega0", &self.eps),
            ("adiabatic", "rate_over_omega0", &self.rate),
            ("adiabatic", "omega0_t_end", &self.t_end),
            ("adiabatic", "dt_omega0", &self.dt),
            ("adiabatic", "store_every", &self.store_every),
            ("decohere", "mode", &self.mode),
            ("scaling", "policy", &self.policy),
            ("scaling", "n_min", &self.n_min),
            ("scaling", "n_max", &self.n_max),
            ("scaling", "points_per_decade", &self.points_per_decade),
            ("scaling", "s0_target_m", &self.s0_target),
        ];
        pairs.into_iter().filter_map(|(s, k, v)| v.clone().map(|v| (s, k, v))).collect()
    }
}

/// Loads the configuration named by `args`, runs the command and writes its output.
pub fn execute(args: &Args, stdout: &mut dyn Write) -> Result<Vec<String>, CliError> {
    let text = match (&args.config, &args.preset) {
        (Some(path), _) => {
            std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?
        }
        (None, Some(name)) => config::preset(name)
            .ok_or_else(|| CliError::Usage(format!("unknown preset `{name}` (available: ba_example)")))?
            .to_string(),
        (None, None) => return Err(CliError::Usage("one of --config or --preset is required".into())),
    };
    let cfg = parse_config_with(&text, &args.overrides.entries())?;
    let output = run(args.command, &cfg)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &output.csv).map_err(|source| CliError::Io { path: path.clone(), source })?
        }
        None => stdout
            .write_all(output.csv.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    Ok(output.warnings)
}

/// Full process behaviour; returns the exit code.
pub fn main_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{e}");
            return 1;
        }
        Err(e) => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    match execute(&args, stdout) {
        Ok(warnings) => {
            for w in warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
