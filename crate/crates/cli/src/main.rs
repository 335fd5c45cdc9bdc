//! `dmojc`: spectra, evolutions, concurrence-purity data, validation and
//! parameter mappings for the Dirac-Moshinsky oscillator and its
//! Jaynes-Cummings limits.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input or I/O failure.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dmojc::qnums::HalfInt;

use config::{BranchArg, Format, PartialConfig, RunConfig};
use output::Output;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<dmojc::Error> for CliError {
    fn from(e: dmojc::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "dmojc", version, about = "Dirac-Moshinsky oscillator and Jaynes-Cummings toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Block energies of the single-isospin oscillator, numeric against closed form.
    Spectrum,
    /// Two-isospin evolution in the N=0 subspace: populations, purities, concurrence.
    Evolve,
    /// Concurrence-purity trajectory and the zero-detuning frontier curves.
    Cpplane,
    /// Run the acceptance grid; exits 1 if any check fails.
    Validate,
    /// Jaynes-Cummings parameters for every dimensionality.
    Map,
}

/// Flags shared by every subcommand. Unset flags fall back to `--config`,
/// then to the defaults shown.
#[derive(Args, Debug, Default)]
struct Flags {
    /// Spatial dimension of the oscillator, 1, 2 or 3 [default: 1]
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=3))]
    dim: Option<u8>,
    /// Level family for 3+1 queries [default: infinite]
    #[arg(long, global = true, value_enum)]
    branch: Option<BranchArg>,
    /// Total angular momentum for 3+1, e.g. 1/2 or 1.5 [default: 1/2]
    #[arg(long, global = true)]
    j: Option<String>,
    /// Oscillator-isospin coupling [default: 1]
    #[arg(long, global = true, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Oscillator-field coupling [default: 1]
    #[arg(long, global = true, allow_negative_numbers = true)]
    chi: Option<f64>,
    /// Rest energy mc^2 [default: 1]
    #[arg(long, global = true, allow_negative_numbers = true)]
    mc2: Option<f64>,
    /// Field splitting gamma [default: 1]
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Initial-state angle alpha in radians [default: 0]
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// End of the time grid [default: 30]
    #[arg(long, global = true, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// Number of time points, endpoints included [default: 3001]
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Chain cutoff: highest n for spectrum, truncation for validate [default: 24]
    #[arg(long, global = true, visible_alias = "max-n")]
    nmax: Option<u32>,
    /// Output format [default: csv]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// JSON file with any of the settings above
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Corrupt the N=0 block before the oracle comparison (negative control)
    #[arg(long, global = true, hide = true)]
    inject_fault: bool,
}

impl Flags {
    fn partial(&self) -> Result<PartialConfig, CliError> {
        let j = match &self.j {
            Some(s) => Some(
                s.parse::<HalfInt>()
                    .map_err(|e| CliError::Usage(format!("--j {s}: {e}")))?,
            ),
            None => None,
        };
        Ok(PartialConfig {
            dim: self.dim,
            branch: self.branch.map(Into::into),
            j,
            eta: self.eta,
            chi: self.chi,
            mc2: self.mc2,
            gamma: self.gamma,
            alpha: self.alpha,
            t_max: self.tmax,
            t_steps: self.steps,
            nmax: self.nmax,
            format: self.format,
            output: self.output.clone(),
        })
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => PartialConfig::from_file(path)?,
            None => PartialConfig::default(),
        };
        self.partial()?.over(file).resolve()
    }
}

fn render(cmd: Command, cfg: &RunConfig, out: &Output) -> Result<String, CliError> {
    match cfg.format {
        Format::Csv => Ok(output::to_csv(out)),
        Format::Json => Ok(output::to_json(cfg, out)),
        Format::Svg => match &out.plot {
            Some(plot) => Ok(output::to_svg(plot)),
            None => Err(CliError::Usage(format!("{cmd:?} has no SVG form; use csv or json").to_lowercase())),
        },
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = cli.flags.resolve()?;
    let out = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Evolve => commands::evolve(&cfg)?,
        Command::Cpplane => commands::cpplane(&cfg)?,
        Command::Validate => commands::validate(&cfg, cli.flags.inject_fault)?,
        Command::Map => commands::map(&cfg)?,
    };
    let text = render(cli.command, &cfg, &out)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    for c in out.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} = {:e} (tolerance {:e})", c.name, c.value, c.tolerance);
    }
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(out.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dmojc: {e}");
            ExitCode::from(2)
        }
    }
}
