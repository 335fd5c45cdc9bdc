use std::path::{Path, PathBuf};

use dmojc::qnums::{BranchD3, Dimensionality, HalfInt, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BranchArg {
    Finite,
    Infinite,
}

impl From<BranchArg> for BranchD3 {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Finite => BranchD3::FiniteDeg,
            BranchArg::Infinite => BranchD3::InfiniteDeg,
        }
    }
}

/// Fully resolved settings for one invocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub dim: u8,
    pub branch: BranchD3,
    pub j: HalfInt,
    pub eta: f64,
    pub chi: f64,
    pub mc2: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub nmax: u32,
    pub format: Format,
    /// Destination only; left out of reports so they do not depend on it.
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 1,
            branch: BranchD3::InfiniteDeg,
            j: HalfInt::HALF,
            eta: 1.0,
            chi: 1.0,
            mc2: 1.0,
            gamma: 1.0,
            alpha: 0.0,
            t_max: 30.0,
            t_steps: 3001,
            nmax: 24,
            format: Format::Csv,
            output: None,
        }
    }
}

/// Any subset of [`RunConfig`], as read from a config file or the flags.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub dim: Option<u8>,
    pub branch: Option<BranchD3>,
    pub j: Option<HalfInt>,
    pub eta: Option<f64>,
    pub chi: Option<f64>,
    pub mc2: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(alias = "tmax")]
    pub t_max: Option<f64>,
    #[serde(alias = "steps")]
    pub t_steps: Option<usize>,
    #[serde(alias = "max_n")]
    pub nmax: Option<u32>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: PartialConfig) -> PartialConfig {
        PartialConfig {
            dim: self.dim.or(base.dim),
            branch: self.branch.or(base.branch),
            j: self.j.or(base.j),
            eta: self.eta.or(base.eta),
            chi: self.chi.or(base.chi),
            mc2: self.mc2.or(base.mc2),
            gamma: self.gamma.or(base.gamma),
            alpha: self.alpha.or(base.alpha),
            t_max: self.t_max.or(base.t_max),
            t_steps: self.t_steps.or(base.t_steps),
            nmax: self.nmax.or(base.nmax),
            format: self.format.or(base.format),
            output: self.output.or(base.output),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            dim: self.dim.unwrap_or(d.dim),
            branch: self.branch.unwrap_or(d.branch),
            j: self.j.unwrap_or(d.j),
            eta: self.eta.unwrap_or(d.eta),
            chi: self.chi.unwrap_or(d.chi),
            mc2: self.mc2.unwrap_or(d.mc2),
            gamma: self.gamma.unwrap_or(d.gamma),
            alpha: self.alpha.unwrap_or(d.alpha),
            t_max: self.t_max.unwrap_or(d.t_max),
            t_steps: self.t_steps.unwrap_or(d.t_steps),
            nmax: self.nmax.unwrap_or(d.nmax),
            format: self.format.unwrap_or(d.format),
            output: self.output.or(d.output),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=3).contains(&self.dim) {
            return Err(CliError::Usage(format!("dim must be 1, 2 or 3, got {}", self.dim)));
        }
        for (name, v) in [
            ("eta", self.eta),
            ("chi", self.chi),
            ("mc2", self.mc2),
            ("gamma", self.gamma),
            ("alpha", self.alpha),
            ("tmax", self.t_max),
        ] {
            if !v.is_finite() {
                return Err(CliError::Usage(format!("{name} must be finite, got {v}")));
            }
        }
        if self.t_max <= 0.0 {
            return Err(CliError::Usage(format!("tmax must be positive, got {}", self.t_max)));
        }
        if self.t_steps < 2 {
            return Err(CliError::Usage(format!("steps must be at least 2, got {}", self.t_steps)));
        }
        if self.nmax < 1 {
            return Err(CliError::Usage("nmax must be at least 1".into()));
        }
        self.extended_spec().validate()?;
        Ok(())
    }

    pub fn dimensionality(&self) -> Dimensionality {
        match self.dim {
            1 => Dimensionality::D1,
            2 => Dimensionality::D2,
            _ => Dimensionality::D3 {
                j: self.j,
                branch: self.branch,
            },
        }
    }

    /// Single-isospin oscillator; `chi` and `gamma` are ignored.
    pub fn dmo_spec(&self) -> ModelSpec {
        ModelSpec::dmo(self.dimensionality(), self.eta, self.mc2)
    }

    pub fn extended_spec(&self) -> ModelSpec {
        ModelSpec::extended(self.dimensionality(), self.eta, self.chi, self.mc2, self.gamma)
    }

    pub fn time_grid(&self) -> Vec<f64> {
        dmojc::dynamics::time_grid(self.t_max, self.t_steps)
    }
}
