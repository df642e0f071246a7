//! Run configuration: a JSON document and command-line flags with the same
//! field names. Flags win over the document.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use delay_waves::models::{BzParams, BzUpper, FisherParams, FisherUpper, GridSpec, ModelSpec};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Fisher,
    Bz,
}

/// Upper-solution family. `neutral` is the default for both models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpperKind {
    Neutral,
    /// Fisher only.
    Undelayed,
    /// BZ only.
    Piecewise,
}

/// Every tunable of every subcommand; each subcommand reads what it needs.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand the document was written for (checked, not dispatched on).
    #[arg(skip)]
    pub command: Option<String>,

    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Wave speed.
    #[arg(long)]
    pub c: Option<f64>,
    /// Operator coefficient of x′ (roots, green).
    #[arg(long)]
    pub a: Option<f64>,
    /// Operator coefficient of x (roots, green); BZ coupling b.
    #[arg(long)]
    pub b: Option<f64>,
    /// Operator shift (green); BZ parameter r.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    /// Diffusion delay in PDE time.
    #[arg(long)]
    pub tau1: Option<f64>,
    /// Reaction delay in PDE time.
    #[arg(long)]
    pub tau2: Option<f64>,
    #[arg(long, value_enum)]
    pub upper: Option<UpperKind>,

    #[arg(long, allow_hyphen_values = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Convergence tolerance of the monotone iteration.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Slack allowed in the upper/lower inequalities.
    #[arg(long)]
    pub verify_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Largest delay in the root table.
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Number of delay intervals in the root table.
    #[arg(long)]
    pub r_steps: Option<usize>,

    /// Simulated time.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Spatial step of the simulation.
    #[arg(long)]
    pub dx: Option<f64>,
    /// Time between recorded snapshots.
    #[arg(long)]
    pub output_interval: Option<f64>,
    /// Write every n-th grid point of each snapshot.
    #[arg(long)]
    pub stride: Option<usize>,

    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Omit the metadata comment line from CSV files.
    #[arg(long)]
    #[serde(default)]
    pub no_meta: bool,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        RunConfig {
            command: $file.command.clone(),
            no_meta: $flags.no_meta || $file.no_meta,
            $($field: $flags.$field.clone().or($file.$field.clone()),)*
        }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// `self` (flags) over `file`.
    pub fn over(&self, file: &RunConfig) -> RunConfig {
        overlay!(
            self, file, model, c, a, b, r, theta, k, tau1, tau2, upper, t_min, t_max, dt, tol, verify_tol, max_iter,
            r_max, r_steps, t_end, dx, output_interval, stride, out_dir
        )
    }

    pub fn check_command(&self, name: &str) -> Result<(), Failure> {
        match &self.command {
            Some(c) if c != name => Err(Failure::Usage(format!("config is for `{c}`, not `{name}`"))),
            _ => Ok(()),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn grid(&self) -> GridSpec {
        let d = GridSpec::default();
        GridSpec {
            t_min: self.t_min.unwrap_or(d.t_min),
            t_max: self.t_max.unwrap_or(d.t_max),
            dt: self.dt.unwrap_or(d.dt),
            verify_tol: self.verify_tol.unwrap_or(d.verify_tol),
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec, Failure> {
        let kind = self.model.ok_or_else(|| missing("model"))?;
        let c = need(self.c, "c")?;
        let tau1 = self.tau1.unwrap_or(0.0);
        let tau2 = self.tau2.unwrap_or(0.0);
        let k = self.k.unwrap_or(2.0);
        Ok(match kind {
            ModelKind::Fisher => ModelSpec::Fisher(FisherParams {
                c,
                tau1,
                tau2,
                theta: self.theta.unwrap_or(0.5),
                k,
                upper: match self.upper.unwrap_or(UpperKind::Neutral) {
                    UpperKind::Neutral => FisherUpper::Neutral,
                    UpperKind::Undelayed => FisherUpper::Undelayed,
                    UpperKind::Piecewise => return Err(Failure::Usage("fisher upper is neutral or undelayed".into())),
                },
            }),
            ModelKind::Bz => ModelSpec::Bz(BzParams {
                c,
                b: need(self.b, "b")?,
                r: need(self.r, "r")?,
                tau1,
                tau2,
                k,
                upper: match self.upper.unwrap_or(UpperKind::Neutral) {
                    UpperKind::Neutral => BzUpper::Neutral,
                    UpperKind::Piecewise => BzUpper::Piecewise,
                    UpperKind::Undelayed => return Err(Failure::Usage("bz upper is neutral or piecewise".into())),
                },
            }),
        })
    }
}

fn missing(name: &str) -> Failure {
    Failure::Usage(format!("missing --{} (flag or config key `{name}`)", name.replace('_', "-")))
}

pub fn need<T>(v: Option<T>, name: &str) -> Result<T, Failure> {
    v.ok_or_else(|| missing(name))
}
