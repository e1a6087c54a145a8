//! Command-line flags and the TOML config file they override.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "memdomain", version, about = "Dissipative memory-domain model: tables, states and memory codes")]
pub struct Cli {
    /// TOML config file; flags take precedence over its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub params: ParamsArgs,

    #[command(flatten)]
    pub run: RunArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Copies each field of `top` that is set over `self`.
macro_rules! overlay {
    ($ty:ident { $($opt:ident),* } $(lists { $($list:ident),* })?) => {
        impl $ty {
            pub fn overlay(self, top: Self) -> Self {
                Self {
                    $($opt: top.$opt.or(self.$opt),)*
                    $($($list: if top.$list.is_empty() { self.$list } else { top.$list },)*)?
                }
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsArgs {
    /// Damping constant L.
    #[arg(long = "L", global = true, allow_negative_numbers = true)]
    #[serde(rename = "L")]
    pub damping: Option<f64>,
    /// Propagation speed c (ω₀ = k·c).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c: Option<f64>,
}
overlay!(ParamsArgs { damping, c });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunArgs {
    /// Seed echoed into the manifest.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Leave the timestamp out of the manifest.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub no_timestamp: Option<bool>,
}
overlay!(RunArgs { seed, no_timestamp });

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spherical Bessel values, one per line.
    Bessel(BesselArgs),
    /// Oscillator pair u, v on a uniform grid.
    Evolve(EvolveArgs),
    /// Life-time curves for arbitrary (k, n).
    Lifetimes(LifetimesArgs),
    /// Life-time curves for the preset figures.
    Figures(FiguresArgs),
    /// Two-mode squeezed vacuum coefficients.
    Squeeze(SqueezeArgs),
    /// Record a stimulus into a registry.
    Record(RecordArgs),
    /// Match a signal against a registry.
    Recall(RecallArgs),
    /// Apply decay to every code in a registry.
    #[command(name = "forget-sweep")]
    ForgetSweep(ForgetArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bessel(_) => "bessel",
            Command::Evolve(_) => "evolve",
            Command::Lifetimes(_) => "lifetimes",
            Command::Figures(_) => "figures",
            Command::Squeeze(_) => "squeeze",
            Command::Record(_) => "record",
            Command::Recall(_) => "recall",
            Command::ForgetSweep(_) => "forget-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    J,
    Y,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesselArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub order: Option<u32>,
    /// Arguments, comma separated or repeated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(default)]
    pub z: Vec<f64>,
    /// Also write `z,value` CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
overlay!(BesselArgs { kind, order, out } lists { z });

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Closed,
    Ode,
    Both,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveArgs {
    /// Reference frequency ω₀ (alternative to --k).
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub n: Option<u32>,
    /// End of the grid; defaults to the recording window.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Samples including both ends.
    #[arg(long)]
    pub points: Option<usize>,
    /// Weight of j_n in the closed form.
    #[arg(long)]
    pub a: Option<f64>,
    /// Weight of y_n in the closed form.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
overlay!(EvolveArgs { omega0, k, n, t_max, method, points, a, b, rel_tol, out });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimesArgs {
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(default)]
    pub omega0: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(default)]
    pub k: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(default)]
    pub n: Vec<u32>,
    /// Largest Λ sampled.
    #[arg(long)]
    pub ceiling: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
overlay!(LifetimesArgs { ceiling, points, out } lists { omega0, k, n });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiguresArgs {
    /// fig1, fig2, fig3, fig4 or all.
    #[arg(long)]
    pub which: Option<String>,
    #[arg(long)]
    pub ceiling: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
overlay!(FiguresArgs { which, ceiling, points, out });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeArgs {
    /// Pair coupling Γ; defaults to L/2.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Compare against matrix-exponential evolution.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub oracle: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
overlay!(SqueezeArgs { gamma, t, cutoff, oracle, out });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordArgs {
    #[arg(long)]
    pub registry: Option<PathBuf>,
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
overlay!(RecordArgs { registry, spectrum, t, out });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecallArgs {
    #[arg(long)]
    pub registry: Option<PathBuf>,
    #[arg(long)]
    pub signal: Option<PathBuf>,
    #[arg(long)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
overlay!(RecallArgs { registry, signal, energy, t, out });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForgetArgs {
    #[arg(long)]
    pub registry: Option<PathBuf>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
overlay!(ForgetArgs { registry, t, out });

/// Layout of the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub no_timestamp: Option<bool>,
    #[serde(default)]
    pub params: ParamsArgs,
    #[serde(default)]
    pub bessel: BesselArgs,
    #[serde(default)]
    pub evolve: EvolveArgs,
    #[serde(default)]
    pub lifetimes: LifetimesArgs,
    #[serde(default)]
    pub figures: FiguresArgs,
    #[serde(default)]
    pub squeeze: SqueezeArgs,
    #[serde(default)]
    pub record: RecordArgs,
    #[serde(default)]
    pub recall: RecallArgs,
    #[serde(default, rename = "forget-sweep")]
    pub forget_sweep: ForgetArgs,
}

impl FileConfig {
    pub fn run(&self) -> RunArgs {
        RunArgs { seed: self.seed, no_timestamp: self.no_timestamp }
    }
}
