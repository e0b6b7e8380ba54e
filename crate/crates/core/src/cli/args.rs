use std::path::PathBuf;

use clap::{Args, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "hypodense", version, about = "Weighted densities and exact C-type operator experiments")]
pub struct Cli {
    /// Output format; CSV for `density`, JSON otherwise.
    #[arg(long, global = true, value_enum)]
    pub emit: Option<Emit>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    Csv,
}

/// One subcommand per artifact. Each also parses from a config document whose
/// `command` key names the variant and whose other keys mirror the flags.
#[derive(Subcommand, Debug, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Weighted density quotients of a set over a tail window.
    Density(DensityArgs),
    /// Weight synthesis (thm1, multi) and the alpha sequence of a weight.
    Forge(ForgeArgs),
    /// Schedule values and their growth conditions.
    Schedule(ScheduleArgs),
    /// Orbit of a finitely supported vector.
    Orbit(OrbitArgs),
    /// Shadowing vector with its certificate.
    Shadow(ShadowArgs),
    /// Block orbit bounds for a vector supported on one block.
    Prop50(Prop50Args),
    /// Frequency of large block norms along an orbit.
    Prop51(Prop51Args),
    /// Visit set of an orbit in a ball and its densities.
    Hits(HitsArgs),
    /// Density estimates of visit sets under several weights.
    Identity(IdentityArgs),
    /// Every invariant suite with a fixed seed.
    Verify(VerifyArgs),
    /// Runs a JSON experiment config.
    #[serde(skip)]
    Run(RunArgs),
}

#[derive(Parser)]
struct Defaults<T: Args> {
    #[command(flatten)]
    inner: T,
}

/// Flag defaults, shared with config documents that omit keys.
pub fn defaults<T: Args + FromArgMatches>() -> T {
    Defaults::<T>::try_parse_from(["hypodense"]).expect("every flag has a default").inner
}

macro_rules! clap_default {
    ($($t:ty),*) => {
        $(impl Default for $t {
            fn default() -> Self {
                defaults()
            }
        })*
    };
}

clap_default!(
    ParamsArgs, DensityArgs, ForgeArgs, ScheduleArgs, OrbitArgs, ShadowArgs, Prop50Args, Prop51Args, HitsArgs,
    IdentityArgs, VerifyArgs
);

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsArgs {
    /// Named schedule (shadow, props, periodic); replaces the explicit schedule flags.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub i_max: u64,
    #[arg(long, default_value_t = 4)]
    pub j_max: u64,
    /// Minimal number of hits of every promised fiber of psi.
    #[arg(long, default_value_t = 1)]
    pub multiplicity: u64,
    /// Length of the psi table; large enough for the other flags when absent.
    #[arg(long)]
    pub psi_horizon: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub delta0: u64,
    #[arg(long, default_value_t = 2)]
    pub tau0: u64,
    #[arg(long, default_value_t = 2)]
    pub big_delta0: u64,
    #[arg(long, default_value_t = 5)]
    pub k_max: u64,
    /// Last realized block; the last block of group k_max when absent.
    #[arg(long)]
    pub n_max: Option<u64>,
}

#[derive(Args, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityArgs {
    /// Preset name (evens, odds, all, empty, quartic_blocks) or inline JSON.
    #[arg(long)]
    pub set: Option<String>,
    /// Preset name (unit, harmonic) or inline JSON.
    #[arg(long, default_value = "unit")]
    pub weight: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub horizon: u64,
    #[arg(long, default_value = "1/2")]
    pub tail_fraction: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForgeMode {
    Thm1,
    Multi,
    Alpha,
}

#[derive(Args, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForgeArgs {
    #[arg(long, value_enum, default_value_t = ForgeMode::Thm1)]
    pub mode: ForgeMode,
    /// Target set; repeat for multi.
    #[arg(long)]
    pub set: Vec<String>,
    /// Target density `p/q`; one per set.
    #[arg(long)]
    pub delta: Vec<String>,
    /// Cyclic part pattern for multi, e.g. `0,1`.
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long, default_value_t = 1 << 20)]
    pub horizon: u64,
    /// Weight for the alpha sequence.
    #[arg(long, default_value = "harmonic")]
    pub weight: String,
    #[arg(long, default_value_t = 100)]
    pub n_max: u64,
    #[arg(long, default_value_t = crate::weightforge::DEFAULT_ALPHA_CAP)]
    pub cap: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Structural,
    Asymptotic,
}

#[derive(Args, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Structural)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub params: ParamsArgs,
}

#[derive(Args, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    /// Vector as `index:value,...` with values `m*2^e`, integers or `p/2^s`.
    #[arg(long, default_value = "0:1")]
    pub x: String,
    #[arg(long, default_value_t = 16)]
    pub steps: u64,
}

#[derive(Args, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShadowArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    #[arg(long, default_value = "0:1")]
    pub x: String,
    #[arg(long, default_value = "1/16")]
    pub epsilon: String,
    /// Weight whose alpha sequence fixes the tracking window.
    #[arg(long, default_value = r#"{"kind":"block_constant","breakpoints":[0,1048576],"tail":"doubling"}"#)]
    pub alpha_weight: String,
}

#[derive(Args, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Prop50Args {
    #[command(flatten)]
    pub params: ParamsArgs,
    #[arg(long, default_value = "0:1")]
    pub x: String,
    #[arg(long, default_value_t = 1)]
    pub l: u64,
    /// Last orbit step checked; twice the block length of `l` when absent.
    #[arg(long)]
    pub j: Option<u64>,
    /// Constants `C_1..C_l` as `p/q`; the least admissible ones when absent.
    #[arg(long)]
    pub constant: Vec<String>,
}

#[derive(Args, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Prop51Args {
    #[command(flatten)]
    pub params: ParamsArgs,
    #[arg(long, default_value = "0:1")]
    pub x: String,
    #[arg(long, default_value_t = 1)]
    pub l: u64,
    /// Last step counted; twice the block length of `l` when absent.
    #[arg(long)]
    pub j: Option<u64>,
}

#[derive(Args, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HitsArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    #[arg(long, default_value = "0:1")]
    pub x: String,
    #[arg(long, default_value = "0:1")]
    pub center: String,
    #[arg(long, default_value = "1/2")]
    pub radius: String,
    #[arg(long, default_value = "unit")]
    pub weight: String,
    #[arg(long)]
    pub step_horizon: Option<u64>,
    #[arg(long, default_value_t = 1 << 16)]
    pub density_horizon: u64,
}

#[derive(Args, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    /// Orbit starting vectors; repeatable.
    #[arg(long)]
    pub x: Vec<String>,
    /// Ball as `center;radius`; repeatable.
    #[arg(long)]
    pub ball: Vec<String>,
    /// Admissible weights; repeatable.
    #[arg(long)]
    pub weight: Vec<String>,
    #[arg(long, default_value_t = 1 << 16)]
    pub density_horizon: u64,
    #[arg(long, default_value = "1/10")]
    pub tol: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Densities,
    Forge,
    Ctype,
    Dynlab,
}

#[derive(Args, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, value_enum, default_value_t = ModeArg::Structural)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random trials per randomized check.
    #[arg(long, default_value_t = 50)]
    pub trials: u64,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// JSON document `{"experiment": {"command": ..., ...}, "emit": ..., "out": ...}`.
    pub config: PathBuf,
}

/// Top level of a config document.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Command,
    #[serde(default)]
    pub emit: Option<Emit>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}
