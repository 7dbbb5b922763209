//! Flag parsing and validation into a [`RunConfig`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use di_forge::codebook::RadiusMode;
use serde::{Deserialize, Serialize};

pub const DEFAULT_DELTA: f64 = 0.2;
pub const DEFAULT_LAYERS: usize = 2;
pub const DEFAULT_BRANCHING: usize = 4;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_ROTATIONS: usize = 8;
pub const DEFAULT_E_SCALES: [f64; 3] = [0.5, 0.1, 0.02];
pub const DEFAULT_REDUCTION_POINTS: [f64; 3] = [0.1, 0.5, 0.9];

/// A rejected flag or flag combination.
#[derive(Debug, thiserror::Error)]
#[error("{flag}: {message}")]
pub struct UsageError {
    pub flag: String,
    pub message: String,
}

fn usage(flag: &str, message: impl Into<String>) -> UsageError {
    UsageError {
        flag: flag.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "di-forge",
    version,
    about = "Build and exercise deterministic identification codes"
)]
pub struct Cli {
    /// Read the whole run configuration from a JSON file instead of flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a primitive codebook and write it as JSON.
    Build(BuildArgs),
    /// Check the invariants of a stored codebook.
    Verify(VerifyArgs),
    /// Estimate missed and false identification rates over a channel.
    Simulate(SimulateArgs),
    /// Sweep the rate-reliability construction over error exponents.
    SweepRr(SweepArgs),
    /// Compare the Poisson-to-Bernoulli reduction with direct sampling.
    ReduceDemo(ReduceArgs),
    /// Summarize report files written by the other commands.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelName {
    Bernoulli,
    Restricted,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderName {
    Capacity,
    Poisson,
    Rr,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Missed,
    False,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairs {
    Adversarial,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Build,
    Verify,
    Simulate,
    SweepRr,
    ReduceDemo,
    Report,
}

/// Construction flags shared by `build`, `simulate` and `sweep-rr`.
#[derive(Debug, Clone, Args)]
pub struct CodebookArgs {
    /// Block length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of layers.
    #[arg(long = "L", visible_alias = "layers")]
    pub layers: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Children per node, one value per layer (e.g. `4,4`).
    #[arg(long, value_delimiter = ',')]
    pub branching: Option<Vec<usize>>,
    /// Build seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Radius schedule: separated, capacity, rate-reliability or explicit.
    #[arg(long)]
    pub mode: Option<String>,
    /// Decoder radius the separated schedule is designed for (default `ln n`).
    #[arg(long)]
    pub t: Option<f64>,
    /// Explicit radii, outermost first.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Explicit minimum projective distance.
    #[arg(long)]
    pub d: Option<f64>,
    /// Error exponent for the rate-reliability schedule and decoder.
    #[arg(long = "E")]
    pub e: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub codebook: CodebookArgs,
    /// Rotate the stored codebook by this Haar seed.
    #[arg(long)]
    pub rotation_seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Codebook JSON file.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Also check that the adversarial pair is rejected at this decoder radius.
    #[arg(long)]
    pub t: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    #[arg(long, value_enum)]
    pub channel: Option<ChannelName>,
    /// Lower end of the restricted Bernoulli interval.
    #[arg(long)]
    pub a: Option<f64>,
    /// Upper end of the restricted Bernoulli interval.
    #[arg(long)]
    pub b: Option<f64>,
    /// Poisson peak intensity.
    #[arg(long = "A")]
    pub peak: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Codebook JSON file; built from the construction flags when absent.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub codebook: CodebookArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, value_enum)]
    pub decoder: Option<DecoderName>,
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    #[arg(long, value_enum)]
    pub pairs: Option<Pairs>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub trial_seed: Option<u64>,
    /// First Haar seed tried for expurgation.
    #[arg(long)]
    pub rotation_seed: Option<u64>,
    /// Number of rotations tried; 0 keeps the codebook unrotated.
    #[arg(long)]
    pub rotations: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub codebook: CodebookArgs,
    /// Exponents `E` to sweep; overrides `--e-scale`.
    #[arg(long = "E-grid", value_delimiter = ',')]
    pub e_grid: Option<Vec<f64>>,
    /// Sweep `E = c / ln n` for each listed `c`.
    #[arg(long, value_delimiter = ',')]
    pub e_scale: Option<Vec<f64>>,
    #[arg(long)]
    pub rotation_seed: Option<u64>,
    #[arg(long)]
    pub rotations: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReduceArgs {
    /// Poisson peak intensity.
    #[arg(long = "A")]
    pub peak: Option<f64>,
    /// Inputs to test, in `[0, A]`.
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub trial_seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// JSON-lines report files.
    #[arg(long, short, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Exit with the verification status when any record exceeds its bound.
    #[arg(long)]
    pub check: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// A fully validated run description. Also the schema of `--config` files,
/// where absent fields take the same defaults as absent flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_layers", rename = "L")]
    pub layers: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub branching: Option<Vec<usize>>,
    #[serde(default = "default_mode")]
    pub mode: RadiusMode,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default, rename = "E")]
    pub e: Option<f64>,
    #[serde(default)]
    pub e_grid: Option<Vec<f64>>,
    #[serde(default = "default_e_scales")]
    pub e_scale: Vec<f64>,
    #[serde(default = "default_channel")]
    pub channel: ChannelName,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_peak", rename = "A")]
    pub peak: f64,
    #[serde(default)]
    pub decoder: Option<DecoderName>,
    #[serde(default = "default_experiment")]
    pub experiment: Experiment,
    #[serde(default = "default_pairs")]
    pub pairs: Pairs,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub build_seed: u64,
    #[serde(default)]
    pub rotation_seed: Option<u64>,
    #[serde(default = "default_rotations")]
    pub rotations: usize,
    #[serde(default)]
    pub trial_seed: u64,
    #[serde(default = "default_x")]
    pub x: Vec<f64>,
    #[serde(default)]
    pub input: Vec<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub check: bool,
}

fn default_layers() -> usize {
    DEFAULT_LAYERS
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_mode() -> RadiusMode {
    RadiusMode::Separated
}
fn default_e_scales() -> Vec<f64> {
    DEFAULT_E_SCALES.to_vec()
}
fn default_channel() -> ChannelName {
    ChannelName::Bernoulli
}
fn default_a() -> f64 {
    0.2
}
fn default_b() -> f64 {
    0.8
}
fn default_peak() -> f64 {
    1.0
}
fn default_experiment() -> Experiment {
    Experiment::Both
}
fn default_pairs() -> Pairs {
    Pairs::Adversarial
}
fn default_trials() -> u64 {
    DEFAULT_TRIALS
}
fn default_rotations() -> usize {
    DEFAULT_ROTATIONS
}
fn default_x() -> Vec<f64> {
    DEFAULT_REDUCTION_POINTS.to_vec()
}

impl RunConfig {
    fn empty(command: CommandName) -> Self {
        serde_json::from_value(serde_json::json!({ "command": command }))
            .expect("defaults deserialize")
    }

    /// Output format, with `sweep-rr` writing CSV unless told otherwise.
    pub fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            CommandName::SweepRr => Format::Csv,
            _ => Format::Json,
        })
    }

    /// Branching factors, `DEFAULT_BRANCHING` per layer when not given.
    pub fn branching(&self) -> Vec<usize> {
        self.branching
            .clone()
            .unwrap_or_else(|| vec![DEFAULT_BRANCHING; self.layers])
    }

    pub fn input_path(&self) -> Option<&Path> {
        self.input.first().map(PathBuf::as_path)
    }

    fn apply_codebook(&mut self, c: CodebookArgs) -> Result<(), UsageError> {
        self.n = c.n;
        if let Some(l) = c.layers {
            self.layers = l;
        }
        if let Some(d) = c.delta {
            self.delta = d;
        }
        self.branching = c.branching;
        if let Some(s) = c.seed {
            self.build_seed = s;
        }
        if let Some(m) = c.mode {
            self.mode = m.parse().map_err(|_| {
                usage(
                    "--mode",
                    format!("unknown mode `{m}` (separated, capacity, rate-reliability, explicit)"),
                )
            })?;
        }
        self.t = c.t;
        self.radii = c.radii;
        self.d = c.d;
        self.e = c.e;
        Ok(())
    }

    fn apply_output(&mut self, o: OutputArgs) {
        self.output = o.output;
        self.format = o.format;
    }

    /// Checks every field against the preconditions of the library calls it
    /// feeds.
    pub fn validate(&self) -> Result<(), UsageError> {
        let needs_n = matches!(self.command, CommandName::Build | CommandName::SweepRr)
            || (self.command == CommandName::Simulate && self.input.is_empty());
        if needs_n && self.n.is_none() {
            return Err(usage("--n", "block length is required"));
        }
        if let Some(n) = self.n {
            if n < 2 {
                return Err(usage(
                    "--n",
                    format!("block length must be at least 2, got {n}"),
                ));
            }
            if self.layers >= n {
                return Err(usage(
                    "--L",
                    format!("{} layers need n > L, got n = {n}", self.layers),
                ));
            }
        }
        if self.layers == 0 {
            return Err(usage("--L", "at least one layer is required"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(usage(
                "--delta",
                format!("must lie in (0, 1), got {}", self.delta),
            ));
        }
        if let Some(b) = &self.branching {
            if b.len() != self.layers {
                return Err(usage(
                    "--branching",
                    format!(
                        "expected {} values (one per layer), got {}",
                        self.layers,
                        b.len()
                    ),
                ));
            }
            if b.contains(&0) {
                return Err(usage(
                    "--branching",
                    "every branching factor must be positive",
                ));
            }
        }
        if let Some(t) = self.t {
            if !(t.is_finite() && t > 0.0) {
                return Err(usage("--t", format!("must be positive, got {t}")));
            }
        }
        if let Some(e) = self.e {
            if !(e.is_finite() && e > 0.0) {
                return Err(usage("--E", format!("must be positive, got {e}")));
            }
        }
        if matches!(
            self.command,
            CommandName::Build | CommandName::Simulate | CommandName::SweepRr
        ) && self.input.is_empty()
        {
            match self.mode {
                RadiusMode::Explicit => {
                    let radii = self
                        .radii
                        .as_ref()
                        .ok_or_else(|| usage("--radii", "explicit mode needs radii"))?;
                    if radii.len() != self.layers {
                        return Err(usage(
                            "--radii",
                            format!("expected {} radii, got {}", self.layers, radii.len()),
                        ));
                    }
                    if self.d.is_none() {
                        return Err(usage("--d", "explicit mode needs a projective distance"));
                    }
                }
                RadiusMode::RateReliability
                    if self.command != CommandName::SweepRr && self.e.is_none() =>
                {
                    return Err(usage("--E", "rate-reliability mode needs an exponent"));
                }
                _ => {}
            }
        }
        if self.command == CommandName::Simulate {
            if !(0.0..1.0).contains(&self.a) || !(self.a < self.b && self.b <= 1.0) {
                return Err(usage(
                    "--a/--b",
                    format!("need 0 ≤ a < b ≤ 1, got [{}, {}]", self.a, self.b),
                ));
            }
            if self.decoder == Some(DecoderName::Custom) && self.t.is_none() {
                return Err(usage("--t", "the custom decoder needs a radius"));
            }
            if self.decoder == Some(DecoderName::Rr) && self.e.is_none() {
                return Err(usage(
                    "--E",
                    "the rate-reliability decoder needs an exponent",
                ));
            }
        }
        if matches!(
            self.command,
            CommandName::Simulate | CommandName::ReduceDemo
        ) && !(self.peak.is_finite() && self.peak > 0.0)
        {
            return Err(usage(
                "--A",
                format!("peak must be positive, got {}", self.peak),
            ));
        }
        if self.command == CommandName::ReduceDemo {
            if self.x.is_empty() {
                return Err(usage("--x", "at least one input value is required"));
            }
            if let Some(x) = self.x.iter().find(|&&x| !(0.0..=self.peak).contains(&x)) {
                return Err(usage("--x", format!("{x} lies outside [0, {}]", self.peak)));
            }
        }
        if self.command == CommandName::SweepRr {
            let grid = self.e_grid.as_ref().unwrap_or(&self.e_scale);
            if grid.is_empty() || grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                return Err(usage("--E-grid/--e-scale", "need positive exponents"));
            }
        }
        if matches!(self.command, CommandName::Verify | CommandName::Report)
            && self.input.is_empty()
        {
            return Err(usage("--input", "an input file is required"));
        }
        Ok(())
    }
}

/// Turns parsed flags (or a `--config` file) into a validated config.
pub fn parse_config(cli: Cli) -> Result<RunConfig, UsageError> {
    let cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => {
            return Err(usage("--config", "cannot be combined with a subcommand"));
        }
        (None, None) => return Err(usage("<command>", "a subcommand or --config is required")),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| usage("--config", format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| usage("--config", format!("{}: {e}", path.display())))?
        }
        (None, Some(command)) => from_command(command)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn from_command(command: Command) -> Result<RunConfig, UsageError> {
    let cfg = match command {
        Command::Build(a) => {
            let mut c = RunConfig::empty(CommandName::Build);
            c.apply_codebook(a.codebook)?;
            c.rotation_seed = a.rotation_seed;
            c.apply_output(a.out);
            c
        }
        Command::Verify(a) => {
            let mut c = RunConfig::empty(CommandName::Verify);
            c.input = a.input.into_iter().collect();
            c.t = a.t;
            c.apply_output(a.out);
            c
        }
        Command::Simulate(a) => {
            let mut c = RunConfig::empty(CommandName::Simulate);
            c.apply_codebook(a.codebook)?;
            c.input = a.input.into_iter().collect();
            if let Some(ch) = a.channel.channel {
                c.channel = ch;
            }
            c.a = a.channel.a.unwrap_or(c.a);
            c.b = a.channel.b.unwrap_or(c.b);
            c.peak = a.channel.peak.unwrap_or(c.peak);
            c.decoder = a.decoder;
            c.experiment = a.experiment.unwrap_or(c.experiment);
            c.pairs = a.pairs.unwrap_or(c.pairs);
            c.trials = a.trials.unwrap_or(c.trials);
            c.trial_seed = a.trial_seed.unwrap_or(c.trial_seed);
            c.rotation_seed = a.rotation_seed;
            c.rotations = a.rotations.unwrap_or(c.rotations);
            c.apply_output(a.out);
            c
        }
        Command::SweepRr(a) => {
            let mut c = RunConfig::empty(CommandName::SweepRr);
            c.apply_codebook(a.codebook)?;
            c.mode = RadiusMode::RateReliability;
            c.e_grid = a.e_grid;
            if let Some(s) = a.e_scale {
                c.e_scale = s;
            }
            c.rotation_seed = a.rotation_seed;
            c.rotations = a.rotations.unwrap_or(c.rotations);
            c.apply_output(a.out);
            c
        }
        Command::ReduceDemo(a) => {
            let mut c = RunConfig::empty(CommandName::ReduceDemo);
            c.peak = a.peak.unwrap_or(c.peak);
            if let Some(x) = a.x {
                c.x = x;
            }
            c.trials = a.trials.unwrap_or(c.trials);
            c.trial_seed = a.trial_seed.unwrap_or(c.trial_seed);
            c.apply_output(a.out);
            c
        }
        Command::Report(a) => {
            let mut c = RunConfig::empty(CommandName::Report);
            c.input = a.input;
            c.check = a.check;
            c.apply_output(a.out);
            c
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, UsageError> {
        let cli = Cli::try_parse_from(std::iter::once("di-forge").chain(args.iter().copied()))
            .map_err(|e| usage("<args>", e.to_string()))?;
        parse_config(cli)
    }

    #[test]
    fn build_example() {
        let c = parse(&[
            "build",
            "--n",
            "64",
            "--L",
            "2",
            "--delta",
            "0.2",
            "--branching",
            "4,4",
            "--seed",
            "7",
        ])
        .unwrap();
        assert_eq!(c.n, Some(64));
        assert_eq!(c.layers, 2);
        assert_eq!(c.branching(), vec![4, 4]);
        assert_eq!(c.build_seed, 7);
        assert_eq!(c.format(), Format::Json);
        assert_eq!(c.trials, DEFAULT_TRIALS);
    }

    #[test]
    fn bad_delta_names_the_flag() {
        let err = parse(&["build", "--n", "64", "--delta", "1.5"]).unwrap_err();
        assert_eq!(err.flag, "--delta");
    }

    #[test]
    fn missing_n_names_the_flag() {
        let err = parse(&["build", "--L", "2"]).unwrap_err();
        assert_eq!(err.flag, "--n");
    }

    #[test]
    fn branching_length_must_match() {
        let err = parse(&["build", "--n", "32", "--branching", "4,4,4"]).unwrap_err();
        assert_eq!(err.flag, "--branching");
    }

    #[test]
    fn sweep_defaults_to_csv() {
        let c = parse(&["sweep-rr", "--n", "256"]).unwrap();
        assert_eq!(c.format(), Format::Csv);
        assert_eq!(c.e_scale, DEFAULT_E_SCALES.to_vec());
    }

    #[test]
    fn config_file_defaults_match_flags() {
        let from_file: RunConfig =
            serde_json::from_str(r#"{"command": "build", "n": 64, "build_seed": 7}"#).unwrap();
        let from_flags = parse(&["build", "--n", "64", "--seed", "7"]).unwrap();
        assert_eq!(from_file, from_flags);
    }
}
