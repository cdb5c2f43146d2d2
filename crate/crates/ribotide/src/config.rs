//! Command-line flags, JSON configuration files and the resolved
//! [`RunConfig`].
//!
//! A configuration file is a flat JSON object whose keys are the long flag
//! names (`"n1"`, `"rho0"`, `"burn-in"`, ...). Flags given on the command
//! line override the file; anything left unset takes the per-command
//! default.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer};

use ribotide_core::tasep::EntryRule;
use ribotide_core::{EngineTag, UorfGeometry};

use crate::error::RunError;
use crate::experiments::decimal_grid;
use crate::table::Format;

#[derive(Debug, Parser)]
#[command(name = "ribotide", version, about = "Ribosome flow through an upstream ORF")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exit flow against rho0 for several conversion probabilities.
    Sweep(CommandArgs),
    /// Distance between deterministic and limit exit flows as n2 grows.
    Convergence(CommandArgs),
    /// Stationary density and flow profiles along the lattice.
    Profile(CommandArgs),
    /// Monte Carlo runs with full event counters.
    Tasep(CommandArgs),
    /// Closed-form limit exit flow.
    Limit(CommandArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommandArgs {
    /// JSON file with default values for any of the flags below.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

/// Every setting, all optional so that flags and file can be layered.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Sites before the start codon.
    #[arg(long)]
    pub n1: Option<usize>,
    /// Coding segment length; a comma-separated list for `convergence`.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub n2: Option<Vec<usize>>,
    /// Sites after the stop codon.
    #[arg(long)]
    pub n3: Option<usize>,
    /// Conversion probabilities.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub c: Option<Vec<f64>>,
    /// Scaled conversion rate c * n2.
    #[arg(long)]
    pub c0: Option<f64>,
    /// Upstream densities.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub rho0: Option<Vec<f64>>,
    /// Particle velocity.
    #[arg(long)]
    pub v: Option<f64>,
    /// Engines for `sweep`.
    #[arg(long, value_delimiter = ',', value_enum)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub engines: Option<Vec<EngineArg>>,
    /// Base seed; grid point i uses a hash of (seed, i).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampled sweeps per Monte Carlo run.
    #[arg(long)]
    pub sweeps: Option<u64>,
    /// Burn-in sweeps per Monte Carlo run (default 20 * n_star).
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Reservoir rule at site 0.
    #[arg(long, value_enum)]
    pub entry: Option<EntryArg>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(Some(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Tasep,
    Deterministic,
    Limit,
}

impl From<EngineArg> for EngineTag {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Tasep => EngineTag::Tasep,
            EngineArg::Deterministic => EngineTag::Deterministic,
            EngineArg::Limit => EngineTag::Limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryArg {
    Table,
    Refill,
}

impl From<EntryArg> for EntryRule {
    fn from(e: EntryArg) -> Self {
        match e {
            EntryArg::Table => EntryRule::Table,
            EntryArg::Refill => EntryRule::Refill,
        }
    }
}

impl Settings {
    /// Values from `self`, falling back to `base`.
    pub fn or(self, base: Settings) -> Settings {
        Settings {
            n1: self.n1.or(base.n1),
            n2: self.n2.or(base.n2),
            n3: self.n3.or(base.n3),
            c: self.c.or(base.c),
            c0: self.c0.or(base.c0),
            rho0: self.rho0.or(base.rho0),
            v: self.v.or(base.v),
            engines: self.engines.or(base.engines),
            seed: self.seed.or(base.seed),
            sweeps: self.sweeps.or(base.sweeps),
            burn_in: self.burn_in.or(base.burn_in),
            entry: self.entry.or(base.entry),
            output: self.output.or(base.output),
            format: self.format.or(base.format),
        }
    }

    pub fn from_json(text: &str) -> Result<Settings, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Usage(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Settings, RunError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| RunError::Usage(format!("config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcommandKind {
    Sweep,
    Convergence,
    Profile,
    Tasep,
    Limit,
}

impl SubcommandKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SubcommandKind::Sweep => "sweep",
            SubcommandKind::Convergence => "convergence",
            SubcommandKind::Profile => "profile",
            SubcommandKind::Tasep => "tasep",
            SubcommandKind::Limit => "limit",
        }
    }

    fn defaults(&self) -> Settings {
        let fig3_c = vec![0.025, 0.035, 0.05, 0.1, 0.2, 0.3];
        let common = Settings {
            n1: Some(100),
            n2: Some(vec![200]),
            n3: Some(100),
            v: Some(1.0),
            seed: Some(1),
            sweeps: Some(100_000),
            entry: Some(EntryArg::Table),
            output: Some(PathBuf::from(".")),
            format: Some(Format::Csv),
            engines: Some(vec![EngineArg::Deterministic, EngineArg::Limit]),
            c0: Some(20.0),
            ..Settings::default()
        };
        let specific = match self {
            SubcommandKind::Sweep => Settings {
                c: Some(fig3_c),
                rho0: Some(decimal_grid(1, 99, 100)),
                ..Settings::default()
            },
            SubcommandKind::Convergence => Settings {
                n2: Some(vec![50, 100, 200, 400, 800]),
                rho0: Some(decimal_grid(1, 99, 200)),
                ..Settings::default()
            },
            SubcommandKind::Profile => Settings {
                c: Some(vec![0.025]),
                rho0: Some(vec![0.3, 0.4, 0.5, 0.9]),
                ..Settings::default()
            },
            SubcommandKind::Tasep => Settings {
                c: Some(vec![0.025]),
                rho0: Some(vec![0.3]),
                ..Settings::default()
            },
            SubcommandKind::Limit => Settings {
                rho0: Some(decimal_grid(1, 99, 200)),
                ..Settings::default()
            },
        };
        specific.or(common)
    }
}

/// Fully resolved and range-checked settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: SubcommandKind,
    pub n1: usize,
    pub n2: Vec<usize>,
    pub n3: usize,
    pub c: Vec<f64>,
    pub c0: f64,
    pub rho0: Vec<f64>,
    pub v: f64,
    pub engines: Vec<EngineTag>,
    pub seed: u64,
    pub sweeps: u64,
    pub burn_in: Option<u64>,
    pub entry: EntryRule,
    pub output: PathBuf,
    pub format: Format,
}

impl RunConfig {
    /// Geometry with the first (for `convergence`, any) `n2` value.
    pub fn geometry(&self) -> UorfGeometry {
        UorfGeometry::new(self.n1, self.n2[0], self.n3).expect("validated geometry")
    }
}

fn out_of_range(flag: &str, value: impl std::fmt::Display, range: &str) -> RunError {
    RunError::Usage(format!("--{flag} {value} out of range {range}"))
}

fn check_open(flag: &str, xs: &[f64], lo: f64, hi: f64, range: &str) -> Result<(), RunError> {
    match xs.iter().find(|&&x| !(x > lo && x < hi)) {
        Some(&x) => Err(out_of_range(flag, x, range)),
        None => Ok(()),
    }
}

fn check_increasing(flag: &str, xs: &[f64]) -> Result<(), RunError> {
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(RunError::Usage(format!("--{flag} values must be strictly increasing")));
    }
    Ok(())
}

/// Layers flags over the configuration file over the defaults and checks
/// every range.
pub fn resolve(subcommand: SubcommandKind, args: CommandArgs) -> Result<RunConfig, RunError> {
    let file = match &args.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let s = args.settings.or(file).or(subcommand.defaults());
    let (n1, n2, n3) = (s.n1.unwrap(), s.n2.unwrap(), s.n3.unwrap());
    let rho0 = s.rho0.unwrap();
    let c = s.c.unwrap_or_default();
    let c0 = s.c0.unwrap();
    let v = s.v.unwrap();

    if rho0.is_empty() {
        return Err(RunError::Usage("--rho0 needs at least one value".into()));
    }
    if n2.is_empty() {
        return Err(RunError::Usage("--n2 needs at least one value".into()));
    }
    if subcommand != SubcommandKind::Convergence && n2.len() != 1 {
        return Err(RunError::Usage(format!(
            "--n2 takes a single value for {}",
            subcommand.as_str()
        )));
    }
    for &m in &n2 {
        UorfGeometry::new(n1, m, n3).map_err(|e| RunError::Usage(format!("{e} (n1 >= 1, n2 >= 2)")))?;
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(out_of_range("v", v, "(0, inf)"));
    }
    if !(c0 >= 0.0 && c0.is_finite()) {
        return Err(out_of_range("c0", c0, "[0, inf)"));
    }
    match subcommand {
        SubcommandKind::Convergence | SubcommandKind::Limit => {
            check_open("rho0", &rho0, 0.0, 0.5, "(0, 0.5)")?;
        }
        _ => check_open("rho0", &rho0, 0.0, 1.0, "(0, 1)")?,
    }
    if matches!(
        subcommand,
        SubcommandKind::Sweep | SubcommandKind::Convergence | SubcommandKind::Limit
    ) {
        check_increasing("rho0", &rho0)?;
    }
    if subcommand == SubcommandKind::Convergence {
        if n2.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RunError::Usage("--n2 values must be strictly increasing".into()));
        }
        if let Some(&m) = n2.iter().find(|&&m| !(c0 / (m as f64) < 1.0) || c0 <= 0.0) {
            return Err(RunError::Usage(format!(
                "--c0 {c0} gives c = c0 / n2 outside (0, 1) for n2 = {m}"
            )));
        }
    }
    if matches!(
        subcommand,
        SubcommandKind::Sweep | SubcommandKind::Profile | SubcommandKind::Tasep
    ) {
        if c.is_empty() {
            return Err(RunError::Usage("--c needs at least one value".into()));
        }
        check_open("c", &c, 0.0, 1.0, "(0, 1)")?;
    }
    if subcommand == SubcommandKind::Profile && c.len() != 1 {
        return Err(RunError::Usage("--c takes a single value for profile".into()));
    }
    let sweeps = s.sweeps.unwrap();
    if sweeps == 0 {
        return Err(out_of_range("sweeps", 0, "[1, inf)"));
    }
    let mut engines: Vec<EngineTag> = s.engines.unwrap().into_iter().map(EngineTag::from).collect();
    engines.sort();
    engines.dedup();
    if engines.is_empty() {
        return Err(RunError::Usage("--engines needs at least one engine".into()));
    }
    Ok(RunConfig {
        subcommand,
        n1,
        n2,
        n3,
        c,
        c0,
        rho0,
        v,
        engines,
        seed: s.seed.unwrap(),
        sweeps,
        burn_in: s.burn_in,
        entry: s.entry.unwrap().into(),
        output: s.output.unwrap(),
        format: s.format.unwrap(),
    })
}

/// Resolves a parsed command line.
pub fn from_cli(cli: Cli) -> Result<RunConfig, RunError> {
    let (kind, args) = match cli.command {
        Command::Sweep(a) => (SubcommandKind::Sweep, a),
        Command::Convergence(a) => (SubcommandKind::Convergence, a),
        Command::Profile(a) => (SubcommandKind::Profile, a),
        Command::Tasep(a) => (SubcommandKind::Tasep, a),
        Command::Limit(a) => (SubcommandKind::Limit, a),
    };
    resolve(kind, args)
}

/// Parses `argv` (program name first) into a [`RunConfig`]. Clap errors,
/// including `--help`, come back as usage errors carrying clap's text.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, RunError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| RunError::Usage(e.render().to_string()))?;
    from_cli(cli)
}
