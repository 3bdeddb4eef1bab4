//! The `tentctl` command line.
//!
//! Every command renders its primary output to a string. With `--output` the string goes to a
//! file and a manifest (`<file>.manifest.json`) records the command, every resolved parameter
//! and a SHA-256 digest of the bytes, so `tentctl replay` can re-run it and compare.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cantor::{self, CloudSource, HistogramSpec, Normalization};
use crate::control::{count_cycles, theta_from_offset, theta_interval, RegimeOffset};
use crate::error::TentError;
use crate::finder::{
    default_precision, default_threshold, iterate_controlled, search_seeds, verify_against_oracle,
    GridOptions, NumericCycleRecord, SeedOutcome, Verdict, DEFAULT_MAX_ITERS,
};
use crate::hpreal::HpReal;
use crate::map::{ControlConfig, MapParams, Regime};
use crate::oracle::{enumerate_cycles, enumerate_divisor_cycles, ExactCycle};
use crate::rational::{format_rational, parse_rational};

pub const PRECISION_ENV: &str = "TENTCTL_PRECISION";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "tentctl", version, about = "Periodic orbits of the tent map under predictive control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Number of proper T-cycles.
    Count(CountArgs),
    /// Exact cycles as JSON lines.
    Enumerate(EnumerateArgs),
    /// Search cycles by iterating the controlled map.
    Find(FindArgs),
    /// Sampled graphs of f, f^T, zeta and F.
    Graph(GraphArgs),
    /// Histogram of cycle points or first-type Cantor points.
    Cantor(CantorArgs),
    /// Match `find` output against the exact cycles.
    Verify(VerifyArgs),
    /// Re-run a manifest and compare output digests.
    Replay(ReplayArgs),
}

fn parse_slope(s: &str) -> Result<MapParams, String> {
    s.parse().map_err(|e: TentError| e.to_string())
}

fn parse_rat(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse().map_err(|e: TentError| e.to_string())
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub period: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CycleFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long = "H", value_parser = parse_slope)]
    pub h: MapParams,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub period: u32,
    /// Also list cycles whose period is a proper divisor of T.
    #[arg(long)]
    pub include_subcycles: bool,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: CycleFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FindArgs {
    #[arg(long = "H", value_parser = parse_slope)]
    pub h: MapParams,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub period: u32,
    #[arg(long, value_parser = parse_regime)]
    pub regime: Regime,
    /// Offset c with |c| < 1 inside the regime interval; defaults to 0.
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true, conflicts_with = "theta")]
    pub offset: Option<BigRational>,
    /// Explicit control parameter as a rational.
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
    pub theta: Option<BigRational>,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Explicit seed; repeat for several. Replaces the grid.
    #[arg(long = "seed-value", value_parser = parse_rat, allow_hyphen_values = true, action = ArgAction::Append)]
    pub seed_values: Vec<BigRational>,
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true, default_value = "0")]
    pub seed_min: BigRational,
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true, default_value = "1")]
    pub seed_max: BigRational,
    #[arg(long, env = PRECISION_ENV)]
    pub precision: Option<u32>,
    #[arg(long, value_parser = parse_rat)]
    pub threshold: Option<BigRational>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, value_parser = parse_rat)]
    pub divergence_bound: Option<BigRational>,
    /// Write the (n, x_n, U_n, Uhat_n) trace of the single seed as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Proceed despite an out-of-regime theta or a precision/threshold below the rule.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long = "H", value_parser = parse_slope)]
    pub h: MapParams,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub period: u32,
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true, required_unless_present = "offset")]
    pub theta: Option<BigRational>,
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true, conflicts_with = "theta", requires = "regime")]
    pub offset: Option<BigRational>,
    #[arg(long, value_parser = parse_regime)]
    pub regime: Option<Regime>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, env = PRECISION_ENV)]
    pub precision: Option<u32>,
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CantorMode {
    Cycles,
    FirstType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeChoice {
    Pos,
    Neg,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SourceChoice {
    Oracle,
    Finder,
}

#[derive(Debug, Args)]
pub struct CantorArgs {
    #[arg(long, value_enum)]
    pub mode: CantorMode,
    #[arg(long = "H", value_parser = parse_slope, default_value = "3")]
    pub h: MapParams,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..), required_if_eq("mode", "cycles"))]
    pub period: Option<u32>,
    /// Restrict the cycle cloud to cycles stabilized in these regimes.
    #[arg(long, value_enum)]
    pub regime: Option<RegimeChoice>,
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true, default_value = "0")]
    pub offset: BigRational,
    #[arg(long, value_enum, default_value = "oracle")]
    pub source: SourceChoice,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, default_value_t = 25)]
    pub depth: u32,
    #[arg(long, default_value_t = 200_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = cantor::DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "H", value_parser = parse_slope)]
    pub h: MapParams,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub period: u32,
    /// JSON lines written by `find`; `-` reads standard input.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to ten times the default threshold at the working precision.
    #[arg(long, value_parser = parse_rat)]
    pub tolerance: Option<BigRational>,
    #[arg(long, env = PRECISION_ENV)]
    pub precision: Option<u32>,
    /// Fail when some exact cycle was not found.
    #[arg(long)]
    pub require_all: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    pub output_digest: String,
    /// `output` or `trace`.
    #[serde(default = "default_artifact")]
    pub artifact: String,
}

fn default_artifact() -> String {
    "output".into()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

#[derive(Debug)]
pub struct CliError {
    pub flag: Option<&'static str>,
    pub message: String,
}

impl CliError {
    fn flag(flag: &'static str, message: impl fmt::Display) -> Self {
        CliError { flag: Some(flag), message: message.to_string() }
    }

    fn plain(message: impl fmt::Display) -> Self {
        CliError { flag: None, message: message.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.flag {
            Some(flag) => write!(f, "error: --{flag}: {}", self.message),
            None => write!(f, "error: {}", self.message),
        }
    }
}

fn at(flag: &'static str) -> impl Fn(TentError) -> CliError {
    move |e| CliError::flag(flag, e)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::plain(format!("{}: {e}", path.display()))
}

/// Rendered results of one command.
#[derive(Debug, Default)]
pub struct Outputs {
    pub primary: String,
    pub trace: Option<String>,
    /// Parameters resolved from defaults that the manifest should pin.
    pub resolved: BTreeMap<String, String>,
    /// Set when the command produced output but must exit non-zero.
    pub failure: Option<String>,
}

/// Parses `args` (including the program name) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, diag: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let command = Cli::command();
    let matches = match command.clone().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = e.exit_code();
            let sink: &mut dyn Write = if e.use_stderr() { diag } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(diag, "{}", e.render());
            return e.exit_code();
        }
    };
    let (name, sub_matches) = matches.subcommand().expect("subcommand is required");
    let sub_command = command.find_subcommand(name).expect("known subcommand");

    let result = match &cli.command {
        Command::Replay(r) => replay(&r.manifest, out, diag),
        other => execute(other, diag).and_then(|outputs| {
            let mut parameters = collect_parameters(sub_command, sub_matches);
            for (k, v) in &outputs.resolved {
                parameters.entry(k.clone()).or_insert_with(|| v.clone());
            }
            emit(name, other, &outputs, parameters, out)?;
            match &outputs.failure {
                Some(msg) => Err(CliError::plain(msg)),
                None => Ok(()),
            }
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(diag, "{e}");
            1
        }
    }
}

fn output_paths(command: &Command) -> (Option<&PathBuf>, Option<&PathBuf>) {
    match command {
        Command::Enumerate(a) => (a.output.as_ref(), None),
        Command::Find(a) => (a.output.as_ref(), a.trace.as_ref()),
        Command::Graph(a) => (a.output.as_ref(), None),
        Command::Cantor(a) => (a.output.as_ref(), None),
        Command::Verify(a) => (a.output.as_ref(), None),
        Command::Count(_) | Command::Replay(_) => (None, None),
    }
}

fn emit(
    name: &str,
    command: &Command,
    outputs: &Outputs,
    parameters: BTreeMap<String, String>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (output, trace) = output_paths(command);
    let write_artifact = |path: &Path, body: &str, artifact: &str| -> Result<(), CliError> {
        std::fs::write(path, body).map_err(io_err(path))?;
        let manifest = RunManifest {
            command: name.to_string(),
            parameters: parameters.clone(),
            tool_version: TOOL_VERSION.to_string(),
            output_digest: sha256_hex(body.as_bytes()),
            artifact: artifact.to_string(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(CliError::plain)? + "\n";
        let mpath = manifest_path(path);
        std::fs::write(&mpath, text).map_err(io_err(&mpath))
    };
    match output {
        Some(path) => write_artifact(path, &outputs.primary, "output")?,
        None => out.write_all(outputs.primary.as_bytes()).map_err(CliError::plain)?,
    }
    if let (Some(path), Some(body)) = (trace, &outputs.trace) {
        write_artifact(path, body, "trace")?;
    }
    Ok(())
}

/// Every argument present in `matches`, keyed by its long flag, except output paths.
fn collect_parameters(command: &clap::Command, matches: &ArgMatches) -> BTreeMap<String, String> {
    let mut params = BTreeMap::new();
    for arg in command.get_arguments() {
        let Some(long) = arg.get_long() else { continue };
        if matches!(long, "output" | "trace" | "help") {
            continue;
        }
        let Ok(Some(raw)) = matches.try_get_raw(arg.get_id().as_str()) else { continue };
        let values: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
        if values.is_empty() || (!arg.get_action().takes_values() && values == ["false"]) {
            continue;
        }
        params.insert(long.to_string(), values.join(","));
    }
    params
}

/// Inverse of [`collect_parameters`].
fn manifest_argv(manifest: &RunManifest) -> Result<Vec<String>, CliError> {
    let command = Cli::command();
    let sub = command
        .find_subcommand(&manifest.command)
        .ok_or_else(|| CliError::plain(format!("unknown command `{}` in manifest", manifest.command)))?;
    let mut argv = vec!["tentctl".to_string(), manifest.command.clone()];
    for (key, value) in &manifest.parameters {
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| CliError::plain(format!("unknown parameter `{key}` in manifest")))?;
        if !arg.get_action().takes_values() {
            if value == "true" {
                argv.push(format!("--{key}"));
            }
        } else if matches!(arg.get_action(), ArgAction::Append) {
            argv.extend(value.split(',').map(|v| format!("--{key}={v}")));
        } else {
            argv.push(format!("--{key}={value}"));
        }
    }
    if manifest.artifact == "trace" {
        argv.push("--trace=-".into());
    }
    Ok(argv)
}

fn replay(path: &Path, out: &mut dyn Write, diag: &mut dyn Write) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::flag("manifest", format!("{}: {e}", path.display())))?;
    if manifest.tool_version != TOOL_VERSION {
        let _ = writeln!(diag, "warning: manifest written by version {}", manifest.tool_version);
    }
    let argv = manifest_argv(&manifest)?;
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::flag("manifest", e.to_string().trim_end()))?;
    let outputs = execute(&cli.command, diag)?;
    let body = if manifest.artifact == "trace" { outputs.trace.unwrap_or_default() } else { outputs.primary };
    let digest = sha256_hex(body.as_bytes());
    if digest == manifest.output_digest {
        writeln!(out, "match {digest}").map_err(CliError::plain)?;
        Ok(())
    } else {
        Err(CliError::plain(format!("digest mismatch: manifest {} vs replay {digest}", manifest.output_digest)))
    }
}

/// Runs a parsed command without touching the filesystem except for inputs.
pub fn execute(command: &Command, diag: &mut dyn Write) -> Result<Outputs, CliError> {
    match command {
        Command::Count(a) => cmd_count(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Find(a) => cmd_find(a, diag),
        Command::Graph(a) => cmd_graph(a, diag),
        Command::Cantor(a) => cmd_cantor(a, diag),
        Command::Verify(a) => cmd_verify(a, diag),
        Command::Replay(_) => Err(CliError::plain("replay cannot be nested")),
    }
}

fn cmd_count(a: &CountArgs) -> Result<Outputs, CliError> {
    let n = count_cycles(a.period).map_err(at("period"))?;
    Ok(Outputs { primary: format!("{n}\n"), ..Outputs::default() })
}

fn cycle_lines(cycles: &[ExactCycle], format: CycleFormat) -> Result<String, CliError> {
    let mut out = String::new();
    if format == CycleFormat::Csv {
        out.push_str("T,symbols,sign,points\n");
    }
    for c in cycles {
        let r = c.to_record();
        match format {
            CycleFormat::Jsonl => {
                out.push_str(&serde_json::to_string(&r).map_err(CliError::plain)?);
                out.push('\n');
            }
            CycleFormat::Csv => {
                out.push_str(&format!("{},{},{},{}\n", r.period, r.symbols, r.sign, r.points.join(" ")));
            }
        }
    }
    Ok(out)
}

fn cmd_enumerate(a: &EnumerateArgs) -> Result<Outputs, CliError> {
    let cycles = if a.include_subcycles {
        enumerate_divisor_cycles(&a.h, a.period)
    } else {
        enumerate_cycles(&a.h, a.period)
    }
    .map_err(at("period"))?;
    Ok(Outputs { primary: cycle_lines(&cycles, a.format)?, ..Outputs::default() })
}

fn other_regime(r: Regime) -> Regime {
    match r {
        Regime::PositiveMultiplier => Regime::NegativeMultiplier,
        Regime::NegativeMultiplier => Regime::PositiveMultiplier,
    }
}

/// Errors (or warns under `force`) when `theta` stabilizes neither the requested regime nor any.
fn check_theta(
    params: &MapParams,
    period: u32,
    regime: Option<Regime>,
    theta: &BigRational,
    force: bool,
    diag: &mut dyn Write,
) -> Result<(), CliError> {
    let inside = |r: Regime| -> Result<bool, CliError> {
        Ok(theta_interval(params, period, r).map_err(at("period"))?.stabilizes(theta))
    };
    let message = match regime {
        Some(r) if inside(r)? => return Ok(()),
        Some(r) if inside(other_regime(r))? => {
            format!("{} stabilizes the {} regime, not {r}", format_rational(theta), other_regime(r))
        }
        None if inside(Regime::PositiveMultiplier)? || inside(Regime::NegativeMultiplier)? => return Ok(()),
        _ => format!("{} lies outside both stabilizing intervals", format_rational(theta)),
    };
    if force {
        let _ = writeln!(diag, "warning: --theta: {message}");
        Ok(())
    } else {
        Err(CliError::flag("theta", format!("{message}; pass --force to proceed")))
    }
}

fn resolve_theta(
    params: &MapParams,
    period: u32,
    regime: Regime,
    theta: &Option<BigRational>,
    offset: &Option<BigRational>,
) -> Result<BigRational, CliError> {
    match theta {
        Some(t) => Ok(t.clone()),
        None => {
            let c = offset.clone().unwrap_or_else(BigRational::zero);
            let off = RegimeOffset::new(c).map_err(at("offset"))?;
            theta_from_offset(params, period, regime, &off).map_err(at("period"))
        }
    }
}

fn cmd_find(a: &FindArgs, diag: &mut dyn Write) -> Result<Outputs, CliError> {
    let theta = resolve_theta(&a.h, a.period, a.regime, &a.theta, &a.offset)?;
    check_theta(&a.h, a.period, Some(a.regime), &theta, a.force, diag)?;
    let cfg = ControlConfig::new(a.h.clone(), a.period, a.regime, theta).map_err(at("period"))?;
    let precision = a.precision.unwrap_or_else(|| default_precision(&a.h, a.period));
    if precision == 0 {
        return Err(CliError::flag("precision", "must be positive"));
    }
    let opts = GridOptions {
        grid: a.grid,
        precision: Some(precision),
        threshold: a.threshold.as_ref().map(|t| HpReal::from_rational(t, precision)),
        max_iters: a.max_iters,
        window: a.window,
        divergence_bound: a.divergence_bound.as_ref().map(|b| HpReal::from_rational(b, precision)),
        seed_range: (a.seed_min.clone(), a.seed_max.clone()),
    };
    if let Err(e) = opts.search_config(&cfg, &BigRational::zero()).validate() {
        let flag = if e.to_string().contains("threshold") { "threshold" } else { "precision" };
        if a.force {
            let _ = writeln!(diag, "warning: --{flag}: {e}");
        } else {
            return Err(CliError::flag(flag, format!("{e}; pass --force to proceed")));
        }
    }
    let seeds = if a.seed_values.is_empty() {
        if a.grid < 2 {
            return Err(CliError::flag("grid", format!("grid size {} < 2", a.grid)));
        }
        opts.seeds()
    } else {
        a.seed_values.clone()
    };
    if a.trace.is_some() && seeds.len() != 1 {
        return Err(CliError::flag("trace", "requires exactly one --seed-value"));
    }

    let search = search_seeds(&cfg, seeds.clone(), &opts).map_err(at("seed-value"))?;
    let mut primary = String::new();
    for found in &search.cycles {
        let record = NumericCycleRecord::new(found, &cfg);
        primary.push_str(&record.to_json());
        primary.push('\n');
    }
    let tally = |want: fn(&SeedOutcome) -> bool| search.outcomes.iter().filter(|o| want(o)).count();
    let _ = writeln!(
        diag,
        "theta {}: {} seeds, {} converged, {} diverged, {} exhausted, {} false convergence; {} distinct cycles",
        format_rational(&cfg.theta),
        seeds.len(),
        tally(|o| matches!(o, SeedOutcome::Converged(_))),
        tally(|o| matches!(o, SeedOutcome::Diverged)),
        tally(|o| matches!(o, SeedOutcome::Exhausted)),
        tally(|o| matches!(o, SeedOutcome::FalseConvergence)),
        search.cycles.len()
    );

    let mut trace = None;
    if seeds.len() == 1 {
        let t = iterate_controlled(&opts.search_config(&cfg, &seeds[0]));
        let verdict = match t.verdict {
            Verdict::ConvergedToCycle(n) => format!("checkpoints hold from n = {n}"),
            Verdict::Diverged(n) => format!("diverged at n = {n}"),
            Verdict::MaxItersExhausted => "no convergence within max-iters".to_string(),
        };
        let _ = writeln!(diag, "seed {}: {verdict}", format_rational(&seeds[0]));
        if a.trace.is_some() {
            trace = Some(t.to_csv());
        }
    }
    let mut resolved = BTreeMap::new();
    resolved.insert("precision".to_string(), precision.to_string());
    Ok(Outputs { primary, trace, resolved, failure: None })
}

fn cmd_graph(a: &GraphArgs, diag: &mut dyn Write) -> Result<Outputs, CliError> {
    let regime = a.regime.unwrap_or(Regime::PositiveMultiplier);
    let theta = resolve_theta(&a.h, a.period, regime, &a.theta, &a.offset)?;
    check_theta(&a.h, a.period, a.regime, &theta, a.force, diag)?;
    if a.samples < 2 {
        return Err(CliError::flag("samples", "need at least 2 samples"));
    }
    let precision = a.precision.unwrap_or_else(|| default_precision(&a.h, a.period));
    let cfg = ControlConfig::new(a.h.clone(), a.period, regime, theta).map_err(at("period"))?;
    let map = cfg.at_precision(precision);
    let tent = map.tent();
    let last = (a.samples - 1) as i64;
    let mut primary = String::from("x,f,f_T,zeta,F\n");
    for i in 0..a.samples as i64 {
        let x = HpReal::from_rational(&BigRational::new(i.into(), last.into()), precision);
        let zeta = map.zeta(&x);
        let row = [
            x.to_sig_string(),
            tent.eval(&x).to_sig_string(),
            tent.iterate(&x, a.period).to_sig_string(),
            zeta.to_sig_string(),
            tent.eval(&zeta).to_sig_string(),
        ];
        primary.push_str(&row.join(","));
        primary.push('\n');
    }
    let mut resolved = BTreeMap::new();
    resolved.insert("precision".to_string(), precision.to_string());
    Ok(Outputs { primary, resolved, ..Outputs::default() })
}

fn cmd_cantor(a: &CantorArgs, diag: &mut dyn Write) -> Result<Outputs, CliError> {
    let spec = HistogramSpec::new(a.bins, Normalization::Density).map_err(at("bins"))?;
    let points = match a.mode {
        CantorMode::FirstType => {
            let sample = cantor::sample_first_type(a.depth, a.count, a.seed).map_err(at("count"))?;
            let _ = writeln!(diag, "first-type sample: {} points at depth {}", sample.points.len(), a.depth);
            sample.points
        }
        CantorMode::Cycles => {
            let period = a.period.ok_or_else(|| CliError::flag("period", "required for --mode cycles"))?;
            let offset = RegimeOffset::new(a.offset.clone()).map_err(at("offset"))?;
            let regimes: Vec<(Regime, RegimeOffset)> = match a.regime {
                None => vec![],
                Some(RegimeChoice::Pos) => vec![(Regime::PositiveMultiplier, offset)],
                Some(RegimeChoice::Neg) => vec![(Regime::NegativeMultiplier, offset)],
                Some(RegimeChoice::Both) => {
                    vec![(Regime::PositiveMultiplier, offset.clone()), (Regime::NegativeMultiplier, offset)]
                }
            };
            let source = match a.source {
                SourceChoice::Oracle => CloudSource::Oracle,
                SourceChoice::Finder => CloudSource::Finder(GridOptions { grid: a.grid, ..GridOptions::default() }),
            };
            let cloud = cantor::cycle_point_cloud(&a.h, period, &regimes, &source).map_err(at("period"))?;
            let _ = writeln!(diag, "cycle cloud: {} points from {} cycles", cloud.points.len(), cloud.cycles);
            cloud.points
        }
    };
    let hist = cantor::histogram(&points, spec).map_err(at("mode"))?;
    let _ = writeln!(diag, "coefficient of variation over nonempty bins: {:.6}", hist.coefficient_of_variation());
    Ok(Outputs { primary: hist.to_csv(), ..Outputs::default() })
}

#[derive(Debug, Serialize)]
struct MatchLine {
    found: usize,
    tau: u32,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    symbols: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    deviation: Option<String>,
    subcycle: bool,
}

#[derive(Debug, Serialize)]
struct MissingLine {
    missing: String,
    #[serde(rename = "T")]
    period: u32,
}

fn read_input(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(CliError::plain)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io_err(path))
    }
}

fn cmd_verify(a: &VerifyArgs, diag: &mut dyn Write) -> Result<Outputs, CliError> {
    let text = read_input(&a.input)?;
    let mut found = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let record: NumericCycleRecord = serde_json::from_str(line)
            .map_err(|e| CliError::flag("input", format!("line {}: {e}", i + 1)))?;
        if record.period != a.period {
            return Err(CliError::flag("input", format!("line {} has T = {}, expected {}", i + 1, record.period, a.period)));
        }
        found.push(record.to_cycle().map_err(at("input"))?);
    }
    let precision = a.precision.unwrap_or_else(|| default_precision(&a.h, a.period));
    let tol = match &a.tolerance {
        Some(t) => HpReal::from_rational(t, precision),
        None => &HpReal::from_i64(10, precision) * &default_threshold(precision),
    };
    let exact = enumerate_divisor_cycles(&a.h, a.period).map_err(at("period"))?;
    let report = verify_against_oracle(&found, &exact, &tol);

    let mut primary = String::new();
    let mut push = |line: String| {
        primary.push_str(&line);
        primary.push('\n');
    };
    for (i, f) in found.iter().enumerate() {
        let m = report.matches.iter().find(|m| m.found == i);
        let line = MatchLine {
            found: i,
            tau: f.proper_period,
            status: if m.is_some() { "matched" } else { "unmatched" },
            symbols: m.map(|m| exact[m.exact].symbols.to_string()),
            deviation: m.map(|m| m.deviation.to_scientific(3)),
            subcycle: f.is_subcycle(),
        };
        push(serde_json::to_string(&line).map_err(CliError::plain)?);
    }
    for &j in &report.missing {
        let line = MissingLine { missing: exact[j].symbols.to_string(), period: exact[j].period };
        push(serde_json::to_string(&line).map_err(CliError::plain)?);
    }
    let _ = writeln!(
        diag,
        "{} matched, {} unmatched, {} ambiguous, {} exact cycles not found (tolerance {})",
        report.matches.len(),
        report.unmatched.len(),
        report.ambiguous.len(),
        report.missing.len(),
        tol.to_scientific(3)
    );
    let failure = if !report.is_clean() {
        Some("some numeric cycles did not match an exact cycle".to_string())
    } else if a.require_all && !report.missing.is_empty() {
        Some(format!("{} exact cycles were not found", report.missing.len()))
    } else {
        None
    };
    let mut resolved = BTreeMap::new();
    resolved.insert("precision".to_string(), precision.to_string());
    Ok(Outputs { primary, resolved, failure, ..Outputs::default() })
}
