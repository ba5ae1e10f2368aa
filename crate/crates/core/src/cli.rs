//! Command-line front end.
//!
//! Exit codes: `0` success, `2` usage or configuration error, `3` I/O error,
//! `1` any other failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::adversary::compute_m1;
use crate::bounds::{
    adversarial_floor, corrected_alpha_split, cvplus_pac_bound, split_pac_bound, CorrectedAlpha,
    Vacuity,
};
use crate::error::Error;
use crate::experiments::{
    run_trials_with_workers, summarize, write_trials_csv, ExperimentConfig, Mode, SummaryReport,
    TrialRecord,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CONDCOV_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_CSV_FILE: &str = "summary.csv";
pub const SUMMARY_JSON_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(
    name = "condcov",
    version,
    about = "Conformal prediction with training-conditional coverage diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a coverage simulation and write trial and summary files.
    Simulate(SimulateArgs),
    /// Run a clock adversary against full conformal or jackknife+.
    Adversary(AdversaryArgs),
    /// Evaluate closed-form coverage bounds.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Paper,
    Smoke,
    AdversaryDemo,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Smoke => "smoke",
            Preset::AdversaryDemo => "adversary-demo",
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory (must exist). Defaults to $CONDCOV_OUT_DIR, then the
    /// current directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Maximum number of worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Built-in configuration to start from.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Flat `key = value` config file applied on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run exactly the configuration recorded in a manifest.
    #[arg(long, conflicts_with_all = ["preset", "config"])]
    from_manifest: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    /// Comma-separated dimensions.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated methods: split, full, jackknife+, cv+.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AdversaryChoice {
    Full,
    Jk,
}

#[derive(Debug, Args)]
struct AdversaryArgs {
    #[arg(long, value_enum)]
    method: AdversaryChoice,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    n_test: usize,
    /// Partition size M; defaults to n.
    #[arg(long)]
    clock_cells: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Split conformal PAC bound (needs --n1).
    #[arg(long)]
    split: bool,
    /// CV+ PAC bound (needs --K and --m).
    #[arg(long)]
    cvplus: bool,
    /// Adversarial miscoverage floor (needs --n).
    #[arg(long)]
    floor: bool,
    /// Corrected split level (needs --n1).
    #[arg(long)]
    corrected: bool,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Other(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Other(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Other(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => CliError::Io(e.to_string()),
            Error::Singular | Error::EventsNotSatisfied { .. } => CliError::Other(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Adversary(a) => cmd_adversary(a),
        Command::Bounds(a) => cmd_bounds(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub toolkit_version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    pub status: String,
    pub outputs: Vec<String>,
}

fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn resolve_out_dir(arg: Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = arg
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    if !dir.is_dir() {
        return Err(CliError::Io(format!(
            "output directory {} does not exist",
            dir.display()
        )));
    }
    Ok(dir)
}

/// Writes `bytes` to `path` through a temporary file and a rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

fn render<F>(f: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> crate::error::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Runs `config` and writes manifest, trial CSV and summaries into `dir`.
/// Every file written by this run is removed again on failure.
fn execute_run(
    command: &str,
    config: &ExperimentConfig,
    dir: &Path,
    workers: Option<usize>,
) -> Result<(Vec<TrialRecord>, SummaryReport), CliError> {
    config.validate()?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let outputs = [TRIALS_FILE, SUMMARY_CSV_FILE, SUMMARY_JSON_FILE];
    let mut manifest = RunManifest {
        command: command.to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        config: config.clone(),
        started_unix: now_unix(),
        finished_unix: None,
        status: "running".into(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    let manifest_bytes =
        |m: &RunManifest| serde_json::to_vec_pretty(m).map_err(|e| CliError::Other(e.to_string()));
    write_atomic(&manifest_path, &manifest_bytes(&manifest)?)?;

    let body = || -> Result<(Vec<TrialRecord>, SummaryReport), CliError> {
        let records = run_trials_with_workers(config, workers)?;
        let summary = summarize(&records)?;
        write_atomic(
            &dir.join(TRIALS_FILE),
            &render(|b| write_trials_csv(&records, b))?,
        )?;
        write_atomic(
            &dir.join(SUMMARY_CSV_FILE),
            &render(|b| summary.write_csv(b))?,
        )?;
        write_atomic(
            &dir.join(SUMMARY_JSON_FILE),
            &render(|b| summary.write_json(b))?,
        )?;
        Ok((records, summary))
    };
    match body() {
        Ok(out) => {
            manifest.finished_unix = Some(now_unix());
            manifest.status = "complete".into();
            write_atomic(&manifest_path, &manifest_bytes(&manifest)?)?;
            Ok(out)
        }
        Err(e) => {
            for f in outputs {
                let _ = fs::remove_file(dir.join(f));
            }
            let _ = fs::remove_file(&manifest_path);
            Err(e)
        }
    }
}

fn load_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: invalid manifest: {e}", path.display())))
}

fn build_simulate_config(a: &SimulateArgs) -> Result<ExperimentConfig, CliError> {
    if let Some(path) = &a.from_manifest {
        return Ok(load_manifest(path)?.config);
    }
    let mut config = ExperimentConfig::preset(a.preset.map_or("smoke", Preset::name))?;
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        config.apply_kv(&text)?;
    }
    for kv in &a.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        config.set(k, v)?;
    }
    let flags: [(&str, Option<String>); 10] = [
        ("mode", a.mode.clone()),
        ("n", a.n.map(|v| v.to_string())),
        ("n_test", a.n_test.map(|v| v.to_string())),
        ("dims", a.dims.clone()),
        ("alpha", a.alpha.map(|v| v.to_string())),
        ("trials", a.trials.map(|v| v.to_string())),
        ("methods", a.methods.clone()),
        ("lambda", a.lambda.map(|v| v.to_string())),
        ("folds", a.folds.map(|v| v.to_string())),
        ("seed", a.seed.map(|v| v.to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            config.set(k, &v)?;
        }
    }
    Ok(config)
}

fn print_summary(summary: &SummaryReport) {
    println!(
        "{:<11} {:>6} {:>8} {:>8} {:>8} {:>9} {:>9} {:>9}",
        "method", "d", "mean", "median", "max", ">alpha", ">0.2", ">0.99"
    );
    for r in &summary.rows {
        println!(
            "{:<11} {:>6} {:>8.4} {:>8.4} {:>8.4} {:>9.3} {:>9.3} {:>9.3}",
            r.method.as_str(),
            r.d,
            r.mean,
            r.median,
            r.max,
            r.frac_gt_alpha,
            r.frac_gt_0_2,
            r.frac_gt_0_99
        );
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let config = build_simulate_config(&a)?;
    config.validate()?;
    let dir = resolve_out_dir(a.output.out_dir.clone())?;
    let (_, summary) = execute_run("simulate", &config, &dir, a.output.workers)?;
    print_summary(&summary);
    println!("outputs written to {}", dir.display());
    Ok(())
}

fn cmd_adversary(a: AdversaryArgs) -> Result<(), CliError> {
    if a.n < 2 {
        return Err(CliError::Usage(format!(
            "--n must be at least 2, got {}",
            a.n
        )));
    }
    let mode = match a.method {
        AdversaryChoice::Full => Mode::AdversaryFull,
        AdversaryChoice::Jk => Mode::AdversaryJk,
    };
    let config = ExperimentConfig {
        mode,
        n: a.n,
        n_test: a.n_test,
        alpha: a.alpha,
        trials: a.trials,
        seed: a.seed,
        clock_cells: a.clock_cells,
        ..ExperimentConfig::preset("adversary-demo")?
    };
    config.validate()?;
    let m = config.clock_cells();
    let m1 = compute_m1(a.n, m, a.alpha)?;
    let floor = adversarial_floor(a.alpha, a.n)?;
    if m1 == 0 {
        eprintln!("warning: M1 = 0 at n = {}, M = {m}; the modular event is impossible and no collapse can occur", a.n);
    }
    if Vacuity::of_lower(floor) == Vacuity::Vacuous {
        eprintln!(
            "warning: the adversarial floor {floor:.4} is not positive at n = {} (VACUOUS)",
            a.n
        );
    }
    let dir = resolve_out_dir(a.output.out_dir)?;
    let (records, _) = execute_run("adversary", &config, &dir, a.output.workers)?;
    let trials = records.len() as f64;
    let collapsed = records.iter().filter(|r| r.alpha_hat >= 0.99).count();
    let all_three = records
        .iter()
        .filter(|r| r.events.is_some_and(|e| e.all_three))
        .count();
    let frac = collapsed as f64 / trials;
    let se = ((m1 as f64 / m as f64) * (1.0 - m1 as f64 / m as f64) / trials).sqrt();
    println!(
        "method={} n={} M={m} M1={m1} trials={}",
        match a.method {
            AdversaryChoice::Full => "full",
            AdversaryChoice::Jk => "jk",
        },
        a.n,
        records.len()
    );
    println!("all three events held in {all_three} trials");
    println!(
        "P(alpha_hat >= 0.99) = {frac:.4} ({collapsed}/{}); M1/M = {:.4} (3 SE = {:.4}); floor alpha - 6 sqrt(ln n / n) = {floor:.4}{}",
        records.len(),
        m1 as f64 / m as f64,
        3.0 * se,
        match Vacuity::of_lower(floor) {
            Vacuity::Informative => String::new(),
            v => format!(" [{}]", v.label()),
        }
    );
    println!("outputs written to {}", dir.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct BoundLine {
    bound: &'static str,
    alpha: f64,
    delta: Option<f64>,
    n1: Option<usize>,
    #[serde(rename = "K")]
    k: Option<usize>,
    m: Option<usize>,
    n: Option<usize>,
    value: Option<f64>,
    flag: String,
}

fn need<T>(v: Option<T>, flag: &str, bound: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{bound} requires --{flag}")))
}

fn flag_of(v: Vacuity) -> String {
    v.label().to_string()
}

fn cmd_bounds(a: BoundsArgs) -> Result<(), CliError> {
    if !(a.split || a.cvplus || a.floor || a.corrected) {
        return Err(CliError::Usage(
            "select at least one of --split, --cvplus, --floor, --corrected".into(),
        ));
    }
    let base = |bound| BoundLine {
        bound,
        alpha: a.alpha,
        delta: None,
        n1: None,
        k: None,
        m: None,
        n: None,
        value: None,
        flag: String::new(),
    };
    let mut lines = Vec::new();
    if a.split {
        let n1 = need(a.n1, "n1", "split")?;
        let v = split_pac_bound(a.alpha, a.delta, n1)?;
        let mut flag = flag_of(Vacuity::of_upper(v));
        if a.delta > 0.5 {
            flag = "DELTA-OUTSIDE-(0,0.5]".into();
        }
        lines.push(BoundLine {
            delta: Some(a.delta),
            n1: Some(n1),
            value: Some(v),
            flag,
            ..base("split")
        });
    }
    if a.cvplus {
        let k = need(a.k, "K", "cvplus")?;
        let m = need(a.m, "m", "cvplus")?;
        let v = cvplus_pac_bound(a.alpha, a.delta, k, m)?;
        lines.push(BoundLine {
            delta: Some(a.delta),
            k: Some(k),
            m: Some(m),
            value: Some(v),
            flag: flag_of(Vacuity::of_upper(v)),
            ..base("cvplus")
        });
    }
    if a.floor {
        let n = need(a.n, "n", "floor")?;
        let v = adversarial_floor(a.alpha, n)?;
        lines.push(BoundLine {
            n: Some(n),
            value: Some(v),
            flag: flag_of(Vacuity::of_lower(v)),
            ..base("floor")
        });
    }
    if a.corrected {
        let n1 = need(a.n1, "n1", "corrected")?;
        let (value, flag) = match corrected_alpha_split(a.alpha, a.delta, n1)? {
            CorrectedAlpha::Feasible { alpha, .. } => (Some(alpha), String::new()),
            CorrectedAlpha::Infeasible { .. } => (None, "INFEASIBLE".to_string()),
        };
        lines.push(BoundLine {
            delta: Some(a.delta),
            n1: Some(n1),
            value,
            flag,
            ..base("corrected")
        });
    }
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&lines).map_err(|e| CliError::Other(e.to_string()))?
        );
        return Ok(());
    }
    for l in &lines {
        let mut params = format!("alpha={}", l.alpha);
        for (name, v) in [
            ("delta", l.delta.map(|d| d.to_string())),
            ("n1", l.n1.map(|v| v.to_string())),
            ("K", l.k.map(|v| v.to_string())),
            ("m", l.m.map(|v| v.to_string())),
            ("n", l.n.map(|v| v.to_string())),
        ] {
            if let Some(v) = v {
                params.push_str(&format!(" {name}={v}"));
            }
        }
        let value = l.value.map_or("-".to_string(), |v| format!("{v:.6}"));
        println!("{:<10} {:<40} {:>10} {}", l.bound, params, value, l.flag);
    }
    Ok(())
}
