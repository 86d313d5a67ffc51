//! Command-line front end.
//!
//! ```text
//! msapprox run <mls-size|shepard-snr|spd-snr> --out PATH [--trials N] [--levels N]
//!     [--lambda X] [--seed N] [--sweep v1,v2,...] [--grid N] [--config PATH] [--threads N]
//! msapprox approx --data in.csv --method <shepard|mls> --multiscale <true|false>
//!     --levels N --query qx,qy [--seed N] [--lambda X]
//! ```
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on invalid input.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::exec::{with_threads, Execution};
use crate::experiments::{
    run_experiment, ExperimentConfig, ExperimentKind, DEFAULT_GRID, DEFAULT_LAMBDA,
    DEFAULT_LEVELS, DEFAULT_SEED, DEFAULT_TRIALS,
};
use crate::kernels::KernelFamily;
use crate::multiscale::{build_hierarchy, ms_fit_scalar, HierarchySpec, KernelRule, TangentFrame};
use crate::operators::{Approximant, Method, ScatteredDataset};
use crate::report::{table_rows, write_csv};
use crate::Point;

pub const SEED_ENV: &str = "MSAPPROX_SEED";

#[derive(Debug, Parser)]
#[command(name = "msapprox", version, about = "Multiscale quasi-interpolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment and write a CSV summary.
    Run(RunArgs),
    /// Approximate a scalar dataset at one query point.
    Approx(ApproxArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// mls-size, shepard-snr or spd-snr
    experiment: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated sweep values (dataset sizes or SNRs).
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    /// File of `key = value` lines; keys mirror the flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (0 = one per core). Does not affect the output.
    #[arg(long)]
    threads: Option<usize>,
    /// Frame for SPD residual tangents.
    #[arg(long, value_enum)]
    frame: Option<FrameArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FrameArg {
    Identity,
    Ambient,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Shepard,
    Mls,
}

#[derive(Debug, Args)]
struct ApproxArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, action = clap::ArgAction::Set, default_value_t = false)]
    multiscale: bool,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    /// Query point as `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    query: String,
    #[arg(long)]
    seed: Option<u64>,
}

/// Input problems (exit 2) versus runtime failures (exit 1).
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args, err),
        Command::Approx(args) => cmd_approx(args, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(err, "error: {e:#}\n\nFor usage, try '--help'.");
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

/// `key = value` lines; blank lines and `#` comments are ignored.
fn read_config_file(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), k + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_list(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?}")))
        .collect()
}

fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("{SEED_ENV}={v:?}"))?)),
        Err(_) => Ok(None),
    }
}

/// Flag value if given, else the config file entry, else `None`.
fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
) -> anyhow::Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(v) => v.parse::<T>().map(Some).map_err(|e| anyhow!("config key {key}: {e}")),
        None => Ok(None),
    }
}

struct RunPlan {
    config: ExperimentConfig,
    out: PathBuf,
    threads: usize,
}

fn plan_run(args: RunArgs) -> anyhow::Result<RunPlan> {
    let experiment = ExperimentKind::from_name(&args.experiment).ok_or_else(|| {
        anyhow!("unknown experiment {:?} (expected mls-size, shepard-snr or spd-snr)", args.experiment)
    })?;
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let known = ["trials", "levels", "lambda", "seed", "out", "sweep", "grid", "threads", "frame"];
    if let Some(key) = file.keys().find(|k| !known.contains(&k.as_str())) {
        bail!("unknown config key {key:?}");
    }

    let mut config = ExperimentConfig::new(experiment);
    config.trials = pick(args.trials, &file, "trials")?.unwrap_or(DEFAULT_TRIALS);
    config.levels = pick(args.levels, &file, "levels")?.unwrap_or(DEFAULT_LEVELS);
    config.lambda = pick(args.lambda, &file, "lambda")?.unwrap_or(DEFAULT_LAMBDA);
    config.grid = pick(args.grid, &file, "grid")?.unwrap_or(DEFAULT_GRID);
    config.seed = match pick(args.seed, &file, "seed")? {
        Some(seed) => seed,
        None => env_seed()?.unwrap_or(DEFAULT_SEED),
    };
    if let Some(sweep) = pick(args.sweep, &file, "sweep")? {
        config.sweep = parse_list(&sweep)?;
    }
    config.frame = match args.frame {
        Some(FrameArg::Identity) => TangentFrame::Identity,
        Some(FrameArg::Ambient) => TangentFrame::Ambient,
        None => match file.get("frame").map(String::as_str) {
            None | Some("identity") => TangentFrame::Identity,
            Some("ambient") => TangentFrame::Ambient,
            Some(other) => bail!("config key frame: unknown frame {other:?}"),
        },
    };
    config.validate()?;
    let out = pick(args.out, &file, "out")?.ok_or_else(|| anyhow!("--out is required"))?;
    let threads = pick(args.threads, &file, "threads")?.unwrap_or(0);
    Ok(RunPlan {
        config,
        out,
        threads,
    })
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn cmd_run(args: RunArgs, err: &mut dyn Write) -> Result<(), Failure> {
    let plan = plan_run(args).map_err(usage)?;
    let cfg = &plan.config;
    let table = with_threads(plan.threads, || run_experiment(cfg, Execution::default()))
        .map_err(runtime)?;
    for sweep in &table.sweeps {
        let _ = writeln!(
            err,
            "{}: {}={} done",
            cfg.experiment.name(),
            cfg.experiment.param_name(),
            sweep.param_value
        );
    }

    let rows = table_rows(&table);
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).map_err(runtime)?;
    fs::write(&plan.out, csv)
        .with_context(|| format!("writing {}", plan.out.display()))
        .map_err(runtime)?;

    let manifest = serde_json::json!({
        "config": cfg,
        "eval_points": table.eval_points.len(),
        "noise_scale": table.sweeps.iter().map(|s| s.noise_scale).collect::<Vec<_>>(),
        "spd_snr_ratio": table.spd_snr_ratio,
    });
    let meta = meta_path(&plan.out);
    fs::write(&meta, format!("{manifest}\n"))
        .with_context(|| format!("writing {}", meta.display()))
        .map_err(runtime)?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct DataRow {
    x: f64,
    y: f64,
    f: f64,
}

/// Reads `x,y,f` rows; the error names the first bad line.
fn read_dataset(path: &Path) -> Result<(Vec<Point>, Vec<f64>), Failure> {
    let file = fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(runtime)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| usage(anyhow!("line 1: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != ["x", "y", "f"] {
        return Err(usage(anyhow!("line 1: expected header `x,y,f`, found {:?}", header.join(","))));
    }
    let mut sites = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            usage(anyhow!("line {line}: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row: DataRow = record
            .deserialize(None)
            .map_err(|e| usage(anyhow!("line {line}: {e}")))?;
        if !(row.x.is_finite() && row.y.is_finite() && row.f.is_finite()) {
            return Err(usage(anyhow!("line {line}: non-finite value")));
        }
        sites.push([row.x, row.y]);
        values.push(row.f);
    }
    Ok((sites, values))
}

fn parse_query(text: &str) -> anyhow::Result<Point> {
    match parse_list(text)?.as_slice() {
        [x, y] => Ok([*x, *y]),
        _ => bail!("query must be `x,y`, got {text:?}"),
    }
}

fn cmd_approx(args: ApproxArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let query = parse_query(&args.query).map_err(usage)?;
    let spec = HierarchySpec::new(args.levels, args.lambda).map_err(usage)?;
    let seed = match args.seed {
        Some(seed) => seed,
        None => env_seed().map_err(usage)?.unwrap_or(DEFAULT_SEED),
    };
    let (sites, values) = read_dataset(&args.data)?;
    if sites.is_empty() {
        return Err(runtime(anyhow!("dataset {} is empty", args.data.display())));
    }
    let data = ScatteredDataset::new(sites, values).map_err(runtime)?;
    let (method, family) = match args.method {
        MethodArg::Shepard => (Method::Shepard, KernelFamily::Wendland),
        MethodArg::Mls => (Method::Mls, KernelFamily::Gaussian),
    };
    let rule = KernelRule::mesh_scaled(family);
    let value = if args.multiscale {
        let hierarchy = build_hierarchy(data.len(), &spec, &mut ChaCha8Rng::seed_from_u64(seed));
        ms_fit_scalar(&data, &hierarchy, &rule, method)
            .and_then(|ms| ms.eval(&query))
            .map_err(runtime)?
    } else {
        rule.kernel_for(data.sites())
            .and_then(|kernel| Approximant::new(data, kernel, method).eval(&query))
            .map_err(runtime)?
    };
    writeln!(out, "{}", format_significant(value, 12)).map_err(runtime)?;
    Ok(())
}

/// Fixed notation with `digits` significant digits (scientific outside
/// `1e-5 ..= 1e15`).
pub fn format_significant(value: f64, digits: usize) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, value);
    let exponent: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if value == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    if !(-5..=15).contains(&exponent) {
        return sci;
    }
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    format!("{value:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(5.0, 12), "5.00000000000");
        assert_eq!(format_significant(7.0, 12), "7.00000000000");
        assert_eq!(format_significant(123.456, 12), "123.456000000");
        assert_eq!(format_significant(-0.5, 12), "-0.500000000000");
        assert_eq!(format_significant(9.99999999999996, 12), "10.0000000000");
        assert_eq!(format_significant(0.0, 12), "0.00000000000");
        assert_eq!(format_significant(1.5e-9, 12), "1.50000000000e-9");
    }

    #[test]
    fn config_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(&path, "# comment\ntrials = 5\n\nsweep = 1, 2\n").unwrap();
        let map = read_config_file(&path).unwrap();
        assert_eq!(map["trials"], "5");
        assert_eq!(parse_list(&map["sweep"]).unwrap(), vec![1.0, 2.0]);
        fs::write(&path, "trials 5\n").unwrap();
        assert!(read_config_file(&path).is_err());
    }

    #[test]
    fn meta_sidecar_name() {
        assert_eq!(meta_path(Path::new("out/r.csv")), PathBuf::from("out/r.csv.meta"));
    }

    #[test]
    fn query_parsing() {
        assert_eq!(parse_query("0.1,-0.9").unwrap(), [0.1, -0.9]);
        assert!(parse_query("0.1").is_err());
        assert!(parse_query("a,b").is_err());
    }
}
