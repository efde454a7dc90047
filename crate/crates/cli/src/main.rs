//! `hctree` — hard-core boundary laws and Gibbs sampling on the rooted tree.
//!
//! Every command is deterministic given its flags (including `--seed`).
//! Exact rationals cross the boundary as strings (`5/16`, `d:01011`);
//! floats appear only in outputs. A JSON config file may supply any flag
//! (`--config run.json`); explicit flags win.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use hctree::activity::{critical_activity, ActivitySpec, ModelParams};
use hctree::bg::{bg_field, bg_root_value, scan_t, uniform_grid, BgParams, DEFAULT_MAX_DEPTH};
use hctree::dynamics::{classify_orbit, FixedPointData};
use hctree::gibbs::{root_marginal, sample_configuration};
use hctree::path::PathCode;
use hctree::verify::{run_suite, Suite, VerifyOptions};

const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_COUNT: usize = 100_000;
const DEFAULT_SAMPLE_DEPTH: usize = 3;
const ORBIT_MAX_STEPS: u64 = 1_000_000;

#[derive(Parser)]
#[command(
    name = "hctree",
    version,
    about = "Hard-core model with countably many spin values on the Cayley tree"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical total activity k^k/(k-1)^{k+1}
    Critical(CommonArgs),
    /// Fixed point, 2-cycle and contraction data for (k, ||lambda||)
    Fixpoints(CommonArgs),
    /// Classify the orbit of alpha0 (--t, exact rational) or a seed grid (--grid)
    Orbit(CommonArgs),
    /// Root value z0(t) of the path-interpolating boundary law
    BgRoot(CommonArgs),
    /// z0 over a uniform rational t-grid (CSV: t,z0,error_bound)
    BgScan(CommonArgs),
    /// Root spin marginal (constant-xi field, or the path field when --t is given)
    Marginal(CommonArgs),
    /// Exact samples on V_m, one JSON configuration per line
    Sample(CommonArgs),
    /// Run invariant suites: dynamics | bg | gibbs | all
    Verify(VerifyArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Tree branching number (every vertex has k successors), k >= 2
    #[arg(long)]
    k: Option<u32>,
    /// Total activity ||lambda||; shorthand for `--activity finite:1=<norm>`
    #[arg(long)]
    norm: Option<f64>,
    /// Activity table: `geom:c=<f>,q=<f>` or `finite:<j>=<v>,...`
    #[arg(long)]
    activity: Option<String>,
    /// Path code (`5/16`, `0`, `1`, or digit prefix `d:01011`); for `orbit`,
    /// the starting point alpha0
    #[arg(long)]
    t: Option<String>,
    /// Certified tolerance for path-field root values [default: 1e-10]
    #[arg(long)]
    tol: Option<f64>,
    /// Volume depth m for marginal/sample, recursion cap for bg commands
    #[arg(long)]
    depth: Option<usize>,
    /// Grid size (bg-scan points, orbit seeds)
    #[arg(long)]
    grid: Option<usize>,
    /// Number of samples [default: 100000]
    #[arg(long)]
    count: Option<usize>,
    /// RNG seed; sample i uses seed + i [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Output format: json or csv (bg-scan defaults to csv, the rest to json)
    #[arg(long)]
    format: Option<String>,
    /// JSON config file carrying the same keys; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct VerifyArgs {
    /// Suite to run
    #[arg(default_value = "all")]
    suite: String,
    /// Corrupt a measured quantity to prove the harness fails (test hook)
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

/// Config-file counterpart of the flags; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    k: Option<u32>,
    norm: Option<f64>,
    activity: Option<String>,
    t: Option<String>,
    tol: Option<f64>,
    depth: Option<usize>,
    grid: Option<usize>,
    count: Option<usize>,
    seed: Option<u64>,
    format: Option<String>,
}

enum CliError {
    /// Bad invocation: wrong flags, unparsable values. Exit code 2.
    Usage(String),
    /// A well-formed request the model cannot satisfy. Exit code 1.
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<hctree::BgError> for CliError {
    fn from(err: hctree::BgError) -> Self {
        CliError::Runtime(err.to_string())
    }
}

impl From<hctree::DynamicsError> for CliError {
    fn from(err: hctree::DynamicsError) -> Self {
        CliError::Runtime(err.to_string())
    }
}

/// Flags merged over the config file, with defaults applied.
struct Settings {
    k: Option<u32>,
    norm: Option<f64>,
    activity: Option<String>,
    t: Option<String>,
    tol: f64,
    depth: Option<usize>,
    grid: Option<usize>,
    count: usize,
    seed: u64,
    format: Option<String>,
}

impl Settings {
    fn merge(args: &CommonArgs) -> Result<Self, CliError> {
        let file: RunConfig = match &args.config {
            None => RunConfig::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))?
            }
        };
        Ok(Settings {
            k: args.k.or(file.k),
            norm: args.norm.or(file.norm),
            activity: args.activity.clone().or(file.activity),
            t: args.t.clone().or(file.t),
            tol: args.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
            depth: args.depth.or(file.depth),
            grid: args.grid.or(file.grid),
            count: args.count.or(file.count).unwrap_or(DEFAULT_COUNT),
            seed: args.seed.or(file.seed).unwrap_or(0),
            format: args.format.clone().or(file.format),
        })
    }

    fn k(&self) -> Result<u32, CliError> {
        match self.k {
            Some(k) if k >= 2 => Ok(k),
            Some(k) => Err(CliError::usage(format!("--k must be at least 2, got {k}"))),
            None => Err(CliError::usage("--k is required")),
        }
    }

    /// The activity table: explicit `--activity`, else the single-spin
    /// table carrying the full mass of `--norm`.
    fn activity(&self) -> Result<ActivitySpec, CliError> {
        match (&self.activity, self.norm) {
            (Some(text), _) => text
                .parse()
                .map_err(|e| CliError::usage(format!("--activity: {e}"))),
            (None, Some(norm)) if norm > 0.0 => {
                Ok(ActivitySpec::finite([(1, norm)]).expect("positive single entry"))
            }
            (None, Some(norm)) => Err(CliError::usage(format!(
                "--norm must be positive, got {norm}"
            ))),
            (None, None) => Err(CliError::usage("provide --activity or --norm")),
        }
    }

    fn norm(&self) -> Result<f64, CliError> {
        match self.norm {
            Some(norm) if norm > 0.0 => Ok(norm),
            Some(norm) => Err(CliError::usage(format!(
                "--norm must be positive, got {norm}"
            ))),
            None => Ok(self.activity()?.total_activity()),
        }
    }

    fn path_code(&self, k: u32) -> Result<Option<PathCode>, CliError> {
        match &self.t {
            None => Ok(None),
            Some(text) => PathCode::parse(text, k)
                .map(Some)
                .map_err(|e| CliError::usage(format!("--t: {e}"))),
        }
    }

    /// `max_depth` caps the backward recursion: for bg-root/bg-scan it is
    /// the --depth flag, for marginal/sample --depth addresses the volume
    /// instead and the cap stays at its default.
    fn bg_params(&self, k: u32, max_depth: Option<usize>) -> Result<BgParams, CliError> {
        let model = ModelParams::new(k, self.activity()?);
        Ok(BgParams::new(
            model,
            self.tol,
            max_depth.unwrap_or(DEFAULT_MAX_DEPTH),
        )?)
    }

    fn format_or(&self, default: &str) -> Result<String, CliError> {
        let format = self.format.clone().unwrap_or_else(|| default.to_string());
        match format.as_str() {
            "json" | "csv" => Ok(format),
            other => Err(CliError::usage(format!(
                "--format must be json or csv, got `{other}`"
            ))),
        }
    }
}

#[derive(Serialize)]
struct CriticalOut {
    k: u32,
    lambda_cr: f64,
}

fn cmd_critical(settings: &Settings) -> Result<(), CliError> {
    let k = settings.k()?;
    let out = CriticalOut {
        k,
        lambda_cr: critical_activity(k),
    };
    println!("{}", serde_json::to_string(&out).expect("serializable"));
    Ok(())
}

fn cmd_fixpoints(settings: &Settings) -> Result<(), CliError> {
    let k = settings.k()?;
    let fp = FixedPointData::solve(k, settings.norm()?, 1e-12)?;
    println!("{}", serde_json::to_string(&fp).expect("serializable"));
    Ok(())
}

#[derive(Serialize)]
struct OrbitOut {
    k: u32,
    norm: f64,
    alpha0: f64,
    #[serde(flatten)]
    outcome: hctree::dynamics::OrbitClassification,
}

fn cmd_orbit(settings: &Settings) -> Result<(), CliError> {
    let k = settings.k()?;
    let norm = settings.norm()?;
    let run = |alpha0: f64| -> Result<OrbitOut, CliError> {
        if !(alpha0 > 0.0 && alpha0 <= 1.0) {
            return Err(CliError::usage(format!(
                "orbit seed must lie in (0,1], got {alpha0}"
            )));
        }
        let outcome = classify_orbit(alpha0, norm, k, settings.tol, ORBIT_MAX_STEPS)?;
        Ok(OrbitOut {
            k,
            norm,
            alpha0,
            outcome,
        })
    };
    match (settings.path_code(k)?, settings.grid) {
        (Some(t), _) => {
            let out = run(t.to_f64())?;
            println!("{}", serde_json::to_string(&out).expect("serializable"));
        }
        (None, Some(grid)) if grid >= 1 => {
            let mut outs = Vec::with_capacity(grid);
            for i in 1..=grid {
                outs.push(run(i as f64 / (grid + 1) as f64)?);
            }
            println!("{}", serde_json::to_string(&outs).expect("serializable"));
        }
        _ => {
            return Err(CliError::usage(
                "orbit needs --t <rational alpha0> or --grid <n>",
            ))
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BgRootOut {
    t: String,
    k: u32,
    norm: f64,
    z0: f64,
    depth_used: usize,
    error_bound: f64,
}

fn cmd_bg_root(settings: &Settings) -> Result<(), CliError> {
    let k = settings.k()?;
    let t = settings
        .path_code(k)?
        .ok_or_else(|| CliError::usage("bg-root needs --t"))?;
    let params = settings.bg_params(k, settings.depth)?;
    let root = bg_root_value(&t, &params)?;
    let out = BgRootOut {
        t: t.to_string(),
        k,
        norm: params.model.norm(),
        z0: root.z0,
        depth_used: root.depth_used,
        error_bound: root.error_bound,
    };
    println!("{}", serde_json::to_string(&out).expect("serializable"));
    Ok(())
}

#[derive(Serialize)]
struct ScanRowOut {
    t: String,
    z0: f64,
    error_bound: f64,
}

fn cmd_bg_scan(settings: &Settings) -> Result<(), CliError> {
    let k = settings.k()?;
    let params = settings.bg_params(k, settings.depth)?;
    let grid_size = settings.grid.unwrap_or(17);
    if grid_size < 2 {
        return Err(CliError::usage("bg-scan needs --grid of at least 2 points"));
    }
    let points = scan_t(&params, &uniform_grid(k, grid_size))?;
    match settings.format_or("csv")?.as_str() {
        "csv" => {
            let mut out = String::from("t,z0,error_bound\n");
            for p in &points {
                let _ = writeln!(out, "{},{},{:e}", p.t, p.z0, p.error_bound);
            }
            print!("{out}");
        }
        _ => {
            let rows: Vec<ScanRowOut> = points
                .iter()
                .map(|p| ScanRowOut {
                    t: p.t.to_string(),
                    z0: p.z0,
                    error_bound: p.error_bound,
                })
                .collect();
            println!("{}", serde_json::to_string(&rows).expect("serializable"));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MarginalOut {
    target: String,
    support: Vec<i64>,
    p: Vec<f64>,
}

/// The field backing marginal/sample: the interpolating path field when
/// --t is given, the translation-invariant constant-ξ field otherwise.
fn field_for(
    settings: &Settings,
    k: u32,
    depth: usize,
) -> Result<hctree::BoundaryLawField, CliError> {
    match settings.path_code(k)? {
        Some(t) => {
            let params = settings.bg_params(k, None)?;
            Ok(bg_field(&t, &params, depth)?)
        }
        None => {
            let xi = hctree::dynamics::solve_fixed_point(settings.norm()?, k, 1e-12);
            Ok(hctree::BoundaryLawField::constant(xi))
        }
    }
}

fn cmd_marginal(settings: &Settings) -> Result<(), CliError> {
    let k = settings.k()?;
    let activity = settings.activity()?;
    let field = field_for(settings, k, 0)?;
    let table = root_marginal(&field, &activity);
    let out = MarginalOut {
        target: String::new(),
        support: table.support,
        p: table.p,
    };
    println!("{}", serde_json::to_string(&out).expect("serializable"));
    Ok(())
}

#[derive(Serialize)]
struct SampleOut {
    seed: u64,
    spins: std::collections::BTreeMap<String, i64>,
}

fn cmd_sample(settings: &Settings) -> Result<(), CliError> {
    let k = settings.k()?;
    let activity = settings.activity()?;
    let depth = settings.depth.unwrap_or(DEFAULT_SAMPLE_DEPTH);
    let field = field_for(settings, k, depth)?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for i in 0..settings.count {
        let seed = settings.seed + i as u64;
        let config = sample_configuration(&field, &activity, k, depth, seed);
        let out = SampleOut {
            seed,
            spins: config
                .spins
                .iter()
                .map(|(v, &s)| (v.digit_string(), s))
                .collect(),
        };
        serde_json::to_writer(&mut lock, &out).expect("serializable");
        std::io::Write::write_all(&mut lock, b"\n").expect("stdout writable");
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, CliError> {
    let settings = Settings::merge(&args.common)?;
    let suite: Suite = args.suite.parse().map_err(|e: String| CliError::usage(e))?;
    let options = match args.inject_fault.as_deref() {
        None => VerifyOptions::default(),
        Some("theta") => VerifyOptions {
            inject_theta_fault: true,
        },
        Some(other) => {
            return Err(CliError::usage(format!(
                "unknown fault `{other}` (supported: theta)"
            )))
        }
    };
    if settings.format_or("json")? != "json" {
        return Err(CliError::usage(
            "verify emits JSON on stdout; the text report always goes to stderr",
        ));
    }
    let results = run_suite(suite, options);
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("{}", serde_json::to_string(&results).expect("serializable"));
    // human-readable echo on stderr so stdout stays machine-parseable
    for r in &results {
        eprintln!(
            "{} {} — {}",
            if r.pass { "ok  " } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    eprintln!("{} checks, {} failed", results.len(), failed);
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Critical(args) => cmd_critical(&Settings::merge(args)?)?,
        Command::Fixpoints(args) => cmd_fixpoints(&Settings::merge(args)?)?,
        Command::Orbit(args) => cmd_orbit(&Settings::merge(args)?)?,
        Command::BgRoot(args) => cmd_bg_root(&Settings::merge(args)?)?,
        Command::BgScan(args) => cmd_bg_scan(&Settings::merge(args)?)?,
        Command::Marginal(args) => cmd_marginal(&Settings::merge(args)?)?,
        Command::Sample(args) => cmd_sample(&Settings::merge(args)?)?,
        Command::Verify(args) => return cmd_verify(args),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
