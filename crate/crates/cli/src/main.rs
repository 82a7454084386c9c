//! `jacobi`: transition densities, identity checks, simulation, drift
//! estimation, large-deviation rates and Monte Carlo experiments for the
//! Jacobi diffusion.
//!
//! Exit codes: 0 ok, 1 a verification failed, 2 usage error, 3 numerical
//! failure (a JSON object `{"error": {"kind", "message"}}` goes to stderr).

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use jacobi_core::harness::{run_cgf_convergence, run_duality_experiment, run_ldp_experiment, DualityConfig, ExperimentConfig, ExperimentResult};
use jacobi_core::inference::{bessel_mle_nu, girsanov_loglik, mle_b, nu_hat, EstimatorMode};
use jacobi_core::ldp::{domain, rate_i, rate_j, x0, x1};
use jacobi_core::semigroup::{density_convolution, density_spectral, KernelPoint};
use jacobi_core::sim::{fmt_f64, simulate_jacobi_with, simulate_squared_bessel_stream, JacobiSimConfig, Scheme, Trajectory, TrajectoryKind};
use jacobi_core::verify::run_checks;
use jacobi_core::{Error, JacobiParams, SeriesControl};

use config::FlatConfig;

const THREADS_ENV: &str = "JACOBI_THREADS";

#[derive(Parser)]
#[command(name = "jacobi", version, about = "Jacobi diffusion: densities, simulation, estimation and large deviations")]
struct Cli {
    /// Worker threads for simulation batches [default: $JACOBI_THREADS, else one per core]
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transition density on a grid by the spectral and convolution routes
    Density(DensityArgs),
    /// Run the identity suites and print a pass/fail table
    Verify(VerifyArgs),
    /// Simulate one path and write it as CSV (plus a JSON sidecar when --output is set)
    Simulate(SimulateArgs),
    /// Drift estimators from a saved path
    Estimate(EstimateArgs),
    /// Large-deviation rate J_b(x), or I_nu(x) with --nu
    Rate(RateArgs),
    /// Domain of the limiting cumulant generating function
    Domain(DomainArgs),
    /// Finite-time cumulant generating function against its limit
    Cgf(CgfArgs),
    /// Monte Carlo tail frequencies of the drift MLE
    McLdp(McLdpArgs),
    /// Monte Carlo comparison of the Jacobi and squared Bessel estimators
    McDuality(McDualityArgs),
}

#[derive(Args, Default)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    dprime: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<JacobiParams, Failure> {
        type Ctor = fn(f64, f64) -> jacobi_core::Result<JacobiParams>;
        type Pair<'a> = (&'a str, &'a str, Option<f64>, Option<f64>, Ctor);
        let pairs: [Pair; 4] = [
            ("alpha", "beta", self.alpha, self.beta, JacobiParams::from_alpha_beta),
            ("p", "q", self.p, self.q, JacobiParams::from_pq),
            ("b", "c", self.b, self.c, JacobiParams::from_bc),
            ("d", "dprime", self.d, self.dprime, JacobiParams::from_dd),
        ];
        let mut chosen = None;
        for (l, r, a, b, ctor) in pairs {
            match (a, b) {
                (Some(a), Some(b)) => {
                    if chosen.is_some() {
                        return Err(Failure::Usage("give exactly one parameter pair".into()));
                    }
                    chosen = Some((a, b, ctor));
                }
                (Some(_), None) => return Err(Failure::Usage(format!("--{l} needs --{r}"))),
                (None, Some(_)) => return Err(Failure::Usage(format!("--{r} needs --{l}"))),
                (None, None) => {}
            }
        }
        let (a, b, ctor) = chosen.ok_or_else(|| {
            Failure::Usage("missing parameters: give one of --alpha/--beta, --p/--q, --b/--c, --d/--dprime".into())
        })?;
        ctor(a, b).map_err(|e| Failure::Usage(e.to_string()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file [default: standard output]
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    /// Points per axis of the interior grid
    #[arg(long, default_value_t = 5)]
    grid: usize,
    /// Largest allowed |p_spectral - p_convolution|
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Groups or checks to run, comma separated
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Replaces every built-in tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Process {
    Jacobi,
    SquaredBessel,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value = "jacobi")]
    process: Process,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    y0: f64,
    /// euler_projected or implicit_angle
    #[arg(long, default_value = "euler_projected")]
    scheme: String,
    /// Refuse parameters whose boundaries are attainable
    #[arg(long)]
    strict: bool,
    /// Squared Bessel dimension
    #[arg(long)]
    dim: Option<f64>,
    /// Squared Bessel starting point
    #[arg(long, default_value_t = 1.0)]
    z0: f64,
    /// CSV path; a JSON sidecar is written next to it
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    /// pathwise or stochastic_integral
    #[arg(long, default_value = "pathwise")]
    mode: String,
    /// Reference drift for the Girsanov log-likelihood ratio at b_hat
    #[arg(long, allow_hyphen_values = true)]
    b0: Option<f64>,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
}

#[derive(Args)]
struct DomainArgs {
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
}

#[derive(Args)]
struct CgfArgs {
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    phi: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct McLdpArgs {
    /// Flat key = value file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long)]
    n_paths: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<f64>,
    /// Directory for <stem>.jsonl and <stem>_summary.csv
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value = "mc_ldp")]
    stem: String,
}

#[derive(Args)]
struct McDualityArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    u: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long)]
    n_paths: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value = "mc_duality")]
    stem: String,
}

enum Failure {
    Usage(String),
    Check(String),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(e.into())
    }
}

// errors in user-supplied settings are usage errors
fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(e)) => {
            let body = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::from(3)
        }
    }
}

fn setup_threads(flag: Option<usize>) -> Result<(), Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    setup_threads(cli.threads)?;
    match cli.command {
        Command::Density(a) => cmd_density(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Rate(a) => cmd_rate(a),
        Command::Domain(a) => cmd_domain(a),
        Command::Cgf(a) => cmd_cgf(a),
        Command::McLdp(a) => cmd_mc_ldp(a),
        Command::McDuality(a) => cmd_mc_duality(a),
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Pretty JSON with sorted keys.
fn emit_json<T: Serialize>(value: &T, path: &Option<PathBuf>) -> Result<(), Failure> {
    let v = serde_json::to_value(value).map_err(Error::from)?;
    let mut w = sink(path)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&v).map_err(Error::from)?)?;
    w.flush()?;
    Ok(())
}

fn emit_csv(header: &[&str], rows: &[Vec<String>], path: &Option<PathBuf>) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    let wrap = |e: csv::Error| Failure::Numeric(e.into());
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(r).map_err(wrap)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DensityRow {
    x: f64,
    y: f64,
    t: f64,
    p_spectral: f64,
    p_convolution: f64,
    abs_diff: f64,
}

fn cmd_density(a: DensityArgs) -> Result<(), Failure> {
    let params = a.params.resolve()?;
    if !(a.t > 0.0 && a.t.is_finite()) {
        return Err(Failure::Usage(format!("--t must be positive, got {}", a.t)));
    }
    if a.grid == 0 {
        return Err(Failure::Usage("--grid must be positive".into()));
    }
    let ctrl = SeriesControl::default();
    let nodes: Vec<f64> = (0..a.grid).map(|i| -1.0 + 2.0 * (i + 1) as f64 / (a.grid + 1) as f64).collect();
    let mut rows = Vec::new();
    for &x in &nodes {
        for &y in &nodes {
            let pt = KernelPoint::new(a.t, x, y)?;
            let s = density_spectral(&pt, &params, &ctrl)?;
            let c = density_convolution(&pt, &params, &ctrl)?;
            rows.push(DensityRow { x, y, t: a.t, p_spectral: s, p_convolution: c, abs_diff: (s - c).abs() });
        }
    }
    match a.out.format.unwrap_or(Format::Csv) {
        Format::Json => emit_json(&rows, &a.out.output)?,
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| [r.x, r.y, r.t, r.p_spectral, r.p_convolution, r.abs_diff].iter().map(|v| fmt_f64(*v)).collect())
                .collect();
            emit_csv(&["x", "y", "t", "p_spectral", "p_convolution", "abs_diff"], &table, &a.out.output)?
        }
    }
    let worst = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    if !(worst <= a.tol) {
        return Err(Failure::Check(format!("routes disagree: max abs_diff {worst:e} > tol {:e}", a.tol)));
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    if let Some(t) = a.tol {
        if !(t > 0.0) {
            return Err(Failure::Usage("--tol must be positive".into()));
        }
    }
    let results = run_checks(&a.only, a.tol, &SeriesControl::default()).map_err(usage)?;
    match a.out.format.unwrap_or(Format::Csv) {
        Format::Json => emit_json(&results, &a.out.output)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    vec![
                        r.group.clone(),
                        r.name.clone(),
                        r.value.map(fmt_f64).unwrap_or_default(),
                        fmt_f64(r.tol),
                        if r.pass { "pass" } else { "FAIL" }.to_string(),
                        r.detail.clone(),
                    ]
                })
                .collect();
            emit_csv(&["group", "name", "value", "tol", "result", "detail"], &rows, &a.out.output)?
        }
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(Failure::Check(format!("failed: {}", failed.join(", "))));
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let traj = match a.process {
        Process::Jacobi => {
            let params = a.params.resolve()?;
            let scheme: Scheme = a.scheme.parse().map_err(usage)?;
            let cfg = JacobiSimConfig {
                b: params.b(),
                c: params.c(),
                y0: a.y0,
                horizon: a.t,
                dt: a.dt,
                seed: a.seed,
                stream: a.stream,
                scheme,
                strict: a.strict,
            };
            simulate_jacobi_with(&cfg).map_err(|e| match e {
                Error::Domain(_) | Error::Invalid(_) => usage(e),
                other => other.into(),
            })?
        }
        Process::SquaredBessel => {
            let dim = a.dim.ok_or_else(|| Failure::Usage("--process squared-bessel needs --dim".into()))?;
            simulate_squared_bessel_stream(dim, a.z0, a.t, a.dt, a.seed, a.stream).map_err(usage)?
        }
    };
    match &a.output {
        Some(p) => traj.save(p)?,
        None => {
            let mut out = std::io::stdout().lock();
            traj.write_csv(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateOut {
    kind: TrajectoryKind,
    horizon: f64,
    b_hat: Option<f64>,
    nu_hat: f64,
    numerator: f64,
    denominator: f64,
    mode: Option<EstimatorMode>,
    loglik_vs_b0: Option<f64>,
}

fn cmd_estimate(a: EstimateArgs) -> Result<(), Failure> {
    let mode: EstimatorMode = a.mode.parse().map_err(usage)?;
    let traj = Trajectory::load(&a.input).map_err(usage)?;
    let out = match traj.kind {
        TrajectoryKind::JacobiPm1 => {
            let b = mle_b(&traj, mode)?;
            let loglik = a.b0.map(|b0| girsanov_loglik(&traj, b.estimate, b0, mode)).transpose()?;
            EstimateOut {
                kind: traj.kind,
                horizon: b.horizon,
                b_hat: Some(b.estimate),
                nu_hat: nu_hat(&traj)?.estimate,
                numerator: b.numerator,
                denominator: b.denominator,
                mode: Some(mode),
                loglik_vs_b0: loglik,
            }
        }
        TrajectoryKind::SquaredBessel => {
            let r = bessel_mle_nu(&traj)?;
            EstimateOut {
                kind: traj.kind,
                horizon: r.horizon,
                b_hat: None,
                nu_hat: r.estimate,
                numerator: r.numerator,
                denominator: r.denominator,
                mode: None,
                loglik_vs_b0: None,
            }
        }
        TrajectoryKind::Jacobi01 => return Err(Failure::Usage("estimators need a (-1, 1) or squared Bessel path".into())),
    };
    emit_json(&out, &None)
}

fn cmd_rate(a: RateArgs) -> Result<(), Failure> {
    let value = match (a.b, a.nu) {
        (Some(b), None) => {
            let r = rate_j(a.x, b).map_err(usage)?;
            serde_json::json!({ "function": "J", "b": b, "x": a.x, "rate": r.value, "branch": r.branch, "x0": x0(b).map_err(usage)? })
        }
        (None, Some(nu)) => {
            if !(nu >= 0.0) {
                return Err(Failure::Usage(format!("--nu must be nonnegative, got {nu}")));
            }
            let r = rate_i(a.x, nu).map_err(usage)?;
            serde_json::json!({ "function": "I", "nu": nu, "x": a.x, "rate": r.value, "branch": r.branch, "x1": x1(nu) })
        }
        _ => return Err(Failure::Usage("give exactly one of --b and --nu".into())),
    };
    emit_json(&value, &None)
}

fn cmd_domain(a: DomainArgs) -> Result<(), Failure> {
    emit_json(&domain(a.x, a.b).map_err(usage)?, &None)
}

fn cmd_cgf(a: CgfArgs) -> Result<(), Failure> {
    let table = run_cgf_convergence(a.b, a.x, &a.phi, &a.t, &SeriesControl::default()).map_err(usage)?;
    match a.out.format.unwrap_or(Format::Csv) {
        Format::Json => emit_json(&table, &a.out.output),
        Format::Csv => {
            table.write_csv(sink(&a.out.output)?)?;
            Ok(())
        }
    }
}

fn pick<T>(flag: Option<T>, file: Result<Option<T>, String>) -> Result<Option<T>, Failure> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.map_err(Failure::Usage),
    }
}

fn pick_list(flag: Vec<f64>, file: Result<Option<Vec<f64>>, String>) -> Result<Option<Vec<f64>>, Failure> {
    if flag.is_empty() {
        file.map_err(Failure::Usage)
    } else {
        Ok(Some(flag))
    }
}

fn load_config(path: &Option<PathBuf>, allowed: &[&str]) -> Result<FlatConfig, Failure> {
    let cfg = match path {
        Some(p) => FlatConfig::load(p).map_err(Failure::Usage)?,
        None => FlatConfig::empty(),
    };
    cfg.check_keys(allowed).map_err(Failure::Usage)?;
    Ok(cfg)
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("missing {name} (flag or config key)")))
}

fn finish_mc(result: &ExperimentResult, dir: &Path, stem: &str) -> Result<(), Failure> {
    result.persist(dir, stem)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if result.zero_cells() > 0 {
        eprintln!("warning: {} cell(s) with zero tail events; increase n_paths or shorten t", result.zero_cells());
    }
    result.write_summary_csv(std::io::stdout().lock())?;
    Ok(())
}

fn cmd_mc_ldp(a: McLdpArgs) -> Result<(), Failure> {
    let file = load_config(&a.config, &["b", "x", "t", "n_paths", "dt", "seed", "mode", "scheme", "y0"])?;
    let b = required(pick(a.b, file.get("b"))?, "b")?;
    let x = required(pick_list(a.x, file.list("x"))?, "x")?;
    let t = required(pick_list(a.t, file.list("t"))?, "t")?;
    let mut cfg = ExperimentConfig::new(
        b,
        x,
        t,
        pick(a.n_paths, file.get("n_paths"))?.unwrap_or(10_000),
        pick(a.dt, file.get("dt"))?.unwrap_or(1e-3),
        pick(a.seed, file.get("seed"))?.unwrap_or(0),
    );
    if let Some(m) = pick(a.mode, file.get("mode"))? {
        cfg.estimator_mode = m.parse().map_err(usage)?;
    }
    if let Some(s) = pick(a.scheme, file.get("scheme"))? {
        cfg.scheme = s.parse().map_err(usage)?;
    }
    if let Some(y0) = pick(a.y0, file.get("y0"))? {
        cfg.y0 = y0;
    }
    cfg.validate().map_err(usage)?;
    let result = run_ldp_experiment(&cfg)?;
    finish_mc(&result, &a.out_dir, &a.stem)
}

fn cmd_mc_duality(a: McDualityArgs) -> Result<(), Failure> {
    let file = load_config(&a.config, &["nu", "u", "x", "n_paths", "dt", "seed", "scheme"])?;
    let nu = required(pick(a.nu, file.get("nu"))?, "nu")?;
    let u = required(pick_list(a.u, file.list("u"))?, "u")?;
    let x = required(pick_list(a.x, file.list("x"))?, "x")?;
    let mut cfg = DualityConfig::new(
        nu,
        u,
        x,
        pick(a.n_paths, file.get("n_paths"))?.unwrap_or(10_000),
        pick(a.dt, file.get("dt"))?.unwrap_or(1e-3),
        pick(a.seed, file.get("seed"))?.unwrap_or(0),
    );
    if let Some(s) = pick(a.scheme, file.get("scheme"))? {
        cfg.scheme = s.parse().map_err(usage)?;
    }
    cfg.validate().map_err(usage)?;
    let result = run_duality_experiment(&cfg)?;
    finish_mc(&result, &a.out_dir, &a.stem)
}
