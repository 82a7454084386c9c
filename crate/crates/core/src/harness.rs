//! Monte Carlo experiments comparing empirical tail probabilities of the
//! drift estimators with the closed-form rates.
//!
//! Every path draws from its own ChaCha stream keyed by `(seed, path index)`
//! and results are aggregated in path order, so counts and files do not
//! depend on the number of worker threads.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::inference::{BesselIntegrals, EstimatorMode, PathIntegrals};
use crate::ldp::{domain, lambda, lambda_t_numeric, rate_i, rate_j};
use crate::params::SeriesControl;
use crate::sim::{fmt_f64, path_rng, squared_bessel_step, JacobiStepper, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub b: f64,
    pub x_targets: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub n_paths: u64,
    pub dt: f64,
    pub seed: u64,
    pub estimator_mode: EstimatorMode,
    pub scheme: Scheme,
    pub y0: f64,
}

impl ExperimentConfig {
    /// Pathwise estimator, implicit angle scheme, paths started at 0.
    pub fn new(b: f64, x_targets: Vec<f64>, t_grid: Vec<f64>, n_paths: u64, dt: f64, seed: u64) -> Self {
        Self { b, x_targets, t_grid, n_paths, dt, seed, estimator_mode: EstimatorMode::Pathwise, scheme: Scheme::ImplicitAngle, y0: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b <= -1.0) {
            return Err(Error::Domain(format!("experiments need b <= -1, got {}", self.b)));
        }
        if self.x_targets.is_empty() || self.x_targets.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("x_targets must be a nonempty list of finite levels".into()));
        }
        if !(self.y0.abs() < 1.0) {
            return Err(Error::Domain(format!("y0 must lie in (-1, 1), got {}", self.y0)));
        }
        check_paths(self.n_paths)?;
        check_grid(&self.t_grid, "t_grid")?;
        if !(self.dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        steps_for(&self.t_grid, self.dt)?;
        Ok(())
    }

    pub fn hash(&self) -> Result<String> {
        config_hash(self)
    }
}

fn check_paths(n: u64) -> Result<()> {
    if n < 100 {
        return Err(Error::Invalid(format!("n_paths must be at least 100, got {n}")));
    }
    Ok(())
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Invalid(format!("{what} is empty")));
    }
    if !grid.iter().all(|t| *t > 0.0 && t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(format!("{what} must be positive and strictly increasing")));
    }
    Ok(())
}

// step counts for horizons that must sit on the dt grid
fn steps_for(t_grid: &[f64], dt: f64) -> Result<Vec<usize>> {
    t_grid
        .iter()
        .map(|&t| {
            let k = (t / dt).round();
            if k < 1.0 || (k * dt - t).abs() > 1e-9 * t {
                return Err(Error::GridMismatch(format!("t = {t} is not a multiple of dt = {dt}")));
            }
            Ok(k as usize)
        })
        .collect()
}

/// SHA-256 of the config serialized with sorted keys.
pub fn config_hash<T: Serialize>(cfg: &T) -> Result<String> {
    let canonical = serde_json::to_string(&serde_json::to_value(cfg)?)?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

/// Independent seed for a labelled family of paths.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSide {
    /// Counts `estimate >= x`.
    Upper,
    /// Counts `estimate <= x`.
    Lower,
}

impl TailSide {
    /// The deviation side away from the true value `center`; `x = center`
    /// counts the upper tail.
    pub fn for_level(x: f64, center: f64) -> Self {
        if x >= center {
            TailSide::Upper
        } else {
            TailSide::Lower
        }
    }

    fn hit(self, estimate: f64, x: f64) -> bool {
        match self {
            TailSide::Upper => estimate >= x,
            TailSide::Lower => estimate <= x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSource {
    Jacobi,
    SquaredBessel,
}

/// One `(x, t)` cell. `t` is the regression variable: the horizon for the
/// drift experiment, `log u` for the duality experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub source: PathSource,
    pub x: f64,
    pub t: f64,
    /// Simulated time actually reached.
    pub horizon: f64,
    pub side: TailSide,
    pub count: u64,
    pub n_paths: u64,
    /// Paths whose estimator was undefined; they never count as tail events.
    pub degenerate: u64,
    pub p_hat: f64,
    pub log_p: Option<f64>,
    /// Delta-method standard error `sqrt((1 - p) / (n p))` of `log_p`.
    pub se_log_p: Option<f64>,
    pub zero_count: bool,
    pub mean_estimate: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub source: PathSource,
    pub x: f64,
    pub side: TailSide,
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
    /// `-rate(x)`, the limit of `(1/t) log P`.
    pub closed_form: f64,
    pub rel_error: Option<f64>,
    pub cells_used: usize,
    pub zero_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config_hash: String,
    pub cells: Vec<CellResult>,
    pub slopes: Vec<SlopeFit>,
    /// Monotonicity violations in `|x - center|` beyond 3 standard errors.
    pub warnings: Vec<String>,
    pub wall_clock_s: f64,
}

impl ExperimentResult {
    pub fn zero_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.zero_count).count()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.cells.iter().map(|c| c.count).collect()
    }

    /// One JSON object per cell, keys sorted.
    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> Result<()> {
        for c in &self.cells {
            writeln!(w, "{}", serde_json::to_string(&serde_json::to_value(c)?)?)?;
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "source",
            "x",
            "side",
            "slope",
            "slope_se",
            "closed_form",
            "rel_error",
            "cells_used",
            "zero_cells",
            "config_hash",
            "wall_clock_s",
        ])?;
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        for s in &self.slopes {
            out.write_record([
                tag(&s.source)?,
                fmt_f64(s.x),
                tag(&s.side)?,
                opt(s.slope),
                opt(s.slope_se),
                fmt_f64(s.closed_form),
                opt(s.rel_error),
                s.cells_used.to_string(),
                s.zero_cells.to_string(),
                self.config_hash.clone(),
                fmt_f64(self.wall_clock_s),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `<stem>.jsonl` and `<stem>_summary.csv` into `dir`.
    pub fn persist(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join(format!("{stem}.jsonl")))?);
        self.write_jsonl(&mut w)?;
        w.flush()?;
        self.write_summary_csv(BufWriter::new(File::create(dir.join(format!("{stem}_summary.csv")))?))
    }
}

fn tag<T: Serialize>(v: &T) -> Result<String> {
    match serde_json::to_value(v)? {
        serde_json::Value::String(s) => Ok(s),
        other => Ok(other.to_string()),
    }
}

/// Weighted least squares slope of `y` on `t` with weights `1 / var`;
/// `None` with fewer than two points.
pub fn wls_slope(points: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let (mut sw, mut st, mut sy) = (0.0, 0.0, 0.0);
    for &(t, y, var) in points {
        let w = 1.0 / var;
        sw += w;
        st += w * t;
        sy += w * y;
    }
    let (tm, ym) = (st / sw, sy / sw);
    let (mut stt, mut sty) = (0.0, 0.0);
    for &(t, y, var) in points {
        let w = 1.0 / var;
        stt += w * (t - tm) * (t - tm);
        sty += w * (t - tm) * (y - ym);
    }
    if stt <= 0.0 {
        return None;
    }
    Some((sty / stt, (1.0 / stt).sqrt()))
}

// estimates[path][checkpoint]
fn tabulate(
    source: PathSource,
    estimates: &[Vec<Option<f64>>],
    x_targets: &[f64],
    speeds: &[f64],
    horizons: &[f64],
    center: f64,
    hash: &str,
) -> Vec<CellResult> {
    let n = estimates.len() as u64;
    let mut cells = Vec::new();
    for &x in x_targets {
        let side = TailSide::for_level(x, center);
        for (k, (&t, &horizon)) in speeds.iter().zip(horizons).enumerate() {
            let (mut count, mut degenerate, mut sum, mut good) = (0u64, 0u64, 0.0, 0u64);
            for path in estimates {
                match path[k] {
                    Some(e) => {
                        good += 1;
                        sum += e;
                        if side.hit(e, x) {
                            count += 1;
                        }
                    }
                    None => degenerate += 1,
                }
            }
            let p = count as f64 / n as f64;
            let zero = count == 0;
            cells.push(CellResult {
                source,
                x,
                t,
                horizon,
                side,
                count,
                n_paths: n,
                degenerate,
                p_hat: p,
                log_p: (!zero).then(|| p.ln()),
                se_log_p: (!zero).then(|| ((1.0 - p) / (n as f64 * p)).sqrt()),
                zero_count: zero,
                mean_estimate: if good > 0 { sum / good as f64 } else { f64::NAN },
                config_hash: hash.to_string(),
            });
        }
    }
    cells
}

fn fit_slopes(cells: &[CellResult], source: PathSource, rate: impl Fn(f64) -> Result<f64>) -> Result<Vec<SlopeFit>> {
    let mut xs: Vec<f64> = Vec::new();
    for c in cells.iter().filter(|c| c.source == source) {
        if !xs.contains(&c.x) {
            xs.push(c.x);
        }
    }
    xs.into_iter()
        .map(|x| {
            let row: Vec<&CellResult> = cells.iter().filter(|c| c.source == source && c.x == x).collect();
            let points: Vec<(f64, f64, f64)> = row
                .iter()
                .filter_map(|c| Some((c.t, c.log_p?, c.se_log_p?.powi(2).max(1e-300))))
                .collect();
            let fit = wls_slope(&points);
            let closed_form = -rate(x)?;
            let rel_error = fit.and_then(|(s, _)| (closed_form != 0.0).then(|| (s - closed_form).abs() / closed_form.abs()));
            Ok(SlopeFit {
                source,
                x,
                side: row[0].side,
                slope: fit.map(|f| f.0),
                slope_se: fit.map(|f| f.1),
                closed_form,
                rel_error,
                cells_used: points.len(),
                zero_cells: row.iter().filter(|c| c.zero_count).count(),
            })
        })
        .collect()
}

fn monotonicity_warnings(cells: &[CellResult], center: f64) -> Vec<String> {
    let mut out = Vec::new();
    for a in cells {
        for b in cells {
            let same = a.source == b.source && a.t == b.t && a.side == b.side;
            if !same || (a.x - center).abs() >= (b.x - center).abs() {
                continue;
            }
            // a is closer to the center, so its probability should not be smaller
            let se = |c: &CellResult| (c.p_hat * (1.0 - c.p_hat) / c.n_paths as f64).sqrt();
            if b.p_hat - a.p_hat > 3.0 * (se(a).powi(2) + se(b).powi(2)).sqrt() {
                out.push(format!(
                    "{:?} t={}: P at x={} exceeds P at x={} by more than 3 SE",
                    a.source, a.t, b.x, a.x
                ));
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn jacobi_estimates(
    b: f64,
    y0: f64,
    scheme: Scheme,
    dt: f64,
    checkpoints: &[usize],
    seed: u64,
    n_paths: u64,
    estimate: impl Fn(&PathIntegrals) -> Option<f64> + Sync,
) -> Result<Vec<Vec<Option<f64>>>> {
    // fail early on a bad scheme or parameter set
    JacobiStepper::new(b, 0.0, y0, scheme, false)?;
    let last = *checkpoints.last().expect("nonempty checkpoints");
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let mut stepper = JacobiStepper::new(b, 0.0, y0, scheme, false)?;
            let mut acc = PathIntegrals::with_complement(y0, stepper.one_minus_sq());
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut next = 0;
            for step in 1..=last {
                let y = stepper.step(dt, &mut rng);
                acc.push_with_complement(dt, y, stepper.one_minus_sq());
                if step == checkpoints[next] {
                    out.push(estimate(&acc));
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect()
}

/// Tail frequencies of the drift MLE at each `(x, t)`.
///
/// Each path is simulated once up to the largest `t` and the estimator is
/// read off at every grid time, so the cells of one `x` share paths. Levels
/// above `b` count `b_hat >= x`, levels below count `b_hat <= x`.
pub fn run_ldp_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let start = Instant::now();
    let hash = cfg.hash()?;
    let checkpoints = steps_for(&cfg.t_grid, cfg.dt)?;
    let mode = cfg.estimator_mode;
    let estimates = jacobi_estimates(cfg.b, cfg.y0, cfg.scheme, cfg.dt, &checkpoints, cfg.seed, cfg.n_paths, |acc| {
        acc.mle_b(mode).ok().map(|r| r.estimate)
    })?;
    let horizons: Vec<f64> = checkpoints.iter().map(|&k| k as f64 * cfg.dt).collect();
    let cells = tabulate(PathSource::Jacobi, &estimates, &cfg.x_targets, &cfg.t_grid, &horizons, cfg.b, &hash);
    let slopes = fit_slopes(&cells, PathSource::Jacobi, |x| Ok(rate_j(x, cfg.b)?.value))?;
    let warnings = monotonicity_warnings(&cells, cfg.b);
    Ok(ExperimentResult { config_hash: hash, cells, slopes, warnings, wall_clock_s: start.elapsed().as_secs_f64() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityConfig {
    pub nu: f64,
    /// Bessel horizons `u`; the Jacobi side runs to `log u`.
    pub u_grid: Vec<f64>,
    pub x_targets: Vec<f64>,
    pub n_paths: u64,
    pub dt: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl DualityConfig {
    pub fn new(nu: f64, u_grid: Vec<f64>, x_targets: Vec<f64>, n_paths: u64, dt: f64, seed: u64) -> Self {
        Self { nu, u_grid, x_targets, n_paths, dt, seed, scheme: Scheme::ImplicitAngle }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::Domain(format!("nu must be nonnegative, got {}", self.nu)));
        }
        check_paths(self.n_paths)?;
        check_grid(&self.u_grid, "u_grid")?;
        if self.u_grid[0] <= 1.0 {
            return Err(Error::Invalid("u_grid values must exceed 1".into()));
        }
        if self.x_targets.is_empty() || self.x_targets.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("x_targets must be a nonempty list of finite levels".into()));
        }
        if !(self.dt > 0.0 && self.dt < 1.0) {
            return Err(Error::Domain(format!("dt must lie in (0, 1), got {}", self.dt)));
        }
        Ok(())
    }
}

// checkpoint step counts on a grid of spacing dt in log u, at least one step each
fn log_checkpoints(u_grid: &[f64], dt: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(u_grid.len());
    for u in u_grid {
        let k = ((u.ln() / dt).round() as usize).max(1);
        out.push(out.last().map_or(k, |&prev| k.max(prev + 1)));
    }
    out
}

/// Squared Bessel paths of dimension `2(nu + 1)` from 1: uniform steps of
/// `dt` on `[0, 1]`, then steps of relative size `dt` (uniform in `log s`).
fn bessel_estimates(nu: f64, dt: f64, checkpoints: &[usize], seed: u64, n_paths: u64) -> Vec<Vec<Option<f64>>> {
    let dim = 2.0 * (nu + 1.0);
    let warmup = (1.0 / dt).round().max(1.0) as usize;
    let h = 1.0 / warmup as f64;
    let last = *checkpoints.last().expect("nonempty checkpoints");
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let mut acc = BesselIntegrals::new(1.0).expect("start at 1");
            let mut x = 1.0;
            let mut ok = true;
            for _ in 0..warmup {
                x = squared_bessel_step(x, dim, h, &mut rng);
                ok &= acc.push(h, x).is_ok();
            }
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut next = 0;
            let mut s = 1.0f64;
            for step in 1..=last {
                let s_next = (step as f64 * dt).exp();
                x = squared_bessel_step(x, dim, s_next - s, &mut rng);
                ok &= acc.push(s_next - s, x).is_ok();
                s = s_next;
                if step == checkpoints[next] {
                    out.push(if ok { acc.nu_hat().ok().map(|r| r.estimate) } else { None });
                    next += 1;
                }
            }
            out
        })
        .collect()
}

/// Tail frequencies of `nu_hat` at `t = log u` for the Jacobi process with
/// `b = -(nu + 1)`, and of the Bessel estimator at `u` for the squared Bessel
/// process of dimension `2(nu + 1)` started at 1. Both decay in `log u`
/// with rate `I_nu(x)`.
pub fn run_duality_experiment(cfg: &DualityConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let start = Instant::now();
    let hash = config_hash(cfg)?;
    let checkpoints = log_checkpoints(&cfg.u_grid, cfg.dt);
    let speeds: Vec<f64> = checkpoints.iter().map(|&k| k as f64 * cfg.dt).collect();
    let b = -(cfg.nu + 1.0);
    let jacobi = jacobi_estimates(b, 0.0, cfg.scheme, cfg.dt, &checkpoints, derive_seed(cfg.seed, "jacobi"), cfg.n_paths, |acc| {
        acc.nu_hat().ok().map(|r| r.estimate)
    })?;
    let bessel = bessel_estimates(cfg.nu, cfg.dt, &checkpoints, derive_seed(cfg.seed, "squared_bessel"), cfg.n_paths);
    let bessel_horizons: Vec<f64> = speeds.iter().map(|r| r.exp()).collect();
    let mut cells = tabulate(PathSource::Jacobi, &jacobi, &cfg.x_targets, &speeds, &speeds, cfg.nu, &hash);
    cells.extend(tabulate(PathSource::SquaredBessel, &bessel, &cfg.x_targets, &speeds, &bessel_horizons, cfg.nu, &hash));
    let rate = |x: f64| Ok(rate_i(x, cfg.nu)?.value);
    let mut slopes = fit_slopes(&cells, PathSource::Jacobi, rate)?;
    slopes.extend(fit_slopes(&cells, PathSource::SquaredBessel, rate)?);
    let warnings = monotonicity_warnings(&cells, cfg.nu);
    Ok(ExperimentResult { config_hash: hash, cells, slopes, warnings, wall_clock_s: start.elapsed().as_secs_f64() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgfRow {
    pub phi: f64,
    pub t: f64,
    pub lambda_t: Option<f64>,
    pub lambda: f64,
    pub abs_diff: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgfTable {
    pub b: f64,
    pub x: f64,
    pub rows: Vec<CgfRow>,
    /// `phi` values whose gap to the limit does not shrink along `t_grid`.
    pub slow: Vec<f64>,
}

impl CgfTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["b", "x", "phi", "t", "lambda_t", "lambda", "abs_diff", "error"])?;
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                fmt_f64(self.b),
                fmt_f64(self.x),
                fmt_f64(r.phi),
                fmt_f64(r.t),
                opt(r.lambda_t),
                fmt_f64(r.lambda),
                opt(r.abs_diff),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `Lambda_t` against its limit on a `(phi, t)` grid. Failures of a single
/// cell are recorded in that row.
pub fn run_cgf_convergence(b: f64, x: f64, phi_grid: &[f64], t_grid: &[f64], ctrl: &SeriesControl) -> Result<CgfTable> {
    let dom = domain(x, b)?;
    check_grid(t_grid, "t_grid")?;
    let mut rows = Vec::new();
    let mut slow = Vec::new();
    for &phi in phi_grid {
        if !dom.contains(phi) {
            return Err(Error::Domain(format!("phi = {phi} lies outside the domain at x = {x}, b = {b}")));
        }
        let limit = lambda(phi, x, b)?;
        let mut gaps = Vec::new();
        for &t in t_grid {
            let row = match lambda_t_numeric(phi, x, b, t, ctrl) {
                Ok(v) => CgfRow { phi, t, lambda_t: Some(v), lambda: limit, abs_diff: Some((v - limit).abs()), error: None },
                Err(e) => CgfRow { phi, t, lambda_t: None, lambda: limit, abs_diff: None, error: Some(e.to_string()) },
            };
            gaps.push(row.abs_diff);
            rows.push(row);
        }
        let shrinking = gaps.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b <= a));
        if !shrinking {
            slow.push(phi);
        }
    }
    Ok(CgfTable { b, x, rows, slow })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(-3.0, vec![-2.5, -2.0], vec![1.0, 2.0], 200, 1e-2, seed);
        c.scheme = Scheme::EulerProjected;
        c
    }

    #[test]
    fn validation() {
        assert!(small(1).validate().is_ok());
        let mut c = small(1);
        c.n_paths = 99;
        assert!(c.validate().is_err());
        let mut c = small(1);
        c.t_grid = vec![2.0, 1.0];
        assert!(c.validate().is_err());
        let mut c = small(1);
        c.t_grid = vec![1.005];
        assert!(matches!(c.validate(), Err(Error::GridMismatch(_))));
        let mut c = small(1);
        c.b = -0.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        assert_eq!(small(1).hash().unwrap(), small(1).hash().unwrap());
        assert_ne!(small(1).hash().unwrap(), small(2).hash().unwrap());
        assert_eq!(small(1).hash().unwrap().len(), 64);
    }

    #[test]
    fn wls_recovers_a_line() {
        let pts: Vec<(f64, f64, f64)> = [1.0, 2.0, 4.0].iter().map(|&t| (t, 1.0 - 0.3 * t, 0.1 * t)).collect();
        let (s, se) = wls_slope(&pts).unwrap();
        assert!((s + 0.3).abs() < 1e-14 && se > 0.0);
        assert!(wls_slope(&pts[..1]).is_none());
    }

    #[test]
    fn sides_and_counts() {
        let mut c = small(4);
        c.x_targets = vec![-3.5, -3.0, -2.0];
        let r = run_ldp_experiment(&c).unwrap();
        assert_eq!(r.cells.len(), 6);
        for cell in &r.cells {
            assert!(cell.count <= cell.n_paths && (0.0..=1.0).contains(&cell.p_hat));
            let expect = if cell.x < -3.0 { TailSide::Lower } else { TailSide::Upper };
            assert_eq!(cell.side, expect);
        }
        // at the true value about half the paths land on each side
        let mid = r.cells.iter().find(|c| c.x == -3.0 && c.t == 2.0).unwrap();
        assert!(mid.p_hat > 0.25 && mid.p_hat < 0.75);
        let fit = r.slopes.iter().find(|s| s.x == -3.0).unwrap();
        assert_eq!(fit.closed_form, 0.0);
        let mut buf = Vec::new();
        r.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["config_hash"], r.config_hash.as_str());
    }

    #[test]
    fn independent_of_thread_count() {
        let c = small(9);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_ldp_experiment(&c).unwrap())
        };
        let (a, b) = (run(1), run(3));
        assert_eq!(a.cells, b.cells);
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        a.write_jsonl(&mut ba).unwrap();
        b.write_jsonl(&mut bb).unwrap();
        assert_eq!(ba, bb);
    }

    #[test]
    fn zero_cells_are_flagged() {
        let mut c = small(2);
        c.x_targets = vec![5.0];
        let r = run_ldp_experiment(&c).unwrap();
        assert!(r.cells.iter().all(|c| c.zero_count && c.log_p.is_none()));
        assert_eq!(r.slopes[0].slope, None);
        assert_eq!(r.zero_cells(), 2);
    }

    #[test]
    fn duality_runs_both_sides() {
        let mut c = DualityConfig::new(1.0, vec![3.0, 6.0], vec![2.0], 100, 1e-2, 5);
        c.scheme = Scheme::EulerProjected;
        let r = run_duality_experiment(&c).unwrap();
        assert_eq!(r.cells.len(), 4);
        assert!(r.cells.iter().any(|c| c.source == PathSource::SquaredBessel));
        let bessel = r.cells.iter().find(|c| c.source == PathSource::SquaredBessel).unwrap();
        assert!((bessel.horizon - 3.0).abs() < 0.02);
        let expect = -rate_i(2.0, 1.0).unwrap().value;
        assert!(r.slopes.iter().all(|s| s.closed_form == expect));
        assert!(log_checkpoints(&[1.001, 1.002], 0.1) == vec![1, 2]);
    }

    #[test]
    fn cgf_table() {
        let ctrl = SeriesControl::default();
        let t = run_cgf_convergence(-3.0, -2.0, &[0.0, 1.0], &[5.0, 10.0, 40.0], &ctrl).unwrap();
        assert_eq!(t.rows.len(), 6);
        assert!(t.rows.iter().filter(|r| r.phi == 0.0).all(|r| r.abs_diff == Some(0.0)));
        assert!(t.slow.is_empty());
        assert!(run_cgf_convergence(-3.0, -2.0, &[2.5], &[5.0], &ctrl).is_err());
    }

    proptest::proptest! {
        #[test]
        fn wls_recovers_exact_lines(a in -5.0f64..5.0, slope in -2.0f64..2.0, vars in proptest::collection::vec(0.01f64..10.0, 2..8)) {
            let pts: Vec<(f64, f64, f64)> = vars.iter().enumerate().map(|(i, v)| {
                let t = 1.0 + 3.0 * i as f64;
                (t, a + slope * t, *v)
            }).collect();
            let (fit, se) = wls_slope(&pts).unwrap();
            proptest::prop_assert!((fit - slope).abs() < 1e-10);
            proptest::prop_assert!(se > 0.0 && se.is_finite());
        }
    }
}

