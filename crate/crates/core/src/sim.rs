//! Path simulation: the Jacobi SDE `dY = (bY + c) dt + sqrt(1 - Y^2) dW` on
//! `(-1, 1)`, squared Bessel processes, and their skew product.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::JacobiParams;

/// Projection margin for the Euler scheme: overshoots land on `+-(1 - EPS_B)`.
pub const EPS_B: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    #[serde(rename = "jacobi_pm1")]
    JacobiPm1,
    #[serde(rename = "jacobi_01")]
    Jacobi01,
    SquaredBessel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Euler-Maruyama with overshoots projected back inside.
    #[default]
    EulerProjected,
    /// Drift-implicit Euler for `theta = arcsin Y`, which has additive noise:
    /// `d theta = ((b + 1/2) sin theta + c) / cos theta dt + dW`.
    ImplicitAngle,
    /// Exact transition draws (squared Bessel).
    Exact,
    /// Ratio of squared Bessel paths read on the additive-functional clock.
    SkewProduct,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler_projected" | "euler" => Ok(Scheme::EulerProjected),
            "implicit_angle" | "implicit" => Ok(Scheme::ImplicitAngle),
            _ => Err(Error::Invalid(format!("unknown scheme {s:?} (euler_projected, implicit_angle)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub scheme: Scheme,
    pub seed: u64,
    pub stream: u64,
    pub dt: f64,
    pub params: BTreeMap<String, f64>,
    /// Number of Euler steps that had to be projected back inside.
    pub projections: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: TrajectoryKind,
    pub meta: TrajectoryMeta,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    kind: TrajectoryKind,
    meta: TrajectoryMeta,
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0) - self.times.first().copied().unwrap_or(0.0)
    }

    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        let mut s = csv_path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    /// CSV `t,value` plus a JSON sidecar `<csv>.json` holding kind and meta.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(csv_path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        let sidecar = serde_json::to_value(Sidecar { kind: self.kind, meta: self.meta.clone() })?;
        std::fs::write(Self::sidecar_path(csv_path), serde_json::to_string_pretty(&sidecar)? + "\n")?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(w, "{},{}", fmt_f64(*t), fmt_f64(*v))?;
        }
        Ok(())
    }

    pub fn load(csv_path: &Path) -> Result<Self> {
        let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(Self::sidecar_path(csv_path))?)?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        let reader = BufReader::new(File::open(csv_path)?);
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line.trim() != "t,value" {
                    return Err(Error::Invalid(format!("unexpected trajectory header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Invalid(format!("short row {} in trajectory", i + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Invalid(format!("row {}: {e}", i + 1)))
            };
            times.push(parse(parts.next())?);
            values.push(parse(parts.next())?);
        }
        let traj = Trajectory { times, values, kind: sidecar.kind, meta: sidecar.meta };
        traj.validate()?;
        Ok(traj)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() {
            return Err(Error::GridMismatch("times and values differ in length".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("trajectory times must be strictly increasing".into()));
        }
        let bad = match self.kind {
            TrajectoryKind::JacobiPm1 => self.values.iter().any(|v| !(v.abs() < 1.0)),
            TrajectoryKind::Jacobi01 => self.values.iter().any(|v| !(*v > 0.0 && *v < 1.0)),
            TrajectoryKind::SquaredBessel => self.values.iter().any(|v| !(*v >= 0.0)),
        };
        if bad {
            return Err(Error::Domain(format!("trajectory values out of range for {:?}", self.kind)));
        }
        Ok(())
    }
}

/// Counter-based generator for trajectory `stream` under master `seed`.
/// Paths depend only on `(seed, stream)`, never on scheduling.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryBehaviour {
    Unattainable,
    Reflecting,
}

/// Behaviour of the `[0, 1]` process at 0 (`lower`) and 1 (`upper`), which
/// correspond to `-1` and `+1` for the `(-1, 1)` process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub lower: BoundaryBehaviour,
    pub upper: BoundaryBehaviour,
}

pub fn classify_boundaries(params: &JacobiParams) -> BoundaryReport {
    let rule = |dim: f64| if dim >= 2.0 { BoundaryBehaviour::Unattainable } else { BoundaryBehaviour::Reflecting };
    BoundaryReport { lower: rule(params.d()), upper: rule(params.dprime()) }
}

fn check_time_grid(horizon: f64, dt: f64) -> Result<usize> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    if !(dt > 0.0 && dt <= horizon) {
        return Err(Error::Domain(format!("dt must lie in (0, horizon], got {dt}")));
    }
    Ok(((horizon / dt) - 1e-9).ceil().max(1.0) as usize)
}

// times 0, dt, 2 dt, ..., horizon with a possibly shorter last step
fn time_grid(horizon: f64, dt: f64, steps: usize) -> Vec<f64> {
    let mut times: Vec<f64> = (0..steps).map(|i| i as f64 * dt).collect();
    times.push(horizon);
    times
}

/// Single-path state for the Jacobi SDE.
#[derive(Debug, Clone)]
pub struct JacobiStepper {
    b: f64,
    c: f64,
    scheme: Scheme,
    y: f64,
    angle: Angle,
    since_sync: u32,
    pub projections: u64,
}

impl JacobiStepper {
    /// Checks the scheme against the parameters. `strict` rejects parameter
    /// ranges where a boundary is attainable.
    pub fn new(b: f64, c: f64, y0: f64, scheme: Scheme, strict: bool) -> Result<Self> {
        let params = JacobiParams::from_bc(b, c)?;
        if !(y0.abs() < 1.0) {
            return Err(Error::Domain(format!("y0 must lie in (-1, 1), got {y0}")));
        }
        let attainable = params.alpha() < 0.0 || params.beta() < 0.0;
        match scheme {
            Scheme::EulerProjected => {
                if strict && attainable {
                    return Err(Error::Domain(format!(
                        "strict mode: a boundary is attainable (alpha={}, beta={})",
                        params.alpha(),
                        params.beta()
                    )));
                }
            }
            Scheme::ImplicitAngle => {
                // the implicit equation is monotone only when min(alpha, beta) > -1/2;
                // the scheme has no reflection rule, so attainable boundaries are refused
                if attainable {
                    return Err(Error::Domain(format!(
                        "implicit_angle needs alpha, beta >= 0 (alpha={}, beta={})",
                        params.alpha(),
                        params.beta()
                    )));
                }
            }
            other => return Err(Error::Invalid(format!("{other:?} is not a Jacobi stepping scheme"))),
        }
        Ok(Self { b, c, scheme, y: y0, angle: Angle::exact(y0.asin()), since_sync: 0, projections: 0 })
    }

    pub fn value(&self) -> f64 {
        self.y
    }

    /// `1 - Y^2` for the current state, without cancellation near the edges.
    pub fn one_minus_sq(&self) -> f64 {
        match self.scheme {
            Scheme::ImplicitAngle => self.angle.c * self.angle.c,
            _ => (1.0 - self.y) * (1.0 + self.y),
        }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) -> f64 {
        let xi: f64 = rng.sample(StandardNormal);
        let dw = dt.sqrt() * xi;
        match self.scheme {
            Scheme::ImplicitAngle => {
                let rhs = self.angle.u + dw;
                let mut next = solve_implicit_angle(rhs, (self.b + 0.5) * dt, self.c * dt, self.angle);
                self.since_sync += 1;
                if self.since_sync >= 256 {
                    next = Angle::exact(next.u);
                    self.since_sync = 0;
                }
                self.angle = next;
                self.y = next.s;
            }
            _ => {
                let y = self.y;
                let mut next = y + (self.b * y + self.c) * dt + ((1.0 - y) * (1.0 + y)).max(0.0).sqrt() * dw;
                let edge = 1.0 - EPS_B;
                if next.abs() > edge || next.is_nan() {
                    next = if next > 0.0 { edge } else { -edge };
                    self.projections += 1;
                }
                self.y = next;
            }
        }
        self.y
    }
}

// An angle with its sine and cosine carried along, so that small Newton
// corrections rotate (s, c) by a short Taylor series instead of calling sin_cos.
#[derive(Debug, Clone, Copy)]
struct Angle {
    u: f64,
    s: f64,
    c: f64,
}

impl Angle {
    fn exact(u: f64) -> Self {
        let (s, c) = u.sin_cos();
        Self { u, s, c }
    }

    fn rotate(self, d: f64) -> Self {
        if d.abs() > 0.1 {
            return Self::exact(self.u + d);
        }
        let d2 = d * d;
        if d.abs() < 1e-4 {
            // Newton corrections: the next Taylor terms are below 1e-17 relative
            let sd = d * (1.0 - d2 / 6.0);
            let cd = 1.0 - 0.5 * d2;
            return Self { u: self.u + d, s: self.s * cd + self.c * sd, c: self.c * cd - self.s * sd };
        }
        // truncation below 1e-19 for |d| <= 0.1
        let sd = d * (1.0 - d2 / 6.0 * (1.0 - d2 / 20.0 * (1.0 - d2 / 42.0 * (1.0 - d2 / 72.0))));
        let cd = 1.0 - d2 / 2.0 * (1.0 - d2 / 12.0 * (1.0 - d2 / 30.0 * (1.0 - d2 / 56.0 * (1.0 - d2 / 90.0))));
        let out = Self { u: self.u + d, s: self.s * cd + self.c * sd, c: self.c * cd - self.s * sd };
        if out.c > 0.0 {
            out
        } else {
            Self::exact(out.u)
        }
    }
}

// Root of u - (k sin u + m) / cos u = rhs on (-pi/2, pi/2). With k < 0 and
// |m| < -k the left side increases from -inf to +inf, so the root is unique.
// Plain Newton from the explicit predictor; the bracketed solver takes over
// if an iterate leaves the interval or convergence stalls.
fn solve_implicit_angle(rhs: f64, k: f64, m: f64, start: Angle) -> Angle {
    let predictor = rhs + (k * start.s + m) / start.c;
    if predictor.abs() < std::f64::consts::FRAC_PI_2 {
        let mut cur = start.rotate(predictor - start.u);
        for _ in 0..6 {
            let inv_c = 1.0 / cur.c;
            let val = cur.u - (k * cur.s + m) * inv_c - rhs;
            let deriv = 1.0 - (k + m * cur.s) * inv_c * inv_c;
            let d = -val / deriv;
            cur = cur.rotate(d);
            if !(cur.c > 0.0) || !(cur.u.abs() < std::f64::consts::FRAC_PI_2) {
                break;
            }
            // Newton is quadratic here: a step this small leaves an error far below rounding
            if d.abs() <= 1e-9 * (1.0 + cur.u.abs()) {
                return cur;
            }
        }
    }
    solve_implicit_angle_bracketed(rhs, k, m, start)
}

fn solve_implicit_angle_bracketed(rhs: f64, k: f64, m: f64, start: Angle) -> Angle {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let (mut lo, mut hi) = (-half_pi, half_pi);
    let mut cur = start;
    for _ in 0..200 {
        let val = cur.u - (k * cur.s + m) / cur.c - rhs;
        if val == 0.0 {
            return cur;
        }
        if val < 0.0 {
            lo = cur.u;
        } else {
            hi = cur.u;
        }
        let deriv = 1.0 - (k + m * cur.s) / (cur.c * cur.c);
        let next = cur.u - val / deriv;
        if !(next > lo && next < hi) {
            cur = Angle::exact(0.5 * (lo + hi));
            if hi - lo <= 4.0 * f64::EPSILON {
                return cur;
            }
            continue;
        }
        let d = next - cur.u;
        cur = cur.rotate(d);
        if d.abs() <= 1e-9 * (1.0 + cur.u.abs()) {
            return cur;
        }
    }
    cur
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiSimConfig {
    pub b: f64,
    pub c: f64,
    pub y0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
    pub stream: u64,
    pub scheme: Scheme,
    pub strict: bool,
}

impl JacobiSimConfig {
    pub fn new(b: f64, c: f64, y0: f64, horizon: f64, dt: f64, seed: u64) -> Self {
        Self { b, c, y0, horizon, dt, seed, stream: 0, scheme: Scheme::EulerProjected, strict: false }
    }
}

/// Euler path with projection, stream 0.
pub fn simulate_jacobi(b: f64, c: f64, y0: f64, horizon: f64, dt: f64, seed: u64) -> Result<Trajectory> {
    simulate_jacobi_with(&JacobiSimConfig::new(b, c, y0, horizon, dt, seed))
}

pub fn simulate_jacobi_with(cfg: &JacobiSimConfig) -> Result<Trajectory> {
    let steps = check_time_grid(cfg.horizon, cfg.dt)?;
    let mut stepper = JacobiStepper::new(cfg.b, cfg.c, cfg.y0, cfg.scheme, cfg.strict)?;
    let mut rng = path_rng(cfg.seed, cfg.stream);
    let times = time_grid(cfg.horizon, cfg.dt, steps);
    let mut values = Vec::with_capacity(times.len());
    values.push(cfg.y0);
    for w in times.windows(2) {
        values.push(stepper.step(w[1] - w[0], &mut rng));
    }
    let params = BTreeMap::from([
        ("b".to_string(), cfg.b),
        ("c".to_string(), cfg.c),
        ("y0".to_string(), cfg.y0),
        ("horizon".to_string(), cfg.horizon),
    ]);
    Ok(Trajectory {
        times,
        values,
        kind: TrajectoryKind::JacobiPm1,
        meta: TrajectoryMeta {
            scheme: cfg.scheme,
            seed: cfg.seed,
            stream: cfg.stream,
            dt: cfg.dt,
            params,
            projections: stepper.projections,
        },
    })
}

/// Exact draw of `X_{s+dt}` given `X_s = x` for a squared Bessel process of
/// dimension `dim`: `dt` times a noncentral chi-square with `dim` degrees of
/// freedom and noncentrality `x / dt`, sampled as a Poisson mixture of Gammas.
pub fn squared_bessel_step<R: Rng + ?Sized>(x: f64, dim: f64, dt: f64, rng: &mut R) -> f64 {
    let half_lambda = 0.5 * x / dt;
    let n = if half_lambda > 0.0 {
        Poisson::new(half_lambda).map(|p| p.sample(rng)).unwrap_or(0.0)
    } else {
        0.0
    };
    let shape = 0.5 * dim + n;
    Gamma::new(shape, 2.0 * dt).expect("positive shape and scale").sample(rng)
}

fn check_dim(dim: f64) -> Result<()> {
    if !(dim > 0.0 && dim.is_finite()) {
        return Err(Error::Domain(format!("squared Bessel dimension must be positive, got {dim}")));
    }
    Ok(())
}

pub fn simulate_squared_bessel(dim: f64, z0: f64, horizon: f64, dt: f64, seed: u64) -> Result<Trajectory> {
    simulate_squared_bessel_stream(dim, z0, horizon, dt, seed, 0)
}

pub fn simulate_squared_bessel_stream(dim: f64, z0: f64, horizon: f64, dt: f64, seed: u64, stream: u64) -> Result<Trajectory> {
    check_dim(dim)?;
    if !(z0 >= 0.0 && z0.is_finite()) {
        return Err(Error::Domain(format!("starting point must be nonnegative, got {z0}")));
    }
    let steps = check_time_grid(horizon, dt)?;
    let times = time_grid(horizon, dt, steps);
    let mut rng = path_rng(seed, stream);
    let mut values = Vec::with_capacity(times.len());
    let mut x = z0;
    values.push(x);
    for w in times.windows(2) {
        x = squared_bessel_step(x, dim, w[1] - w[0], &mut rng);
        values.push(x);
    }
    let params = BTreeMap::from([
        ("dim".to_string(), dim),
        ("z0".to_string(), z0),
        ("horizon".to_string(), horizon),
    ]);
    Ok(Trajectory {
        times,
        values,
        kind: TrajectoryKind::SquaredBessel,
        meta: TrajectoryMeta { scheme: Scheme::Exact, seed, stream, dt, params, projections: 0 },
    })
}

/// `J = Z_1 / (Z_1 + Z_2)` read on the clock `A_t = int_0^t ds / (Z_1 + Z_2)`.
///
/// For dimensions `d`, `d'` the result is a `[0, 1]` Jacobi path; `2J - 1`
/// at A-time `tau` has the law of `Y_{4 tau}` for the `(-1, 1)` process with
/// `b = -(d + d')/4`, `c = (d - d')/4`. The output uses an even A-grid with
/// as many points as the input, filled by linear interpolation.
pub fn skew_product(z1: &Trajectory, z2: &Trajectory) -> Result<Trajectory> {
    if z1.kind != TrajectoryKind::SquaredBessel || z2.kind != TrajectoryKind::SquaredBessel {
        return Err(Error::Invalid("skew product needs two squared Bessel paths".into()));
    }
    if z1.times != z2.times {
        return Err(Error::GridMismatch("skew product needs a common time grid".into()));
    }
    if z1.len() < 2 {
        return Err(Error::GridMismatch("skew product needs at least two points".into()));
    }
    let mut ratio = Vec::with_capacity(z1.len());
    let mut inv_sum = Vec::with_capacity(z1.len());
    for (i, (a, b)) in z1.values.iter().zip(&z2.values).enumerate() {
        let s = a + b;
        if !(s > 0.0) {
            return Err(Error::Degenerate(format!(
                "both squared Bessel components vanish at t={}",
                z1.times[i]
            )));
        }
        ratio.push(a / s);
        inv_sum.push(1.0 / s);
    }
    let mut clock = Vec::with_capacity(z1.len());
    clock.push(0.0);
    for i in 1..z1.len() {
        let h = z1.times[i] - z1.times[i - 1];
        clock.push(clock[i - 1] + 0.5 * h * (inv_sum[i] + inv_sum[i - 1]));
    }
    let total = *clock.last().expect("nonempty");
    let n = z1.len();
    let step = total / (n - 1) as f64;
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let tau = if i == n - 1 { total } else { i as f64 * step };
        while j + 2 < n && clock[j + 1] < tau {
            j += 1;
        }
        let (c0, c1) = (clock[j], clock[j + 1]);
        let w = if c1 > c0 { ((tau - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.0 };
        times.push(tau);
        values.push(ratio[j] + w * (ratio[j + 1] - ratio[j]));
    }
    let d = z1.meta.params.get("dim").copied().unwrap_or(f64::NAN);
    let dp = z2.meta.params.get("dim").copied().unwrap_or(f64::NAN);
    let params = BTreeMap::from([
        ("d".to_string(), d),
        ("dprime".to_string(), dp),
        ("b".to_string(), -(d + dp) / 4.0),
        ("c".to_string(), (d - dp) / 4.0),
        ("clock_total".to_string(), total),
    ]);
    Ok(Trajectory {
        times,
        values,
        kind: TrajectoryKind::Jacobi01,
        meta: TrajectoryMeta {
            scheme: Scheme::SkewProduct,
            seed: z1.meta.seed,
            stream: z1.meta.stream,
            dt: step,
            params,
            projections: 0,
        },
    })
}
