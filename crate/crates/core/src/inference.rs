//! Drift estimators computed from a single observed path.
//!
//! The MLE of `b` in `dY = bY dt + sqrt(1 - Y^2) dW` is
//! `int Y/(1-Y^2) dY / int Y^2/(1-Y^2) ds`. Its numerator can be read off
//! the path without a stochastic integral: with `F(y) = -log(1 - y^2) / 2`,
//! Ito's formula gives `int Y/(1-Y^2) dY = F(Y_t) - F(Y_0) - t/2 - int Y^2/(1-Y^2) ds`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Trajectory, TrajectoryKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// Left-point Ito sums for the stochastic integral.
    StochasticIntegral,
    /// Numerator through the Ito identity above.
    #[default]
    Pathwise,
}

impl std::str::FromStr for EstimatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pathwise" => Ok(EstimatorMode::Pathwise),
            "stochastic_integral" | "stochastic" => Ok(EstimatorMode::StochasticIntegral),
            _ => Err(Error::Invalid(format!("unknown estimator mode {s:?} (pathwise, stochastic_integral)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimate: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub horizon: f64,
    pub mode: EstimatorMode,
}

/// Below `DEGENERACY * t` the information integral is treated as zero.
pub const DEGENERACY: f64 = 1e-12;

/// Running integrals of a `(-1, 1)` path, fed one observation at a time.
///
/// Time integrals use the trapezoid rule on the observation grid; the
/// stochastic integral uses left-point sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathIntegrals {
    y0: f64,
    one_minus_sq0: f64,
    last_y: f64,
    last_ratio: f64,
    last_weight: f64,
    elapsed: f64,
    info: f64,
    ito: f64,
}

impl PathIntegrals {
    pub fn new(y0: f64) -> Self {
        Self::with_complement(y0, (1.0 - y0) * (1.0 + y0))
    }

    /// Starts from `y0` with `1 - y0^2` supplied by the caller.
    pub fn with_complement(y0: f64, one_minus_sq: f64) -> Self {
        Self {
            y0,
            one_minus_sq0: one_minus_sq,
            last_y: y0,
            last_ratio: y0 * y0 / one_minus_sq,
            last_weight: y0 / one_minus_sq,
            elapsed: 0.0,
            info: 0.0,
            ito: 0.0,
        }
    }

    pub fn push(&mut self, dt: f64, y: f64) {
        self.push_with_complement(dt, y, (1.0 - y) * (1.0 + y));
    }

    pub fn push_with_complement(&mut self, dt: f64, y: f64, one_minus_sq: f64) {
        let ratio = y * y / one_minus_sq;
        self.info += 0.5 * dt * (self.last_ratio + ratio);
        self.ito += self.last_weight * (y - self.last_y);
        self.elapsed += dt;
        self.last_y = y;
        self.last_ratio = ratio;
        self.last_weight = y / one_minus_sq;
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    /// `int_0^t Y^2/(1-Y^2) ds`.
    pub fn information(&self) -> f64 {
        self.info
    }

    fn one_minus_sq_last(&self) -> f64 {
        1.0 / (1.0 + self.last_ratio)
    }

    /// `int Y/(1-Y^2) dY` in the requested mode.
    pub fn score(&self, mode: EstimatorMode) -> f64 {
        match mode {
            EstimatorMode::StochasticIntegral => self.ito,
            EstimatorMode::Pathwise => {
                let f_t = -0.5 * self.one_minus_sq_last().ln();
                let f_0 = -0.5 * self.one_minus_sq0.ln();
                // 1/2 int (1+Y^2)/(1-Y^2) ds = t/2 + int Y^2/(1-Y^2) ds
                f_t - f_0 - 0.5 * self.elapsed - self.info
            }
        }
    }

    fn check_information(&self) -> Result<()> {
        if !(self.info >= DEGENERACY * self.elapsed) || self.info == 0.0 {
            return Err(Error::Degenerate(format!(
                "information integral {} below {DEGENERACY} * t (t = {})",
                self.info, self.elapsed
            )));
        }
        Ok(())
    }

    pub fn mle_b(&self, mode: EstimatorMode) -> Result<EstimateResult> {
        self.check_information()?;
        let numerator = self.score(mode);
        Ok(EstimateResult { estimate: numerator / self.info, numerator, denominator: self.info, horizon: self.elapsed, mode })
    }

    /// `(log(1 - Y_t^2) - log(1 - Y_0^2) + t) / (2 int Y^2/(1-Y^2) ds)`,
    /// which is `-b_hat - 1` for the pathwise `b_hat`.
    pub fn nu_hat(&self) -> Result<EstimateResult> {
        self.check_information()?;
        let numerator = self.one_minus_sq_last().ln() - self.one_minus_sq0.ln() + self.elapsed;
        let denominator = 2.0 * self.info;
        Ok(EstimateResult {
            estimate: numerator / denominator,
            numerator,
            denominator,
            horizon: self.elapsed,
            mode: EstimatorMode::Pathwise,
        })
    }

    /// `log dQ^b / dQ^{b0} = (b - b0) S - (b^2 - b0^2) K / 2`.
    pub fn girsanov_loglik(&self, b: f64, b0: f64, mode: EstimatorMode) -> Result<f64> {
        self.check_information()?;
        Ok((b - b0) * self.score(mode) - 0.5 * (b * b - b0 * b0) * self.info)
    }

    pub fn start(&self) -> f64 {
        self.y0
    }
}

fn integrals_of(traj: &Trajectory) -> Result<PathIntegrals> {
    if traj.kind != TrajectoryKind::JacobiPm1 {
        return Err(Error::Invalid(format!("expected a (-1, 1) Jacobi path, got {:?}", traj.kind)));
    }
    if traj.len() < 2 {
        return Err(Error::Invalid("a path needs at least two observations".into()));
    }
    traj.validate()?;
    let mut acc = PathIntegrals::new(traj.values[0]);
    for i in 1..traj.len() {
        acc.push(traj.times[i] - traj.times[i - 1], traj.values[i]);
    }
    Ok(acc)
}

pub fn mle_b(traj: &Trajectory, mode: EstimatorMode) -> Result<EstimateResult> {
    integrals_of(traj)?.mle_b(mode)
}

pub fn nu_hat(traj: &Trajectory) -> Result<EstimateResult> {
    integrals_of(traj)?.nu_hat()
}

pub fn girsanov_loglik(traj: &Trajectory, b: f64, b0: f64, mode: EstimatorMode) -> Result<f64> {
    integrals_of(traj)?.girsanov_loglik(b, b0, mode)
}

/// Running integrals of a squared Bessel path started at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselIntegrals {
    last: f64,
    elapsed: f64,
    inv_integral: f64,
}

impl BesselIntegrals {
    pub fn new(x0: f64) -> Result<Self> {
        if (x0 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("the Bessel estimator needs X_0 = 1, got {x0}")));
        }
        Ok(Self { last: x0, elapsed: 0.0, inv_integral: 0.0 })
    }

    pub fn push(&mut self, dt: f64, x: f64) -> Result<()> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("squared Bessel path must stay positive, got {x}")));
        }
        self.inv_integral += 0.5 * dt * (1.0 / self.last + 1.0 / x);
        self.elapsed += dt;
        self.last = x;
        Ok(())
    }

    /// `log X_t / (2 int_0^t ds / X_s)`.
    pub fn nu_hat(&self) -> Result<EstimateResult> {
        let denominator = 2.0 * self.inv_integral;
        if !(denominator > DEGENERACY * self.elapsed) {
            return Err(Error::Degenerate("empty Bessel path".into()));
        }
        let numerator = self.last.ln();
        Ok(EstimateResult {
            estimate: numerator / denominator,
            numerator,
            denominator,
            horizon: self.elapsed,
            mode: EstimatorMode::Pathwise,
        })
    }
}

pub fn bessel_mle_nu(traj: &Trajectory) -> Result<EstimateResult> {
    if traj.kind != TrajectoryKind::SquaredBessel {
        return Err(Error::Invalid(format!("expected a squared Bessel path, got {:?}", traj.kind)));
    }
    if traj.len() < 2 {
        return Err(Error::Invalid("a path needs at least two observations".into()));
    }
    let mut acc = BesselIntegrals::new(traj.values[0])?;
    for i in 1..traj.len() {
        acc.push(traj.times[i] - traj.times[i - 1], traj.values[i])?;
    }
    acc.nu_hat()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_jacobi, simulate_squared_bessel_stream, TrajectoryMeta, Scheme};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn stub(kind: TrajectoryKind, values: Vec<f64>, dt: f64) -> Trajectory {
        let times = (0..values.len()).map(|i| i as f64 * dt).collect();
        Trajectory {
            times,
            values,
            kind,
            meta: TrajectoryMeta { scheme: Scheme::EulerProjected, seed: 0, stream: 0, dt, params: BTreeMap::new(), projections: 0 },
        }
    }

    #[test]
    fn zero_path_is_degenerate() {
        let p = stub(TrajectoryKind::JacobiPm1, vec![0.0; 100], 0.01);
        assert!(matches!(mle_b(&p, EstimatorMode::Pathwise), Err(Error::Degenerate(_))));
        assert!(matches!(nu_hat(&p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn constant_bessel_stub() {
        let p = stub(TrajectoryKind::SquaredBessel, vec![1.0; 101], 0.01);
        let r = bessel_mle_nu(&p).unwrap();
        assert_eq!(r.numerator, 0.0);
        assert!((r.denominator - 2.0).abs() < 1e-12);
        assert_eq!(r.estimate, 0.0);
        let bad = stub(TrajectoryKind::SquaredBessel, vec![2.0; 10], 0.01);
        assert!(bessel_mle_nu(&bad).is_err());
    }

    #[test]
    fn modes_agree_and_identities_hold() {
        let p = simulate_jacobi(-2.0, 0.0, 0.0, 20.0, 1e-3, 17).unwrap();
        let a = mle_b(&p, EstimatorMode::Pathwise).unwrap();
        let s = mle_b(&p, EstimatorMode::StochasticIntegral).unwrap();
        assert!((a.estimate - s.estimate).abs() < 0.05, "{} {}", a.estimate, s.estimate);
        let nu = nu_hat(&p).unwrap();
        assert!((nu.estimate + a.estimate + 1.0).abs() < 1e-12);
        // argmax of the quadratic log-likelihood is b_hat
        let ll = |b: f64| girsanov_loglik(&p, b, -1.0, EstimatorMode::Pathwise).unwrap();
        let at = ll(a.estimate);
        assert!(at >= ll(a.estimate + 0.5) && at >= ll(a.estimate - 0.5));
        assert_eq!(girsanov_loglik(&p, -1.3, -1.3, EstimatorMode::Pathwise).unwrap(), 0.0);
    }

    #[test]
    fn log_time_reindexing() {
        // nu_hat at t = log u equals log(u (1 - Y_t^2)) / (2 int ...)
        let u = 20f64;
        let p = simulate_jacobi(-2.0, 0.0, 0.0, u.ln(), 1e-3, 3).unwrap();
        let nu = nu_hat(&p).unwrap();
        let y = *p.values.last().unwrap();
        let direct = (u * (1.0 - y * y)).ln() / nu.denominator;
        assert!((nu.estimate - direct).abs() < 1e-12);
    }

    #[test]
    fn bessel_estimator_on_simulated_path() {
        let p = simulate_squared_bessel_stream(4.0, 1.0, 50.0, 1e-2, 8, 0).unwrap();
        let r = bessel_mle_nu(&p).unwrap();
        assert!(r.estimate.is_finite() && r.denominator > 0.0);
    }

    proptest! {
        #[test]
        fn pathwise_identities(seed in 0u64..1000, b in -4.0f64..-1.0) {
            let p = simulate_jacobi(b, 0.0, 0.1, 2.0, 1e-2, seed).unwrap();
            let a = mle_b(&p, EstimatorMode::Pathwise).unwrap();
            let nu = nu_hat(&p).unwrap();
            prop_assert!((nu.estimate + a.estimate + 1.0).abs() < 1e-12 * (1.0 + a.estimate.abs()));
            let (b1, b2) = (b - 0.3, b + 0.2);
            let f = girsanov_loglik(&p, b1, b2, EstimatorMode::Pathwise).unwrap();
            let g = girsanov_loglik(&p, b2, b1, EstimatorMode::Pathwise).unwrap();
            prop_assert!((f + g).abs() < 1e-12 * (1.0 + f.abs()));
        }
    }

    fn thin(p: &Trajectory, k: usize) -> Trajectory {
        let mut q = p.clone();
        q.times = p.times.iter().step_by(k).copied().collect();
        q.values = p.values.iter().step_by(k).copied().collect();
        q.meta.dt = p.meta.dt * k as f64;
        q
    }

    #[test]
    fn pathwise_estimate_is_stable_under_grid_refinement() {
        // the time integrals see the path's roughness, so the gap shrinks like dt rather than dt^2
        let p = simulate_jacobi(-2.0, 0.0, 0.0, 10.0, 1e-4, 21).unwrap();
        let fine = mle_b(&p, EstimatorMode::Pathwise).unwrap().estimate;
        for k in [2usize, 4, 8] {
            let coarse = mle_b(&thin(&p, k), EstimatorMode::Pathwise).unwrap().estimate;
            let dt = 1e-4 * k as f64;
            assert!((coarse - fine).abs() < 3.0 * dt, "k={k}: {coarse} vs {fine}");
        }
    }
}

