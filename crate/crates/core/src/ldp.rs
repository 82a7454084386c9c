//! Large deviations of the drift MLE in the symmetric model
//! `dY = bY dt + sqrt(1 - Y^2) dW`, `b <= -1`.
//!
//! For a level `x`, the tilted exponent `phi` acts through
//! `b(phi, x) = -1 - sqrt((b+1)^2 + 2 phi (x+1))` and the limiting cumulant
//! generating function `Lambda(phi, x) = -(phi + b - b(phi, x)) / 2`.
//! Rates are nonnegative: `lim (1/t) log P = -J_b(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SeriesControl;
use crate::semigroup::from_zero_power_moment;

fn check_b(b: f64) -> Result<()> {
    if !(b <= -1.0) || !b.is_finite() {
        return Err(Error::Domain(format!("the large-deviation results need b <= -1, got {b}")));
    }
    Ok(())
}

fn discriminant(phi: f64, x: f64, b: f64) -> f64 {
    (b + 1.0) * (b + 1.0) + 2.0 * phi * (x + 1.0)
}

pub fn b_of_phi(phi: f64, x: f64, b: f64) -> Result<f64> {
    let disc = discriminant(phi, x, b);
    if !(disc >= 0.0) {
        return Err(Error::Domain(format!("phi={phi} outside (b+1)^2 + 2 phi (x+1) >= 0 for x={x}, b={b}")));
    }
    Ok(-1.0 - disc.sqrt())
}

/// `G(phi) = b + b(phi, x) + phi`; the domain is where `G < 0`.
pub fn g_of_phi(phi: f64, x: f64, b: f64) -> Result<f64> {
    Ok(b + b_of_phi(phi, x, b)? + phi)
}

pub fn lambda(phi: f64, x: f64, b: f64) -> Result<f64> {
    let bp = b_of_phi(phi, x, b)?;
    if !(b + bp + phi < 0.0) {
        return Err(Error::Domain(format!("phi={phi} outside the domain of Lambda (x={x}, b={b})")));
    }
    Ok(-(phi + b - bp) / 2.0)
}

/// `d Lambda / d phi = -(1 + (x+1) / sqrt((b+1)^2 + 2 phi (x+1))) / 2`.
pub fn lambda_derivative(phi: f64, x: f64, b: f64) -> Result<f64> {
    let disc = discriminant(phi, x, b);
    if !(disc > 0.0) {
        return Err(Error::Domain(format!("derivative undefined at phi={phi} (x={x}, b={b})")));
    }
    Ok(-(1.0 + (x + 1.0) / disc.sqrt()) / 2.0)
}

pub fn phi0(x: f64, b: f64) -> Result<f64> {
    if x == -1.0 {
        return Err(Error::Domain("x = -1 is excluded".into()));
    }
    Ok(-(b + 1.0) * (b + 1.0) / (2.0 * (x + 1.0)))
}

/// Critical point of `Lambda(., x)`, where `b(phi, x) = x`.
pub fn phi_m(x: f64, b: f64) -> Result<f64> {
    if x == -1.0 {
        return Err(Error::Domain("x = -1 is excluded".into()));
    }
    Ok((x + 1.0) / 2.0 - (b + 1.0) * (b + 1.0) / (2.0 * (x + 1.0)))
}

/// `x` below which `Lambda` is steep: `(b^2 + 3) / (2(b - 1))`.
pub fn steep_threshold(b: f64) -> f64 {
    (b * b + 3.0) / (2.0 * (b - 1.0))
}

/// Zero of `G`. Squaring `b + phi - 1 = sqrt((b+1)^2 + 2 phi (x+1))` gives
/// `phi^2 + 2(b - x - 2) phi - 4b = 0`; the admissible root has
/// `b + phi - 1 >= 0`. Bisection on `G` covers the case where the filter
/// leaves no unique root.
pub fn phi1(x: f64, b: f64) -> Result<f64> {
    check_b(b)?;
    let h = b - x - 2.0;
    let disc = h * h + 4.0 * b;
    if disc >= 0.0 {
        let roots = [-h + disc.sqrt(), -h - disc.sqrt()];
        let admissible: Vec<f64> = roots.iter().copied().filter(|r| b + r - 1.0 >= 0.0).collect();
        if admissible.len() == 1 || (admissible.len() == 2 && admissible[0] == admissible[1]) {
            return Ok(admissible[0]);
        }
    }
    phi1_bisect(x, b)
}

fn phi1_bisect(x: f64, b: f64) -> Result<f64> {
    let g = |phi: f64| g_of_phi(phi, x, b);
    // G is increasing along D_1 away from phi0 when x < -1 (phi -> +inf side is outside D_1),
    // so bracket between a point with G < 0 and one with G > 0 by expanding a search.
    let p0 = phi0(x, b)?;
    let inside = |phi: f64| discriminant(phi, x, b) >= 0.0;
    let mut lo = if x < -1.0 { p0.min(0.0) - 1.0 } else { p0 };
    let mut step = 1.0;
    while !(inside(lo) && g(lo)? < 0.0) {
        lo -= step;
        step *= 2.0;
        if step > 1e12 {
            return Err(Error::Domain(format!("no phi with G < 0 found (x={x}, b={b})")));
        }
    }
    let mut hi = lo + 1.0;
    step = 1.0;
    while inside(hi) && g(hi)? < 0.0 {
        hi += step;
        step *= 2.0;
        if step > 1e12 {
            return Err(Error::Domain(format!("G stays negative: no phi1 (x={x}, b={b})")));
        }
    }
    if !inside(hi) {
        return Err(Error::Domain(format!("G has no zero inside D_1 (x={x}, b={b})")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CgfCase {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
    #[serde(rename = "iii")]
    III,
}

/// Domain of `Lambda(., x)`: `(-inf, phi0)` in case i, `(-inf, phi1)` in
/// case ii, `(phi0, phi1)` in case iii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgfDomain {
    pub case: CgfCase,
    pub phi0: f64,
    pub phi1: Option<f64>,
    pub steep: bool,
    pub x: f64,
    pub b: f64,
}

impl CgfDomain {
    pub fn lower(&self) -> Option<f64> {
        match self.case {
            CgfCase::III => Some(self.phi0),
            _ => None,
        }
    }

    pub fn upper(&self) -> f64 {
        match self.case {
            CgfCase::I => self.phi0,
            _ => self.phi1.expect("phi1 is set outside case i"),
        }
    }

    pub fn contains(&self, phi: f64) -> bool {
        phi < self.upper() && self.lower().is_none_or(|l| phi > l)
    }
}

/// At `x` equal to the steep threshold `phi1 = phi0` and cases i and ii
/// give the same domain; the point is reported as case i.
pub fn domain(x: f64, b: f64) -> Result<CgfDomain> {
    check_b(b)?;
    if x == -1.0 {
        return Err(Error::Domain("x = -1 is excluded".into()));
    }
    let p0 = phi0(x, b)?;
    if x <= steep_threshold(b) {
        let p1 = if x == steep_threshold(b) { Some(p0) } else { None };
        return Ok(CgfDomain { case: CgfCase::I, phi0: p0, phi1: p1, steep: true, x, b });
    }
    let case = if x < -1.0 { CgfCase::II } else { CgfCase::III };
    Ok(CgfDomain { case, phi0: p0, phi1: Some(phi1(x, b)?), steep: false, x, b })
}

/// The root below -1 of `(b - x)^2 = 4x(x+1)`, i.e. of `3x^2 + (4 + 2b)x - b^2 = 0`.
pub fn x0(b: f64) -> Result<f64> {
    check_b(b)?;
    let lin = 4.0 + 2.0 * b;
    Ok((-lin - (lin * lin + 12.0 * b * b).sqrt()) / 6.0)
}

pub fn x1(nu: f64) -> f64 {
    (-(nu + 2.0) + 2.0 * (nu * nu + nu + 1.0).sqrt()) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateBranch {
    Quadratic,
    LinearTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEval {
    pub x: f64,
    pub value: f64,
    pub branch: RateBranch,
}

/// `J_b(x) = -(x-b)^2 / (4(x+1))` for `x <= x0(b)`, and
/// `x + 2 + sqrt((b-x)^2 + 4(x+1))` above.
pub fn rate_j(x: f64, b: f64) -> Result<RateEval> {
    let split = x0(b)?;
    if x <= split {
        return Ok(RateEval { x, value: -(x - b) * (x - b) / (4.0 * (x + 1.0)), branch: RateBranch::Quadratic });
    }
    let arg = (b - x) * (b - x) + 4.0 * (x + 1.0);
    if !(arg >= 0.0) {
        return Err(Error::Domain(format!("rate undefined at x={x}, b={b}")));
    }
    Ok(RateEval { x, value: x + 2.0 + arg.sqrt(), branch: RateBranch::LinearTail })
}

/// `I_nu(x) = (x - nu)^2 / (4x)` for `x >= x1(nu)`, and
/// `1 - x + sqrt((nu - x)^2 - 4x)` below.
pub fn rate_i(x: f64, nu: f64) -> Result<RateEval> {
    if x >= x1(nu) {
        if x == 0.0 {
            return Err(Error::Domain("I_nu is singular at x = 0 on its quadratic branch".into()));
        }
        return Ok(RateEval { x, value: (x - nu) * (x - nu) / (4.0 * x), branch: RateBranch::Quadratic });
    }
    let arg = (nu - x) * (nu - x) - 4.0 * x;
    if !(arg >= 0.0) {
        return Err(Error::Domain(format!("rate undefined at x={x}, nu={nu}")));
    }
    Ok(RateEval { x, value: 1.0 - x + arg.sqrt(), branch: RateBranch::LinearTail })
}

const CONVEXITY_PROBES: usize = 33;

/// Rate `-lim (1/t) log P(Y_t >= y)` from a cumulant generating function
/// `cgf` on `(0, phi1)` that may be non-steep at `phi1`.
///
/// For `y <= cgf'(0)` the rate is 0; for `cgf'(0) < y < cgf'(phi1)` it is
/// `sup_phi {y phi - cgf(phi)}`, found by golden-section search; for
/// `y >= cgf'(phi1)` it is the linear part `y phi1 - cgf(phi1)`. Pass an
/// infinite `dlambda1` for a steep function.
pub fn nonsteep_rate<F: Fn(f64) -> Result<f64>>(cgf: F, phi1: f64, y: f64, dlambda0: f64, dlambda1: f64) -> Result<f64> {
    if !(phi1 > 0.0) {
        return Err(Error::Domain(format!("phi1 must be positive, got {phi1}")));
    }
    // convexity probe on the open interval
    let probe: Vec<f64> = (1..CONVEXITY_PROBES)
        .map(|i| cgf(phi1 * i as f64 / CONVEXITY_PROBES as f64))
        .collect::<Result<_>>()?;
    let scale = probe.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for w in probe.windows(3) {
        if w[0] - 2.0 * w[1] + w[2] < -1e-10 * scale {
            return Err(Error::Assumption("cumulant generating function fails the convexity probe".into()));
        }
    }
    if y <= dlambda0 {
        return Ok(0.0);
    }
    if y >= dlambda1 {
        return Ok(y * phi1 - cgf(phi1)?);
    }
    let objective = |phi: f64| -> Result<f64> { Ok(y * phi - cgf(phi)?) };
    let inv_golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, phi1);
    let mut c = hi - inv_golden * (hi - lo);
    let mut d = lo + inv_golden * (hi - lo);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    while hi - lo > 1e-12 * phi1.max(1.0) {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_golden * (hi - lo);
            fc = objective(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_golden * (hi - lo);
            fd = objective(d)?;
        }
    }
    objective(0.5 * (lo + hi))
}

/// Finite-time cumulant generating function
/// `Lambda_t(phi, x) = -e/2 + (1/t) log E_{b(phi,x)}[(1 - Y_t^2)^{-e/2}]`,
/// `e = phi + b - b(phi, x)`, for the tilted process started at 0.
pub fn lambda_t_numeric(phi: f64, x: f64, b: f64, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_b(b)?;
    let limit = lambda(phi, x, b)?;
    let bp = b_of_phi(phi, x, b)?;
    let e = phi + b - bp;
    if e == 0.0 {
        return Ok(limit);
    }
    let alpha = -bp - 1.0;
    let moment = from_zero_power_moment(t, alpha, -e / 2.0, ctrl)?;
    Ok(-e / 2.0 + moment.ln() / t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::density_from_zero;
    use crate::quad::integrate_tanh_sinh;
    use proptest::prelude::*;

    const B: f64 = -3.0;

    #[test]
    fn b_of_phi_examples() {
        assert_eq!(b_of_phi(0.0, -2.0, B).unwrap(), B);
        assert!((b_of_phi(1.5, -2.0, B).unwrap() + 2.0).abs() < 1e-15);
        let p0 = phi0(-2.0, B).unwrap();
        assert_eq!(b_of_phi(p0, -2.0, B).unwrap(), -1.0);
        assert!(b_of_phi(p0 + 0.1, -2.0, B).is_err());
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda(0.0, -2.0, B).unwrap(), 0.0);
        let pm = phi_m(-2.0, B).unwrap();
        assert!((lambda(pm, -2.0, B).unwrap() + 0.25).abs() < 1e-15);
        let p1 = phi1(-1.2, B).unwrap();
        assert!((p1 - (7.6 + 9.76f64.sqrt()) / 2.0).abs() < 1e-12);
        let at_p1 = -(B + p1);
        let closed = -(-1.2 + 2.0 + ((B + 1.2) * (B + 1.2) + 4.0 * (-0.2)).sqrt());
        assert!((at_p1 - closed).abs() < 1e-12);
        // G vanishes at phi1, so Lambda itself is only defined just inside
        assert!((lambda(p1 - 1e-9, -1.2, B).unwrap() - at_p1).abs() < 1e-8);
        assert!(lambda(p1 + 1e-6, -1.2, B).is_err());
    }

    #[test]
    fn domain_cases() {
        let d = domain(-2.0, B).unwrap();
        assert_eq!(d.case, CgfCase::I);
        assert_eq!(d.phi0, 2.0);
        assert!(d.steep && d.contains(1.9) && !d.contains(2.1));
        let d = domain(-1.2, B).unwrap();
        assert_eq!(d.case, CgfCase::II);
        assert!((d.phi1.unwrap() - 5.362).abs() < 1e-3 && d.phi1.unwrap() < d.phi0);
        let d = domain(0.0, B).unwrap();
        assert_eq!(d.case, CgfCase::III);
        assert_eq!(d.phi0, -2.0);
        assert!(d.contains(0.0) && !d.contains(-2.5));
        assert!(domain(-1.0, B).is_err());
        assert!(domain(-2.0, -0.5).is_err());
        // tie at the steep threshold: phi1 meets phi0
        let t = domain(steep_threshold(B), B).unwrap();
        assert_eq!(t.case, CgfCase::I);
        let near = domain(steep_threshold(B) + 1e-8, B).unwrap();
        assert_eq!(near.case, CgfCase::II);
        assert!((near.phi1.unwrap() - t.phi0).abs() < 1e-3);
    }

    #[test]
    fn phi1_bisection_agrees_with_quadratic() {
        for &(x, b) in &[(-1.2, -3.0), (0.0, -3.0), (-1.1, -5.0), (2.0, -1.5)] {
            let q = phi1(x, b).unwrap();
            let s = phi1_bisect(x, b).unwrap();
            assert!((q - s).abs() < 1e-9 * q.abs().max(1.0), "{x} {b}: {q} vs {s}");
            assert!(g_of_phi(q, x, b).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn x0_examples() {
        let r = x0(B).unwrap();
        assert!((r - (1.0 - 28f64.sqrt()) / 3.0).abs() < 1e-12);
        for &b in &[-1.5, -2.0, -3.0, -5.0] {
            let r = x0(b).unwrap();
            assert!(r > steep_threshold(b));
            assert!(((b - r) * (b - r) - 4.0 * r * (r + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_j_examples() {
        assert_eq!(rate_j(B, B).unwrap().value, 0.0);
        let r = rate_j(-2.0, B).unwrap();
        assert!((r.value - 0.25).abs() < 1e-12);
        assert_eq!(r.branch, RateBranch::Quadratic);
        let r = rate_j(-1.2, B).unwrap();
        assert!((r.value - (0.8 + 2.44f64.sqrt())).abs() < 1e-10);
        assert_eq!(r.branch, RateBranch::LinearTail);
        assert!((r.value - (B + phi1(-1.2, B).unwrap())).abs() < 1e-10);
    }

    #[test]
    fn rate_j_smooth_at_x0() {
        let s = x0(B).unwrap();
        let quad = -(s - B) * (s - B) / (4.0 * (s + 1.0));
        let lin = s + 2.0 + ((B - s) * (B - s) + 4.0 * (s + 1.0)).sqrt();
        assert!((quad - lin).abs() < 1e-10);
        assert!((quad + s).abs() < 1e-10);
        let h = 1e-6;
        let left = (rate_j(s, B).unwrap().value - rate_j(s - h, B).unwrap().value) / h;
        let right = (rate_j(s + h, B).unwrap().value - rate_j(s, B).unwrap().value) / h;
        assert!((left - right).abs() < 1e-4);
        assert!((left - 5.1459).abs() < 1e-3);
    }

    #[test]
    fn lambda_at_optimizers_matches_rate() {
        for &x in &[-4.0, -2.5, -2.0, -1.6] {
            let pm = phi_m(x, B).unwrap();
            assert!((lambda(pm, x, B).unwrap() + rate_j(x, B).unwrap().value).abs() < 1e-12);
            let h = 1e-5;
            let d = (lambda(pm + h, x, B).unwrap() - lambda(pm - h, x, B).unwrap()) / (2.0 * h);
            assert!(d.abs() < 1e-8);
            assert!(lambda_derivative(pm, x, B).unwrap().abs() < 1e-14);
        }
        for &x in &[-1.3, -1.2, -0.5, 1.0] {
            let p1 = phi1(x, B).unwrap();
            assert!((B + p1 - rate_j(x, B).unwrap().value).abs() < 1e-10);
        }
    }

    #[test]
    fn rate_i_examples_and_duality() {
        assert_eq!(rate_i(1.5, 1.5).unwrap().value, 0.0);
        assert_eq!(x1(0.0), 0.0);
        assert!(rate_i(0.0, 0.0).is_err());
        for &nu in &[0.5, 1.0, 2.0] {
            assert!((x0(-(nu + 1.0)).unwrap() + x1(nu) + 1.0).abs() < 1e-12);
            for i in 0..=35 {
                let x = -0.5 + 0.1 * i as f64;
                if x == 0.0 || (x.abs() < 1e-12) {
                    continue;
                }
                let i_val = rate_i(x, nu).unwrap();
                let j_val = rate_j(-(x + 1.0), -(nu + 1.0)).unwrap();
                assert!((i_val.value - j_val.value).abs() < 1e-12, "nu={nu} x={x}");
                assert_eq!(i_val.branch, j_val.branch);
            }
        }
    }

    #[test]
    fn nonsteep_transform_reproduces_closed_forms() {
        // linear part: x = -1.2, y = 0
        let x = -1.2;
        let p1 = phi1(x, B).unwrap();
        let cgf = |phi: f64| lambda(phi.min(p1 * (1.0 - 1e-15)), x, B);
        let d0 = lambda_derivative(0.0, x, B).unwrap();
        let d1 = lambda_derivative(p1, x, B).unwrap();
        assert!(d1 < 0.0);
        let r = nonsteep_rate(cgf, p1, 0.0, d0, d1).unwrap();
        assert!((r - rate_j(x, B).unwrap().value).abs() < 1e-8);
        // affine beyond cgf'(phi1) with slope phi1
        let r1 = nonsteep_rate(cgf, p1, d1 + 0.1, d0, d1).unwrap();
        let r2 = nonsteep_rate(cgf, p1, d1 + 0.3, d0, d1).unwrap();
        assert!(((r2 - r1) / 0.2 - p1).abs() < 1e-8);
        // steep case x = -2: interior optimum
        let x = -2.0;
        let p0 = phi0(x, B).unwrap();
        let steep = |phi: f64| lambda(phi, x, B);
        let r = nonsteep_rate(steep, p0, 0.0, lambda_derivative(0.0, x, B).unwrap(), f64::INFINITY).unwrap();
        assert!((r - 0.25).abs() < 1e-10);
        // a concave function is refused
        assert!(matches!(nonsteep_rate(|p: f64| Ok(-p * p), 1.0, 0.5, 0.0, -2.0), Err(Error::Assumption(_))));
    }

    #[test]
    fn lambda_t_converges() {
        let c = SeriesControl::default();
        let limit = lambda(1.0, -2.0, B).unwrap();
        let gaps: Vec<f64> = [5.0, 10.0, 20.0, 40.0]
            .iter()
            .map(|&t| (lambda_t_numeric(1.0, -2.0, B, t, &c).unwrap() - limit).abs())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert_eq!(lambda_t_numeric(0.0, -2.0, B, 3.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn lambda_t_moment_matches_quadrature_and_limit() {
        let c = SeriesControl::default();
        let (phi, x, t) = (1.0, -2.0, 5.0);
        let bp = b_of_phi(phi, x, B).unwrap();
        let alpha = -bp - 1.0;
        let m = -(phi + B - bp) / 2.0;
        let series = from_zero_power_moment(t, alpha, m, &c).unwrap();
        let quad = integrate_tanh_sinh(
            |y, _, _| if y.abs() < 1.0 { density_from_zero(t, y, alpha, &c).unwrap() * (1.0 - y * y).powf(m) } else { 0.0 },
            -1.0,
            1.0,
            1e-12,
        )
        .unwrap()
        .value;
        assert!((series - quad).abs() < 1e-8 * series);
        // long-time limit: expectation under the stationary law of the tilted process
        use crate::specfun::ln_beta;
        let stationary = (ln_beta(alpha + m + 1.0, 0.5) - (2.0 * alpha + 1.0) * std::f64::consts::LN_2
            - ln_beta(alpha + 1.0, alpha + 1.0))
        .exp();
        let late = from_zero_power_moment(40.0, alpha, m, &c).unwrap();
        assert!((late - stationary).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn rate_nonnegative_and_zero_only_at_b(x in -8.0f64..3.0, bi in 0usize..3) {
            let b = [-1.5, -3.0, -5.0][bi];
            prop_assume!((x + 1.0).abs() > 1e-6);
            let r = rate_j(x, b).unwrap().value;
            prop_assert!(r >= 0.0);
            if (x - b).abs() > 1e-6 {
                prop_assert!(r > 0.0);
            }
        }

        #[test]
        fn duality_holds(nu in 0.0f64..5.0, x in -0.9f64..6.0) {
            prop_assume!(x.abs() > 1e-6);
            let i_val = rate_i(x, nu).unwrap().value;
            let j_val = rate_j(-(x + 1.0), -(nu + 1.0)).unwrap().value;
            prop_assert!((i_val - j_val).abs() < 1e-12 * (1.0 + i_val.abs()));
        }
    }
}
