//! Densities and Laplace transforms of the subordinators behind the
//! closed-form Jacobi kernels: the inverse Gaussian first-passage time, the
//! stable-1/2 hitting time `tau(c)`, and the families `C_h`, `T_1` whose
//! Laplace transforms in `t^2 / 8` are `sech(t/2)^h` and `tanh(t/2)/(t/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::SeriesControl;
use crate::quad::{integrate, QuadOptions};

/// First passage of `B_s + mu s` to the level `delta t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IGParams {
    pub mu: f64,
    pub delta: f64,
    pub t: f64,
}

impl IGParams {
    pub fn new(mu: f64, delta: f64, t: f64) -> Result<Self> {
        if !(mu > 0.0 && delta > 0.0 && t > 0.0) {
            return Err(Error::Domain(format!(
                "inverse Gaussian parameters must be positive (mu={mu}, delta={delta}, t={t})"
            )));
        }
        Ok(Self { mu, delta, t })
    }

    /// The choice `delta = 1/sqrt 2`, `mu = sqrt 2 gamma` that turns
    /// `exp(-lambda_n T_t)` into `exp(-n t)`.
    pub fn linearizing(gamma: f64, t: f64) -> Result<Self> {
        Self::new(std::f64::consts::SQRT_2 * gamma, std::f64::consts::FRAC_1_SQRT_2, t)
    }
}

pub fn ig_density(s: f64, ig: &IGParams) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let level = ig.delta * ig.t;
    let exponent = level * ig.mu - 0.5 * (level * level / s + ig.mu * ig.mu * s);
    level / (2.0 * PI).sqrt() * s.powf(-1.5) * exponent.exp()
}

pub fn ig_laplace(u: f64, ig: &IGParams) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("Laplace argument must be nonnegative, got {u}")));
    }
    Ok((-ig.t * ig.delta * ((2.0 * u + ig.mu * ig.mu).sqrt() - ig.mu)).exp())
}

/// Density of the first hitting time of level `c` by a standard Brownian
/// motion.
pub fn tau_density(c: f64, s: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("hitting level must be positive, got {c}")));
    }
    if s <= 0.0 {
        return Ok(0.0);
    }
    Ok(c / (2.0 * PI * s * s * s).sqrt() * (-c * c / (2.0 * s)).exp())
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("index h must be positive, got {h}")));
    }
    Ok(())
}

/// Density of `C_h` at `s`.
///
/// For `s <= 2 + h` the alternating hitting-time series is summed in
/// adjacent pairs. Beyond that the series cancels catastrophically, so the
/// Laplace transform `cosh(sqrt(2 lambda))^{-h}` is inverted numerically on
/// a Talbot contour after shifting out the leading decay `exp(-pi^2 s / 8)`.
pub fn density_c(h: f64, s: f64, ctrl: &SeriesControl) -> Result<f64> {
    density_c_scaled(h, s, 0.0, ctrl)
}

/// `exp(log_scale) * f_{C_h}(s)`, with the factor applied inside the sum so
/// that deep-tail values do not underflow.
pub(crate) fn density_c_scaled(h: f64, s: f64, log_scale: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_h(h)?;
    if s <= 0.0 {
        return Ok(0.0);
    }
    if s <= 2.0 + h {
        density_c_series(h, s, log_scale, ctrl)
    } else {
        Ok(density_c_talbot(h, s) * log_scale.exp())
    }
}

fn density_c_series(h: f64, s: f64, log_scale: f64, ctrl: &SeriesControl) -> Result<f64> {
    let base = h * std::f64::consts::LN_2 - ln_gamma(h) - 0.5 * (2.0 * PI * s * s * s).ln() + log_scale;
    let ln_gamma_h = ln_gamma(h);
    let term = |p: usize| -> f64 {
        let pf = p as f64;
        let c = 2.0 * pf + h;
        let ln_ratio = if p == 0 { ln_gamma_h } else { ln_gamma(pf + h) - ln_gamma(pf + 1.0) };
        (base + ln_ratio + c.ln() - c * c / (2.0 * s)).exp()
    };
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut p = 0;
    while p + 1 < 2 * ctrl.max_terms {
        let even = term(p);
        let odd = term(p + 1);
        sum += even - odd;
        let decaying = odd <= even && even <= prev;
        if decaying && (odd <= ctrl.abs_tol * sum.abs() || odd < f64::MIN_POSITIVE) {
            return Ok(sum);
        }
        prev = odd;
        p += 2;
    }
    Err(Error::Truncation { what: "C_h density series", max_terms: ctrl.max_terms })
}

const TALBOT_NODES: usize = 24;

// ln cosh(w) for Re w >= 0, continuous across the negative lambda axis
fn ln_cosh(w: Complex64) -> Complex64 {
    w + (Complex64::new(1.0, 0.0) + (-2.0 * w).exp()).ln() - std::f64::consts::LN_2
}

fn density_c_talbot(h: f64, s: f64) -> f64 {
    let shift = -PI * PI / 8.0;
    let transform = |lambda: Complex64| -> Complex64 {
        let w = (2.0 * (lambda + shift)).sqrt();
        (-h * ln_cosh(w)).exp()
    };
    let m = TALBOT_NODES as f64;
    let r = 2.0 * m / (5.0 * s);
    let mut acc = 0.5 * (transform(Complex64::new(r, 0.0)) * (r * s).exp()).re;
    for k in 1..TALBOT_NODES {
        let theta = k as f64 * PI / m;
        let cot = theta.cos() / theta.sin();
        let node = Complex64::new(r * theta * cot, r * theta);
        let slope = Complex64::new(1.0, theta * (1.0 + cot * cot) - cot);
        acc += ((node * s).exp() * transform(node) * slope).re;
    }
    r / m * acc * (shift * s).exp()
}

/// Density of `T_1`, `sum_k exp(-pi^2 (k + 1/2)^2 s / 2)`.
///
/// For `s < 1` the theta-transformed form
/// `(2 pi s)^{-1/2} (1 + 2 sum_n (-1)^n exp(-2 n^2 / s))` is used.
pub fn density_t1(s: f64, ctrl: &SeriesControl) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    if s >= 1.0 {
        t1_direct(s, ctrl)
    } else {
        Ok(t1_dual_bracket(s, ctrl)? / (2.0 * PI * s).sqrt())
    }
}

/// Direct spectral sum for `f_{T_1}`, exposed for cross-checking.
pub fn t1_direct(s: f64, ctrl: &SeriesControl) -> Result<f64> {
    let mut sum = 0.0;
    for k in 0..ctrl.max_terms {
        let kh = k as f64 + 0.5;
        let t = (-0.5 * PI * PI * kh * kh * s).exp();
        sum += t;
        // successive ratios are below exp(-pi^2 s) < 1 and shrinking
        if t <= ctrl.abs_tol * sum || t < f64::MIN_POSITIVE {
            return Ok(sum);
        }
    }
    Err(Error::Truncation { what: "T_1 density series", max_terms: ctrl.max_terms })
}

// 1 + 2 sum (-1)^n exp(-2 n^2 / s)
fn t1_dual_bracket(s: f64, ctrl: &SeriesControl) -> Result<f64> {
    let mut sum = 1.0;
    for n in 1..ctrl.max_terms {
        let nf = n as f64;
        let t = 2.0 * (-2.0 * nf * nf / s).exp();
        sum += if n % 2 == 1 { -t } else { t };
        if t <= ctrl.abs_tol * sum.abs() || t < f64::MIN_POSITIVE {
            return Ok(sum);
        }
    }
    Err(Error::Truncation { what: "T_1 dual series", max_terms: ctrl.max_terms })
}

// 2 w f_{T_1}(w^2), finite as w -> 0
fn t1_jacobian(w: f64, ctrl: &SeriesControl) -> Result<f64> {
    let s = w * w;
    if s < 1.0 {
        Ok(2.0 / (2.0 * PI).sqrt() * t1_dual_bracket(s.max(f64::MIN_POSITIVE), ctrl)?)
    } else {
        Ok(2.0 * w * t1_direct(s, ctrl)?)
    }
}

/// Below this argument the convolution is reported as 0: both factors are
/// smaller than `exp(-1e6)` there.
pub const CONV_UNDERFLOW: f64 = 1e-6;

/// `(f_{T_1} * f_{C_h})(s) = int_0^s f_{C_h}(u) f_{T_1}(s - u) du`.
pub fn conv_t1_c(h: f64, s: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_h(h)?;
    if s < CONV_UNDERFLOW {
        return Ok(0.0);
    }
    let log_scale = h * h / (2.0 * s);
    Ok(conv_t1_c_scaled(h, s, ctrl)? * (-log_scale).exp())
}

/// `exp(h^2 / (2 s)) (f_{T_1} * f_{C_h})(s)`.
///
/// `f_{C_h}(u) <= const * exp(-h^2 / (2u))`, so the scaled integrand stays
/// representable even when the convolution itself underflows.
pub(crate) fn conv_t1_c_scaled(h: f64, s: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_h(h)?;
    if s < CONV_UNDERFLOW {
        return Err(Error::Domain(format!("convolution argument {s} below {CONV_UNDERFLOW}")));
    }
    let log_scale = h * h / (2.0 * s);
    let opts = QuadOptions { abs_tol: 1e-300, rel_tol: 1e-12, max_subdivisions: ctrl.quadrature_points };
    let mut failure = None;
    // left half: f_{C_h} vanishes at u = 0 faster than any power
    let left = integrate(
        |u| {
            let fc = density_c_scaled(h, u, log_scale, ctrl);
            let ft = density_t1(s - u, ctrl);
            match (fc, ft) {
                (Ok(a), Ok(b)) => a * b,
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        0.5 * s,
        opts,
    )?;
    // right half: u = s - w^2 removes the (s - u)^{-1/2} endpoint behaviour of f_{T_1}
    let right = integrate(
        |w| {
            let fc = density_c_scaled(h, s - w * w, log_scale, ctrl);
            let ft = t1_jacobian(w, ctrl);
            match (fc, ft) {
                (Ok(a), Ok(b)) => a * b,
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        (0.5 * s).sqrt(),
        opts,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let total = left.value + right.value;
    if total.is_finite() {
        Ok(total.max(0.0))
    } else {
        Err(Error::Quadrature { estimate: total, error: left.error + right.error })
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::quad::integrate_piecewise_to_infinity;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn densities_nonnegative(h in 0.2f64..10.0, ls in -7.0f64..4.0) {
            let s = ls.exp();
            let c = SeriesControl::default();
            for v in [density_c(h, s, &c).unwrap(), density_t1(s, &c).unwrap(), conv_t1_c(h, s, &c).unwrap()] {
                prop_assert!(v >= 0.0 && v.is_finite(), "h={} s={} v={}", h, s, v);
            }
        }
    }

    #[test]
    fn doubled_time_transforms() {
        // t -> 2t turns exp(-t^2 s / 8) into exp(-t^2 s / 2)
        let c = SeriesControl::default();
        let opts = QuadOptions::with_tol(1e-15, 1e-12);
        for &(h, t) in &[(1.0, 0.4), (2.5, 0.8), (4.0, 1.1)] {
            let lhs = integrate_piecewise_to_infinity(|s| (-t * t * s / 2.0).exp() * density_c(h, s, &c).unwrap(), &[0.0, 1.0, 5.0, 20.0], opts)
                .unwrap()
                .value;
            assert!((lhs / (1.0 / f64::cosh(t)).powf(h) - 1.0).abs() < 1e-8);
        }
        let t: f64 = 0.9;
        let lhs = integrate_piecewise_to_infinity(|s| (-t * t * s / 2.0).exp() * density_t1(s, &c).unwrap(), &[0.0, 1.0, 5.0, 20.0], opts)
            .unwrap()
            .value;
        assert!((lhs / (t.tanh() / t) - 1.0).abs() < 1e-8);
    }
}
