//! Transition density of the Jacobi diffusion with generator
//! `(1 - x^2) d^2 + (p x + q) d` on `(-1, 1)`.
//!
//! Every kernel here is a density in `y` with respect to Lebesgue measure,
//! with the stationary weight `W(y)` already folded in.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::levy::{conv_t1_c_scaled, CONV_UNDERFLOW};
use crate::params::{JacobiParams, SeriesControl};
use crate::specfun::{appell_f4, hyp2f1, ln_beta, ln_jacobi_norm, ln_pochhammer, JacobiSeq};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl KernelPoint {
    pub fn new(t: f64, x: f64, y: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("time must be positive, got {t}")));
        }
        check_open_interval("x", x)?;
        check_open_interval("y", y)?;
        Ok(Self { t, x, y })
    }
}

fn check_open_interval(name: &str, v: f64) -> Result<()> {
    if !(v.abs() < 1.0) {
        return Err(Error::Domain(format!("{name} must lie in (-1, 1), got {v}")));
    }
    Ok(())
}

fn ln_stationary(y: f64, params: &JacobiParams) -> f64 {
    let (al, be) = (params.alpha(), params.beta());
    al * (1.0 - y).ln() + be * (1.0 + y).ln()
        - (al + be + 1.0) * std::f64::consts::LN_2
        - ln_beta(al + 1.0, be + 1.0)
}

/// `W(y) = (1-y)^alpha (1+y)^beta / (2^{alpha+beta+1} B(alpha+1, beta+1))`.
pub fn stationary_density(y: f64, params: &JacobiParams) -> Result<f64> {
    check_open_interval("y", y)?;
    Ok(ln_stationary(y, params).exp())
}

/// Sum of a series whose terms eventually decay, stopping once `WINDOW`
/// consecutive terms are negligible against the running sum.
fn sum_until_small<F: FnMut(usize) -> Result<f64>>(
    mut term: F,
    tol: f64,
    max_terms: usize,
    what: &'static str,
) -> Result<(f64, usize)> {
    const WINDOW: usize = 3;
    let mut sum = 0.0;
    let mut small_run = 0;
    for n in 0..max_terms {
        let t = term(n)?;
        if !t.is_finite() {
            return Err(Error::Divergence(format!("{what}: non-finite term at n={n}")));
        }
        sum += t;
        if t.abs() <= tol * sum.abs() {
            small_run += 1;
            if small_run >= WINDOW {
                return Ok((sum, n + 1));
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::Truncation { what, max_terms })
}

/// Spectral sum together with the number of terms it used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEval {
    pub value: f64,
    pub terms: usize,
}

// ln max_{[-1,1]} |P_n|: the larger endpoint value when max(alpha, beta) >= -1/2.
// Below that the true maximum is O(n^{-1/2}) and the same expression at -1/2
// is used as a bound of the same order.
fn ln_sup_jacobi(n: usize, params: &JacobiParams) -> f64 {
    let q = params.alpha().max(params.beta()).max(-0.5);
    ln_pochhammer(q + 1.0, n) - ln_gamma(n as f64 + 1.0)
}

/// `p_t(x, y) = W(y) sum_n R_n^{-1} exp(-lambda_n t) P_n(x) P_n(y)`.
pub fn density_spectral(pt: &KernelPoint, params: &JacobiParams, ctrl: &SeriesControl) -> Result<f64> {
    Ok(density_spectral_eval(pt, params, ctrl)?.value)
}

/// Spectral sum truncated where the a priori bound
/// `exp(-lambda_n t) sup|P_n|^2 / R_n` is below tolerance and falling at
/// least geometrically with ratio 1/2, which bounds the whole tail.
pub fn density_spectral_eval(pt: &KernelPoint, params: &JacobiParams, ctrl: &SeriesControl) -> Result<SpectralEval> {
    let mut px = JacobiSeq::new(params, pt.x, 1.0);
    let mut py = JacobiSeq::new(params, pt.y, 1.0);
    let mut sum = 0.0;
    let mut prev_bound = f64::INFINITY;
    for n in 0..ctrl.max_terms {
        let (a, b) = (px.next().unwrap_or(0.0), py.next().unwrap_or(0.0));
        let ln_decay = -params.lambda(n) * pt.t - ln_jacobi_norm(n, params);
        sum += ln_decay.exp() * a * b;
        let bound = (ln_decay + 2.0 * ln_sup_jacobi(n, params)).exp();
        if n > 0 && bound <= ctrl.abs_tol * sum.abs() && bound <= 0.5 * prev_bound {
            let w = ln_stationary(pt.y, params).exp();
            return Ok(SpectralEval { value: w * sum, terms: n + 1 });
        }
        prev_bound = bound;
    }
    Err(Error::Truncation { what: "spectral sum (use the convolution route for small t)", max_terms: ctrl.max_terms })
}

fn f4_arguments(r: f64, x: f64, y: f64) -> (f64, f64) {
    let s = r / ((1.0 + r) * (1.0 + r));
    ((1.0 - x) * (1.0 - y) * s, (1.0 + x) * (1.0 + y) * s)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("Poisson kernel radius must lie in (0, 1), got {r}")));
    }
    Ok(())
}

/// Bilinear generating function `sum_n R_n^{-1} P_n(x) P_n(y) r^n` in closed
/// form, `(1-r)/(1+r)^a F4(a/2, (a+1)/2; alpha+1, beta+1; u, v)`.
pub fn poisson_kernel(r: f64, x: f64, y: f64, params: &JacobiParams, ctrl: &SeriesControl) -> Result<f64> {
    check_radius(r)?;
    check_open_interval("x", x)?;
    check_open_interval("y", y)?;
    let a = params.a();
    let (u, v) = f4_arguments(r, x, y);
    let f4 = appell_f4(a / 2.0, (a + 1.0) / 2.0, params.alpha() + 1.0, params.beta() + 1.0, u, v, ctrl)?;
    Ok((1.0 - r) / (1.0 + r).powf(a) * f4)
}

/// The same generating function summed directly over `n_terms` terms.
pub fn poisson_kernel_direct(r: f64, x: f64, y: f64, params: &JacobiParams, n_terms: usize) -> Result<f64> {
    check_radius(r)?;
    let px = JacobiSeq::new(params, x, 1.0);
    let py = JacobiSeq::new(params, y, 1.0);
    Ok(px
        .zip(py)
        .take(n_terms)
        .enumerate()
        .map(|(n, (a, b))| (n as f64 * r.ln() - ln_jacobi_norm(n, params)).exp() * a * b)
        .sum())
}

/// Ultraspherical Poisson kernel through the reduction
/// `F4(b, c; b, b; u, v) = (1-u-v)^{-c} 2F1(c/2, (c+1)/2; b; 4uv / (1-u-v)^2)`.
pub fn poisson_kernel_bailey(r: f64, x: f64, y: f64, alpha: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_radius(r)?;
    let params = JacobiParams::ultraspherical(alpha)?;
    let a = params.a();
    let (u, v) = f4_arguments(r, x, y);
    let (b, c) = (alpha + 1.0, alpha + 1.5);
    let s = 1.0 - u - v;
    let z = 4.0 * u * v / (s * s);
    let f = s.powf(-c) * hyp2f1(c / 2.0, (c + 1.0) / 2.0, b, z, ctrl)?;
    Ok((1.0 - r) / (1.0 + r).powf(a) * f)
}

/// Kernel of the process time-changed by the inverse Gaussian subordinator,
/// `q_t(x, y) = W(y) sum_n R_n^{-1} exp(-n t) P_n(x) P_n(y)`, from the
/// single series
/// `(1-r)/(1+r)^a sum_n (a)_{2n} / ((alpha+1)_n (beta+1)_n) (x+y)^n P_n((1+xy)/(x+y)) (r / (2(1+r)^2))^n`
/// with `r = exp(-t)`. The homogenized polynomial stays finite at `x + y = 0`.
pub fn subordinated_kernel(t: f64, x: f64, y: f64, params: &JacobiParams, ctrl: &SeriesControl) -> Result<f64> {
    let pt = KernelPoint::new(t, x, y)?;
    if !(params.alpha() + params.beta() > -1.0) {
        return Err(Error::Domain("the subordinated kernel needs alpha + beta > -1".into()));
    }
    let (al, be, a) = (params.alpha(), params.beta(), params.a());
    let r = (-t).exp();
    let ln_ratio = (r / (2.0 * (1.0 + r) * (1.0 + r))).ln();
    let mut h = JacobiSeq::new(params, 1.0 + x * y, x + y);
    let (sum, _) = sum_until_small(
        |n| {
            let hn = h.next().unwrap_or(0.0);
            let ln_c = ln_pochhammer(a, 2 * n) - ln_pochhammer(al + 1.0, n) - ln_pochhammer(be + 1.0, n)
                + n as f64 * ln_ratio;
            Ok(ln_c.exp() * hn)
        },
        ctrl.abs_tol,
        ctrl.max_terms,
        "subordinated kernel series",
    )?;
    Ok(ln_stationary(pt.y, params).exp() * (1.0 - r) / (1.0 + r).powf(a) * sum)
}

// Convolution sums add terms that each carry a quadrature error near 1e-12;
// asking for more than this from the series is pointless.
const CONV_SERIES_TOL: f64 = 1e-14;

fn check_conv_argument(s: f64) -> Result<()> {
    if s < CONV_UNDERFLOW {
        return Err(Error::Domain(format!(
            "time too large for the convolution route (argument {s}); the density equals W(y) to double precision"
        )));
    }
    Ok(())
}

/// Transition density from the subordinated representation:
/// `sqrt(pi) W(y) / 2^{alpha+beta} exp(gamma^2 t) / sqrt(t)
///  sum_n (a)_{2n} / ((alpha+1)_n (beta+1)_n) H_n / 8^n (f_{T_1} * f_{C_{2n+2gamma}})(2/t)`
/// where `H_n = (x+y)^n P_n((1+xy)/(x+y))`.
///
/// Convolutions are evaluated pre-multiplied by `exp(h^2 t / 4)`, which
/// turns the time factor of term `n` into `exp(-(2 gamma n + n^2) t)`.
pub fn density_convolution(pt: &KernelPoint, params: &JacobiParams, ctrl: &SeriesControl) -> Result<f64> {
    let (al, be, a, g) = (params.alpha(), params.beta(), params.a(), params.gamma());
    if !(g > 0.0) {
        return Err(Error::Domain("the convolution route needs alpha + beta > -1".into()));
    }
    let s = 2.0 / pt.t;
    check_conv_argument(s)?;
    let (x, y, t) = (pt.x, pt.y, pt.t);
    let mut h = JacobiSeq::new(params, 1.0 + x * y, x + y);
    let tol = ctrl.abs_tol.max(CONV_SERIES_TOL);
    let (sum, _) = sum_until_small(
        |n| {
            let hn = h.next().unwrap_or(0.0);
            if hn == 0.0 {
                return Ok(0.0);
            }
            let nf = n as f64;
            let ln_c = ln_pochhammer(a, 2 * n) - ln_pochhammer(al + 1.0, n) - ln_pochhammer(be + 1.0, n)
                - nf * 8f64.ln()
                - (2.0 * g * nf + nf * nf) * t;
            let conv = conv_t1_c_scaled(2.0 * nf + 2.0 * g, s, ctrl)?;
            Ok(ln_c.exp() * hn * conv)
        },
        tol,
        ctrl.max_terms,
        "convolution series",
    )?;
    let ln_pref = 0.5 * PI.ln() + ln_stationary(y, params) - (al + be) * std::f64::consts::LN_2 - 0.5 * t.ln();
    Ok(ln_pref.exp() * sum)
}

fn ln_k_alpha(alpha: f64) -> f64 {
    ln_gamma(alpha + 1.0) - (alpha + 0.5) * std::f64::consts::LN_2 - ln_gamma(alpha + 1.5)
}

/// Symmetric case `alpha = beta > -1/2`:
/// `sqrt(pi) K_alpha exp(gamma^2 t) / sqrt(t) W(y)
///  sum_{n,k} Gamma(nu+1) (xy)^k / (k! n! Gamma(alpha+n+1)) ((1-x^2)(1-y^2)/4)^n (f_{T_1} * f_{C_nu})(1/(2t))`
/// with `nu = 2n + k + alpha + 1/2`, `K_alpha = Gamma(alpha+1) / (2^{alpha+1/2} Gamma(alpha+3/2))`.
///
/// Terms sharing `j = 2n + k` share the convolution, so the double sum is
/// taken over `j` with an inner finite sum.
pub fn density_ultraspherical(pt: &KernelPoint, alpha: f64, ctrl: &SeriesControl) -> Result<f64> {
    if !(alpha > -0.5) {
        return Err(Error::Domain(format!("the ultraspherical route needs alpha > -1/2, got {alpha}")));
    }
    let params = JacobiParams::ultraspherical(alpha)?;
    let g = alpha + 0.5;
    let (x, y, t) = (pt.x, pt.y, pt.t);
    let s = 1.0 / (2.0 * t);
    check_conv_argument(s)?;
    let xy = x * y;
    let ln_q = ((1.0 - x * x) * (1.0 - y * y) / 4.0).ln();
    let tol = ctrl.abs_tol.max(CONV_SERIES_TOL);
    let (sum, _) = sum_until_small(
        |j| {
            let nu = j as f64 + g;
            let ln_time = ln_gamma(nu + 1.0) + (g * g - nu * nu) * t;
            let mut inner = 0.0;
            for n in 0..=j / 2 {
                let k = j - 2 * n;
                if k > 0 && xy == 0.0 {
                    continue;
                }
                let mut ln_term = ln_time - ln_gamma(k as f64 + 1.0) - ln_gamma(n as f64 + 1.0)
                    - ln_gamma(alpha + n as f64 + 1.0)
                    + n as f64 * ln_q;
                if k > 0 {
                    ln_term += k as f64 * xy.abs().ln();
                }
                let v = ln_term.exp();
                inner += if xy < 0.0 && k % 2 == 1 { -v } else { v };
            }
            if inner == 0.0 {
                return Ok(0.0);
            }
            Ok(inner * conv_t1_c_scaled(nu, s, ctrl)?)
        },
        tol,
        ctrl.max_terms,
        "ultraspherical double series",
    )?;
    let ln_pref = 0.5 * PI.ln() + ln_k_alpha(alpha) - 0.5 * t.ln() + ln_stationary(y, &params);
    Ok(ln_pref.exp() * sum)
}

// Term n of the from-zero series without the W(y) (1-y^2)^n factor.
fn from_zero_coefficients(t: f64, alpha: f64, ctrl: &SeriesControl) -> impl FnMut(usize) -> Result<f64> + '_ {
    let g = alpha + 0.5;
    let s = 1.0 / t;
    move |n| {
        let nf = n as f64;
        let h = 2.0 * nf + g;
        let ln_c = ln_gamma(2.0 * nf + alpha + 1.5) - nf * 4f64.ln() - ln_gamma(nf + 1.0) - ln_gamma(nf + alpha + 1.0)
            + 0.5 * (g * g - h * h) * t;
        Ok(ln_c.exp() * conv_t1_c_scaled(h, s, ctrl)?)
    }
}

fn check_from_zero(t: f64, alpha: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if !(alpha > -0.5) {
        return Err(Error::Domain(format!("the from-zero kernel needs alpha > -1/2, got {alpha}")));
    }
    check_conv_argument(1.0 / t)
}

fn ln_from_zero_prefactor(t: f64, alpha: f64) -> f64 {
    0.5 * (2.0 * PI).ln() + ln_k_alpha(alpha) - 0.5 * t.ln()
}

/// Density at time `t` of the symmetric process `dY = b Y dt + sqrt(1 - Y^2) dW`
/// started at 0, with `alpha = -b - 1`:
/// `sqrt(2 pi) K_alpha exp(gamma^2 t / 2) / sqrt(t) W(y)
///  sum_n Gamma(2n+alpha+3/2) / (4^n n! Gamma(n+alpha+1)) (1-y^2)^n (f_{T_1} * f_{C_{2n+gamma}})(1/t)`.
///
/// This process runs at half the speed of the one with generator
/// `(1-x^2) d^2 + ...`, so the value equals `p_{t/2}(0, y)`.
pub fn density_from_zero(t: f64, y: f64, alpha: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_from_zero(t, alpha)?;
    check_open_interval("y", y)?;
    let params = JacobiParams::ultraspherical(alpha)?;
    let ln_one_minus = (1.0 - y * y).ln();
    let mut coef = from_zero_coefficients(t, alpha, ctrl);
    let (sum, _) = sum_until_small(
        |n| Ok(coef(n)? * (n as f64 * ln_one_minus).exp()),
        ctrl.abs_tol.max(CONV_SERIES_TOL),
        ctrl.max_terms,
        "from-zero series",
    )?;
    Ok((ln_from_zero_prefactor(t, alpha) + ln_stationary(y, &params)).exp() * sum)
}

/// `E[(1 - Y_t^2)^m]` for the process of [`density_from_zero`], integrated
/// term by term with `int (1-y^2)^c dy = B(c+1, 1/2)`. Requires
/// `alpha + m > -1`.
pub fn from_zero_power_moment(t: f64, alpha: f64, m: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_from_zero(t, alpha)?;
    if !(alpha + m > -1.0) {
        return Err(Error::Divergence(format!(
            "E[(1-Y^2)^m] is infinite for alpha + m = {} <= -1",
            alpha + m
        )));
    }
    // W(y) = (1-y^2)^alpha / (2^{2 alpha + 1} B(alpha+1, alpha+1))
    let ln_w_norm = (2.0 * alpha + 1.0) * std::f64::consts::LN_2 + ln_beta(alpha + 1.0, alpha + 1.0);
    let mut coef = from_zero_coefficients(t, alpha, ctrl);
    let (sum, _) = sum_until_small(
        |n| Ok(coef(n)? * (ln_beta(alpha + m + n as f64 + 1.0, 0.5) - ln_w_norm).exp()),
        ctrl.abs_tol.max(CONV_SERIES_TOL),
        ctrl.max_terms,
        "from-zero moment series",
    )?;
    Ok(ln_from_zero_prefactor(t, alpha).exp() * sum)
}
