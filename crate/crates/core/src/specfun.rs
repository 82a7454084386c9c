//! Special functions: Pochhammer symbols, Jacobi polynomials and their
//! norms, the hypergeometric series 2F1 and 0F1, Appell's F4 and the theta
//! function `sum_l exp(-pi l^2 x)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::{JacobiParams, SeriesControl};

pub use statrs::function::beta::{beta, ln_beta};
pub use statrs::function::gamma::{gamma, ln_gamma as lgamma};

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Rising factorial `a (a + 1) ... (a + n - 1)`.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n > 64 && a > 0.0 {
        return (ln_gamma(a + n as f64) - ln_gamma(a)).exp();
    }
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

/// `ln (a)_n` for `a > 0`.
pub fn ln_pochhammer(a: f64, n: usize) -> f64 {
    debug_assert!(a > 0.0);
    if n == 0 {
        return 0.0;
    }
    if n <= 16 {
        return (0..n).map(|k| (a + k as f64).ln()).sum();
    }
    ln_gamma(a + n as f64) - ln_gamma(a)
}

/// Jacobi polynomial `P_n^{alpha,beta}(x)` by the three-term recurrence.
pub fn jacobi_poly(n: usize, params: &JacobiParams, x: f64) -> f64 {
    *jacobi_poly_all(n, params, x).last().expect("at least P_0")
}

/// `P_0(x), ..., P_nmax(x)`.
pub fn jacobi_poly_all(nmax: usize, params: &JacobiParams, x: f64) -> Vec<f64> {
    jacobi_poly_homogeneous(nmax, params, x, 1.0)
}

/// `q^n P_n(p / q)` for `n = 0..=nmax`, well defined when `q = 0`.
pub fn jacobi_poly_homogeneous(nmax: usize, params: &JacobiParams, p: f64, q: f64) -> Vec<f64> {
    JacobiSeq::new(params, p, q).take(nmax + 1).collect()
}

/// Unbounded stream of `q^n P_n(p / q)`, `n = 0, 1, ...`.
#[derive(Debug, Clone)]
pub struct JacobiSeq {
    al: f64,
    be: f64,
    p: f64,
    q: f64,
    n: usize,
    prev: f64,
    cur: f64,
}

impl JacobiSeq {
    pub fn new(params: &JacobiParams, p: f64, q: f64) -> Self {
        Self { al: params.alpha(), be: params.beta(), p, q, n: 0, prev: 0.0, cur: 1.0 }
    }
}

impl Iterator for JacobiSeq {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.cur;
        let (al, be, p, q) = (self.al, self.be, self.p, self.q);
        let ab = al + be;
        let next = if self.n == 0 {
            (al + 1.0) * q + (ab + 2.0) * (p - q) / 2.0
        } else {
            let nf = (self.n + 1) as f64;
            let c1 = 2.0 * nf * (nf + ab) * (2.0 * nf + ab - 2.0);
            let c2 = (2.0 * nf + ab - 1.0) * ((2.0 * nf + ab) * (2.0 * nf + ab - 2.0) * p + (al * al - be * be) * q);
            let c3 = 2.0 * (nf + al - 1.0) * (nf + be - 1.0) * (2.0 * nf + ab);
            (c2 * self.cur - c3 * q * q * self.prev) / c1
        };
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
        Some(out)
    }
}

/// Jacobi polynomial through its terminating 2F1 definition,
/// `(alpha+1)_n / n! * 2F1(-n, n+alpha+beta+1; alpha+1; (1-x)/2)`.
///
/// The terms alternate and can exceed the result by many orders of
/// magnitude, so the series is summed in double-double arithmetic. For
/// `x < 0` the reflected form `(-1)^n P_n^(beta,alpha)(-x)` keeps the
/// argument at most 1/2.
pub fn jacobi_poly_by_definition(n: usize, params: &JacobiParams, x: f64) -> f64 {
    if x < 0.0 {
        let swapped = JacobiParams::from_alpha_beta(params.beta(), params.alpha()).expect("swapped parameters stay valid");
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        return sign * jacobi_poly_by_definition(n, &swapped, -x);
    }
    let (al, be) = (Dd::from(params.alpha()), Dd::from(params.beta()));
    let z = Dd::sum(1.0, -x).scale(0.5);
    let ab1 = al.add(be).add_f(1.0);
    let nf = n as f64;
    let mut term = Dd::from(1.0);
    let mut sum = Dd::from(1.0);
    for k in 0..n {
        let kf = k as f64;
        let num = ab1.add_f(nf + kf).mul_f(kf - nf);
        let den = al.add_f(1.0 + kf).mul_f(kf + 1.0);
        term = term.mul(num).div(den).mul(z);
        sum = sum.add(term);
    }
    let mut lead = Dd::from(1.0);
    for k in 1..=n {
        lead = lead.mul(al.add_f(k as f64)).div(Dd::from(k as f64));
    }
    lead.mul(sum).hi
}

// double-double number hi + lo with |lo| <= ulp(hi)/2
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

impl Dd {
    fn sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn quick(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::sum(self.hi, o.hi);
        let t = Dd::sum(self.lo, o.lo);
        let u = Dd::quick(s.hi, s.lo + t.hi);
        Dd::quick(u.hi, u.lo + t.lo)
    }

    fn add_f(self, v: f64) -> Dd {
        self.add(Dd::from(v))
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::quick(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    fn mul_f(self, v: f64) -> Dd {
        self.mul(Dd::from(v))
    }

    fn scale(self, v: f64) -> Dd {
        Dd { hi: self.hi * v, lo: self.lo * v }
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul_f(-q1));
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul_f(-q2));
        let q3 = r.hi / o.hi;
        Dd::quick(q1, q2).add_f(q3)
    }
}

/// Squared norm `R_n` of `P_n` in `L^2(W(y) dy)` with `W` the normalized
/// Jacobi weight.
pub fn jacobi_norm(n: usize, params: &JacobiParams) -> f64 {
    if n == 0 {
        return 1.0;
    }
    ln_jacobi_norm(n, params).exp()
}

pub fn ln_jacobi_norm(n: usize, params: &JacobiParams) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (al, be) = (params.alpha(), params.beta());
    let a = al + be + 2.0;
    let nf = n as f64;
    ln_gamma(a) - (2.0 * nf + a - 1.0).ln() + ln_pochhammer(al + 1.0, n) + ln_pochhammer(be + 1.0, n)
        - ln_gamma(a - 1.0 + nf)
        - ln_gamma(nf + 1.0)
}

/// Gauss hypergeometric series `2F1(a, b; c; z)` for `|z| < 1` or when the
/// series terminates.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    let terminating = [a, b].iter().filter(|v| is_nonpositive_integer(**v)).map(|v| (-v) as usize).min();
    if let Some(m) = terminating {
        if is_nonpositive_integer(c) && ((-c) as usize) < m {
            return Err(Error::Pole(format!("2F1 lower parameter c={c} hits zero before termination")));
        }
    } else {
        if is_nonpositive_integer(c) {
            return Err(Error::Pole(format!("2F1 lower parameter c={c} is a non-positive integer")));
        }
        if z.abs() >= 1.0 {
            return Err(Error::Divergence(format!("2F1 series needs |z| < 1, got z={z}")));
        }
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    if let Some(m) = terminating {
        // a polynomial: ratios are not monotone, so sum every term
        for k in 0..m {
            let kf = k as f64;
            term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
            sum += term;
        }
        return Ok(sum);
    }
    for k in 0..ctrl.max_terms {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        sum += term;
        let rho = ratio.abs().max(z.abs());
        if rho < 1.0 && term.abs() / (1.0 - rho) <= ctrl.abs_tol * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Truncation { what: "2F1", max_terms: ctrl.max_terms })
}

/// Confluent hypergeometric limit function `0F1(; c; z)`.
pub fn hyp0f1(c: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Pole(format!("0F1 parameter c={c} is a non-positive integer")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..ctrl.max_terms {
        let kf = k as f64;
        let ratio = z / ((c + kf) * (kf + 1.0));
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        // once the ratio is below 1/2 and shrinking the tail is at most |term|
        if ratio.abs() < 0.5 && kf + c > 0.0 && term.abs() <= ctrl.abs_tol * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Truncation { what: "0F1", max_terms: ctrl.max_terms })
}

/// Position in the `(u, v)` plane relative to the F4 convergence domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F4ConvergenceRegion {
    pub u: f64,
    pub v: f64,
    pub converges: bool,
}

impl F4ConvergenceRegion {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v, converges: u.abs().sqrt() + v.abs().sqrt() < 1.0 }
    }
}

// ln|x| and sign of a running product of factors.
#[derive(Clone, Copy)]
struct SignedLog {
    ln: f64,
    negative: bool,
}

impl SignedLog {
    const ONE: SignedLog = SignedLog { ln: 0.0, negative: false };

    fn times(self, x: f64) -> SignedLog {
        SignedLog { ln: self.ln + x.abs().ln(), negative: self.negative ^ (x < 0.0) }
    }

    fn over(self, x: f64) -> SignedLog {
        SignedLog { ln: self.ln - x.abs().ln(), negative: self.negative ^ (x < 0.0) }
    }

    fn value(self) -> f64 {
        let v = self.ln.exp();
        if self.negative {
            -v
        } else {
            v
        }
    }
}

// ln of x^m / ((c)_m m!) for m = 0..len, None where x^m vanishes.
fn power_over_pochhammer(x: f64, c: f64, len: usize) -> Vec<Option<SignedLog>> {
    let mut out = Vec::with_capacity(len);
    let mut cur = SignedLog::ONE;
    out.push(Some(cur));
    for m in 1..len {
        if x == 0.0 {
            out.push(None);
            continue;
        }
        let mf = (m - 1) as f64;
        cur = cur.times(x).over(c + mf).over(mf + 1.0);
        out.push(Some(cur));
    }
    out
}

/// Appell's double hypergeometric series
/// `F4(a, b; c, d; u, v) = sum (a)_{m+n} (b)_{m+n} / ((c)_m (d)_n) u^m v^n / (m! n!)`
/// summed along anti-diagonals `m + n = k` in log space.
pub fn appell_f4(a: f64, b: f64, c: f64, d: f64, u: f64, v: f64, ctrl: &SeriesControl) -> Result<f64> {
    let region = F4ConvergenceRegion::new(u, v);
    if !region.converges {
        return Err(Error::Divergence(format!(
            "F4 requires sqrt|u| + sqrt|v| < 1, got u={u}, v={v}"
        )));
    }
    if is_nonpositive_integer(c) || is_nonpositive_integer(d) {
        return Err(Error::Pole(format!("F4 lower parameters c={c}, d={d}")));
    }
    let rho = (u.abs().sqrt() + v.abs().sqrt()).powi(2);
    let max_k = ctrl.max_terms;
    let gu = power_over_pochhammer(u, c, max_k + 1);
    let gv = power_over_pochhammer(v, d, max_k + 1);
    let mut upper = SignedLog::ONE;
    let mut sum = 0.0;
    let mut prev_mag = f64::INFINITY;
    for k in 0..=max_k {
        if k > 0 {
            let kf = (k - 1) as f64;
            if a + kf == 0.0 || b + kf == 0.0 {
                // numerator Pochhammer vanished: series terminated
                return Ok(sum);
            }
            upper = upper.times(a + kf).times(b + kf);
        }
        let mut diag = 0.0;
        let mut mag = 0.0;
        for m in 0..=k {
            if let (Some(x), Some(y)) = (gu[m], gv[k - m]) {
                let t = SignedLog { ln: upper.ln + x.ln + y.ln, negative: upper.negative ^ x.negative ^ y.negative }.value();
                diag += t;
                mag += t.abs();
            }
        }
        sum += diag;
        if k > 2 && mag < prev_mag {
            let ratio = (mag / prev_mag).max(rho);
            if ratio < 1.0 && mag * ratio / (1.0 - ratio) <= ctrl.abs_tol * sum.abs() {
                return Ok(sum);
            }
        }
        if mag == 0.0 && k > 0 {
            return Ok(sum);
        }
        prev_mag = mag;
    }
    Err(Error::Truncation { what: "Appell F4", max_terms: ctrl.max_terms })
}

/// `Theta(x) = sum_{l in Z} exp(-pi l^2 x)`; for `x < 1` the modular
/// relation `Theta(x) = Theta(1/x) / sqrt(x)` is applied first.
pub fn theta(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("theta needs x > 0, got {x}")));
    }
    if x < 1.0 {
        return Ok(theta_direct(1.0 / x) / x.sqrt());
    }
    Ok(theta_direct(x))
}

/// Direct summation of `1 + 2 sum_{l>=1} exp(-pi l^2 x)`.
pub fn theta_direct(x: f64) -> f64 {
    let mut sum = 0.0;
    for l in 1.. {
        let t = (-std::f64::consts::PI * (l * l) as f64 * x).exp();
        sum += t;
        if t <= 1e-18 * (1.0 + sum) {
            break;
        }
    }
    1.0 + 2.0 * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_tanh_sinh;

    fn ctrl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(3.7, 0), 1.0);
        assert_eq!(pochhammer(1.0, 5), 120.0);
        assert_eq!(pochhammer(0.5, 2), 0.75);
        let big = pochhammer(1.5, 100);
        let exact = (ln_gamma(101.5) - ln_gamma(1.5)).exp();
        assert!((big / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_low_order() {
        let jp = JacobiParams::from_alpha_beta(0.7, -0.3).unwrap();
        for &x in &[-1.0, -0.4, 0.0, 0.6, 1.0] {
            assert_eq!(jacobi_poly(0, &jp, x), 1.0);
            let p1 = (0.7 + 1.0) - (0.7 - 0.3 + 2.0) * (1.0 - x) / 2.0;
            assert!((jacobi_poly(1, &jp, x) - p1).abs() < 1e-15);
        }
        // x = 1 gives (alpha+1)_n / n!
        for n in 0..12 {
            let expect = pochhammer(1.7, n) / pochhammer(1.0, n);
            assert!((jacobi_poly(n, &jp, 1.0) / expect - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn homogeneous_matches_dehomogenized() {
        let jp = JacobiParams::from_alpha_beta(0.4, 1.3).unwrap();
        let (p, q) = (0.7, -0.35);
        let h = jacobi_poly_homogeneous(15, &jp, p, q);
        let direct = jacobi_poly_all(15, &jp, p / q);
        for n in 0..=15 {
            let expect = q.powi(n as i32) * direct[n];
            assert!((h[n] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn norm_low_order() {
        let jp = JacobiParams::from_alpha_beta(0.0, 0.0).unwrap();
        assert_eq!(jacobi_norm(0, &jp), 1.0);
        assert!((jacobi_norm(1, &jp) - 1.0 / 3.0).abs() < 1e-15);
        // alpha + beta = -1 makes the n = 0 formula 0/0; the value is still 1
        let jp = JacobiParams::from_alpha_beta(-0.4, -0.6).unwrap();
        assert_eq!(jacobi_norm(0, &jp), 1.0);
        assert!(jacobi_norm(3, &jp).is_finite());
    }

    #[test]
    fn norm_matches_quadrature() {
        let jp = JacobiParams::from_alpha_beta(0.5, -0.25).unwrap();
        let wnorm = 2f64.powf(jp.alpha() + jp.beta() + 1.0) * beta(jp.alpha() + 1.0, jp.beta() + 1.0);
        for n in 0..6 {
            let r = integrate_tanh_sinh(
                |x, da, db| {
                    let p = jacobi_poly(n, &jp, x);
                    p * p * db.powf(jp.alpha()) * da.powf(jp.beta()) / wnorm
                },
                -1.0,
                1.0,
                1e-14,
            )
            .unwrap();
            assert!((r.value - jacobi_norm(n, &jp)).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn hyp2f1_basics() {
        assert_eq!(hyp2f1(0.3, 1.2, 2.5, 0.0, &ctrl()).unwrap(), 1.0);
        assert!((hyp2f1(1.0, 1.0, 1.0, 0.5, &ctrl()).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(hyp2f1(0.5, 0.5, 1.0, 1.2, &ctrl()), Err(Error::Divergence(_))));
        assert!(matches!(hyp2f1(0.5, 0.5, -2.0, 0.2, &ctrl()), Err(Error::Pole(_))));
        // terminating series is fine at |z| >= 1
        assert!((hyp2f1(-2.0, 1.0, 1.0, 3.0, &ctrl()).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn hyp2f1_terminating_reproduces_jacobi() {
        let jp = JacobiParams::from_alpha_beta(0.3, 1.1).unwrap();
        for n in 0..=20 {
            for &x in &[-0.9, -0.2, 0.5] {
                let nf = n as f64;
                let (b, c, z) = (nf + jp.alpha() + jp.beta() + 1.0, jp.alpha() + 1.0, (1.0 - x) / 2.0);
                let pre = pochhammer(jp.alpha() + 1.0, n) / pochhammer(1.0, n);
                let via_def = pre * hyp2f1(-nf, b, c, z, &ctrl()).unwrap();
                // sum of |terms|: the alternating sum cancels, so the error scales with this
                let magnitude = pre * hyp2f1(-nf, b, c, -z, &ctrl()).unwrap();
                let rec = jacobi_poly(n, &jp, x);
                assert!((via_def - rec).abs() <= 1e-14 * (1.0 + magnitude), "n={n} x={x} {via_def} {rec}");
            }
        }
    }

    #[test]
    fn jacobi_recurrence_near_endpoint() {
        let jp = JacobiParams::from_alpha_beta(0.3, 1.1).unwrap();
        // mpmath jacobi(11, 0.3, 1.1, -0.9)
        assert!((jacobi_poly(11, &jp, -0.9) - 1.79678969722857).abs() < 1e-13);
    }

    #[test]
    fn hyp0f1_values() {
        assert_eq!(hyp0f1(1.5, 0.0, &ctrl()).unwrap(), 1.0);
        // 0F1(; 1/2; z^2/4) = cosh z
        let z: f64 = 1.3;
        assert!((hyp0f1(0.5, z * z / 4.0, &ctrl()).unwrap() - z.cosh()).abs() < 1e-14);
        assert!(matches!(hyp0f1(-1.0, 0.1, &ctrl()), Err(Error::Pole(_))));
    }

    #[test]
    fn f4_reductions() {
        assert_eq!(appell_f4(0.9, 0.7, 1.3, 2.0, 0.0, 0.0, &ctrl()).unwrap(), 1.0);
        let f4 = appell_f4(0.9, 0.7, 1.3, 2.0, 0.2, 0.0, &ctrl()).unwrap();
        let f21 = hyp2f1(0.9, 0.7, 1.3, 0.2, &ctrl()).unwrap();
        assert!((f4 - f21).abs() < 1e-14);
        assert!(matches!(appell_f4(1.0, 1.0, 1.0, 1.0, 0.5, 0.2, &ctrl()), Err(Error::Divergence(_))));
        let tight = SeriesControl::new(5, 1e-16, 10).unwrap();
        assert!(matches!(appell_f4(1.0, 1.5, 1.0, 1.0, 0.3, 0.2, &tight), Err(Error::Truncation { .. })));
    }

    #[test]
    fn f4_region_flag() {
        assert!(F4ConvergenceRegion::new(0.25, 0.16).converges);
        assert!(!F4ConvergenceRegion::new(0.25, 0.25).converges);
        assert!(F4ConvergenceRegion::new(-0.2, 0.1).converges);
    }

    #[test]
    fn theta_values() {
        assert!(theta(0.0).is_err());
        assert!(theta(-1.0).is_err());
        let t50 = theta(50.0).unwrap();
        assert!(t50 - 1.0 < 1e-60 && t50 >= 1.0);
        for &x in &[0.1, 0.37, 1.0, 2.9] {
            let lhs = theta(x).unwrap();
            let rhs = theta(1.0 / x).unwrap() / x.sqrt();
            assert!((lhs - rhs).abs() < 1e-12);
        }
        // Theta(1) = pi^(1/4) / Gamma(3/4)
        let exact = std::f64::consts::PI.powf(0.25) / gamma(0.75);
        assert!((theta(1.0).unwrap() - exact).abs() < 1e-14);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    // bound on sup |P_n| over [-1, 1] when max(alpha, beta) >= -1/2
    fn sup_bound(n: usize, p: &JacobiParams) -> f64 {
        let q = p.alpha().max(p.beta()).max(-0.5);
        pochhammer(q + 1.0, n) / pochhammer(1.0, n)
    }

    fn f4_rectangular(a: f64, b: f64, c: f64, d: f64, u: f64, v: f64, n: usize) -> f64 {
        // term ratios avoid overflowing Pochhammer symbols
        let (mut sum, mut row) = (0.0, 1.0);
        for m in 0..n {
            if m > 0 {
                let j = (m - 1) as f64;
                row *= (a + j) * (b + j) / ((c + j) * (j + 1.0)) * u;
            }
            let mut term = row;
            for k in 0..n {
                if k > 0 {
                    let (i, j) = ((m + k - 1) as f64, (k - 1) as f64);
                    term *= (a + i) * (b + i) / ((d + j) * (j + 1.0)) * v;
                }
                sum += term;
            }
        }
        sum
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn recurrence_matches_definition(al in -0.9f64..3.0, be in -0.9f64..3.0, n in 0usize..=20, x in -0.99f64..0.99) {
            let p = JacobiParams::from_alpha_beta(al, be).unwrap();
            let (r, d) = (jacobi_poly(n, &p, x), jacobi_poly_by_definition(n, &p, x));
            prop_assert!((r - d).abs() <= 1e-13 * (n as f64 + 1.0) * sup_bound(n, &p), "{r} {d}");
        }

        #[test]
        fn reflection_symmetry(al in -0.9f64..3.0, be in -0.9f64..3.0, n in 0usize..=20, x in -1.0f64..1.0) {
            let p = JacobiParams::from_alpha_beta(al, be).unwrap();
            let q = JacobiParams::from_alpha_beta(be, al).unwrap();
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            let diff = jacobi_poly(n, &p, -x) - sign * jacobi_poly(n, &q, x);
            prop_assert!(diff.abs() <= 1e-13 * (n as f64 + 1.0) * sup_bound(n, &p));
        }

        #[test]
        fn eigenfunction_relation(al in -0.9f64..3.0, be in -0.9f64..3.0, n in 0usize..=8, x in -0.95f64..0.95) {
            let p = JacobiParams::from_alpha_beta(al, be).unwrap();
            let h = 1e-4;
            let f = |y: f64| jacobi_poly(n, &p, y);
            let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
            let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let lam = p.lambda(n);
            let res = (1.0 - x * x) * d2 + (p.p() * x + p.q()) * d1 + lam * f(x);
            prop_assert!(res.abs() < 1e-5 * (1.0 + (lam * f(x)).abs()), "residual {res}");
        }

        #[test]
        fn f4_antidiagonal_matches_rectangular(
            a in 0.2f64..2.0, b in 0.2f64..2.0, c in 0.5f64..2.5, d in 0.5f64..2.5,
            su in -0.4f64..0.4, sv in -0.4f64..0.4,
        ) {
            // sqrt|u| + sqrt|v| <= 0.8 keeps the rectangle truncation negligible
            let (u, v) = (su.signum() * su * su, sv.signum() * sv * sv);
            let fast = appell_f4(a, b, c, d, u, v, &SeriesControl::default()).unwrap();
            let slow = f4_rectangular(a, b, c, d, u, v, 160);
            prop_assert!((fast - slow).abs() < 1e-10 * (1.0 + slow.abs()), "{fast} {slow}");
        }
    }
}
