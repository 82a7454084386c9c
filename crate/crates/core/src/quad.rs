//! Adaptive quadrature used throughout the crate.
//!
//! Two rules are provided: a globally adaptive Gauss–Kronrod (7, 15) scheme
//! for smooth or mildly peaked integrands, and a tanh-sinh rule whose nodes
//! cluster doubly-exponentially at the endpoints, which is what integrals
//! against `(1 - y)^alpha (1 + y)^beta` on `(-1, 1)` need.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-11, max_subdivisions: 2000 }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Globally adaptive Gauss–Kronrod integration over a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut count = 1;
    loop {
        if !total.is_finite() {
            return Err(Error::Quadrature { estimate: total, error: total_err });
        }
        if total_err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            break;
        }
        if count >= opts.max_subdivisions {
            return Err(Error::Quadrature { estimate: total, error: total_err });
        }
        let seg = heap.pop().expect("heap never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval can no longer be split in floating point
            heap.push(seg);
            return Err(Error::Quadrature { estimate: total, error: total_err });
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        count += 1;
        if count % 64 == 0 {
            // refresh accumulated sums to avoid drift
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(Integral { value, error })
}

/// Integral over `[a, inf)` through the map `x = a + u / (1 - u)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, opts: QuadOptions) -> Result<Integral> {
    integrate(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let one_minus = 1.0 - u;
            let x = a + u / one_minus;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// Sum of adaptive integrals over consecutive breakpoints; the last piece
/// runs to infinity. Breakpoints must be increasing.
pub fn integrate_piecewise_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<Integral> {
    let mut total = Integral { value: 0.0, error: 0.0 };
    for w in breaks.windows(2) {
        let piece = integrate(&mut f, w[0], w[1], opts)?;
        total.value += piece.value;
        total.error += piece.error;
    }
    let last = *breaks.last().ok_or_else(|| Error::Invalid("no breakpoints".into()))?;
    let tail = integrate_to_infinity(&mut f, last, opts)?;
    total.value += tail.value;
    total.error += tail.error;
    Ok(total)
}

/// Tanh-sinh integration over `[a, b]`.
///
/// The integrand receives `(x, dist_a, dist_b)` where the distances to the
/// endpoints are computed without cancellation, so factors like
/// `(b - x)^alpha` can be formed accurately right up to the boundary.
pub fn integrate_tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Integral> {
    let half = 0.5 * (b - a);
    let pi_2 = std::f64::consts::FRAC_PI_2;
    // node at offset t: x = tanh(pi/2 sinh t), with complements 1 -+ x
    let mut eval = |t: f64| -> f64 {
        let s = pi_2 * t.sinh();
        let c = pi_2 * t.cosh();
        let e = (-2.0 * s.abs()).exp();
        // 1 - |x| = 2e / (1 + e)
        let comp = 2.0 * e / (1.0 + e);
        if comp == 0.0 {
            return 0.0;
        }
        let weight = c * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let (da, db) = if s >= 0.0 { (half * (2.0 - comp), half * comp) } else { (half * comp, half * (2.0 - comp)) };
        let x = if s >= 0.0 { b - db } else { a + da };
        let v = f(x, da, db);
        if v == 0.0 {
            0.0
        } else {
            v * weight
        }
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        if t > t_max {
            break;
        }
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = sum * h * half;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > t_max {
                break;
            }
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = sum * h * half;
        let diff = (next - estimate).abs();
        estimate = next;
        if !estimate.is_finite() {
            break;
        }
        if diff <= tol * (1.0 + estimate.abs()) && h < 0.1 {
            return Ok(Integral { value: estimate, error: diff });
        }
    }
    Err(Error::Quadrature { estimate, error: f64::NAN })
}
