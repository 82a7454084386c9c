//! Canonical Jacobi parameters and the conversions between the four
//! parameterizations in common use.
//!
//! The pair `(alpha, beta)` is stored; everything else is derived:
//!
//! | view        | relation                                   |
//! |-------------|--------------------------------------------|
//! | `(p, q)`    | `p = -(alpha + beta + 2)`, `q = beta - alpha` |
//! | `(b, c)`    | `b = p / 2`, `c = q / 2` (SDE drift `b y + c`) |
//! | `(d, d')`   | `d = 2 (beta + 1)`, `d' = 2 (alpha + 1)`     |
//!
//! `p, q` parameterize the generator `(1 - x^2) f'' + (p x + q) f'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

impl JacobiParams {
    pub fn from_alpha_beta(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "parameters must be finite (alpha={alpha}, beta={beta})"
            )));
        }
        if alpha <= -1.0 || beta <= -1.0 {
            return Err(Error::Domain(format!(
                "alpha and beta must exceed -1 (alpha={alpha}, beta={beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_pq(p: f64, q: f64) -> Result<Self> {
        // p + q = -2(alpha + 1), q - p = 2(beta + 1)
        Self::from_alpha_beta(-(p + q) / 2.0 - 1.0, (q - p) / 2.0 - 1.0)
    }

    pub fn from_bc(b: f64, c: f64) -> Result<Self> {
        Self::from_alpha_beta(-(b + c) - 1.0, (c - b) - 1.0)
    }

    pub fn from_dd(d: f64, dprime: f64) -> Result<Self> {
        Self::from_alpha_beta(dprime / 2.0 - 1.0, d / 2.0 - 1.0)
    }

    /// Symmetric (ultraspherical) parameters `alpha = beta`.
    pub fn ultraspherical(alpha: f64) -> Result<Self> {
        Self::from_alpha_beta(alpha, alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p(&self) -> f64 {
        -(self.beta + self.alpha + 2.0)
    }

    pub fn q(&self) -> f64 {
        self.beta - self.alpha
    }

    pub fn b(&self) -> f64 {
        self.p() / 2.0
    }

    pub fn c(&self) -> f64 {
        self.q() / 2.0
    }

    pub fn d(&self) -> f64 {
        2.0 * (self.beta + 1.0)
    }

    pub fn dprime(&self) -> f64 {
        2.0 * (self.alpha + 1.0)
    }

    /// `(alpha + beta + 1) / 2`.
    pub fn gamma(&self) -> f64 {
        (self.alpha + self.beta + 1.0) / 2.0
    }

    /// `alpha + beta + 2`.
    pub fn a(&self) -> f64 {
        self.alpha + self.beta + 2.0
    }

    pub fn is_ultraspherical(&self) -> bool {
        self.alpha == self.beta
    }

    /// Eigenvalue `n (n + alpha + beta + 1)` of `-L` on `P_n`.
    pub fn lambda(&self, n: usize) -> f64 {
        let n = n as f64;
        n * (n + self.alpha + self.beta + 1.0)
    }
}

/// Truncation and tolerance policy shared by series and quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    /// Hard cap on the number of series terms (or anti-diagonals).
    pub max_terms: usize,
    /// Terms are dropped once they fall below `abs_tol` times the running
    /// magnitude of the sum.
    pub abs_tol: f64,
    /// Maximum number of subintervals in adaptive quadrature.
    pub quadrature_points: usize,
}

impl SeriesControl {
    pub fn new(max_terms: usize, abs_tol: f64, quadrature_points: usize) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::Invalid("max_terms must be at least 1".into()));
        }
        if !(abs_tol > 0.0 && abs_tol < 1.0) {
            return Err(Error::Invalid(format!("abs_tol must lie in (0, 1), got {abs_tol}")));
        }
        if quadrature_points == 0 {
            return Err(Error::Invalid("quadrature_points must be positive".into()));
        }
        Ok(Self { max_terms, abs_tol, quadrature_points })
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { max_terms: 5000, abs_tol: 1e-16, quadrature_points: 2000 }
    }
}
