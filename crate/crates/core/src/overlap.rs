//! The three overlap coefficients as functions of the shape ratio `R`, and a
//! quadrature route that computes them directly from two densities.
//!
//! With `T = ln(1 + 1/X)` both standardized populations become exponential
//! with means `alpha1`, `alpha2`, which gives
//!
//! * `rho    = 2 sqrt(R) / (R + 1)`
//! * `Delta  = 1 - R^(1/(1-R)) |1 - 1/R|  =  1 - |1 - R| R^(R/(1-R))`
//! * `Lambda = 1 / (1 + J) = R / (R^2 - R + 1)`, `J = (R - 1)^2 / R` being
//!   the symmetrized Kullback-Leibler divergence.
//!
//! `Delta` has a removable singularity at `R = 1` and a kink there (its
//! one-sided slopes are `+-1/e`); it is evaluated through a series near 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::Density;
use crate::error::{domain, OvlError, Result};
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};

/// Below this distance from 1 the `Delta` helpers switch to series.
const DELTA_SERIES_RADIUS: f64 = 1e-6;
/// Series radius for the second derivative of `Delta`, whose direct form
/// cancels to `O((R-1)^3)`.
const DELTA_D2_SERIES_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Rho,
    Delta,
    Lambda,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Rho, Measure::Delta, Measure::Lambda];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Rho => "rho",
            Measure::Delta => "delta",
            Measure::Lambda => "lambda",
        }
    }

    /// Closed form `g(R)`. The caller guarantees `R > 0`.
    pub fn value(self, r: f64) -> f64 {
        match self {
            Measure::Rho => 2.0 * r.sqrt() / (r + 1.0),
            Measure::Delta => delta_unchecked(r),
            Measure::Lambda => r / (r * r - r + 1.0),
        }
    }

    /// `g'(R)`. For `Delta` at exactly `R = 1` the right-hand slope is used.
    pub fn derivative(self, r: f64) -> f64 {
        match self {
            Measure::Rho => (1.0 - r) / (r.sqrt() * (1.0 + r).powi(2)),
            Measure::Delta => {
                let s = delta_side(r);
                -s * delta_power(r) * ln_over_one_minus(r)
            }
            Measure::Lambda => (1.0 - r * r) / (r * r - r + 1.0).powi(2),
        }
    }

    /// `g''(R)`. For `Delta` at exactly `R = 1` the right-hand limit is used.
    pub fn second_derivative(self, r: f64) -> f64 {
        match self {
            Measure::Rho => {
                (3.0 * r * r - 6.0 * r - 1.0) / (2.0 * r.powf(1.5) * (1.0 + r).powi(3))
            }
            Measure::Delta => {
                let s = delta_side(r);
                let eps = r - 1.0;
                let q = if eps.abs() < DELTA_D2_SERIES_RADIUS {
                    1.0 - 1.25 * eps + (4.0 / 3.0) * eps * eps
                } else {
                    let ln_r = r.ln();
                    let one_minus = 1.0 - r;
                    (r * ln_r * (ln_r + 2.0 - 2.0 * r) + one_minus * one_minus)
                        / (r * one_minus.powi(3))
                };
                -s * delta_power(r) * q
            }
            Measure::Lambda => {
                2.0 * (r.powi(3) - 3.0 * r + 1.0) / (r * r - r + 1.0).powi(3)
            }
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = OvlError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rho" => Ok(Measure::Rho),
            "delta" => Ok(Measure::Delta),
            "lambda" => Ok(Measure::Lambda),
            other => Err(OvlError::Parse(format!("unknown measure `{other}`"))),
        }
    }
}

// +1 below R = 1, -1 at or above it.
fn delta_side(r: f64) -> f64 {
    if r < 1.0 {
        1.0
    } else {
        -1.0
    }
}

/// `ln R / (1 - R)`, which tends to -1 at `R = 1`.
fn ln_over_one_minus(r: f64) -> f64 {
    let eps = r - 1.0;
    if eps.abs() < DELTA_SERIES_RADIUS {
        -1.0 + eps / 2.0 - eps * eps / 3.0
    } else {
        -eps.ln_1p() / eps
    }
}

/// `R^(R/(1-R))`, tending to `1/e` at `R = 1` and to 1 as `R -> 0`.
fn delta_power(r: f64) -> f64 {
    (r * ln_over_one_minus(r)).exp()
}

fn delta_unchecked(r: f64) -> f64 {
    1.0 - (1.0 - r).abs() * delta_power(r)
}

/// The shape ratio `R = alpha1 / alpha2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RatioR(f64);

impl RatioR {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(domain("R", value, "finite and > 0"))
        }
    }

    pub fn from_alphas(alpha1: f64, alpha2: f64) -> Result<Self> {
        Self::new(alpha1 / alpha2)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn rho_of_r(r: RatioR) -> f64 {
    Measure::Rho.value(r.0)
}

pub fn delta_of_r(r: RatioR) -> f64 {
    Measure::Delta.value(r.0)
}

pub fn lambda_of_r(r: RatioR) -> f64 {
    Measure::Lambda.value(r.0)
}

/// The three measures induced by one value of `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvlTriple {
    pub rho: f64,
    pub delta: f64,
    pub lambda: f64,
}

impl OvlTriple {
    pub fn from_ratio(r: RatioR) -> Self {
        Self {
            rho: rho_of_r(r),
            delta: delta_of_r(r),
            lambda: lambda_of_r(r),
        }
    }

    pub fn get(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Rho => self.rho,
            Measure::Delta => self.delta,
            Measure::Lambda => self.lambda,
        }
    }
}

/// Density crossing point of two standardized populations in the transformed
/// variable `t = ln(1 + 1/x)`: `alpha1 alpha2 ln(alpha2/alpha1) / (alpha2 - alpha1)`.
pub fn crossing_point(alpha1: f64, alpha2: f64) -> Option<f64> {
    if alpha1 == alpha2 {
        None
    } else {
        Some(alpha1 * alpha2 * (alpha2 / alpha1).ln() / (alpha2 - alpha1))
    }
}

/// Log density of `T = ln(1 + 1/X)` when `X` has density `d`.
fn ln_density_t(d: &dyn Density, t: f64) -> f64 {
    if !(t > 0.0) {
        return f64::NEG_INFINITY;
    }
    let x = 1.0 / t.exp_m1();
    if !(x > 0.0) || !x.is_finite() {
        return f64::NEG_INFINITY;
    }
    // |dx/dt| = e^t / (e^t - 1)^2
    let ln_jacobian = -t - 2.0 * (-(-t).exp_m1()).ln();
    d.ln_pdf(x) + ln_jacobian
}

fn quadrature_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-10,
        rel: 1e-12,
        max_intervals: 4000,
    }
}

/// Symmetrized Kullback-Leibler divergence `int (f1 - f2) ln(f1/f2) dx`.
pub fn kl_symmetrized(f1: &dyn Density, f2: &dyn Density) -> Result<f64> {
    let integrand = |t: f64| {
        let l1 = ln_density_t(f1, t);
        let l2 = ln_density_t(f2, t);
        let (p1, p2) = (l1.exp(), l2.exp());
        if p1 == 0.0 && p2 == 0.0 {
            return 0.0;
        }
        (p1 - p2) * (l1 - l2)
    };
    let value = integrate_to_infinity(integrand, 0.0, 1.0, quadrature_tolerance())?.value;
    Ok(value.max(0.0))
}

/// Points in `t` where the two transformed densities cross, found by a
/// geometric scan followed by bisection.
fn crossings(f1: &dyn Density, f2: &dyn Density) -> Vec<f64> {
    let diff = |t: f64| ln_density_t(f1, t) - ln_density_t(f2, t);
    let grid: Vec<f64> = (0..=400)
        .map(|k| 1e-8 * 10f64.powf(k as f64 * 12.0 / 400.0))
        .collect();
    let mut out = Vec::new();
    for w in grid.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (dlo, dhi) = (diff(lo), diff(hi));
        if !(dlo.is_finite() && dhi.is_finite()) || dlo == 0.0 || dlo.signum() == dhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if diff(mid).signum() == dlo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// Computes a measure directly from two densities on `(0, inf)`.
///
/// The integrals are taken in `t = ln(1 + 1/x)`, where inverse Lomax
/// densities become exponential. `min(f1, f2)` is integrated piecewise
/// between the density crossing points.
pub fn ovl_by_quadrature(f1: &dyn Density, f2: &dyn Density, measure: Measure) -> Result<f64> {
    let tol = quadrature_tolerance();
    match measure {
        Measure::Rho => {
            let integrand = |t: f64| (0.5 * (ln_density_t(f1, t) + ln_density_t(f2, t))).exp();
            Ok(integrate_to_infinity(integrand, 0.0, 1.0, tol)?.value)
        }
        Measure::Delta => {
            let integrand = |t: f64| ln_density_t(f1, t).min(ln_density_t(f2, t)).exp();
            let mut total = 0.0;
            let mut left = 0.0;
            for c in crossings(f1, f2) {
                total += integrate(integrand, left, c, tol)?.value;
                left = c;
            }
            total += integrate_to_infinity(integrand, left, 1.0, tol)?.value;
            Ok(total)
        }
        Measure::Lambda => Ok(1.0 / (1.0 + kl_symmetrized(f1, f2)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::InverseLomax;

    fn r(v: f64) -> RatioR {
        RatioR::new(v).unwrap()
    }

    #[test]
    fn identity_point() {
        assert_eq!(rho_of_r(r(1.0)), 1.0);
        assert_eq!(delta_of_r(r(1.0)), 1.0);
        assert_eq!(lambda_of_r(r(1.0)), 1.0);
        assert_eq!(
            OvlTriple::from_ratio(r(1.0)),
            OvlTriple {
                rho: 1.0,
                delta: 1.0,
                lambda: 1.0
            }
        );
    }

    #[test]
    fn half_ratio_values() {
        assert!((rho_of_r(r(0.5)) - 0.942_809_041_582_063_4).abs() < 1e-15);
        assert!((delta_of_r(r(0.5)) - 0.75).abs() < 1e-15);
        assert!((delta_of_r(r(2.0)) - 0.75).abs() < 1e-15);
        assert!((lambda_of_r(r(0.5)) - 2.0 / 3.0).abs() < 1e-15);
        assert!((rho_of_r(r(4.0)) - rho_of_r(r(0.25))).abs() < 1e-15);
    }

    #[test]
    fn small_ratio_limit() {
        assert!(lambda_of_r(r(1e-12)) < 1e-11);
        assert!(delta_of_r(r(1e-12)) < 1e-9);
        assert!(rho_of_r(r(1e-12)) < 1e-5);
    }

    #[test]
    fn rejects_nonpositive_ratio() {
        assert!(RatioR::new(0.0).is_err());
        assert!(RatioR::new(-1.0).is_err());
        assert!(RatioR::new(f64::INFINITY).is_err());
        assert!(RatioR::new(f64::NAN).is_err());
    }

    #[test]
    fn delta_is_continuous_through_one() {
        let at_one = delta_of_r(r(1.0));
        for eps in [1e-9, 1e-7, 1e-6, 2e-6, 1e-5] {
            for v in [1.0 - eps, 1.0 + eps] {
                let d = delta_of_r(r(v));
                // 1 - |1 - R| / e to first order
                let approx = 1.0 - (1.0 - v).abs() / std::f64::consts::E;
                assert!((d - approx).abs() < 1e-9, "R={v}");
                assert!(d <= at_one);
            }
        }
    }

    #[test]
    fn quadrature_matches_at_half_and_three() {
        for (a1, a2) in [(0.5, 1.0), (3.0, 1.0)] {
            let f1 = InverseLomax::standard(a1).unwrap();
            let f2 = InverseLomax::standard(a2).unwrap();
            let ratio = r(a1 / a2);
            for m in Measure::ALL {
                let q = ovl_by_quadrature(&f1, &f2, m).unwrap();
                let c = m.value(ratio.value());
                assert!((q - c).abs() < 1e-6, "{m} at R={}: {q} vs {c}", ratio.value());
            }
        }
    }

    #[test]
    fn kl_values() {
        let f1 = InverseLomax::standard(0.5).unwrap();
        let f2 = InverseLomax::standard(1.0).unwrap();
        let j = kl_symmetrized(&f1, &f2).unwrap();
        assert!((j - 0.5).abs() < 1e-6);
        let swapped = kl_symmetrized(&f2, &f1).unwrap();
        assert!((j - swapped).abs() < 1e-12);
        assert_eq!(kl_symmetrized(&f1, &f1).unwrap(), 0.0);
        for m in Measure::ALL {
            assert!((ovl_by_quadrature(&f1, &f1, m).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn crossing_point_agrees_with_scan() {
        let f1 = InverseLomax::standard(0.5).unwrap();
        let f2 = InverseLomax::standard(1.0).unwrap();
        let scanned = crossings(&f1, &f2);
        assert_eq!(scanned.len(), 1);
        let exact = crossing_point(0.5, 1.0).unwrap();
        assert!((scanned[0] - exact).abs() < 1e-10);
        assert_eq!(crossing_point(2.0, 2.0), None);
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
        assert!("gamma".parse::<Measure>().is_err());
    }
}
