//! The inverse Lomax family and the reference laws used to check it.
//!
//! With `X ~ InverseLomax(alpha, beta = 1)` the statistic `T = ln(1 + 1/X)`
//! is exponential with mean `alpha`: `P(T > t) = exp(-t / alpha)`. Every
//! estimator in this crate is a function of that transform, and the
//! sampler draws `T` first and maps it back.

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, OvlError, Result};

/// A density on `(0, inf)` exposed through its logarithm.
///
/// `ln_pdf` returns `-inf` outside the support instead of failing so that
/// quadrature routines can evaluate it anywhere.
pub trait Density: Sync {
    fn ln_pdf(&self, x: f64) -> f64;

    fn density(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }
}

/// Inverse Lomax law with shape `alpha` and scale `beta`.
///
/// Density `h(z) = 1/(alpha * beta) * (beta/z)^2 * (1 + beta/z)^(-(1 + 1/alpha))`,
/// distribution function `H(z) = (1 + beta/z)^(-1/alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseLomax {
    alpha: f64,
    beta: f64,
}

impl InverseLomax {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(domain("alpha", alpha, "finite and > 0"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(domain("beta", beta, "finite and > 0"));
        }
        Ok(Self { alpha, beta })
    }

    /// Standardized law (`beta = 1`).
    pub fn standard(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_positive("x", x)?;
        Ok(self.ln_pdf(x).exp())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_positive("x", x)?;
        let u = x / self.beta;
        Ok((-ln_one_plus_recip(u) / self.alpha).exp())
    }

    /// Analytic inverse of [`cdf`](Self::cdf): `beta / (u^(-alpha) - 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain("u", u, "in (0, 1)"));
        }
        Ok(self.beta / (-self.alpha * u.ln()).exp_m1())
    }

    /// Draws `n` values by inverse transform of `U ~ Uniform(0, 1)`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(OvlError::EmptySample);
        }
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }

    /// Draws `n` values through the exponential route: `T ~ Exp(mean alpha)`,
    /// then `X = beta / (e^T - 1)`. Consumes the stream exactly like
    /// [`sample`](Self::sample), so both routes agree draw for draw.
    pub fn sample_via_exponential<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(OvlError::EmptySample);
        }
        Ok((0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                let t = -self.alpha * u.ln();
                (self.beta / t.exp_m1()).max(f64::MIN_POSITIVE)
            })
            .collect())
    }

    /// A single draw. Results below the smallest normal float are clamped so
    /// every draw stays strictly positive.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        (self.beta / (-self.alpha * u.ln()).exp_m1()).max(f64::MIN_POSITIVE)
    }
}

impl Density for InverseLomax {
    fn ln_pdf(&self, x: f64) -> f64 {
        if !(x > 0.0) || !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        let u = x / self.beta;
        -self.alpha.ln() - 2.0 * u.ln() - (1.0 + 1.0 / self.alpha) * ln_one_plus_recip(u)
            - self.beta.ln()
    }
}

/// `ln(1 + 1/u)` without overflow for tiny `u` or cancellation for large `u`.
fn ln_one_plus_recip(u: f64) -> f64 {
    if u >= 1.0 {
        (1.0 / u).ln_1p()
    } else {
        u.ln_1p() - u.ln()
    }
}

fn check_positive(what: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(what, x, "finite and > 0"))
    }
}

/// `ln(1 + 1/x)`, the sufficient statistic of the standardized family.
pub fn log_transform(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(domain("x", x, "> 0"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(ln_one_plus_recip(x))
}

/// Laws with closed-form moments, used as exact oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReferenceLaw {
    Gamma { shape: f64, scale: f64 },
    FisherF { d1: f64, d2: f64 },
    Exponential { mean: f64 },
    StdNormal,
}

impl ReferenceLaw {
    /// `None` where the moment does not exist (F with `d2 <= 2`).
    pub fn mean(&self) -> Option<f64> {
        match *self {
            ReferenceLaw::Gamma { shape, scale } => Some(shape * scale),
            ReferenceLaw::FisherF { d2, .. } if d2 > 2.0 => Some(d2 / (d2 - 2.0)),
            ReferenceLaw::FisherF { .. } => None,
            ReferenceLaw::Exponential { mean } => Some(mean),
            ReferenceLaw::StdNormal => Some(0.0),
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match *self {
            ReferenceLaw::Gamma { shape, scale } => Some(shape * scale * scale),
            ReferenceLaw::FisherF { d1, d2 } if d2 > 4.0 => Some(
                2.0 * d2 * d2 * (d1 + d2 - 2.0) / (d1 * (d2 - 2.0) * (d2 - 2.0) * (d2 - 4.0)),
            ),
            ReferenceLaw::FisherF { .. } => None,
            ReferenceLaw::Exponential { mean } => Some(mean * mean),
            ReferenceLaw::StdNormal => Some(1.0),
        }
    }

    /// Distribution function where it has an elementary closed form.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        match *self {
            ReferenceLaw::Exponential { mean } => {
                Some(if x <= 0.0 { 0.0 } else { -(-x / mean).exp_m1() })
            }
            _ => None,
        }
    }
}

/// Inverse of the standard normal distribution function.
///
/// Wichura's AS 241 (PPND16) rational approximation, relative accuracy about
/// 1e-16. The upper half is computed by reflection so that
/// `q(p) == -q(1 - p)` whenever `1 - p` is exact.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "in (0, 1)"));
    }
    if p > 0.5 {
        Ok(-lower_normal_quantile(1.0 - p))
    } else {
        Ok(lower_normal_quantile(p))
    }
}

// p in (0, 0.5]
fn lower_normal_quantile(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_545_925,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let mut r = (-p.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    -value
}

fn poly(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
