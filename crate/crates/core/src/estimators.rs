//! Shape estimators (SRS maximum likelihood, ranked-set, Jeffreys posterior
//! mode), the ratio estimator, delta-method moments of the plug-in overlap
//! estimates, and normal-approximation intervals.
//!
//! Every variance and bias is available in two flavours ([`FormulaSource`]):
//!
//! * `Derived` propagates `Var(R*)` through `g'` and `g''` of the measure,
//!   with `Var(R*)` taken from exact Gamma/F moments (SRS, Bayes) or the
//!   order-statistic variance of the ranked-set mean (RSS).
//! * `AsPublished` evaluates the printed closed-form expressions as they
//!   stand. They agree with `Derived` for the SRS and RSS variances and
//!   differ elsewhere; callers that show both should surface the gap.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{log_transform, std_normal_quantile};
use crate::error::{domain, OvlError, Result};
use crate::overlap::{Measure, OvlTriple, RatioR};
use crate::sampling::{RankedSample, RssDesign, SrsDesign};
use crate::stats::rss_harmonic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "srs")]
    Srs,
    #[serde(rename = "rss")]
    Rss,
    #[serde(rename = "bayes")]
    BayesJeffreys,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Srs, Method::Rss, Method::BayesJeffreys];

    pub fn name(self) -> &'static str {
        match self {
            Method::Srs => "srs",
            Method::Rss => "rss",
            Method::BayesJeffreys => "bayes",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = OvlError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srs" => Ok(Method::Srs),
            "rss" => Ok(Method::Rss),
            "bayes" | "jeffreys" => Ok(Method::BayesJeffreys),
            other => Err(OvlError::Parse(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum FormulaSource {
    #[default]
    #[serde(rename = "derived")]
    Derived,
    #[serde(rename = "as-published")]
    AsPublished,
}

impl FormulaSource {
    pub fn name(self) -> &'static str {
        match self {
            FormulaSource::Derived => "derived",
            FormulaSource::AsPublished => "as-published",
        }
    }
}

impl fmt::Display for FormulaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormulaSource {
    type Err = OvlError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "derived" => Ok(FormulaSource::Derived),
            "as-published" | "published" => Ok(FormulaSource::AsPublished),
            other => Err(OvlError::Parse(format!("unknown formula source `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    Srs(SrsDesign),
    Rss(RssDesign),
}

impl Design {
    pub fn n(&self) -> usize {
        match self {
            Design::Srs(d) => d.n(),
            Design::Rss(d) => d.n(),
        }
    }

    pub fn srs(n: usize) -> Result<Self> {
        Ok(Design::Srs(SrsDesign::new(n)?))
    }

    pub fn rss(r: usize, m: usize) -> Result<Self> {
        Ok(Design::Rss(RssDesign::new(r, m)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub value: f64,
    pub method: Method,
    pub design: Design,
}

fn sum_log_transform(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(OvlError::EmptySample);
    }
    sample.iter().map(|&x| log_transform(x)).sum()
}

/// Maximum likelihood estimate `(1/n) sum ln(1 + 1/x_j)`.
pub fn mle_alpha_srs(sample: &[f64]) -> Result<AlphaEstimate> {
    let total = sum_log_transform(sample)?;
    let n = sample.len();
    Ok(AlphaEstimate {
        value: total / n as f64,
        method: Method::Srs,
        design: Design::srs(n)?,
    })
}

/// Ranked-set estimate: the mean of the transform over all `r m` retained
/// order statistics.
pub fn alpha_rss(sample: &RankedSample) -> AlphaEstimate {
    let design = sample.design();
    let total: f64 = sample
        .values()
        .iter()
        .map(|&x| log_transform(x).expect("ranked samples hold positive values"))
        .sum();
    AlphaEstimate {
        value: total / design.n() as f64,
        method: Method::Rss,
        design: Design::Rss(design),
    }
}

/// Posterior mode under the Jeffreys prior `1/alpha`:
/// `(1/(n+1)) sum ln(1 + 1/x_j)`.
pub fn alpha_bayes_jeffreys(sample: &[f64]) -> Result<AlphaEstimate> {
    let total = sum_log_transform(sample)?;
    let n = sample.len();
    Ok(AlphaEstimate {
        value: total / (n + 1) as f64,
        method: Method::BayesJeffreys,
        design: Design::srs(n)?,
    })
}

/// Ratio estimate of `R = alpha1 / alpha2` with its unbiased correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub raw: f64,
    pub unbiased: f64,
    /// `Var(R*)` evaluated at `R = R*`; `None` when `n2 < 3`.
    pub variance: Option<f64>,
    pub method: Method,
    pub designs: [Design; 2],
    pub source: FormulaSource,
}

impl RatioEstimate {
    pub fn ratio(&self) -> RatioR {
        RatioR::new(self.unbiased).expect("ratio estimates are positive")
    }
}

fn srs_sizes(method: Method, designs: &[Design; 2]) -> Result<(f64, f64)> {
    match designs {
        [Design::Srs(a), Design::Srs(b)] => Ok((a.n() as f64, b.n() as f64)),
        _ => Err(OvlError::InvalidDesign(format!(
            "{method} estimates need simple random designs"
        ))),
    }
}

fn rss_factor(designs: &[Design; 2]) -> Result<f64> {
    match designs {
        [Design::Rss(a), Design::Rss(b)] => {
            let part = |d: &RssDesign| {
                let r = d.set_size() as f64;
                rss_harmonic(d.set_size()) / (d.cycles() as f64 * r * r)
            };
            Ok(part(a) + part(b))
        }
        _ => Err(OvlError::InvalidDesign(
            "rss estimates need ranked-set designs".into(),
        )),
    }
}

fn require_n2(n2: f64) -> Result<()> {
    if n2 < 3.0 {
        Err(OvlError::DegenerateDesign { n2: n2 as usize })
    } else {
        Ok(())
    }
}

/// `(n1 + n2 - 1) / (n1 (n2 - 2))`, the exact `Var(R*_SRS) / R^2`.
fn srs_factor(n1: f64, n2: f64) -> f64 {
    (n1 + n2 - 1.0) / (n1 * (n2 - 2.0))
}

/// Multiplier turning `R_hat` into the reported `R*`.
pub fn unbiasing_correction(
    method: Method,
    designs: &[Design; 2],
    source: FormulaSource,
) -> Result<f64> {
    match method {
        Method::Rss => {
            rss_factor(designs)?;
            Ok(1.0)
        }
        Method::Srs => {
            let (_, n2) = srs_sizes(method, designs)?;
            // E[R_hat] is infinite for n2 = 1; no correction exists.
            Ok(if n2 < 2.0 { 1.0 } else { (n2 - 1.0) / n2 })
        }
        Method::BayesJeffreys => {
            let (n1, n2) = srs_sizes(method, designs)?;
            if n2 < 2.0 {
                return Ok(1.0);
            }
            Ok(match source {
                FormulaSource::Derived => (n1 + 1.0) * (n2 - 1.0) / (n1 * (n2 + 1.0)),
                FormulaSource::AsPublished => {
                    n1 * (n1 - 1.0) * (n1 + 1.0) / (n2 * n2 * (n2 + 1.0))
                }
            })
        }
    }
}

/// `Var(R*) / R^2` for the method, designs and formula source.
pub fn ratio_variance_factor(
    method: Method,
    designs: &[Design; 2],
    source: FormulaSource,
) -> Result<f64> {
    match method {
        Method::Rss => rss_factor(designs),
        Method::Srs => {
            let (n1, n2) = srs_sizes(method, designs)?;
            require_n2(n2)?;
            Ok(srs_factor(n1, n2))
        }
        Method::BayesJeffreys => {
            let (n1, n2) = srs_sizes(method, designs)?;
            require_n2(n2)?;
            Ok(match source {
                FormulaSource::Derived => srs_factor(n1, n2),
                FormulaSource::AsPublished => {
                    ((n1 - 1.0) / (n2 - 1.0)).powi(2) * srs_factor(n1, n2)
                }
            })
        }
    }
}

pub fn ratio_estimate(
    a1: &AlphaEstimate,
    a2: &AlphaEstimate,
    source: FormulaSource,
) -> Result<RatioEstimate> {
    if a1.method != a2.method {
        return Err(OvlError::MethodMismatch {
            first: a1.method.to_string(),
            second: a2.method.to_string(),
        });
    }
    if !(a1.value > 0.0 && a2.value > 0.0) {
        return Err(domain("alpha estimate", a1.value.min(a2.value), "> 0"));
    }
    let method = a1.method;
    let designs = [a1.design, a2.design];
    let raw = a1.value / a2.value;
    let unbiased = raw * unbiasing_correction(method, &designs, source)?;
    let variance = match ratio_variance_factor(method, &designs, source) {
        Ok(v) => Some(v * unbiased * unbiased),
        Err(OvlError::DegenerateDesign { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RatioEstimate {
        raw,
        unbiased,
        variance,
        method,
        designs,
        source,
    })
}

/// Plug-in estimates of the three measures at `R*`.
pub fn ovl_point(r: &RatioEstimate) -> OvlTriple {
    OvlTriple::from_ratio(r.ratio())
}

fn check_ratio(r: f64) -> Result<()> {
    RatioR::new(r).map(|_| ())
}

/// Factor in front of the printed variance shapes.
fn published_variance_factor(method: Method, designs: &[Design; 2]) -> Result<f64> {
    ratio_variance_factor(method, designs, FormulaSource::AsPublished)
}

/// Printed variance shapes (already containing the `R^2` of `Var(R*)`).
fn published_variance_shape(measure: Measure, r: f64) -> f64 {
    match measure {
        Measure::Rho => r * (1.0 - r).powi(2) / (r + 1.0).powi(4),
        // R^(2/(1-R)) (ln R)^2 / (1-R)^2, written so that R = 1 is finite
        Measure::Delta => (r * Measure::Delta.derivative(r)).powi(2),
        Measure::Lambda => r * r * (1.0 - r * r).powi(2) / (r * r - r + 1.0).powi(4),
    }
}

/// Printed bias factors; the `1/2` is folded in where it is printed.
fn published_bias_factor(measure: Measure, method: Method, designs: &[Design; 2]) -> Result<f64> {
    let base = match method {
        Method::Srs => {
            let (n1, n2) = srs_sizes(method, designs)?;
            require_n2(n2)?;
            srs_factor(n1, n2)
        }
        Method::Rss => rss_factor(designs)?,
        Method::BayesJeffreys => {
            let (n1, n2) = srs_sizes(method, designs)?;
            require_n2(n2)?;
            ((n2 + 2.0) / (n1 + 1.0)).powi(2) * n1 * (n1 + n2 - 1.0)
                / ((n2 - 1.0).powi(2) * (n2 - 2.0))
        }
    };
    let half = match (measure, method) {
        (Measure::Rho, _) => true,
        (Measure::Delta, Method::Srs) => true,
        _ => false,
    };
    Ok(if half { base / 2.0 } else { base })
}

fn published_bias_shape(measure: Measure, r: f64) -> Result<f64> {
    let value = match measure {
        Measure::Rho => r.sqrt() * (3.0 * r * r - 6.0 * r - 1.0) / (1.0 + r).powi(3),
        Measure::Delta => {
            if (r - 1.0).abs() < 1e-6 {
                return Err(OvlError::Singular { ratio: r });
            }
            let ln_r = r.ln();
            let bracket = (r.powf((2.0 * r - 1.0) / (1.0 - r)) * r * (2.0 * r - ln_r - 2.0) * ln_r
                - (r - 1.0).powi(2))
                / (r - 1.0).powi(3);
            let sign = if r < 1.0 { -1.0 } else { 1.0 };
            sign * r * r * bracket
        }
        Measure::Lambda => {
            (r.powi(5) - 3.0 * r.powi(3) - r * r) / (r * r - r + 1.0).powi(2)
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(OvlError::Singular { ratio: r })
    }
}

/// Delta-method variance of `g(R*)` evaluated at `r`.
pub fn delta_variance(
    measure: Measure,
    r: f64,
    method: Method,
    designs: &[Design; 2],
    source: FormulaSource,
) -> Result<f64> {
    check_ratio(r)?;
    match source {
        FormulaSource::Derived => {
            let v = ratio_variance_factor(method, designs, source)?;
            Ok((r * measure.derivative(r)).powi(2) * v)
        }
        FormulaSource::AsPublished => {
            Ok(published_variance_factor(method, designs)? * published_variance_shape(measure, r))
        }
    }
}

/// Second-order delta-method bias of `g(R*)` evaluated at `r`.
pub fn delta_bias(
    measure: Measure,
    r: f64,
    method: Method,
    designs: &[Design; 2],
    source: FormulaSource,
) -> Result<f64> {
    check_ratio(r)?;
    match source {
        FormulaSource::Derived => {
            let v = ratio_variance_factor(method, designs, source)?;
            Ok(0.5 * v * r * r * measure.second_derivative(r))
        }
        FormulaSource::AsPublished => Ok(published_bias_factor(measure, method, designs)?
            * published_bias_shape(measure, r)?),
    }
}

/// `Var + Bias^2` from the two delta-method moments.
pub fn delta_mse(
    measure: Measure,
    r: f64,
    method: Method,
    designs: &[Design; 2],
    source: FormulaSource,
) -> Result<f64> {
    let var = delta_variance(measure, r, method, designs, source)?;
    let bias = delta_bias(measure, r, method, designs, source)?;
    Ok(var + bias * bias)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaMethodReport {
    pub measure: Measure,
    pub point: f64,
    pub variance: f64,
    pub bias: f64,
    pub formula_source: FormulaSource,
}

/// Point estimate, variance and bias of one measure at `R*`.
pub fn delta_report(measure: Measure, est: &RatioEstimate) -> Result<DeltaMethodReport> {
    let r = est.unbiased;
    Ok(DeltaMethodReport {
        measure,
        point: measure.value(r),
        variance: delta_variance(measure, r, est.method, &est.designs, est.source)?,
        bias: delta_bias(measure, r, est.method, &est.designs, est.source)?,
        formula_source: est.source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub bias_corrected: bool,
    pub clamped: bool,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `center +- z_{(1+level)/2} sqrt(variance)`, with `center = point - bias`
/// when `corrected`. Endpoints are clamped to `[0, 1]`.
pub fn confidence_interval(
    point: f64,
    variance: f64,
    bias: f64,
    level: f64,
    corrected: bool,
) -> Result<ConfidenceInterval> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(domain("variance", variance, "finite and >= 0"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(domain("level", level, "in (0, 1)"));
    }
    let z = std_normal_quantile(0.5 + level / 2.0)?;
    let center = if corrected { point - bias } else { point };
    let half = z * variance.sqrt();
    let (raw_lo, raw_hi) = (center - half, center + half);
    let lo = raw_lo.clamp(0.0, 1.0);
    let hi = raw_hi.clamp(0.0, 1.0);
    Ok(ConfidenceInterval {
        lo,
        hi,
        level,
        bias_corrected: corrected,
        clamped: lo != raw_lo || hi != raw_hi,
    })
}
