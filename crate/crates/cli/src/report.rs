//! Estimation reports for two observed samples.

use std::fmt::Write as _;

use ovl_core::estimators::{delta_bias, delta_variance};
use ovl_core::stats::format_sig6;
use ovl_core::{
    confidence_interval, ratio_estimate, AlphaEstimate, ConfidenceInterval, FormulaSource, Measure,
    Method, OvlError, OvlTriple, RatioEstimate, RatioR,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub name: String,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub measure: Measure,
    /// `g(R*)`.
    pub point: f64,
    pub variance: Option<f64>,
    pub bias: Option<f64>,
    pub interval: Option<ConfidenceInterval>,
    pub corrected_interval: Option<ConfidenceInterval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    pub alpha: [AlphaEstimate; 2],
    pub ratio: RatioEstimate,
    /// Measures at the corrected ratio `R*`.
    pub ovl: OvlTriple,
    /// Measures at the raw ratio `R_hat`.
    pub ovl_raw: OvlTriple,
    pub measures: Vec<MeasureReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub populations: [Population; 2],
    pub formula_source: FormulaSource,
    pub level: f64,
    pub methods: Vec<MethodReport>,
    pub warnings: Vec<String>,
}

impl EstimateReport {
    pub fn method(&self, method: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.method == method)
    }
}

fn optional<T>(res: ovl_core::Result<T>) -> Result<Option<T>, CliError> {
    match res {
        Ok(v) => Ok(Some(v)),
        Err(OvlError::DegenerateDesign { .. } | OvlError::Singular { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn method_report(
    alpha: [AlphaEstimate; 2],
    source: FormulaSource,
    level: f64,
) -> Result<MethodReport, CliError> {
    let ratio = ratio_estimate(&alpha[0], &alpha[1], source)?;
    let r = ratio.unbiased;
    let mut measures = Vec::new();
    for measure in Measure::ALL {
        let point = measure.value(r);
        let variance = optional(delta_variance(measure, r, ratio.method, &ratio.designs, source))?;
        let bias = optional(delta_bias(measure, r, ratio.method, &ratio.designs, source))?;
        let interval = variance
            .map(|v| confidence_interval(point, v, 0.0, level, false))
            .transpose()?;
        let corrected_interval = match (variance, bias) {
            (Some(v), Some(b)) => Some(confidence_interval(point, v, b, level, true)?),
            _ => None,
        };
        measures.push(MeasureReport {
            measure,
            point,
            variance,
            bias,
            interval,
            corrected_interval,
        });
    }
    Ok(MethodReport {
        method: ratio.method,
        alpha,
        ovl: OvlTriple::from_ratio(ratio.ratio()),
        ovl_raw: OvlTriple::from_ratio(RatioR::new(ratio.raw)?),
        ratio,
        measures,
    })
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= 1e-9,
        (None, None) => true,
        _ => false,
    }
}

/// Labels of quantities on which the two formula sources differ by more
/// than 1e-9.
fn source_differences(a: &MethodReport, b: &MethodReport) -> Vec<String> {
    let mut out = Vec::new();
    if !close(Some(a.ratio.unbiased), Some(b.ratio.unbiased)) {
        out.push(format!("{} R*", a.method));
    }
    if !close(a.ratio.variance, b.ratio.variance) {
        out.push(format!("{} Var(R*)", a.method));
    }
    for (x, y) in a.measures.iter().zip(&b.measures) {
        let label = |what: &str| format!("{} {} {what}", a.method, x.measure);
        if !close(x.variance, y.variance) {
            out.push(label("variance"));
        }
        if !close(x.bias, y.bias) {
            out.push(label("bias"));
        }
        let lo = |ci: &Option<ConfidenceInterval>| ci.map(|c| c.lo);
        let hi = |ci: &Option<ConfidenceInterval>| ci.map(|c| c.hi);
        if !close(lo(&x.interval), lo(&y.interval)) || !close(hi(&x.interval), hi(&y.interval)) {
            out.push(label("interval"));
        }
    }
    out
}

/// Builds the report for each method's pair of estimates and collects
/// warnings, including a comparison of the two formula sources.
pub fn build_report(
    populations: [Population; 2],
    estimates: &[[AlphaEstimate; 2]],
    source: FormulaSource,
    level: f64,
) -> Result<EstimateReport, CliError> {
    let other = match source {
        FormulaSource::Derived => FormulaSource::AsPublished,
        FormulaSource::AsPublished => FormulaSource::Derived,
    };
    let mut methods = Vec::new();
    let mut warnings = Vec::new();
    let mut differing = Vec::new();
    for alpha in estimates {
        let report = method_report(*alpha, source, level)?;
        let alt = method_report(*alpha, other, level)?;
        if report.ratio.variance.is_none() {
            warnings.push(format!(
                "{}: n2 = {} < 3, so variance, bias and intervals are unavailable",
                report.method,
                alpha[1].design.n()
            ));
        }
        for m in &report.measures {
            if m.variance.is_some() && m.bias.is_none() {
                warnings.push(format!(
                    "{} {}: bias formula is singular at R* = {}",
                    report.method,
                    m.measure,
                    format_sig6(report.ratio.unbiased)
                ));
            }
        }
        differing.extend(source_differences(&report, &alt));
        methods.push(report);
    }
    if !differing.is_empty() {
        warnings.push(format!(
            "as-published and derived formulas differ by more than 1e-9 for: {}",
            differing.join(", ")
        ));
    }
    Ok(EstimateReport {
        populations,
        formula_source: source,
        level,
        methods,
        warnings,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), format_sig6)
}

fn interval_text(ci: &Option<ConfidenceInterval>) -> String {
    match ci {
        Some(c) => format!(
            "[{}, {}]{}",
            format_sig6(c.lo),
            format_sig6(c.hi),
            if c.clamped { "*" } else { "" }
        ),
        None => "NA".into(),
    }
}

pub fn render_text(report: &EstimateReport) -> String {
    let mut s = String::new();
    let [p1, p2] = &report.populations;
    let _ = writeln!(
        s,
        "population 1: {} (n = {}), population 2: {} (n = {})",
        p1.name, p1.n, p2.name, p2.n
    );
    let _ = writeln!(
        s,
        "formulas: {}, level: {}",
        report.formula_source,
        format_sig6(report.level)
    );
    s.push('\n');
    let _ = writeln!(
        s,
        "{:<7} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "method", "alpha1", "alpha2", "R_hat", "R*", "Var(R*)"
    );
    for m in &report.methods {
        let _ = writeln!(
            s,
            "{:<7} {:>12} {:>12} {:>12} {:>12} {:>12}",
            m.method.name(),
            format_sig6(m.alpha[0].value),
            format_sig6(m.alpha[1].value),
            format_sig6(m.ratio.raw),
            format_sig6(m.ratio.unbiased),
            opt(m.ratio.variance)
        );
    }
    s.push('\n');
    let _ = writeln!(
        s,
        "{:<7} {:<7} {:>10} {:>12} {:>12} {:>22} {:>22}",
        "method", "measure", "estimate", "variance", "bias", "interval", "bias-corrected"
    );
    for m in &report.methods {
        for x in &m.measures {
            let _ = writeln!(
                s,
                "{:<7} {:<7} {:>10} {:>12} {:>12} {:>22} {:>22}",
                m.method.name(),
                x.measure.name(),
                format_sig6(x.point),
                opt(x.variance),
                opt(x.bias),
                interval_text(&x.interval),
                interval_text(&x.corrected_interval)
            );
        }
    }
    if report.methods.iter().any(|m| {
        m.measures
            .iter()
            .any(|x| x.interval.is_some_and(|c| c.clamped))
    }) {
        let _ = writeln!(s, "* interval clamped to [0, 1]");
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

pub const REPORT_CSV_HEADER: &str =
    "method,measure,alpha1,alpha2,R_hat,R_star,estimate,variance,bias,ci_lo,ci_hi,ci_corrected_lo,ci_corrected_hi";

pub fn render_csv(report: &EstimateReport) -> String {
    let mut s = String::from(REPORT_CSV_HEADER);
    s.push('\n');
    for m in &report.methods {
        for x in &m.measures {
            let lo = |c: &Option<ConfidenceInterval>| opt(c.map(|c| c.lo));
            let hi = |c: &Option<ConfidenceInterval>| opt(c.map(|c| c.hi));
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                m.method,
                x.measure,
                format_sig6(m.alpha[0].value),
                format_sig6(m.alpha[1].value),
                format_sig6(m.ratio.raw),
                format_sig6(m.ratio.unbiased),
                format_sig6(x.point),
                opt(x.variance),
                opt(x.bias),
                lo(&x.interval),
                hi(&x.interval),
                lo(&x.corrected_interval),
                hi(&x.corrected_interval)
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use ovl_core::{alpha_bayes_jeffreys, mle_alpha_srs};

    fn pops(n1: usize, n2: usize) -> [Population; 2] {
        [
            Population {
                name: "a".into(),
                n: n1,
            },
            Population {
                name: "b".into(),
                n: n2,
            },
        ]
    }

    #[test]
    fn identical_samples() {
        let xs = [3.0, 8.0, 1.5, 20.0, 4.0];
        let a = mle_alpha_srs(&xs).unwrap();
        let report = build_report(pops(5, 5), &[[a, a]], FormulaSource::Derived, 0.95).unwrap();
        let m = &report.methods[0];
        assert_eq!(m.ratio.raw, 1.0);
        assert_eq!(
            m.ovl_raw,
            OvlTriple {
                rho: 1.0,
                delta: 1.0,
                lambda: 1.0
            }
        );
    }

    #[test]
    fn json_round_trip() {
        let x1 = [3.0, 8.0, 1.5, 20.0, 4.0, 0.3];
        let x2 = [0.1, 2.0, 7.5, 1.0];
        let est = [
            [mle_alpha_srs(&x1).unwrap(), mle_alpha_srs(&x2).unwrap()],
            [
                alpha_bayes_jeffreys(&x1).unwrap(),
                alpha_bayes_jeffreys(&x2).unwrap(),
            ],
        ];
        for source in [FormulaSource::Derived, FormulaSource::AsPublished] {
            let report = build_report(pops(6, 4), &est, source, 0.9).unwrap();
            let json = serde_json::to_string(&report).unwrap();
            let back: EstimateReport = serde_json::from_str(&json).unwrap();
            assert_eq!(back, report);
        }
    }

    #[test]
    fn small_second_sample_warns() {
        let a1 = mle_alpha_srs(&[1.0, 2.0, 3.0]).unwrap();
        let a2 = mle_alpha_srs(&[1.0, 5.0]).unwrap();
        let report = build_report(pops(3, 2), &[[a1, a2]], FormulaSource::Derived, 0.95).unwrap();
        assert!(report.warnings.iter().any(|w| w.contains("n2 = 2")));
        assert!(report.methods[0].measures.iter().all(|m| m.interval.is_none()));
        assert!(render_text(&report).contains("NA"));
    }
}
