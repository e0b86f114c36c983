//! The bundled air-conditioning failure-time example and the fixtures of
//! printed values that computed results are compared against.

use ovl_core::study::{efficiency_discrepancies, DiscrepancyRow, PrintedEfficiency};
use ovl_core::{mle_alpha_srs, alpha_bayes_jeffreys, AlphaEstimate, Design, FormulaSource, Measure, Method};

use crate::dataset::{parse_dataset, Dataset};
use crate::report::{build_report, EstimateReport, Population};
use crate::CliError;

pub const PLANE_8044: &str = include_str!("../data/proschan_8044.txt");
pub const PLANE_7912: &str = include_str!("../data/proschan_7912.txt");
const PRINTED_EFFICIENCY: &str = include_str!("../data/printed_efficiency.csv");
const PRINTED_REALDATA: &str = include_str!("../data/printed_realdata.csv");

/// Nominal ranked-set layout `(r1, r2, m)` matching the sample sizes 12 and
/// 30; the data were not collected by ranked-set sampling, so only the
/// variance factor of this design is used.
pub const NOMINAL_RSS: (usize, usize, usize) = (2, 5, 6);

pub const STANDARDIZED_NOTE: &str = "observations are treated as standardized (beta = 1); \
the reference values alpha1 = 0.0035, alpha2 = 0.0071 (R = 0.493) are not reproducible \
with this or any stated procedure and are listed in the discrepancy report instead";

pub fn bundled() -> Result<(Dataset, Dataset), CliError> {
    Ok((
        parse_dataset("proschan_8044", PLANE_8044)?,
        parse_dataset("proschan_7912", PLANE_7912)?,
    ))
}

/// SRS, nominal-design RSS and Jeffreys-Bayes estimates for two datasets.
pub fn estimates_with_nominal_rss(
    x1: &Dataset,
    x2: &Dataset,
    rss: (usize, usize, usize),
) -> Result<Vec<[AlphaEstimate; 2]>, CliError> {
    let srs = [mle_alpha_srs(&x1.values)?, mle_alpha_srs(&x2.values)?];
    let (r1, r2, m) = rss;
    if r1 * m != x1.values.len() || r2 * m != x2.values.len() {
        return Err(CliError::Usage(format!(
            "nominal RSS design ({r1}, {r2}, {m}) does not match sample sizes {} and {}",
            x1.values.len(),
            x2.values.len()
        )));
    }
    let rss = [
        AlphaEstimate {
            value: srs[0].value,
            method: Method::Rss,
            design: Design::rss(r1, m)?,
        },
        AlphaEstimate {
            value: srs[1].value,
            method: Method::Rss,
            design: Design::rss(r2, m)?,
        },
    ];
    let bayes = [
        alpha_bayes_jeffreys(&x1.values)?,
        alpha_bayes_jeffreys(&x2.values)?,
    ];
    Ok(vec![srs, rss, bayes])
}

pub fn realdata_report(source: FormulaSource, level: f64) -> Result<EstimateReport, CliError> {
    let (x1, x2) = bundled()?;
    let estimates = estimates_with_nominal_rss(&x1, &x2, NOMINAL_RSS)?;
    let populations = [
        Population {
            name: x1.name.clone(),
            n: x1.values.len(),
        },
        Population {
            name: x2.name.clone(),
            n: x2.values.len(),
        },
    ];
    let mut report = build_report(populations, &estimates, source, level)?;
    let (r1, r2, m) = NOMINAL_RSS;
    report.warnings.insert(0, STANDARDIZED_NOTE.to_string());
    report.warnings.insert(
        1,
        format!(
            "rss rows reuse the sample means with the variance factor of a nominal \
             ranked-set design r1 = {r1}, r2 = {r2}, m = {m}"
        ),
    );
    Ok(report)
}

fn fixture_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .skip(1)
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect()))
}

fn fixture_error(file: &str, line: usize) -> CliError {
    CliError::Data {
        name: file.into(),
        line,
        col: 1,
        msg: "malformed fixture line".into(),
    }
}

pub fn printed_efficiency() -> Result<Vec<PrintedEfficiency>, CliError> {
    fixture_lines(PRINTED_EFFICIENCY)
        .map(|(line, f)| {
            let err = || fixture_error("printed_efficiency.csv", line);
            if f.len() != 6 {
                return Err(err());
            }
            Ok(PrintedEfficiency {
                measure: f[0].parse().map_err(|_| err())?,
                r: f[1].parse().map_err(|_| err())?,
                r1: f[2].parse().map_err(|_| err())?,
                r2: f[3].parse().map_err(|_| err())?,
                m: f[4].parse().map_err(|_| err())?,
                value: f[5].parse().map_err(|_| err())?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrintedValue {
    pub quantity: String,
    pub method: Option<Method>,
    pub value: f64,
}

pub fn printed_realdata() -> Result<Vec<PrintedValue>, CliError> {
    fixture_lines(PRINTED_REALDATA)
        .map(|(line, f)| {
            let err = || fixture_error("printed_realdata.csv", line);
            if f.len() != 3 {
                return Err(err());
            }
            let method = match f[1] {
                "-" => None,
                m => Some(m.parse().map_err(|_| err())?),
            };
            Ok(PrintedValue {
                quantity: f[0].to_string(),
                method,
                value: f[2].parse().map_err(|_| err())?,
            })
        })
        .collect()
}

/// The computed counterpart of a printed real-data quantity.
fn computed_value(report: &EstimateReport, p: &PrintedValue) -> Option<f64> {
    let method = report.method(p.method.unwrap_or(Method::Srs))?;
    let quantity = p.quantity.as_str();
    match quantity {
        "alpha1_hat" => return Some(method.alpha[0].value),
        "alpha2_hat" => return Some(method.alpha[1].value),
        "R_hat" => return Some(method.ratio.raw),
        _ => {}
    }
    let (measure, field) = quantity.split_once('_')?;
    let measure: Measure = measure.parse().ok()?;
    let x = method.measures.iter().find(|x| x.measure == measure)?;
    match field {
        "hat" => Some(x.point),
        "bias" => x.bias,
        "var" => x.variance,
        "ci_lo" => x.interval.map(|c| c.lo),
        "ci_hi" => x.interval.map(|c| c.hi),
        _ => None,
    }
}

pub fn realdata_discrepancies(report: &EstimateReport) -> Result<Vec<DiscrepancyRow>, CliError> {
    Ok(printed_realdata()?
        .iter()
        .map(|p| {
            let cell = match p.method {
                Some(m) => format!("{} method={m}", p.quantity),
                None => p.quantity.clone(),
            };
            DiscrepancyRow::new("realdata", cell, p.value, computed_value(report, p))
        })
        .collect())
}

/// Every printed efficiency cell and real-data value against the computed
/// ones.
pub fn full_discrepancy_report(
    source: FormulaSource,
    level: f64,
) -> Result<Vec<DiscrepancyRow>, CliError> {
    let mut rows = efficiency_discrepancies(&printed_efficiency()?, source);
    rows.extend(realdata_discrepancies(&realdata_report(source, level)?)?);
    Ok(rows)
}
