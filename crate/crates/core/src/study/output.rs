//! CSV/JSON/text emission of study results, figure data and the
//! printed-versus-computed discrepancy report.
//!
//! CSV floats carry 6 significant digits; JSON is lossless.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    analytic_efficiency, run_study, EfficiencyCell, IntervalKind, StudyConfig, StudyOutput,
    StudyRow,
};
use crate::error::{OvlError, Result};
use crate::estimators::{FormulaSource, Method};
use crate::overlap::Measure;
use crate::stats::format_sig6;

pub const STUDY_HEADER: &str = "method,measure,R,r1,r2,m,reps,abs_bias,signed_bias,mse,coverage,ci_length,efficiency,formula_source,seed";
pub const EFFICIENCY_HEADER: &str = "measure,R,r1,r2,m,analytic_eff,empirical_eff";
pub const FIGURE_HEADER: &str = "method,measure,R,r1,r2,m,bias,mse";
pub const DISCREPANCY_HEADER: &str = "table,cell,printed_value,computed_value,abs_diff";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    /// Relative efficiency, `R x r1` rows by measure and `r2` columns.
    EffTable,
    /// `|Bias|`, coverage and interval length by method and measure.
    BiasTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EfficiencyKind {
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableSpec {
    pub layout: Layout,
    pub format: OutputFormat,
    pub efficiency: EfficiencyKind,
    pub interval: IntervalKind,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), format_sig6)
}

pub fn study_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from(STUDY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.measure,
            format_sig6(r.r),
            r.r1,
            r.r2,
            r.m,
            r.reps,
            opt(r.abs_bias),
            opt(r.signed_bias),
            opt(r.mse),
            opt(r.coverage),
            opt(r.ci_length),
            opt(r.efficiency),
            r.formula_source,
            r.seed
        );
    }
    out
}

fn parse_field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| OvlError::Parse(format!("line {line}: bad {name} `{s}`")))
}

fn parse_opt(line: usize, name: &str, s: &str) -> Result<Option<f64>> {
    if s == "NA" {
        Ok(None)
    } else {
        parse_field(line, name, s).map(Some)
    }
}

/// Inverse of [`study_csv`] (up to the 6-digit rounding of floats).
pub fn parse_study_csv(text: &str) -> Result<Vec<StudyRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == STUDY_HEADER => {}
        _ => return Err(OvlError::Parse("missing or unexpected header".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 15 {
            return Err(OvlError::Parse(format!(
                "line {no}: expected 15 fields, found {}",
                f.len()
            )));
        }
        rows.push(StudyRow {
            method: f[0].parse()?,
            measure: f[1].parse()?,
            r: parse_field(no, "R", f[2])?,
            r1: parse_field(no, "r1", f[3])?,
            r2: parse_field(no, "r2", f[4])?,
            m: parse_field(no, "m", f[5])?,
            reps: parse_field(no, "reps", f[6])?,
            abs_bias: parse_opt(no, "abs_bias", f[7])?,
            signed_bias: parse_opt(no, "signed_bias", f[8])?,
            mse: parse_opt(no, "mse", f[9])?,
            coverage: parse_opt(no, "coverage", f[10])?,
            ci_length: parse_opt(no, "ci_length", f[11])?,
            efficiency: parse_opt(no, "efficiency", f[12])?,
            formula_source: f[13].parse()?,
            seed: parse_field(no, "seed", f[14])?,
        });
    }
    Ok(rows)
}

pub fn efficiency_csv(cells: &[EfficiencyCell]) -> String {
    let mut out = String::from(EFFICIENCY_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.measure,
            format_sig6(c.r),
            c.r1,
            c.r2,
            c.m,
            format_sig6(c.analytic_eff),
            opt(c.empirical_eff)
        );
    }
    out
}

/// Long-format bias and MSE records for plotting against `R`.
pub fn figure_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from(FIGURE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.method,
            r.measure,
            format_sig6(r.r),
            r.r1,
            r.r2,
            r.m,
            opt(r.signed_bias),
            opt(r.mse)
        );
    }
    out
}

/// Runs the study for `cfg` (typically with a dense `R` grid) and returns
/// its figure records.
pub fn emit_figure_data(cfg: &StudyConfig) -> Result<String> {
    Ok(figure_csv(&run_study(cfg)?.rows))
}

fn cell_label(measure: Option<Measure>, method: Option<Method>, r: f64, r1: usize, r2: usize, m: usize) -> String {
    let mut s = String::new();
    if let Some(method) = method {
        let _ = write!(s, "method={method} ");
    }
    if let Some(measure) = measure {
        let _ = write!(s, "measure={measure} ");
    }
    let _ = write!(s, "R={} r1={r1} r2={r2} m={m}", format_sig6(r));
    s
}

fn same_cell(r: f64, r1: usize, r2: usize, m: usize, other: (f64, usize, usize, usize)) -> bool {
    (r, r1, r2, m) == other
}

fn check_efficiency_grid(out: &StudyOutput) -> Result<()> {
    let mut missing = Vec::new();
    for cell in out.config.cells() {
        let key = (cell.r, cell.r1, cell.r2, cell.m);
        for measure in Measure::ALL {
            let present = out
                .efficiency
                .iter()
                .any(|c| c.measure == measure && same_cell(c.r, c.r1, c.r2, c.m, key))
                || out.skipped.iter().any(|s| {
                    s.what == "efficiency"
                        && s.measure == Some(measure)
                        && same_cell(s.r, s.r1, s.r2, s.m, key)
                });
            if !present {
                missing.push(cell_label(Some(measure), None, cell.r, cell.r1, cell.r2, cell.m));
            }
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(OvlError::MissingCells(missing))
    }
}

fn check_bias_grid(out: &StudyOutput, rows: &[StudyRow]) -> Result<()> {
    let mut missing = Vec::new();
    for cell in out.config.cells() {
        let key = (cell.r, cell.r1, cell.r2, cell.m);
        for method in Method::ALL {
            for measure in Measure::ALL {
                let present = rows.iter().any(|row| {
                    row.method == method
                        && row.measure == measure
                        && same_cell(row.r, row.r1, row.r2, row.m, key)
                });
                if !present {
                    missing.push(cell_label(
                        Some(measure),
                        Some(method),
                        cell.r,
                        cell.r1,
                        cell.r2,
                        cell.m,
                    ));
                }
            }
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(OvlError::MissingCells(missing))
    }
}

fn text_value(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"))
}

fn efficiency_text(out: &StudyOutput, kind: EfficiencyKind) -> String {
    let cfg = &out.config;
    let r1s: BTreeSet<usize> = cfg.set_sizes.iter().map(|s| s[0]).collect();
    let r2s: BTreeSet<usize> = cfg.set_sizes.iter().map(|s| s[1]).collect();
    let width = 8;
    let mut text = String::new();
    for &m in &cfg.cycles {
        let _ = writeln!(
            text,
            "Relative efficiency MSE(SRS)/MSE(RSS), {} ({} formulas), m = {m}",
            match kind {
                EfficiencyKind::Analytic => "analytic",
                EfficiencyKind::Empirical => "empirical",
            },
            cfg.formula_source
        );
        let mut header = format!("{:<8}{:<6}", "R", "r1");
        for measure in Measure::ALL {
            let _ = write!(header, "| {:<w$}", measure.name(), w = r2s.len() * width);
        }
        let _ = writeln!(text, "{}", header.trim_end());
        let mut sub = format!("{:<8}{:<6}", "", "");
        for _ in Measure::ALL {
            sub.push_str("| ");
            for r2 in &r2s {
                let _ = write!(sub, "{:<w$}", format!("r2={r2}"), w = width);
            }
        }
        let _ = writeln!(text, "{}", sub.trim_end());
        for &r in &cfg.r_values {
            for (i, &r1) in r1s.iter().enumerate() {
                let label = if i == 0 { format_sig6(r) } else { String::new() };
                let mut line = format!("{label:<8}{r1:<6}");
                for measure in Measure::ALL {
                    line.push_str("| ");
                    for &r2 in &r2s {
                        let cell = if !cfg.set_sizes.contains(&[r1, r2]) {
                            "-".to_string()
                        } else {
                            let found = out.efficiency.iter().find(|c| {
                                c.measure == measure && same_cell(c.r, c.r1, c.r2, c.m, (r, r1, r2, m))
                            });
                            text_value(found.and_then(|c| match kind {
                                EfficiencyKind::Analytic => Some(c.analytic_eff),
                                EfficiencyKind::Empirical => c.empirical_eff,
                            }))
                        };
                        let _ = write!(line, "{cell:<width$}");
                    }
                }
                let _ = writeln!(text, "{}", line.trim_end());
            }
        }
        text.push('\n');
    }
    text
}

fn bias_text(out: &StudyOutput, rows: &[StudyRow], interval: IntervalKind) -> String {
    let cfg = &out.config;
    let width = 9;
    let mut text = String::new();
    for &m in &cfg.cycles {
        let _ = writeln!(
            text,
            "|Bias|, coverage ratio and interval length L ({} intervals, {} formulas, {} replications), m = {m}",
            match interval {
                IntervalKind::Plain => "plain",
                IntervalKind::Corrected => "bias-corrected",
            },
            cfg.formula_source,
            cfg.replications
        );
        let mut header = format!("{:<10}", "");
        for method in Method::ALL {
            for measure in Measure::ALL {
                let _ = write!(header, "{:<w$}", format!("{method}/{measure}"), w = 3 * width);
            }
        }
        let _ = writeln!(text, "{}", header.trim_end());
        let mut sub = format!("{:<10}", "(r1,r2)");
        for _ in 0..Method::ALL.len() * Measure::ALL.len() {
            let _ = write!(sub, "{:<width$}{:<width$}{:<width$}", "|Bias|", "ratio", "L");
        }
        let _ = writeln!(text, "{}", sub.trim_end());
        for &r in &cfg.r_values {
            let _ = writeln!(text, "R = {}", format_sig6(r));
            for &[r1, r2] in &cfg.set_sizes {
                let mut line = format!("{:<10}", format!("({r1},{r2})"));
                for method in Method::ALL {
                    for measure in Measure::ALL {
                        let row = rows.iter().find(|row| {
                            row.method == method
                                && row.measure == measure
                                && same_cell(row.r, row.r1, row.r2, row.m, (r, r1, r2, m))
                        });
                        for v in [
                            row.and_then(|x| x.abs_bias),
                            row.and_then(|x| x.coverage),
                            row.and_then(|x| x.ci_length),
                        ] {
                            let _ = write!(line, "{:<width$}", text_value(v));
                        }
                    }
                }
                let _ = writeln!(text, "{}", line.trim_end());
            }
        }
        text.push('\n');
    }
    text
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("study types serialize");
    s.push('\n');
    s
}

/// Renders one table layout. Every grid cell of the configuration must be
/// present, either as a value or as an explicit skip marker.
pub fn emit_tables(out: &StudyOutput, spec: &TableSpec) -> Result<String> {
    match spec.layout {
        Layout::EffTable => {
            check_efficiency_grid(out)?;
            Ok(match spec.format {
                OutputFormat::Csv => efficiency_csv(&out.efficiency),
                OutputFormat::Json => to_json(&out.efficiency),
                OutputFormat::Text => efficiency_text(out, spec.efficiency),
            })
        }
        Layout::BiasTable => {
            let rows = match spec.interval {
                IntervalKind::Plain => &out.rows,
                IntervalKind::Corrected => &out.corrected_rows,
            };
            check_bias_grid(out, rows)?;
            Ok(match spec.format {
                OutputFormat::Csv => study_csv(rows),
                OutputFormat::Json => to_json(rows),
                OutputFormat::Text => bias_text(out, rows, spec.interval),
            })
        }
    }
}

/// A printed relative-efficiency value to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrintedEfficiency {
    pub measure: Measure,
    #[serde(rename = "R")]
    pub r: f64,
    pub r1: usize,
    pub r2: usize,
    pub m: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub table: String,
    pub cell: String,
    pub printed_value: f64,
    pub computed_value: Option<f64>,
    pub abs_diff: Option<f64>,
}

impl DiscrepancyRow {
    pub fn new(table: impl Into<String>, cell: impl Into<String>, printed: f64, computed: Option<f64>) -> Self {
        Self {
            table: table.into(),
            cell: cell.into(),
            printed_value: printed,
            computed_value: computed,
            abs_diff: computed.map(|c| (c - printed).abs()),
        }
    }
}

/// Compares each printed efficiency with the analytic value at its cell.
pub fn efficiency_discrepancies(
    printed: &[PrintedEfficiency],
    source: FormulaSource,
) -> Vec<DiscrepancyRow> {
    printed
        .iter()
        .map(|p| {
            let computed = analytic_efficiency(p.measure, p.r, p.r1, p.r2, p.m, source).ok();
            DiscrepancyRow::new(
                format!("efficiency_m{}", p.m),
                cell_label(Some(p.measure), None, p.r, p.r1, p.r2, p.m),
                p.value,
                computed,
            )
        })
        .collect()
}

pub fn discrepancy_csv(rows: &[DiscrepancyRow]) -> String {
    let mut out = String::from(DISCREPANCY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.table,
            r.cell,
            format_sig6(r.printed_value),
            opt(r.computed_value),
            opt(r.abs_diff)
        );
    }
    out
}
