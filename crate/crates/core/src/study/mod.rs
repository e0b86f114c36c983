//! Seeded Monte Carlo study of the plug-in overlap estimators.
//!
//! Every replication of every cell owns a ChaCha8 stream seeded with
//! [`stream_seed`]. Within a replication the draws are, in order: the SRS
//! sample of population 1, the SRS sample of population 2, then the two
//! ranked-set samples. The Bayes estimator reuses the SRS samples.
//! Replications run in parallel but their outcomes are collected in index
//! order and reduced sequentially, so output does not depend on scheduling.

mod config;
mod output;

pub use config::{Cell, StudyConfig};
pub use output::{
    discrepancy_csv, efficiency_csv, efficiency_discrepancies, emit_figure_data, emit_tables, figure_csv,
    parse_study_csv, study_csv, DiscrepancyRow, EfficiencyKind, Layout, OutputFormat,
    PrintedEfficiency, TableSpec, DISCREPANCY_HEADER, EFFICIENCY_HEADER, FIGURE_HEADER, STUDY_HEADER,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::InverseLomax;
use crate::error::{OvlError, Result};
use crate::estimators::{
    alpha_bayes_jeffreys, alpha_rss, confidence_interval, delta_bias, delta_mse, delta_variance,
    mle_alpha_srs, ratio_estimate, ratio_variance_factor, AlphaEstimate, Design, FormulaSource,
    Method,
};
use crate::overlap::Measure;
use crate::sampling::{draw_rss, draw_srs, RssDesign, SrsDesign};
use crate::stats::splitmix64;

/// Seed of the stream owned by replication `rep` of cell `cell`.
pub fn stream_seed(master: u64, cell: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ cell) ^ rep)
}

/// Whether a row aggregates plain or bias-corrected intervals. Bias and MSE
/// are the same for both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    Plain,
    Corrected,
}

/// Aggregated results for one cell, method and measure. Metrics are `None`
/// for skipped cells (written as `NA`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub method: Method,
    pub measure: Measure,
    #[serde(rename = "R")]
    pub r: f64,
    pub r1: usize,
    pub r2: usize,
    pub m: usize,
    /// Replications that entered the aggregate.
    pub reps: usize,
    pub abs_bias: Option<f64>,
    pub signed_bias: Option<f64>,
    pub mse: Option<f64>,
    pub coverage: Option<f64>,
    pub ci_length: Option<f64>,
    /// Empirical `MSE_SRS / MSE_RSS`, on RSS rows only.
    pub efficiency: Option<f64>,
    pub formula_source: FormulaSource,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCell {
    pub measure: Measure,
    #[serde(rename = "R")]
    pub r: f64,
    pub r1: usize,
    pub r2: usize,
    pub m: usize,
    pub analytic_eff: f64,
    pub empirical_eff: Option<f64>,
}

/// A grid cell (optionally narrowed to one method or measure) that produced
/// no numbers, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub what: String,
    pub method: Option<Method>,
    pub measure: Option<Measure>,
    #[serde(rename = "R")]
    pub r: f64,
    pub r1: usize,
    pub r2: usize,
    pub m: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOutput {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    pub corrected_rows: Vec<StudyRow>,
    pub efficiency: Vec<EfficiencyCell>,
    pub skipped: Vec<SkippedCell>,
}

fn designs_for(method: Method, cell: &Cell) -> Result<[Design; 2]> {
    Ok(match method {
        Method::Rss => [Design::rss(cell.r1, cell.m)?, Design::rss(cell.r2, cell.m)?],
        _ => [Design::srs(cell.r1 * cell.m)?, Design::srs(cell.r2 * cell.m)?],
    })
}

/// `MSE_SRS / MSE_RSS` from the delta-method moments at `n_i = r_i m`.
pub fn analytic_efficiency(
    measure: Measure,
    r: f64,
    r1: usize,
    r2: usize,
    m: usize,
    source: FormulaSource,
) -> Result<f64> {
    let cell = Cell {
        index: 0,
        r,
        r1,
        r2,
        m,
    };
    let srs = delta_mse(measure, r, Method::Srs, &designs_for(Method::Srs, &cell)?, source)?;
    let rss = delta_mse(measure, r, Method::Rss, &designs_for(Method::Rss, &cell)?, source)?;
    Ok(srs / rss)
}

/// Analytic efficiencies for the whole grid; failures become skip markers.
pub fn analytic_cells(cfg: &StudyConfig) -> (Vec<EfficiencyCell>, Vec<SkippedCell>) {
    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    for cell in cfg.cells() {
        for measure in Measure::ALL {
            match analytic_efficiency(measure, cell.r, cell.r1, cell.r2, cell.m, cfg.formula_source)
            {
                Ok(eff) => cells.push(EfficiencyCell {
                    measure,
                    r: cell.r,
                    r1: cell.r1,
                    r2: cell.r2,
                    m: cell.m,
                    analytic_eff: eff,
                    empirical_eff: None,
                }),
                Err(e) => skipped.push(skip(&cell, "efficiency", None, Some(measure), &e)),
            }
        }
    }
    (cells, skipped)
}

fn skip(
    cell: &Cell,
    what: &str,
    method: Option<Method>,
    measure: Option<Measure>,
    err: &OvlError,
) -> SkippedCell {
    SkippedCell {
        what: what.to_string(),
        method,
        measure,
        r: cell.r,
        r1: cell.r1,
        r2: cell.r2,
        m: cell.m,
        reason: err.to_string(),
    }
}

/// One replication's outcome for one method and measure.
#[derive(Debug, Clone, Copy)]
struct Outcome {
    error: f64,
    plain: (bool, f64),
    corrected: Option<(bool, f64)>,
}

type RepOutcome = Vec<Option<[Outcome; 3]>>;

fn method_outcomes(
    a1: &AlphaEstimate,
    a2: &AlphaEstimate,
    truth: &[f64; 3],
    source: FormulaSource,
    level: f64,
) -> Result<[Outcome; 3]> {
    let est = ratio_estimate(a1, a2, source)?;
    let r_hat = est.unbiased;
    let mut out = [Outcome {
        error: 0.0,
        plain: (false, 0.0),
        corrected: None,
    }; 3];
    for (k, measure) in Measure::ALL.into_iter().enumerate() {
        let point = measure.value(r_hat);
        let var = delta_variance(measure, r_hat, est.method, &est.designs, source)?;
        let plain = confidence_interval(point, var, 0.0, level, false)?;
        let corrected = match delta_bias(measure, r_hat, est.method, &est.designs, source) {
            Ok(bias) => {
                let ci = confidence_interval(point, var, bias, level, true)?;
                Some((ci.contains(truth[k]), ci.length()))
            }
            Err(OvlError::Singular { .. }) => None,
            Err(e) => return Err(e),
        };
        out[k] = Outcome {
            error: point - truth[k],
            plain: (plain.contains(truth[k]), plain.length()),
            corrected,
        };
    }
    Ok(out)
}

fn replicate(
    cfg: &StudyConfig,
    cell: &Cell,
    active: &[bool; 3],
    truth: &[f64; 3],
    rep: u64,
) -> Result<RepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.master_seed, cell.index, rep));
    let pop1 = InverseLomax::standard(cell.r * cfg.alpha2)?;
    let pop2 = InverseLomax::standard(cfg.alpha2)?;
    let x1 = draw_srs(&pop1, SrsDesign::new(cell.r1 * cell.m)?, &mut rng);
    let x2 = draw_srs(&pop2, SrsDesign::new(cell.r2 * cell.m)?, &mut rng);
    let y1 = draw_rss(&pop1, RssDesign::new(cell.r1, cell.m)?, &mut rng);
    let y2 = draw_rss(&pop2, RssDesign::new(cell.r2, cell.m)?, &mut rng);
    let level = cfg.level();
    let source = cfg.formula_source;
    let mut out = Vec::with_capacity(3);
    for (k, method) in Method::ALL.into_iter().enumerate() {
        if !active[k] {
            out.push(None);
            continue;
        }
        let (a1, a2) = match method {
            Method::Srs => (mle_alpha_srs(&x1)?, mle_alpha_srs(&x2)?),
            Method::Rss => (alpha_rss(&y1), alpha_rss(&y2)),
            Method::BayesJeffreys => (alpha_bayes_jeffreys(&x1)?, alpha_bayes_jeffreys(&x2)?),
        };
        out.push(Some(method_outcomes(&a1, &a2, truth, source, level)?));
    }
    Ok(out)
}

struct Aggregate {
    reps: usize,
    signed_bias: f64,
    mse: f64,
    coverage: f64,
    ci_length: f64,
}

fn aggregate<'a>(
    outcomes: impl Iterator<Item = &'a Outcome>,
    kind: IntervalKind,
) -> Option<Aggregate> {
    let (mut n, mut err, mut sq, mut hits, mut len) = (0usize, 0.0, 0.0, 0usize, 0.0);
    for o in outcomes {
        let interval = match kind {
            IntervalKind::Plain => Some(o.plain),
            IntervalKind::Corrected => o.corrected,
        };
        let Some((covered, length)) = interval else {
            continue;
        };
        n += 1;
        err += o.error;
        sq += o.error * o.error;
        hits += covered as usize;
        len += length;
    }
    (n > 0).then(|| {
        let nf = n as f64;
        Aggregate {
            reps: n,
            signed_bias: err / nf,
            mse: sq / nf,
            coverage: hits as f64 / nf,
            ci_length: len / nf,
        }
    })
}

fn empty_row(cfg: &StudyConfig, cell: &Cell, method: Method, measure: Measure) -> StudyRow {
    StudyRow {
        method,
        measure,
        r: cell.r,
        r1: cell.r1,
        r2: cell.r2,
        m: cell.m,
        reps: 0,
        abs_bias: None,
        signed_bias: None,
        mse: None,
        coverage: None,
        ci_length: None,
        efficiency: None,
        formula_source: cfg.formula_source,
        seed: cfg.master_seed,
    }
}

fn fill_row(row: &mut StudyRow, agg: Option<Aggregate>) {
    if let Some(a) = agg {
        row.reps = a.reps;
        row.abs_bias = Some(a.signed_bias.abs());
        row.signed_bias = Some(a.signed_bias);
        row.mse = Some(a.mse);
        row.coverage = Some(a.coverage);
        row.ci_length = Some(a.ci_length);
    }
}

struct CellResult {
    rows: Vec<StudyRow>,
    corrected_rows: Vec<StudyRow>,
    skipped: Vec<SkippedCell>,
}

fn run_cell(cfg: &StudyConfig, cell: &Cell) -> Result<CellResult> {
    let mut skipped = Vec::new();
    let mut active = [true; 3];
    for (k, method) in Method::ALL.into_iter().enumerate() {
        let check = designs_for(method, cell)
            .and_then(|d| ratio_variance_factor(method, &d, cfg.formula_source));
        if let Err(e) = check {
            active[k] = false;
            skipped.push(skip(cell, "study", Some(method), None, &e));
        }
    }
    let truth = Measure::ALL.map(|m| m.value(cell.r));

    let reps: Vec<RepOutcome> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| replicate(cfg, cell, &active, &truth, rep))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(9);
    let mut corrected_rows = Vec::with_capacity(9);
    for (k, method) in Method::ALL.into_iter().enumerate() {
        for (j, measure) in Measure::ALL.into_iter().enumerate() {
            let mut plain = empty_row(cfg, cell, method, measure);
            let mut corrected = plain.clone();
            if active[k] {
                let outcomes = || reps.iter().map(|r| &r[k].as_ref().expect("active")[j]);
                fill_row(&mut plain, aggregate(outcomes(), IntervalKind::Plain));
                fill_row(&mut corrected, aggregate(outcomes(), IntervalKind::Corrected));
                if corrected.reps < cfg.replications {
                    skipped.push(SkippedCell {
                        what: "corrected interval".into(),
                        method: Some(method),
                        measure: Some(measure),
                        r: cell.r,
                        r1: cell.r1,
                        r2: cell.r2,
                        m: cell.m,
                        reason: format!(
                            "bias singular in {} of {} replications",
                            cfg.replications - corrected.reps,
                            cfg.replications
                        ),
                    });
                }
            }
            rows.push(plain);
            corrected_rows.push(corrected);
        }
    }
    for table in [&mut rows, &mut corrected_rows] {
        set_empirical_efficiency(table);
    }
    Ok(CellResult {
        rows,
        corrected_rows,
        skipped,
    })
}

/// Rows of one cell are ordered method-major with `Method::ALL` order.
fn set_empirical_efficiency(rows: &mut [StudyRow]) {
    let n = Measure::ALL.len();
    for j in 0..n {
        let srs = rows[j].mse;
        let rss = &mut rows[n + j];
        rss.efficiency = match (srs, rss.mse) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
    }
}

/// Runs the full grid. Errors only on an invalid configuration; per-cell
/// problems are reported as skip markers and `NA` rows.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    cfg.validate()?;
    let (mut efficiency, mut skipped) = analytic_cells(cfg);
    let mut rows = Vec::new();
    let mut corrected_rows = Vec::new();
    for cell in cfg.cells() {
        let result = run_cell(cfg, &cell)?;
        rows.extend(result.rows);
        corrected_rows.extend(result.corrected_rows);
        skipped.extend(result.skipped);
    }
    for eff in &mut efficiency {
        eff.empirical_eff = rows
            .iter()
            .find(|row| {
                row.method == Method::Rss
                    && row.measure == eff.measure
                    && row.r == eff.r
                    && (row.r1, row.r2, row.m) == (eff.r1, eff.r2, eff.m)
            })
            .and_then(|row| row.efficiency);
    }
    Ok(StudyOutput {
        config: cfg.clone(),
        rows,
        corrected_rows,
        efficiency,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(reps: usize) -> StudyConfig {
        StudyConfig {
            r_values: vec![0.5],
            alpha2: 1.0,
            set_sizes: vec![[2, 3]],
            cycles: vec![4],
            replications: reps,
            level_alpha0: 0.05,
            master_seed: 42,
            formula_source: FormulaSource::Derived,
        }
    }

    #[test]
    fn single_replication_mse_is_squared_error() {
        let out = run_study(&config(1)).unwrap();
        assert_eq!(out.rows.len(), 9);
        for row in &out.rows {
            let b = row.signed_bias.unwrap();
            assert_eq!(row.mse.unwrap(), b * b);
            assert_eq!(row.reps, 1);
            let cov = row.coverage.unwrap();
            assert!(cov == 0.0 || cov == 1.0);
        }
    }

    #[test]
    fn rows_respect_invariants() {
        let out = run_study(&config(50)).unwrap();
        for row in out.rows.iter().chain(&out.corrected_rows) {
            let abs = row.abs_bias.unwrap();
            assert!(row.mse.unwrap() >= abs * abs - 1e-15);
            assert!((0.0..=1.0).contains(&row.coverage.unwrap()));
            assert!(row.ci_length.unwrap() >= 0.0);
            assert_eq!(row.efficiency.is_some(), row.method == Method::Rss);
        }
    }

    #[test]
    fn bayes_matches_srs_in_derived_mode() {
        let out = run_study(&config(20)).unwrap();
        for j in 0..3 {
            let (s, b) = (&out.rows[j], &out.rows[6 + j]);
            assert_eq!(s.method, Method::Srs);
            assert_eq!(b.method, Method::BayesJeffreys);
            assert!((s.mse.unwrap() - b.mse.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(run_study(&config(30)).unwrap(), run_study(&config(30)).unwrap());
    }

    #[test]
    fn small_n2_is_skipped_explicitly() {
        let mut cfg = config(5);
        cfg.set_sizes = vec![[2, 2]];
        cfg.cycles = vec![1];
        let out = run_study(&cfg).unwrap();
        let srs = out.rows.iter().filter(|r| r.method == Method::Srs);
        assert!(srs.clone().all(|r| r.mse.is_none() && r.reps == 0));
        assert_eq!(srs.count(), 3);
        assert!(out
            .rows
            .iter()
            .filter(|r| r.method == Method::Rss)
            .all(|r| r.mse.is_some() && r.efficiency.is_none()));
        assert!(out.skipped.iter().any(|s| s.method == Some(Method::BayesJeffreys)));
    }

    #[test]
    fn analytic_efficiency_is_ratio_of_mses() {
        let source = FormulaSource::Derived;
        let eff = analytic_efficiency(Measure::Rho, 0.3, 2, 4, 8, source).unwrap();
        let srs = [Design::srs(16).unwrap(), Design::srs(32).unwrap()];
        let rss = [Design::rss(2, 8).unwrap(), Design::rss(4, 8).unwrap()];
        let a = delta_mse(Measure::Rho, 0.3, Method::Srs, &srs, source).unwrap();
        let b = delta_mse(Measure::Rho, 0.3, Method::Rss, &rss, source).unwrap();
        assert_eq!(eff, a / b);
        assert!(eff > 1.0);
    }

    #[test]
    fn stream_seeds_differ() {
        let a = stream_seed(1, 0, 0);
        assert_ne!(a, stream_seed(1, 0, 1));
        assert_ne!(a, stream_seed(1, 1, 0));
        assert_ne!(a, stream_seed(2, 0, 0));
    }
}
