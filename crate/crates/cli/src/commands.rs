use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ovl_core::study::{
    analytic_cells, discrepancy_csv, emit_tables, figure_csv, run_study, study_csv,
    DiscrepancyRow, EfficiencyKind, IntervalKind, Layout, OutputFormat, StudyConfig, StudyOutput,
    TableSpec,
};
use ovl_core::stats::format_sig6;
use ovl_core::{
    alpha_bayes_jeffreys, alpha_rss, draw_rss, draw_srs, mle_alpha_srs, ovl_by_quadrature,
    AlphaEstimate, FormulaSource, InverseLomax, Measure, OvlTriple, RatioR, RssDesign, SrsDesign,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::{parse_dataset, parse_ranked};
use crate::realdata::{full_discrepancy_report, realdata_discrepancies, realdata_report};
use crate::report::{build_report, render_csv, render_text, EstimateReport, Population};
use crate::CliError;

pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3)";

#[derive(Debug, Parser)]
#[command(
    name = "ovl",
    version,
    about = "Overlap coefficients between two inverse Lomax populations"
)]
pub struct Cli {
    /// Seed for sampling; overrides master_seed of a study config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Variance/bias formulas; overrides formula_source of a study config.
    #[arg(long, global = true, value_enum)]
    pub source: Option<SourceArg>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    /// Confidence level of the intervals [default: 0.95].
    #[arg(long, global = true)]
    pub level: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Derived,
    AsPublished,
}

impl From<SourceArg> for FormulaSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Derived => FormulaSource::Derived,
            SourceArg::AsPublished => FormulaSource::AsPublished,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Srs,
    Bayes,
    /// Both inputs are `rank,cycle,value` files.
    Rss,
    /// SRS and Bayes.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    Eff,
    Bias,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EfficiencyArg {
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntervalArg {
    Plain,
    Corrected,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form measures at a ratio R, next to their quadrature values.
    Ovl {
        #[arg(long = "ratio", visible_alias = "r", allow_hyphen_values = true)]
        ratio: f64,
    },
    /// Draw a simple random (--n) or ranked-set (--r, --m) sample.
    Sample {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Estimate the measures from two data files.
    Estimate {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
    },
    /// Run a Monte Carlo study and write its outputs to a directory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Print one table layout for a study config.
    Tables {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = LayoutArg::Eff)]
        layout: LayoutArg,
        #[arg(long, value_enum, default_value_t = EfficiencyArg::Analytic)]
        efficiency: EfficiencyArg,
        #[arg(long, value_enum, default_value_t = IntervalArg::Plain)]
        interval: IntervalArg,
        #[arg(long)]
        replications: Option<usize>,
    },
    /// The bundled air-conditioning failure-time example.
    Realdata {
        /// Print printed-versus-computed values instead of the report.
        #[arg(long)]
        discrepancy: bool,
    },
}

fn level(cli: &Cli) -> Result<f64, CliError> {
    let level = cli.level.unwrap_or(0.95);
    if level > 0.0 && level < 1.0 {
        Ok(level)
    } else {
        Err(CliError::Usage(format!("--level {level} is not in (0, 1)")))
    }
}

fn source(cli: &Cli) -> FormulaSource {
    cli.source.map(Into::into).unwrap_or_default()
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Runs a parsed command line and returns what goes to standard output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Ovl { ratio } => cmd_ovl(cli, *ratio),
        Command::Sample { alpha, beta, n, r, m } => cmd_sample(cli, *alpha, *beta, *n, *r, *m),
        Command::Estimate {
            file1,
            file2,
            method,
        } => {
            let report = cmd_estimate(file1, file2, *method, source(cli), level(cli)?)?;
            Ok(render_report(&report, cli.format))
        }
        Command::Simulate {
            config,
            out,
            replications,
        } => cmd_simulate(cli, config, out, *replications),
        Command::Tables {
            config,
            layout,
            efficiency,
            interval,
            replications,
        } => cmd_tables(cli, config, *layout, *efficiency, *interval, *replications),
        Command::Realdata { discrepancy } => cmd_realdata(cli, *discrepancy),
    }
}

#[derive(Serialize)]
struct OvlComparison {
    #[serde(rename = "R")]
    r: f64,
    closed: OvlTriple,
    quadrature: OvlTriple,
}

fn cmd_ovl(cli: &Cli, ratio: f64) -> Result<String, CliError> {
    let r = RatioR::new(ratio)?;
    let closed = OvlTriple::from_ratio(r);
    let f1 = InverseLomax::standard(r.value())?;
    let f2 = InverseLomax::standard(1.0)?;
    let quadrature = OvlTriple {
        rho: ovl_by_quadrature(&f1, &f2, Measure::Rho)?,
        delta: ovl_by_quadrature(&f1, &f2, Measure::Delta)?,
        lambda: ovl_by_quadrature(&f1, &f2, Measure::Lambda)?,
    };
    Ok(match cli.format {
        FormatArg::Json => json(&OvlComparison {
            r: ratio,
            closed,
            quadrature,
        }),
        FormatArg::Csv | FormatArg::Text => {
            let csv = cli.format == FormatArg::Csv;
            let mut s = if csv {
                "measure,R,closed,quadrature,abs_diff\n".to_string()
            } else {
                format!(
                    "R = {}\n{:<8}{:>12}{:>14}{:>12}\n",
                    format_sig6(ratio),
                    "measure",
                    "closed",
                    "quadrature",
                    "abs_diff"
                )
            };
            for m in Measure::ALL {
                let (c, q) = (closed.get(m), quadrature.get(m));
                let diff = format!("{:.1e}", (c - q).abs());
                if csv {
                    s.push_str(&format!(
                        "{m},{},{},{},{diff}\n",
                        format_sig6(ratio),
                        format_sig6(c),
                        format_sig6(q)
                    ));
                } else {
                    s.push_str(&format!(
                        "{:<8}{:>12}{:>14}{:>12}\n",
                        m.name(),
                        format_sig6(c),
                        format_sig6(q),
                        diff
                    ));
                }
            }
            s
        }
    })
}

fn cmd_sample(
    cli: &Cli,
    alpha: f64,
    beta: f64,
    n: Option<usize>,
    r: Option<usize>,
    m: Option<usize>,
) -> Result<String, CliError> {
    let dist = InverseLomax::new(alpha, beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
    match (n, r, m) {
        (Some(n), None, None) => {
            let xs = draw_srs(&dist, SrsDesign::new(n)?, &mut rng);
            Ok(match cli.format {
                FormatArg::Json => json(&xs),
                _ => xs.iter().map(|x| format!("{x}\n")).collect(),
            })
        }
        (None, Some(r), Some(m)) => {
            let sample = draw_rss(&dist, RssDesign::new(r, m)?, &mut rng);
            Ok(match cli.format {
                FormatArg::Json => {
                    #[derive(Serialize)]
                    struct Triple {
                        rank: usize,
                        cycle: usize,
                        value: f64,
                    }
                    let triples: Vec<Triple> = sample
                        .triples()
                        .map(|(rank, cycle, value)| Triple { rank, cycle, value })
                        .collect();
                    json(&triples)
                }
                _ => {
                    let mut s = String::from("rank,cycle,value\n");
                    for (rank, cycle, value) in sample.triples() {
                        s.push_str(&format!("{rank},{cycle},{value}\n"));
                    }
                    s
                }
            })
        }
        _ => Err(CliError::Usage(
            "give either --n for a simple random sample or both --r and --m for a ranked-set sample"
                .into(),
        )),
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn cmd_estimate(
    file1: &Path,
    file2: &Path,
    method: MethodArg,
    source: FormulaSource,
    level: f64,
) -> Result<EstimateReport, CliError> {
    let (t1, t2) = (read(file1)?, read(file2)?);
    let (name1, name2) = (file_name(file1), file_name(file2));
    let (estimates, populations): (Vec<[AlphaEstimate; 2]>, _) = if method == MethodArg::Rss {
        let s1 = parse_ranked(&name1, &t1)?;
        let s2 = parse_ranked(&name2, &t2)?;
        (
            vec![[alpha_rss(&s1), alpha_rss(&s2)]],
            [
                Population {
                    name: name1,
                    n: s1.design().n(),
                },
                Population {
                    name: name2,
                    n: s2.design().n(),
                },
            ],
        )
    } else {
        let d1 = parse_dataset(&name1, &t1)?;
        let d2 = parse_dataset(&name2, &t2)?;
        let mut est = Vec::new();
        if matches!(method, MethodArg::Srs | MethodArg::All) {
            est.push([mle_alpha_srs(&d1.values)?, mle_alpha_srs(&d2.values)?]);
        }
        if matches!(method, MethodArg::Bayes | MethodArg::All) {
            est.push([
                alpha_bayes_jeffreys(&d1.values)?,
                alpha_bayes_jeffreys(&d2.values)?,
            ]);
        }
        (
            est,
            [
                Population {
                    name: name1,
                    n: d1.values.len(),
                },
                Population {
                    name: name2,
                    n: d2.values.len(),
                },
            ],
        )
    };
    build_report(populations, &estimates, source, level)
}

fn render_report(report: &EstimateReport, format: FormatArg) -> String {
    match format {
        FormatArg::Text => render_text(report),
        FormatArg::Csv => render_csv(report),
        FormatArg::Json => json(report),
    }
}

fn load_config(
    cli: &Cli,
    path: &Path,
    replications: Option<usize>,
) -> Result<StudyConfig, CliError> {
    let mut cfg = StudyConfig::from_json(&read(path)?)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(source) = cli.source {
        cfg.formula_source = source.into();
    }
    if cli.level.is_some() {
        cfg.level_alpha0 = 1.0 - level(cli)?;
    }
    if let Some(reps) = replications {
        cfg.replications = reps;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    rng: &'static str,
    stream_seed: &'static str,
    draw_order: &'static str,
    coverage_ratio: &'static str,
    config: &'a StudyConfig,
    skipped: &'a [ovl_core::study::SkippedCell],
}

const TABLE_NOTE: &str = "ratio = empirical coverage proportion of the interval; \
L = mean interval length; |Bias| = |mean(estimate - true value)|";

fn all_tables(out: &StudyOutput) -> Result<String, CliError> {
    let mut text = String::new();
    for (layout, efficiency, interval) in [
        (Layout::EffTable, EfficiencyKind::Analytic, IntervalKind::Plain),
        (Layout::EffTable, EfficiencyKind::Empirical, IntervalKind::Plain),
        (Layout::BiasTable, EfficiencyKind::Analytic, IntervalKind::Plain),
        (Layout::BiasTable, EfficiencyKind::Analytic, IntervalKind::Corrected),
    ] {
        let spec = TableSpec {
            layout,
            format: OutputFormat::Text,
            efficiency,
            interval,
        };
        text.push_str(&emit_tables(out, &spec)?);
    }
    text.push_str(TABLE_NOTE);
    text.push('\n');
    Ok(text)
}

fn cmd_simulate(
    cli: &Cli,
    config: &Path,
    dir: &Path,
    replications: Option<usize>,
) -> Result<String, CliError> {
    let cfg = load_config(cli, config, replications)?;
    let out = run_study(&cfg)?;
    let discrepancy = full_discrepancy_report(cfg.formula_source, cfg.level())?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let metadata = Metadata {
        tool: "ovl",
        version: env!("CARGO_PKG_VERSION"),
        rng: RNG_NAME,
        stream_seed: "splitmix64(splitmix64(splitmix64(master_seed) ^ cell_index) ^ replication_index)",
        draw_order: "srs population 1, srs population 2, rss population 1, rss population 2; bayes reuses the srs samples",
        coverage_ratio: TABLE_NOTE,
        config: &cfg,
        skipped: &out.skipped,
    };
    let files = [
        ("study.csv", study_csv(&out.rows)),
        ("study_bias_corrected.csv", study_csv(&out.corrected_rows)),
        (
            "efficiency.csv",
            emit_tables(
                &out,
                &TableSpec {
                    layout: Layout::EffTable,
                    format: OutputFormat::Csv,
                    efficiency: EfficiencyKind::Analytic,
                    interval: IntervalKind::Plain,
                },
            )?,
        ),
        ("tables.txt", all_tables(&out)?),
        ("discrepancy.csv", discrepancy_csv(&discrepancy)),
        ("figure_data.csv", figure_csv(&out.rows)),
        ("metadata.json", json(&metadata)),
    ];
    let mut summary = format!(
        "{} cells x {} replications, {} formulas, seed {}\n",
        cfg.cells().len(),
        cfg.replications,
        cfg.formula_source,
        cfg.master_seed
    );
    for (name, contents) in &files {
        let path = dir.join(name);
        write(&path, contents)?;
        summary.push_str(&format!("wrote {}\n", path.display()));
    }
    if !out.skipped.is_empty() {
        summary.push_str(&format!(
            "{} skipped entries (see metadata.json)\n",
            out.skipped.len()
        ));
    }
    Ok(summary)
}

fn cmd_tables(
    cli: &Cli,
    config: &Path,
    layout: LayoutArg,
    efficiency: EfficiencyArg,
    interval: IntervalArg,
    replications: Option<usize>,
) -> Result<String, CliError> {
    let cfg = load_config(cli, config, replications)?;
    let spec = TableSpec {
        layout: match layout {
            LayoutArg::Eff => Layout::EffTable,
            LayoutArg::Bias => Layout::BiasTable,
        },
        format: cli.format.into(),
        efficiency: match efficiency {
            EfficiencyArg::Analytic => EfficiencyKind::Analytic,
            EfficiencyArg::Empirical => EfficiencyKind::Empirical,
        },
        interval: match interval {
            IntervalArg::Plain => IntervalKind::Plain,
            IntervalArg::Corrected => IntervalKind::Corrected,
        },
    };
    let analytic_only =
        spec.layout == Layout::EffTable && spec.efficiency == EfficiencyKind::Analytic;
    let out = if analytic_only {
        let (efficiency, skipped) = analytic_cells(&cfg);
        StudyOutput {
            config: cfg,
            rows: Vec::new(),
            corrected_rows: Vec::new(),
            efficiency,
            skipped,
        }
    } else {
        run_study(&cfg)?
    };
    Ok(emit_tables(&out, &spec)?)
}

fn render_discrepancies(rows: &[DiscrepancyRow], format: FormatArg) -> String {
    match format {
        FormatArg::Json => json(rows),
        _ => discrepancy_csv(rows),
    }
}

fn cmd_realdata(cli: &Cli, discrepancy: bool) -> Result<String, CliError> {
    let report = realdata_report(source(cli), level(cli)?)?;
    if discrepancy {
        return Ok(render_discrepancies(&realdata_discrepancies(&report)?, cli.format));
    }
    Ok(render_report(&report, cli.format))
}
