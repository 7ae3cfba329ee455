//! Command-line interface over the pipeline.
//!
//! Exit codes are part of the stable interface: 0 success, 1 replication
//! failure, 2 input error (parse/schema/config/IO), 3 domain error.
//! `--format human` rounds to 3 significant digits; `tsv` and `json` emit
//! 15 significant digits with identical numeric values.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    monte_carlo_size, replicate_from_reported, replicate_report, rolling_analysis_with,
    EndpointRow, PipelineOptions, ReplicationDiff, SizeReport,
};
use crate::autocorr::{adjust_se, estimate_ar1, Ar1Method, DofFormula};
use crate::error::Error;
use crate::format::{format_full, format_sig, round_sig15};
use crate::ingest::{level_for_label, load_config, AnalysisConfig, ColumnTableSpec, Level};
use crate::series::MonthlySeries;
use crate::stats::EnsembleStats;
use crate::student_t::t_quantile;
use crate::trend::{fit_trend, trend_ci};

const ENSEMBLE_NOTE: &str =
    "ensemble trend statistics are held fixed while the observation window extends";
const DIVISOR_NOTE: &str = "d* and d1* divide the inter-model spread by sqrt(n_models - 1); \
     only that convention reproduces the published tables";

#[derive(Parser)]
#[command(
    name = "trendtest",
    version,
    about = "Trend consistency tests for monthly series with AR1-adjusted standard errors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an OLS trend on one window and report autocorrelation-adjusted errors
    Trend(TrendArgs),
    /// Year-by-year rolling analysis table
    Roll(RollArgs),
    /// Compare computed statistics against reported values (exit 1 on mismatch)
    Replicate(ReplicateArgs),
    /// Plot-ready bars, percentile lines, and reported-value marker
    Plotdata(PlotdataArgs),
    /// Monte Carlo size of the naive vs adjusted zero-trend tests
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Whitespace-delimited input table with a header row
    #[arg(long)]
    input: PathBuf,
    /// Column holding the series values
    #[arg(long)]
    column: String,
    /// Column holding calendar years (or decimal years without --month-column)
    #[arg(long, default_value = "year")]
    year_column: String,
    /// Column holding month numbers 1-12; omit when years are decimal
    #[arg(long)]
    month_column: Option<String>,
    /// Lines to skip before the header row
    #[arg(long, default_value_t = 0)]
    skip_lines: usize,
    /// Series label for config lookups (defaults to the value column name)
    #[arg(long)]
    label: Option<String>,
}

impl InputArgs {
    fn load(&self) -> CliResult<MonthlySeries> {
        let text = read_file(&self.input)?;
        let spec = ColumnTableSpec {
            year_column: self.year_column.clone(),
            month_column: self.month_column.clone(),
            value_column: self.column.clone(),
            skip_lines: self.skip_lines,
        };
        crate::ingest::parse_table(&text, &spec)
            .map_err(|e| (e.exit_code(), format!("{}: {e}", self.input.display())))
    }

    fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.column.clone())
    }
}

#[derive(Args)]
struct EstimatorArgs {
    /// Lag-1 coefficient estimator
    #[arg(long, value_enum, default_value_t = Ar1Cli::Ml)]
    ar1: Ar1Cli,
    /// Effective degrees-of-freedom formula
    #[arg(long, value_enum, default_value_t = NeffCli::Quenouille)]
    neff: NeffCli,
}

impl EstimatorArgs {
    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            ar1_method: self.ar1.into(),
            dof_formula: self.neff.into(),
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Ar1Cli {
    Ml,
    Lag1,
}

impl From<Ar1Cli> for Ar1Method {
    fn from(v: Ar1Cli) -> Self {
        match v {
            Ar1Cli::Ml => Ar1Method::MaximumLikelihood,
            Ar1Cli::Lag1 => Ar1Method::Lag1Sample,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum NeffCli {
    Quenouille,
    Nychka,
}

impl From<NeffCli> for DofFormula {
    fn from(v: NeffCli) -> Self {
        match v {
            NeffCli::Quenouille => DofFormula::Quenouille,
            NeffCli::Nychka => DofFormula::Nychka,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatCli {
    Human,
    Tsv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum NullCli {
    Ensemble,
    Zero,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EnsembleCli {
    Auto,
    T2lt,
    T2,
}

#[derive(Args)]
struct TrendArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Window start year (January); requires --end-year
    #[arg(long)]
    start_year: Option<i32>,
    /// Window end year (December); requires --start-year
    #[arg(long)]
    end_year: Option<i32>,
    #[command(flatten)]
    estimators: EstimatorArgs,
    #[arg(long, value_enum, default_value_t = FormatCli::Human)]
    format: FormatCli,
}

#[derive(Args)]
struct RollArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Configuration document (JSON); defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Window start year; defaults to the configured start year
    #[arg(long)]
    start_year: Option<i32>,
    /// First end year of the rolling range
    #[arg(long)]
    end_from: i32,
    /// Last end year of the rolling range
    #[arg(long)]
    end_to: i32,
    /// Which configured ensemble to test against
    #[arg(long, value_enum, default_value_t = EnsembleCli::Auto)]
    ensemble: EnsembleCli,
    #[command(flatten)]
    estimators: EstimatorArgs,
    #[arg(long, value_enum, default_value_t = FormatCli::Human)]
    format: FormatCli,
}

#[derive(Args)]
struct ReplicateArgs {
    /// Configuration document (JSON); defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Observational data table; omit to recompute from reported inputs only
    #[arg(long, requires = "column")]
    input: Option<PathBuf>,
    /// Column holding the series values
    #[arg(long, requires = "input")]
    column: Option<String>,
    /// Column holding calendar years (or decimal years without --month-column)
    #[arg(long, default_value = "year")]
    year_column: String,
    /// Column holding month numbers 1-12; omit when years are decimal
    #[arg(long)]
    month_column: Option<String>,
    /// Lines to skip before the header row
    #[arg(long, default_value_t = 0)]
    skip_lines: usize,
    /// Series label for config lookups (defaults to the value column name)
    #[arg(long)]
    label: Option<String>,
    /// Window start year; defaults to the configured start year
    #[arg(long)]
    start_year: Option<i32>,
    /// Window end year; defaults to the configured reported end year
    #[arg(long)]
    end_year: Option<i32>,
    #[command(flatten)]
    estimators: EstimatorArgs,
    #[arg(long, value_enum, default_value_t = FormatCli::Human)]
    format: FormatCli,
}

#[derive(Args)]
struct PlotdataArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Configuration document (JSON); defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Null hypothesis: ensemble-mean trend or zero trend
    #[arg(long, value_enum, default_value_t = NullCli::Ensemble)]
    null: NullCli,
    /// Window start year; defaults to the configured start year
    #[arg(long)]
    start_year: Option<i32>,
    /// First end year of the rolling range
    #[arg(long)]
    end_from: i32,
    /// Last end year of the rolling range
    #[arg(long)]
    end_to: i32,
    /// Which configured ensemble to test against
    #[arg(long, value_enum, default_value_t = EnsembleCli::Auto)]
    ensemble: EnsembleCli,
    #[command(flatten)]
    estimators: EstimatorArgs,
    #[arg(long, value_enum, default_value_t = FormatCli::Json)]
    format: FormatCli,
}

#[derive(Args)]
struct SimulateArgs {
    /// Series length in months
    #[arg(long, default_value_t = 252)]
    n: usize,
    /// Lag-1 coefficient of the simulated null series
    #[arg(long)]
    phi: f64,
    /// Number of Monte Carlo replicates
    #[arg(long, default_value_t = 10_000)]
    replicates: usize,
    /// PRNG seed (ChaCha8; replicate i uses stream i+1)
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatCli::Human)]
    format: FormatCli,
}

type CliResult<T> = Result<T, (i32, String)>;

/// Run the CLI against explicit argument and output streams. Returns the
/// process exit code.
pub fn run<I>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                2
            } else {
                let _ = write!(stdout, "{rendered}");
                0
            };
        }
    };
    let outcome = match cli.command {
        Command::Trend(args) => cmd_trend(args, stdout, stderr),
        Command::Roll(args) => cmd_roll(args, stdout, stderr),
        Command::Replicate(args) => cmd_replicate(args, stdout, stderr),
        Command::Plotdata(args) => cmd_plotdata(args, stdout),
        Command::Simulate(args) => cmd_simulate(args, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err((code, message)) => {
            let _ = writeln!(stderr, "error: {message}");
            code
        }
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| (2, format!("{}: {e}", path.display())))
}

fn core<T>(r: crate::error::Result<T>) -> CliResult<T> {
    r.map_err(|e| (e.exit_code(), e.to_string()))
}

fn load_config_arg(path: &Option<PathBuf>) -> CliResult<AnalysisConfig> {
    match path {
        None => Ok(AnalysisConfig::default()),
        Some(p) => {
            let text = read_file(p)?;
            load_config(&text).map_err(|e| (e.exit_code(), format!("{}: {e}", p.display())))
        }
    }
}

fn resolve_ensemble<'c>(
    choice: EnsembleCli,
    label: &str,
    config: &'c AnalysisConfig,
) -> CliResult<&'c EnsembleStats> {
    let level = match choice {
        EnsembleCli::T2lt => Level::T2LT,
        EnsembleCli::T2 => Level::T2,
        EnsembleCli::Auto => level_for_label(label).map_err(|_| {
            (
                2,
                format!("cannot infer the ensemble level from label {label:?}; pass --ensemble"),
            )
        })?,
    };
    Ok(config.ensemble_for(level))
}

fn emit_json<T: Serialize>(value: &T, out: &mut dyn Write) -> CliResult<i32> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| (3, format!("serialization failed: {e}")))?;
    let _ = writeln!(out, "{text}");
    Ok(0)
}

fn cell(v: Option<f64>, human: bool) -> String {
    match v {
        None => "NA".to_string(),
        Some(v) => {
            if human {
                format_sig(v, 3)
            } else {
                format_full(v)
            }
        }
    }
}

fn write_table(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>], human: bool) {
    if human {
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let render = |cells: Vec<String>| {
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{:>1$}", c, widths[i]))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let _ = writeln!(out, "{}", render(header.iter().map(|s| s.to_string()).collect()));
        for row in rows {
            let _ = writeln!(out, "{}", render(row.clone()));
        }
    } else {
        let _ = writeln!(out, "{}", header.join("\t"));
        for row in rows {
            let _ = writeln!(out, "{}", row.join("\t"));
        }
    }
}

/// Percentile column label: 0.9 -> "p90", 0.975 -> "p975".
fn percentile_column(level: f64) -> String {
    format!("p{}", format!("{}", level * 100.0).replace('.', ""))
}

// ---------------------------------------------------------------------------
// trend
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TrendReport {
    label: String,
    n: usize,
    slope: f64,
    ols_se: f64,
    ci_level: f64,
    ci_low: f64,
    ci_high: f64,
    series_sd: f64,
    ssx: f64,
    ar1_method: String,
    r1: Option<f64>,
    n_eff_quenouille: Option<f64>,
    n_eff_nychka: Option<f64>,
    dof_formula: String,
    se_adj: Option<f64>,
    notes: Vec<String>,
}

fn cmd_trend(args: TrendArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let series = args.input.load()?;
    let windowed = match (args.start_year, args.end_year) {
        (Some(a), Some(b)) => core(series.window(a, b))?,
        (None, None) => series,
        _ => {
            return Err((
                2,
                "--start-year and --end-year must be given together".to_string(),
            ))
        }
    };
    let fit = core(fit_trend(&windowed))?;
    let (ci_low, ci_high) = core(trend_ci(&fit, 0.95))?;

    let opts = args.estimators.options();
    let mut notes = Vec::new();
    let scale = windowed.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let resid_max = fit.residuals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let r1 = if resid_max <= 1e-12 * scale.max(1e-300) {
        notes.push(
            "r1 unavailable: degenerate input: residual variance is zero (constant or exact-line \
             series)"
                .to_string(),
        );
        None
    } else {
        match estimate_ar1(&fit.residuals, opts.ar1_method) {
            Ok(est) => Some(est.r1),
            Err(e @ Error::DegenerateInput(_)) => {
                notes.push(format!("r1 unavailable: {e}"));
                None
            }
            Err(e) => return Err((e.exit_code(), e.to_string())),
        }
    };
    let mut opt_dof = |formula: DofFormula| -> Option<f64> {
        let r1 = r1?;
        match formula.effective_dof(fit.n, r1) {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("{} n_eff unavailable: {e}", formula.name()));
                None
            }
        }
    };
    let n_eff_quenouille = opt_dof(DofFormula::Quenouille);
    let n_eff_nychka = opt_dof(DofFormula::Nychka);
    let selected_n_eff = match opts.dof_formula {
        DofFormula::Quenouille => n_eff_quenouille,
        DofFormula::Nychka => n_eff_nychka,
    };
    let se_adj = selected_n_eff.and_then(|n_eff| match adjust_se(fit.ols_se, fit.n, n_eff) {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("se_adj unavailable: {e}"));
            None
        }
    });

    let report = TrendReport {
        label: args.input.label(),
        n: fit.n,
        slope: round_sig15(fit.slope),
        ols_se: round_sig15(fit.ols_se),
        ci_level: 0.95,
        ci_low: round_sig15(ci_low),
        ci_high: round_sig15(ci_high),
        series_sd: round_sig15(fit.series_sd),
        ssx: round_sig15(fit.ssx),
        ar1_method: opts.ar1_method.name().to_string(),
        r1: r1.map(round_sig15),
        n_eff_quenouille: n_eff_quenouille.map(round_sig15),
        n_eff_nychka: n_eff_nychka.map(round_sig15),
        dof_formula: opts.dof_formula.name().to_string(),
        se_adj: se_adj.map(round_sig15),
        notes: notes.clone(),
    };

    match args.format {
        FormatCli::Json => emit_json(&report, out),
        format => {
            let human = format == FormatCli::Human;
            let header = [
                "label",
                "n",
                "slope",
                "ols_se",
                "ci_low",
                "ci_high",
                "series_sd",
                "ssx",
                "r1",
                "n_eff_quenouille",
                "n_eff_nychka",
                "se_adj",
            ];
            let row = vec![
                report.label.clone(),
                report.n.to_string(),
                cell(Some(report.slope), human),
                cell(Some(report.ols_se), human),
                cell(Some(report.ci_low), human),
                cell(Some(report.ci_high), human),
                cell(Some(report.series_sd), human),
                cell(Some(report.ssx), human),
                cell(report.r1, human),
                cell(report.n_eff_quenouille, human),
                cell(report.n_eff_nychka, human),
                cell(report.se_adj, human),
            ];
            write_table(out, &header, &[row], human);
            for note in &notes {
                let _ = writeln!(err, "note: {note}");
            }
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// roll
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Threshold {
    label: String,
    level: f64,
    value: f64,
}

#[derive(Serialize)]
struct RollRow {
    #[serde(flatten)]
    row: EndpointRow,
    thresholds: Vec<Threshold>,
}

#[derive(Serialize)]
struct RollReport {
    label: String,
    start_year: i32,
    ensemble: EnsembleStats,
    ar1_method: String,
    dof_formula: String,
    alpha_levels: Vec<f64>,
    rows: Vec<RollRow>,
    note: String,
}

fn round_row(row: EndpointRow) -> EndpointRow {
    EndpointRow {
        end_year: row.end_year,
        trend: round_sig15(row.trend),
        se_adj: round_sig15(row.se_adj),
        series_sd: round_sig15(row.series_sd),
        r1: round_sig15(row.r1),
        n_eff: round_sig15(row.n_eff),
        d1_star: round_sig15(row.d1_star),
        d_star: round_sig15(row.d_star),
        adj_df: round_sig15(row.adj_df),
        d1_zero: round_sig15(row.d1_zero),
    }
}

fn roll_rows(
    config: &AnalysisConfig,
    rows: Vec<EndpointRow>,
) -> CliResult<Vec<RollRow>> {
    rows.into_iter()
        .map(|row| {
            let thresholds = config
                .alpha_levels
                .iter()
                .map(|&level| {
                    Ok(Threshold {
                        label: percentile_column(level),
                        level,
                        value: round_sig15(core(t_quantile(level, row.adj_df))?),
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(RollRow {
                row: round_row(row),
                thresholds,
            })
        })
        .collect()
}

fn emit_roll_table(
    out: &mut dyn Write,
    config: &AnalysisConfig,
    rows: &[RollRow],
    human: bool,
) {
    let mut header: Vec<String> = [
        "end_year",
        "trend",
        "se_adj",
        "series_sd",
        "r1",
        "n_eff",
        "d1_star",
        "d_star",
        "adj_df",
        "d1_zero",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for level in &config.alpha_levels {
        header.push(percentile_column(*level));
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.row.end_year.to_string(),
                cell(Some(r.row.trend), human),
                cell(Some(r.row.se_adj), human),
                cell(Some(r.row.series_sd), human),
                cell(Some(r.row.r1), human),
                cell(Some(r.row.n_eff), human),
                cell(Some(r.row.d1_star), human),
                cell(Some(r.row.d_star), human),
                cell(Some(r.row.adj_df), human),
                cell(Some(r.row.d1_zero), human),
            ];
            for t in &r.thresholds {
                row.push(cell(Some(t.value), human));
            }
            row
        })
        .collect();
    write_table(out, &header_refs, &table, human);
}

fn cmd_roll(args: RollArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let config = load_config_arg(&args.config)?;
    let series = args.input.load()?;
    let label = args.input.label();
    let ensemble = resolve_ensemble(args.ensemble, &label, &config)?;
    let start_year = args.start_year.unwrap_or(config.start_year);
    let rows = core(rolling_analysis_with(
        &series,
        ensemble,
        start_year,
        args.end_from..=args.end_to,
        args.estimators.options(),
    ))?;
    let rows = roll_rows(&config, rows)?;

    match args.format {
        FormatCli::Json => emit_json(
            &RollReport {
                label,
                start_year,
                ensemble: *ensemble,
                ar1_method: args.estimators.options().ar1_method.name().to_string(),
                dof_formula: args.estimators.options().dof_formula.name().to_string(),
                alpha_levels: config.alpha_levels.clone(),
                rows,
                note: ENSEMBLE_NOTE.to_string(),
            },
            out,
        ),
        format => {
            let human = format == FormatCli::Human;
            emit_roll_table(out, &config, &rows, human);
            if human {
                let _ = writeln!(err, "note: {ENSEMBLE_NOTE}");
            }
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// replicate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ReplicateReport {
    mode: String,
    all_within_tolerance: bool,
    diffs: Vec<ReplicationDiff>,
    notes: Vec<String>,
}

fn cmd_replicate(args: ReplicateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let config = load_config_arg(&args.config)?;

    let (mode, diffs) = match &args.input {
        None => (
            "formula".to_string(),
            core(replicate_from_reported(&config))?,
        ),
        Some(path) => {
            let input = InputArgs {
                input: path.clone(),
                column: args
                    .column
                    .clone()
                    .ok_or_else(|| (2, "--column is required with --input".to_string()))?,
                year_column: args.year_column.clone(),
                month_column: args.month_column.clone(),
                skip_lines: args.skip_lines,
                label: args.label.clone(),
            };
            let series = input.load()?;
            let label = input.label();
            let reported = config.reported_rows.get(&label).ok_or_else(|| {
                (
                    2,
                    format!("no reported row for label {label:?} in the configuration"),
                )
            })?;
            let level = core(level_for_label(&label))?;
            let ensemble = config.ensemble_for(level);
            let start_year = args.start_year.unwrap_or(config.start_year);
            let end_year = args.end_year.unwrap_or(config.reported_end_year);
            let computed = core(crate::analysis::evaluate_endpoint_with(
                &series,
                ensemble,
                start_year,
                end_year,
                args.estimators.options(),
            ))?;
            (
                "emulation".to_string(),
                replicate_report(&computed, &label, reported, &config.tolerances),
            )
        }
    };

    let diffs: Vec<ReplicationDiff> = diffs
        .into_iter()
        .map(|mut d| {
            d.reported = round_sig15(d.reported);
            d.computed = round_sig15(d.computed);
            d.abs_diff = round_sig15(d.abs_diff);
            d
        })
        .collect();
    let all_ok = diffs.iter().all(|d| d.within_tolerance);
    let report = ReplicateReport {
        mode,
        all_within_tolerance: all_ok,
        diffs,
        notes: vec![DIVISOR_NOTE.to_string()],
    };

    match args.format {
        FormatCli::Json => {
            emit_json(&report, out)?;
        }
        format => {
            let human = format == FormatCli::Human;
            let header = [
                "label",
                "field",
                "reported",
                "computed",
                "abs_diff",
                "within_tolerance",
            ];
            let rows: Vec<Vec<String>> = report
                .diffs
                .iter()
                .map(|d| {
                    vec![
                        d.label.clone(),
                        d.field.clone(),
                        cell(Some(d.reported), human),
                        cell(Some(d.computed), human),
                        cell(Some(d.abs_diff), human),
                        d.within_tolerance.to_string(),
                    ]
                })
                .collect();
            write_table(out, &header, &rows, human);
            if human {
                let _ = writeln!(err, "note: {DIVISOR_NOTE}");
            }
            for d in report.diffs.iter().filter(|d| !d.within_tolerance) {
                let _ = writeln!(
                    err,
                    "replication failure: {} {} reported {} computed {}",
                    d.label,
                    d.field,
                    format_sig(d.reported, 3),
                    format_sig(d.computed, 3)
                );
            }
        }
    }
    Ok(if all_ok { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// plotdata
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BarPoint {
    end_year: i32,
    value: f64,
}

#[derive(Serialize)]
struct ThresholdPoint {
    end_year: i32,
    threshold: f64,
}

#[derive(Serialize)]
struct PercentileLine {
    label: String,
    level: f64,
    points: Vec<ThresholdPoint>,
}

#[derive(Serialize)]
struct Marker {
    end_year: i32,
    value: f64,
}

/// Plot-ready dataset: statistic bars per end year, percentile threshold
/// lines sharing the same year axis, and an optional reported-value marker.
#[derive(Serialize)]
struct PlotDataset {
    label: String,
    null_hypothesis: String,
    bars: Vec<BarPoint>,
    lines: Vec<PercentileLine>,
    marker: Option<Marker>,
}

fn cmd_plotdata(args: PlotdataArgs, out: &mut dyn Write) -> CliResult<i32> {
    let config = load_config_arg(&args.config)?;
    let series = args.input.load()?;
    let label = args.input.label();
    let ensemble = resolve_ensemble(args.ensemble, &label, &config)?;
    let start_year = args.start_year.unwrap_or(config.start_year);
    let rows = core(rolling_analysis_with(
        &series,
        ensemble,
        start_year,
        args.end_from..=args.end_to,
        args.estimators.options(),
    ))?;

    let bars: Vec<BarPoint> = rows
        .iter()
        .map(|r| BarPoint {
            end_year: r.end_year,
            value: round_sig15(match args.null {
                NullCli::Ensemble => r.d1_star,
                NullCli::Zero => r.d1_zero,
            }),
        })
        .collect();
    let lines = config
        .alpha_levels
        .iter()
        .map(|&level| {
            let points = rows
                .iter()
                .map(|r| {
                    Ok(ThresholdPoint {
                        end_year: r.end_year,
                        threshold: round_sig15(core(t_quantile(level, r.adj_df))?),
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(PercentileLine {
                label: percentile_column(level),
                level,
                points,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let marker = match args.null {
        NullCli::Ensemble => config.reported_rows.get(&label).map(|row| Marker {
            end_year: config.reported_end_year,
            value: round_sig15(row.d1star),
        }),
        NullCli::Zero => None,
    };
    let dataset = PlotDataset {
        label,
        null_hypothesis: match args.null {
            NullCli::Ensemble => "ensemble",
            NullCli::Zero => "zero",
        }
        .to_string(),
        bars,
        lines,
        marker,
    };

    match args.format {
        FormatCli::Json => emit_json(&dataset, out),
        format => {
            let human = format == FormatCli::Human;
            let header = ["kind", "label", "end_year", "value"];
            let mut rows: Vec<Vec<String>> = Vec::new();
            for b in &dataset.bars {
                rows.push(vec![
                    "bar".to_string(),
                    dataset.label.clone(),
                    b.end_year.to_string(),
                    cell(Some(b.value), human),
                ]);
            }
            for line in &dataset.lines {
                for p in &line.points {
                    rows.push(vec![
                        "line".to_string(),
                        line.label.clone(),
                        p.end_year.to_string(),
                        cell(Some(p.threshold), human),
                    ]);
                }
            }
            if let Some(m) = &dataset.marker {
                rows.push(vec![
                    "marker".to_string(),
                    "reported".to_string(),
                    m.end_year.to_string(),
                    cell(Some(m.value), human),
                ]);
            }
            write_table(out, &header, &rows, human);
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs, out: &mut dyn Write) -> CliResult<i32> {
    let report = core(monte_carlo_size(args.n, args.phi, args.replicates, args.seed))?;
    let report = SizeReport {
        naive_rate: round_sig15(report.naive_rate),
        adjusted_rate: round_sig15(report.adjusted_rate),
        ..report
    };
    match args.format {
        FormatCli::Json => emit_json(&report, out),
        format => {
            let human = format == FormatCli::Human;
            let header = [
                "n",
                "phi",
                "replicates",
                "seed",
                "alpha",
                "naive_rate",
                "adjusted_rate",
                "adjusted_skipped",
            ];
            let row = vec![
                report.n.to_string(),
                cell(Some(report.phi), human),
                report.replicates.to_string(),
                report.seed.to_string(),
                cell(Some(report.alpha), human),
                cell(Some(report.naive_rate), human),
                cell(Some(report.adjusted_rate), human),
                report.adjusted_skipped.to_string(),
            ];
            write_table(out, &header, &[row], human);
            Ok(0)
        }
    }
}
