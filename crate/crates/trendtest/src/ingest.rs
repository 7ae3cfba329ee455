//! Parsers for observational data tables and the analysis configuration.
//!
//! Tables are whitespace-delimited with a header row naming columns; column
//! matching is exact and case-sensitive. The canonical exchange format is a
//! two-column TSV (decimal year, value) with a header, and every parsed
//! series re-emits to it losslessly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MonthlySeries;
use crate::stats::EnsembleStats;

/// Which columns of a whitespace-delimited table hold the series.
///
/// With `month_column` set, the year column holds calendar years and the
/// month column 1-12. Without it, the year column holds decimal years on
/// the monthly grid (the canonical TSV shape).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnTableSpec {
    pub year_column: String,
    pub month_column: Option<String>,
    pub value_column: String,
    pub skip_lines: usize,
}

impl ColumnTableSpec {
    pub fn new(value_column: impl Into<String>) -> Self {
        ColumnTableSpec {
            year_column: "year".into(),
            month_column: None,
            value_column: value_column.into(),
            skip_lines: 0,
        }
    }
}

/// Parse a table into a monthly series ordered by (year, month).
///
/// Rows must form a gap-free consecutive run of months once sorted; a
/// non-numeric value in a selected column is a parse error naming the line.
pub fn parse_table(text: &str, spec: &ColumnTableSpec) -> Result<MonthlySeries> {
    if spec.value_column.is_empty() {
        return Err(Error::Schema(String::new()));
    }
    let mut lines = text.lines().enumerate().skip(spec.skip_lines);

    let (header_line, header) = loop {
        match lines.next() {
            Some((i, l)) if !l.trim().is_empty() => break (i + 1, l),
            Some(_) => continue,
            None => return Err(Error::parse(spec.skip_lines + 1, "no header row")),
        }
    };
    let columns: Vec<&str> = header.split_whitespace().collect();
    let col_index = |name: &str| -> Result<usize> {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::Schema(name.to_string()))
    };
    let year_idx = col_index(&spec.year_column)?;
    let month_idx = spec.month_column.as_deref().map(col_index).transpose()?;
    let value_idx = col_index(&spec.value_column)?;

    let mut rows: Vec<(i64, f64)> = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let need = year_idx.max(value_idx).max(month_idx.unwrap_or(0)) + 1;
        if fields.len() < need {
            return Err(Error::parse(
                line_no,
                format!("expected at least {need} fields, found {}", fields.len()),
            ));
        }
        let month_number = match month_idx {
            Some(mi) => {
                let year: i64 = fields[year_idx].parse().map_err(|_| {
                    Error::parse(line_no, format!("invalid year {:?}", fields[year_idx]))
                })?;
                let month: i64 = fields[mi].parse().map_err(|_| {
                    Error::parse(line_no, format!("invalid month {:?}", fields[mi]))
                })?;
                if !(1..=12).contains(&month) {
                    return Err(Error::parse(line_no, format!("month {month} out of 1..=12")));
                }
                12 * year + month - 1
            }
            None => {
                let decimal: f64 = fields[year_idx].parse().map_err(|_| {
                    Error::parse(line_no, format!("invalid decimal year {:?}", fields[year_idx]))
                })?;
                let months = decimal * 12.0;
                let snapped = months.round();
                if (months - snapped).abs() > 0.25 {
                    return Err(Error::parse(
                        line_no,
                        format!("decimal year {decimal} is not on the monthly grid"),
                    ));
                }
                snapped as i64
            }
        };
        let value: f64 = fields[value_idx].parse().map_err(|_| {
            Error::parse(
                line_no,
                format!(
                    "non-numeric value {:?} in column {:?}",
                    fields[value_idx], spec.value_column
                ),
            )
        })?;
        if !value.is_finite() {
            return Err(Error::parse(
                line_no,
                format!("non-finite value in column {:?}", spec.value_column),
            ));
        }
        rows.push((month_number, value));
    }
    if rows.is_empty() {
        return Err(Error::parse(header_line, "no data rows after header"));
    }

    rows.sort_by_key(|(m, _)| *m);
    for pair in rows.windows(2) {
        let (a, b) = (pair[0].0, pair[1].0);
        if a == b {
            return Err(Error::parse(
                header_line,
                format!("duplicate month {}", month_label(a)),
            ));
        }
        if b != a + 1 {
            return Err(Error::parse(
                header_line,
                format!("gap between {} and {}", month_label(a), month_label(b)),
            ));
        }
    }

    let first = rows[0].0;
    let values = rows.into_iter().map(|(_, v)| v).collect();
    MonthlySeries::new(
        first.div_euclid(12) as i32,
        (first.rem_euclid(12) + 1) as u8,
        values,
        spec.value_column.clone(),
    )
}

fn month_label(month_number: i64) -> String {
    format!(
        "{}-{:02}",
        month_number.div_euclid(12),
        month_number.rem_euclid(12) + 1
    )
}

/// Emit the canonical two-column TSV (decimal year, value) with a header.
/// Parsing the output reproduces the series exactly.
pub fn canonical_tsv(series: &MonthlySeries) -> String {
    let mut out = String::with_capacity(series.len() * 24);
    out.push_str("year\t");
    out.push_str(series.label());
    out.push('\n');
    for (i, v) in series.values().iter().enumerate() {
        out.push_str(&format!("{}\t{}\n", series.decimal_year(i), v));
    }
    out
}

/// Published per-series values the pipeline replicates against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportedRow {
    pub trend: f64,
    pub se: f64,
    pub sd: f64,
    pub r1: f64,
    pub neff: f64,
    pub d1star: f64,
    pub dstar: f64,
    #[serde(default)]
    pub adj_df: Option<f64>,
}

/// Atmospheric level a series belongs to, selecting the matching ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    T2LT,
    T2,
}

/// Infer the level from a series label suffix such as `UAH_T2LT`.
pub fn level_for_label(label: &str) -> Result<Level> {
    if label.contains("T2LT") || label.contains("TLT") {
        Ok(Level::T2LT)
    } else if label.contains("T2") || label.contains("TMT") {
        Ok(Level::T2)
    } else {
        Err(Error::config(
            label,
            "cannot infer level (expected a label containing T2LT/TLT or T2/TMT)",
        ))
    }
}

/// Absolute tolerances for reported-vs-computed comparisons.
///
/// The base tolerance depends on the data family (RSS revisions drifted
/// more than UAH between retrievals), and the coarse-precision fields
/// (`dstar`, `neff`, `adj_df`, reported at fewer digits relative to their
/// magnitude) are widened by `dof_scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub uah: f64,
    pub rss: f64,
    pub dof_scale: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            uah: 0.02,
            rss: 0.20,
            dof_scale: 2.5,
        }
    }
}

impl Tolerances {
    pub fn base_for_label(&self, label: &str) -> f64 {
        if label.starts_with("RSS") {
            self.rss
        } else {
            self.uah
        }
    }

    pub fn for_field(&self, label: &str, field: &str) -> f64 {
        let base = self.base_for_label(label);
        match field {
            "dstar" | "neff" | "adj_df" => base * self.dof_scale,
            _ => base,
        }
    }
}

/// Full analysis configuration with the published defaults baked in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub start_year: i32,
    pub alpha_levels: Vec<f64>,
    pub ensemble_t2lt: EnsembleStats,
    pub ensemble_t2: EnsembleStats,
    /// End year of the window behind the reported rows (the marker position
    /// in plot data).
    pub reported_end_year: i32,
    pub reported_rows: BTreeMap<String, ReportedRow>,
    pub tolerances: Tolerances,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let mut reported_rows = BTreeMap::new();
        reported_rows.insert(
            "UAH_T2LT".to_string(),
            ReportedRow {
                trend: 0.060,
                se: 0.138,
                sd: 0.299,
                r1: 0.891,
                neff: 14.5,
                d1star: 1.11,
                dstar: 7.16,
                adj_df: Some(12.6),
            },
        );
        reported_rows.insert(
            "RSS_T2LT".to_string(),
            ReportedRow {
                trend: 0.166,
                se: 0.132,
                sd: 0.312,
                r1: 0.884,
                neff: 15.6,
                d1star: 0.37,
                dstar: 2.25,
                adj_df: Some(13.7),
            },
        );
        reported_rows.insert(
            "UAH_T2".to_string(),
            ReportedRow {
                trend: 0.043,
                se: 0.129,
                sd: 0.306,
                r1: 0.873,
                neff: 17.1,
                d1star: 1.19,
                dstar: 6.78,
                adj_df: Some(15.2),
            },
        );
        reported_rows.insert(
            "RSS_T2".to_string(),
            ReportedRow {
                trend: 0.142,
                se: 0.129,
                sd: 0.319,
                r1: 0.871,
                neff: 17.3,
                d1star: 0.44,
                dstar: 2.48,
                adj_df: Some(15.4),
            },
        );
        AnalysisConfig {
            start_year: 1979,
            alpha_levels: vec![0.90, 0.95, 0.975],
            ensemble_t2lt: EnsembleStats {
                mean_trend: 0.215,
                inter_model_sd: 0.092,
                n_models: 19,
            },
            ensemble_t2: EnsembleStats {
                mean_trend: 0.199,
                inter_model_sd: 0.098,
                n_models: 19,
            },
            reported_end_year: 1999,
            reported_rows,
            tolerances: Tolerances::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn ensemble_for(&self, level: Level) -> &EnsembleStats {
        match level {
            Level::T2LT => &self.ensemble_t2lt,
            Level::T2 => &self.ensemble_t2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, ens) in [
            ("ensemble_t2lt", &self.ensemble_t2lt),
            ("ensemble_t2", &self.ensemble_t2),
        ] {
            if ens.n_models < 2 {
                return Err(Error::config(key, "n_models must be at least 2"));
            }
            if !(ens.inter_model_sd > 0.0) {
                return Err(Error::config(key, "inter_model_sd must be positive"));
            }
        }
        if self
            .alpha_levels
            .iter()
            .any(|a| !(*a > 0.0 && *a < 1.0))
        {
            return Err(Error::config("alpha_levels", "levels must lie in (0, 1)"));
        }
        if !(self.tolerances.uah > 0.0 && self.tolerances.rss > 0.0 && self.tolerances.dof_scale > 0.0)
        {
            return Err(Error::config("tolerances", "tolerances must be positive"));
        }
        Ok(())
    }
}

/// Overlay document: every key optional, unknown keys rejected by name.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigOverlay {
    start_year: Option<i32>,
    alpha_levels: Option<Vec<f64>>,
    ensemble_t2lt: Option<EnsembleOverlay>,
    ensemble_t2: Option<EnsembleOverlay>,
    reported_end_year: Option<i32>,
    reported_rows: Option<BTreeMap<String, ReportedRow>>,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleOverlay {
    mean_trend: Option<f64>,
    inter_model_sd: Option<f64>,
    n_models: Option<u32>,
}

impl EnsembleOverlay {
    fn apply(&self, base: &mut EnsembleStats) {
        if let Some(v) = self.mean_trend {
            base.mean_trend = v;
        }
        if let Some(v) = self.inter_model_sd {
            base.inter_model_sd = v;
        }
        if let Some(v) = self.n_models {
            base.n_models = v;
        }
    }
}

/// Load a configuration document (JSON), applying the published defaults
/// for every absent key. An empty document yields the default config.
pub fn load_config(text: &str) -> Result<AnalysisConfig> {
    let mut config = AnalysisConfig::default();
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(config);
    }
    let overlay: ConfigOverlay = serde_json::from_str(trimmed)
        .map_err(|e| Error::config("<document>", e.to_string()))?;
    if let Some(v) = overlay.start_year {
        config.start_year = v;
    }
    if let Some(v) = overlay.alpha_levels {
        config.alpha_levels = v;
    }
    if let Some(o) = overlay.ensemble_t2lt {
        o.apply(&mut config.ensemble_t2lt);
    }
    if let Some(o) = overlay.ensemble_t2 {
        o.apply(&mut config.ensemble_t2);
    }
    if let Some(v) = overlay.reported_end_year {
        config.reported_end_year = v;
    }
    if let Some(v) = overlay.reported_rows {
        config.reported_rows = v;
    }
    if let Some(v) = overlay.tolerances {
        config.tolerances = v;
    }
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "\
year mo Globe Trpcs
1979  1 -0.10 -0.20
1979  2 -0.15 -0.25
1979  3 -0.05 -0.10
1979  4  0.00  0.05
";

    #[test]
    fn parses_year_month_table() {
        let spec = ColumnTableSpec {
            year_column: "year".into(),
            month_column: Some("mo".into()),
            value_column: "Trpcs".into(),
            skip_lines: 0,
        };
        let s = parse_table(TABLE, &spec).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.start_year(), 1979);
        assert_eq!(s.start_month(), 1);
        assert_eq!(s.values(), &[-0.20, -0.25, -0.10, 0.05]);
        assert_eq!(s.label(), "Trpcs");
    }

    #[test]
    fn missing_column_is_schema_error() {
        let spec = ColumnTableSpec {
            year_column: "year".into(),
            month_column: Some("mo".into()),
            value_column: "Trpcs2".into(),
            skip_lines: 0,
        };
        let err = parse_table(TABLE, &spec).unwrap_err();
        assert!(matches!(err, Error::Schema(ref c) if c == "Trpcs2"), "{err}");
        // Case-sensitive matching.
        let spec = ColumnTableSpec {
            value_column: "trpcs".into(),
            ..spec
        };
        assert!(parse_table(TABLE, &spec).is_err());
    }

    #[test]
    fn non_numeric_value_names_the_line() {
        let text = "year mo v\n1979 1 0.5\n1979 2 NA\n";
        let spec = ColumnTableSpec {
            year_column: "year".into(),
            month_column: Some("mo".into()),
            value_column: "v".into(),
            skip_lines: 0,
        };
        match parse_table(text, &spec) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rows_are_sorted_and_gaps_rejected() {
        let spec = ColumnTableSpec {
            year_column: "year".into(),
            month_column: Some("mo".into()),
            value_column: "v".into(),
            skip_lines: 0,
        };
        let shuffled = "year mo v\n1979 2 2.0\n1979 1 1.0\n1979 3 3.0\n";
        let s = parse_table(shuffled, &spec).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);

        let gappy = "year mo v\n1979 1 1.0\n1979 3 3.0\n";
        assert!(parse_table(gappy, &spec).is_err());
        let dup = "year mo v\n1979 1 1.0\n1979 1 2.0\n";
        assert!(parse_table(dup, &spec).is_err());
    }

    #[test]
    fn crlf_input_is_accepted() {
        let text = "year mo v\r\n1979 1 0.5\r\n1979 2 0.6\r\n";
        let spec = ColumnTableSpec {
            year_column: "year".into(),
            month_column: Some("mo".into()),
            value_column: "v".into(),
            skip_lines: 0,
        };
        let s = parse_table(text, &spec).unwrap();
        assert_eq!(s.values(), &[0.5, 0.6]);
    }

    #[test]
    fn skip_lines_and_decimal_years() {
        let text = "junk line\nyear v\n1979 0.1\n1979.0833333333333 0.2\n";
        let spec = ColumnTableSpec {
            year_column: "year".into(),
            month_column: None,
            value_column: "v".into(),
            skip_lines: 1,
        };
        let s = parse_table(text, &spec).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.start_month(), 1);
    }

    #[test]
    fn canonical_tsv_round_trips() {
        let s = MonthlySeries::new(
            1979,
            1,
            vec![-0.2, 0.31, 0.007, -1.5e-3],
            "Trpcs",
        )
        .unwrap();
        let tsv = canonical_tsv(&s);
        let spec = ColumnTableSpec::new("Trpcs");
        let back = parse_table(&tsv, &spec).unwrap();
        assert_eq!(back, s);
        assert_eq!(canonical_tsv(&back), tsv);
    }

    #[test]
    fn empty_config_yields_published_defaults() {
        let c = load_config("").unwrap();
        assert_eq!(c, AnalysisConfig::default());
        assert_eq!(c.start_year, 1979);
        assert_eq!(c.alpha_levels, vec![0.90, 0.95, 0.975]);
        assert_eq!(c.ensemble_t2lt.mean_trend, 0.215);
        assert_eq!(c.ensemble_t2lt.inter_model_sd, 0.092);
        assert_eq!(c.ensemble_t2lt.n_models, 19);
        assert_eq!(c.ensemble_t2.mean_trend, 0.199);
        assert_eq!(c.ensemble_t2.inter_model_sd, 0.098);
        assert_eq!(c.ensemble_t2.n_models, 19);
        let brace = load_config("{}").unwrap();
        assert_eq!(brace, c);
    }

    #[test]
    fn config_overrides_single_key() {
        let c = load_config(r#"{"ensemble_t2lt": {"n_models": 10}}"#).unwrap();
        assert_eq!(c.ensemble_t2lt.n_models, 10);
        assert_eq!(c.ensemble_t2lt.mean_trend, 0.215);
        assert_eq!(c.start_year, 1979);
    }

    #[test]
    fn config_rejects_unknown_and_invalid_keys() {
        let err = load_config(r#"{"ensemble_t2lt": {"models": 10}}"#).unwrap_err();
        assert!(err.to_string().contains("models"), "{err}");
        let err = load_config(r#"{"alpha_levels": [0.9, 1.5]}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "alpha_levels"));
        let err = load_config(r#"{"ensemble_t2": {"n_models": 1}}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "ensemble_t2"));
        assert!(load_config("not json").is_err());
    }

    #[test]
    fn level_inference() {
        assert_eq!(level_for_label("UAH_T2LT").unwrap(), Level::T2LT);
        assert_eq!(level_for_label("RSS_T2LT").unwrap(), Level::T2LT);
        assert_eq!(level_for_label("UAH_T2").unwrap(), Level::T2);
        assert_eq!(level_for_label("RSS_TMT").unwrap(), Level::T2);
        assert!(level_for_label("HadCRUT").is_err());
    }

    #[test]
    fn tolerance_selection() {
        let t = Tolerances::default();
        assert_eq!(t.for_field("UAH_T2LT", "d1star"), 0.02);
        assert_eq!(t.for_field("RSS_T2", "d1star"), 0.20);
        assert_eq!(t.for_field("UAH_T2", "dstar"), 0.05);
        assert_eq!(t.for_field("UAH_T2", "adj_df"), 0.05);
        assert_eq!(t.for_field("RSS_T2", "neff"), 0.5);
    }
}
