//! Model-vs-observation consistency statistics and significance
//! classification.
//!
//! Both `d1_star` and `d_star` divide the inter-model spread by
//! `sqrt(n_models - 1)`. The published equation prints `sqrt(n_models)`,
//! but only the `n_models - 1` divisor reproduces the published tables;
//! report output carries a note to that effect.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::student_t::{t_cdf, t_quantile};

/// Ensemble trend statistics: mean trend over models, inter-model standard
/// deviation of ensemble-mean trends, and the number of models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleStats {
    pub mean_trend: f64,
    pub inter_model_sd: f64,
    pub n_models: u32,
}

impl EnsembleStats {
    pub fn new(mean_trend: f64, inter_model_sd: f64, n_models: u32) -> Result<Self> {
        let s = EnsembleStats {
            mean_trend,
            inter_model_sd,
            n_models,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_models < 2 {
            return Err(Error::Domain(format!(
                "ensemble needs at least 2 models, got {}",
                self.n_models
            )));
        }
        if !(self.inter_model_sd >= 0.0) {
            return Err(Error::Domain(format!(
                "inter-model sd must be non-negative, got {}",
                self.inter_model_sd
            )));
        }
        Ok(())
    }

    /// Standard error of the ensemble-mean trend,
    /// `inter_model_sd / sqrt(n_models - 1)`.
    pub fn spread_se(&self) -> f64 {
        self.inter_model_sd / ((self.n_models - 1) as f64).sqrt()
    }
}

/// Modified two-sample statistic treating both trends as stochastic:
/// `(mean_trend - b0) / sqrt(spread_se^2 + se_adj^2)`.
pub fn d1_star(ensemble: &EnsembleStats, b0: f64, se_adj: f64) -> Result<f64> {
    ensemble.validate()?;
    if !(se_adj >= 0.0) {
        return Err(Error::Domain(format!("se_adj must be non-negative, got {se_adj}")));
    }
    let a = ensemble.spread_se();
    let denom = (a * a + se_adj * se_adj).sqrt();
    if denom == 0.0 {
        return Err(Error::Domain(
            "both variance terms are zero; d1* undefined".into(),
        ));
    }
    Ok((ensemble.mean_trend - b0) / denom)
}

/// Statistic treating the observed trend as non-stochastic:
/// `(mean_trend - b0) / spread_se`. Equals [`d1_star`] with `se_adj = 0`.
pub fn d_star(ensemble: &EnsembleStats, b0: f64) -> Result<f64> {
    ensemble.validate()?;
    if ensemble.inter_model_sd == 0.0 {
        return Err(Error::Domain("inter-model sd is zero; d* undefined".into()));
    }
    Ok((ensemble.mean_trend - b0) / ensemble.spread_se())
}

/// Trend-against-zero statistic, `b0 / se_adj`.
pub fn d1_zero(b0: f64, se_adj: f64) -> Result<f64> {
    if !(se_adj > 0.0) {
        return Err(Error::Domain(format!(
            "se_adj must be positive for the zero-trend test, got {se_adj}"
        )));
    }
    Ok(b0 / se_adj)
}

/// Combined degrees of freedom for the two-variance statistic: with
/// `A = spread_se^2` and `B = se_adj^2`, returns `(A + B) / (A/(n_models-1)
/// + B/(n_eff-2))`.
pub fn welch_df(ensemble: &EnsembleStats, se_adj: f64, n_eff: f64) -> Result<f64> {
    ensemble.validate()?;
    if !(n_eff > 2.0) {
        return Err(Error::Domain(format!("need n_eff > 2, got {n_eff}")));
    }
    if !(se_adj >= 0.0) {
        return Err(Error::Domain(format!("se_adj must be non-negative, got {se_adj}")));
    }
    let a = ensemble.spread_se().powi(2);
    let b = se_adj * se_adj;
    let c = a + b;
    if c == 0.0 {
        return Err(Error::Domain("both variance terms are zero".into()));
    }
    let d = a / (ensemble.n_models as f64 - 1.0) + b / (n_eff - 2.0);
    Ok(c / d)
}

/// Outcome of a significance test at one percentile level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Significance {
    /// `|stat|` exceeds the two-sided threshold (which implies the one-sided
    /// threshold is exceeded too for positive statistics).
    SignificantTwoSided,
    /// `stat` exceeds the one-sided threshold only.
    SignificantOneSided,
    NotSignificant,
}

/// Significance of a statistic at one configured level, under both the
/// one-sided and two-sided conventions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelClassification {
    /// The configured percentile level as a probability (0.95 = 95th).
    pub level: f64,
    /// Human label naming the percentile, e.g. "95th" or "97.5th".
    pub percentile: String,
    /// One-sided threshold `t_quantile(level, df)`.
    pub one_sided_threshold: f64,
    /// Two-sided threshold `t_quantile((1 + level)/2, df)`.
    pub two_sided_threshold: f64,
    pub outcome: Significance,
}

/// Name a percentile level: 0.9 -> "90th", 0.975 -> "97.5th".
pub fn percentile_name(level: f64) -> String {
    format!("{}th", level * 100.0)
}

/// Classify a statistic at each percentile level, reporting the strongest
/// convention under which it is significant.
pub fn classify(stat: f64, df: f64, alpha_levels: &[f64]) -> Result<Vec<LevelClassification>> {
    let mut out = Vec::with_capacity(alpha_levels.len());
    for &level in alpha_levels {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Domain(format!(
                "percentile level must be in (0, 1), got {level}"
            )));
        }
        let one_sided = t_quantile(level, df)?;
        let two_sided = t_quantile(0.5 * (1.0 + level), df)?;
        let outcome = if stat.abs() > two_sided {
            Significance::SignificantTwoSided
        } else if stat > one_sided {
            Significance::SignificantOneSided
        } else {
            Significance::NotSignificant
        };
        out.push(LevelClassification {
            level,
            percentile: percentile_name(level),
            one_sided_threshold: one_sided,
            two_sided_threshold: two_sided,
            outcome,
        });
    }
    Ok(out)
}

/// All consistency statistics for one observation window against one
/// ensemble, with significance classifications for `d1_star`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub d1_star: f64,
    pub d_star: f64,
    pub d1_zero: f64,
    pub adj_df: f64,
    pub se_adj: f64,
    pub n_eff: f64,
    /// Upper-tail probability of `d1_star`: `1 - t_cdf(d1_star, adj_df)`.
    pub one_sided_p: f64,
    pub classifications: Vec<LevelClassification>,
}

/// Assemble a [`TestResult`] from an observed trend, its adjusted standard
/// error, and the effective degrees of freedom behind it.
pub fn evaluate_tests(
    ensemble: &EnsembleStats,
    b0: f64,
    se_adj: f64,
    n_eff: f64,
    alpha_levels: &[f64],
) -> Result<TestResult> {
    let d1 = d1_star(ensemble, b0, se_adj)?;
    let ds = d_star(ensemble, b0)?;
    let dz = d1_zero(b0, se_adj)?;
    let adj_df = welch_df(ensemble, se_adj, n_eff)?;
    let one_sided_p = 1.0 - t_cdf(d1, adj_df)?;
    let classifications = classify(d1, adj_df, alpha_levels)?;
    Ok(TestResult {
        d1_star: d1,
        d_star: ds,
        d1_zero: dz,
        adj_df,
        se_adj,
        n_eff,
        one_sided_p,
        classifications,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2lt() -> EnsembleStats {
        EnsembleStats::new(0.215, 0.092, 19).unwrap()
    }

    fn t2() -> EnsembleStats {
        EnsembleStats::new(0.199, 0.098, 19).unwrap()
    }

    #[test]
    fn d1_star_reference_values() {
        let v = d1_star(&t2lt(), 0.06, 0.138).unwrap();
        assert!((v - 1.1096).abs() < 5e-4, "{v}");
        let v = d1_star(&t2(), 0.043, 0.129).unwrap();
        assert!((v - 1.19).abs() < 5e-3, "{v}");
        // Observed trend equal to the ensemble mean.
        assert_eq!(d1_star(&t2lt(), 0.215, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn d_star_reference_values() {
        let v = d_star(&t2lt(), 0.06).unwrap();
        assert!((v - 7.1479).abs() < 5e-4, "{v}");
        let v = d_star(&t2(), 0.043).unwrap();
        assert!((v - 6.7536).abs() < 5e-4, "{v}");
        assert_eq!(d_star(&t2lt(), 0.215).unwrap(), 0.0);
        let degenerate = EnsembleStats::new(0.2, 0.0, 19).unwrap();
        assert!(d_star(&degenerate, 0.1).is_err());
    }

    #[test]
    fn d1_zero_reference_values() {
        let v = d1_zero(0.0591, 0.1359).unwrap();
        assert!((v - 0.435).abs() < 5e-4, "{v}");
        let v = d1_zero(0.146, 0.0677).unwrap();
        assert!((v - 2.1566).abs() < 5e-4, "{v}");
        assert_eq!(d1_zero(0.0, 0.1).unwrap(), 0.0);
        assert!(d1_zero(0.1, 0.0).is_err());
    }

    #[test]
    fn welch_df_reference_values() {
        let v = welch_df(&t2lt(), 0.138, 14.5).unwrap();
        assert!((v - 12.593).abs() < 5e-3, "{v}");
        let v = welch_df(&t2(), 0.129, 17.1).unwrap();
        assert!((v - 15.176).abs() < 5e-3, "{v}");
        // With no observational variance the df collapses to n_models - 1.
        let v = welch_df(&t2lt(), 0.0, 14.5).unwrap();
        assert!((v - 18.0).abs() < 1e-12, "{v}");
        assert!(welch_df(&t2lt(), 0.138, 2.0).is_err());
    }

    #[test]
    fn classify_reference_cases() {
        let levels = [0.90, 0.95, 0.975];
        // 1999-style outcome: short of the 97.5th percentile.
        let cls = classify(1.13, 13.1, &levels).unwrap();
        assert_eq!(cls[2].percentile, "97.5th");
        assert_eq!(cls[2].outcome, Significance::NotSignificant);
        // 2008-style outcome: beyond even the two-sided 97.5th threshold.
        let cls = classify(2.81, 25.7, &levels).unwrap();
        assert_eq!(cls[2].outcome, Significance::SignificantTwoSided);
        // Zero statistic is significant nowhere.
        let cls = classify(0.0, 20.0, &levels).unwrap();
        assert!(cls.iter().all(|c| c.outcome == Significance::NotSignificant));
    }

    #[test]
    fn classify_one_sided_band() {
        // Between the one-sided and two-sided thresholds.
        let one = t_quantile(0.95, 18.0).unwrap();
        let two = t_quantile(0.975, 18.0).unwrap();
        let stat = 0.5 * (one + two);
        let cls = classify(stat, 18.0, &[0.95]).unwrap();
        assert_eq!(cls[0].outcome, Significance::SignificantOneSided);
        // A negative statistic can only be two-sided significant.
        let cls = classify(-stat, 18.0, &[0.95]).unwrap();
        assert_eq!(cls[0].outcome, Significance::NotSignificant);
    }

    #[test]
    fn percentile_names() {
        assert_eq!(percentile_name(0.90), "90th");
        assert_eq!(percentile_name(0.95), "95th");
        assert_eq!(percentile_name(0.975), "97.5th");
    }

    #[test]
    fn evaluate_tests_composes() {
        let r = evaluate_tests(&t2lt(), 0.06, 0.138, 14.5, &[0.9, 0.95, 0.975]).unwrap();
        assert_eq!(r.d1_star, d1_star(&t2lt(), 0.06, 0.138).unwrap());
        assert_eq!(r.d_star, d_star(&t2lt(), 0.06).unwrap());
        assert_eq!(r.adj_df, welch_df(&t2lt(), 0.138, 14.5).unwrap());
        assert!((r.one_sided_p - (1.0 - 0.856)).abs() < 2e-3);
        assert_eq!(r.classifications.len(), 3);
        // Consistency between the classification and the one-sided p.
        for c in &r.classifications {
            let one_sided_significant = r.one_sided_p < 1.0 - c.level;
            assert_eq!(r.d1_star > c.one_sided_threshold, one_sided_significant);
        }
    }
}
