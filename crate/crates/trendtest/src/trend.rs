//! Ordinary least squares trend fitting on the centered decadal axis.
//!
//! The centered axis makes the design orthogonal, so the normal equations
//! collapse to closed form: `slope = sum(t*y) / sum(t^2)` and the intercept
//! is the value mean. This is numerically exact for this problem; no matrix
//! decomposition is involved.

use crate::error::{Error, Result};
use crate::series::MonthlySeries;
use crate::student_t::t_quantile;

/// An OLS trend fit with the intermediate quantities the analysis reports.
///
/// `slope` is in deg C per decade. `ols_se = sqrt(rss / (n-2) / ssx)` and
/// `series_sd` is the sample (n-1 denominator) standard deviation of the
/// raw values.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendFit {
    pub slope: f64,
    pub intercept: f64,
    pub ols_se: f64,
    pub residuals: Vec<f64>,
    pub n: usize,
    pub ssx: f64,
    pub series_sd: f64,
}

impl TrendFit {
    /// Classical t statistic of the trend against zero, `slope / ols_se`.
    pub fn t_statistic(&self) -> f64 {
        self.slope / self.ols_se
    }
}

/// Fit a least-squares line through the series on its centered decadal axis.
pub fn fit_trend(series: &MonthlySeries) -> Result<TrendFit> {
    let y = series.values();
    let n = y.len();
    if n < 3 {
        return Err(Error::DegenerateInput(format!(
            "trend fit requires at least 3 samples, got {n}"
        )));
    }
    let axis = series.centered_decadal_time();
    let t = axis.values();
    let ssx = axis.ssx();
    if ssx <= 0.0 {
        return Err(Error::DegenerateInput("time axis has zero variance".into()));
    }

    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sty: f64 = t.iter().zip(y).map(|(t, y)| t * y).sum();
    let slope = sty / ssx;
    let intercept = mean_y;

    let residuals: Vec<f64> = y
        .iter()
        .zip(t)
        .map(|(y, t)| y - intercept - slope * t)
        .collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let ols_se = (rss / (n as f64 - 2.0) / ssx).sqrt();

    let var = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum::<f64>() / (n as f64 - 1.0);
    let series_sd = var.sqrt();

    Ok(TrendFit {
        slope,
        intercept,
        ols_se,
        residuals,
        n,
        ssx,
        series_sd,
    })
}

/// Unadjusted OLS confidence interval for the slope:
/// `slope +- t_quantile((1 + level)/2, n - 2) * ols_se`.
pub fn trend_ci(fit: &TrendFit, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    let q = t_quantile(0.5 * (1.0 + level), fit.n as f64 - 2.0)?;
    Ok((fit.slope - q * fit.ols_se, fit.slope + q * fit.ols_se))
}
