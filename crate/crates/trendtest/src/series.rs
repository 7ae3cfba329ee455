//! Monthly time series with calendar anchoring, windowing, and the
//! mean-centered decadal time axis used by all regressions.

use crate::error::{Error, Result};

/// A monthly anomaly series anchored to a calendar month.
///
/// Sample `i` falls at calendar time `start_year + (start_month - 1 + i) / 12`.
/// Construction rejects empty input and any non-finite value; no
/// missing-value sentinel survives into a [`MonthlySeries`]. Values are
/// immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySeries {
    start_year: i32,
    start_month: u8,
    values: Vec<f64>,
    label: String,
}

impl MonthlySeries {
    pub fn new(
        start_year: i32,
        start_month: u8,
        values: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(1..=12).contains(&start_month) {
            return Err(Error::Domain(format!(
                "start_month must be 1..=12, got {start_month}"
            )));
        }
        if values.is_empty() {
            return Err(Error::DegenerateInput("series has no values".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value {} at sample {i}",
                values[i]
            )));
        }
        Ok(MonthlySeries {
            start_year,
            start_month,
            values,
            label: label.into(),
        })
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn start_month(&self) -> u8 {
        self.start_month
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Absolute month number of sample `i` (months since year 0, exact
    /// integer arithmetic; the decade conversion happens only in
    /// [`centered_decadal_time`](Self::centered_decadal_time)).
    fn month_number(&self, i: usize) -> i64 {
        12 * self.start_year as i64 + (self.start_month as i64 - 1) + i as i64
    }

    /// Calendar time of sample `i` in decimal years.
    pub fn decimal_year(&self, i: usize) -> f64 {
        self.month_number(i) as f64 / 12.0
    }

    /// Restrict the series to January `start_year` through December
    /// `end_year` inclusive.
    ///
    /// Partial years are rejected rather than truncated: the source must
    /// cover the full requested window or a [`Error::Range`] is returned.
    pub fn window(&self, start_year: i32, end_year: i32) -> Result<MonthlySeries> {
        if start_year > end_year {
            return Err(Error::Range(format!(
                "start year {start_year} is after end year {end_year}"
            )));
        }
        let first = 12 * start_year as i64; // January start_year
        let last = 12 * end_year as i64 + 11; // December end_year
        let offset = first - self.month_number(0);
        if offset < 0 {
            return Err(Error::Range(format!(
                "series {:?} starts {} but window starts {}-01",
                self.label,
                self.start_label(),
                start_year
            )));
        }
        let end_offset = last - self.month_number(0);
        if end_offset >= self.values.len() as i64 {
            return Err(Error::Range(format!(
                "series {:?} ends {} but window needs {}-12",
                self.label,
                self.end_label(),
                end_year
            )));
        }
        let values = self.values[offset as usize..=end_offset as usize].to_vec();
        MonthlySeries::new(start_year, 1, values, self.label.clone())
    }

    /// Time axis in decades, mean-centered, suitable for trend regression.
    ///
    /// For n consecutive months the mean month number is exactly
    /// `first + (n - 1) / 2`, so sample `i` maps to `(i - (n-1)/2) / 120`
    /// regardless of the calendar anchor.
    pub fn centered_decadal_time(&self) -> TimeAxis {
        let n = self.values.len();
        let mid = (n as f64 - 1.0) / 2.0;
        let t = (0..n).map(|i| (i as f64 - mid) / 120.0).collect();
        TimeAxis { t }
    }

    fn start_label(&self) -> String {
        format!("{}-{:02}", self.start_year, self.start_month)
    }

    fn end_label(&self) -> String {
        let m = self.month_number(self.values.len() - 1);
        format!("{}-{:02}", m.div_euclid(12), m.rem_euclid(12) + 1)
    }
}

/// Mean-centered regression time axis in decades.
///
/// Consecutive samples are spaced exactly 1/120 decade apart (monthly data)
/// and the axis sums to zero up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeAxis {
    t: Vec<f64>,
}

impl TimeAxis {
    pub fn values(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Sum of squares of the centered axis (`ssx` in the regression output).
    pub fn ssx(&self) -> f64 {
        self.t.iter().map(|t| t * t).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(start_year: i32, start_month: u8, n: usize) -> MonthlySeries {
        let values = (0..n).map(|i| i as f64 * 0.01).collect();
        MonthlySeries::new(start_year, start_month, values, "test").unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(MonthlySeries::new(1979, 1, vec![], "x").is_err());
        assert!(MonthlySeries::new(1979, 0, vec![1.0], "x").is_err());
        assert!(MonthlySeries::new(1979, 13, vec![1.0], "x").is_err());
        assert!(MonthlySeries::new(1979, 1, vec![1.0, f64::NAN], "x").is_err());
        assert!(MonthlySeries::new(1979, 1, vec![1.0, f64::INFINITY], "x").is_err());
    }

    #[test]
    fn window_from_december_start_has_252_months() {
        // Source starting 1978-12 covering through 1999-12.
        let s = series(1978, 12, 1 + 12 * 21);
        let w = s.window(1979, 1999).unwrap();
        assert_eq!(w.len(), 252);
        assert_eq!(w.start_year(), 1979);
        assert_eq!(w.start_month(), 1);
        // First window value is the source's second sample.
        assert_eq!(w.values()[0], s.values()[1]);
    }

    #[test]
    fn window_identity_on_exact_year() {
        let s = series(1990, 1, 12);
        let w = s.window(1990, 1990).unwrap();
        assert_eq!(w, s);
    }

    #[test]
    fn window_rejects_out_of_range() {
        let s = series(1979, 1, 12 * 29); // ends 2007-12
        let err = s.window(1979, 2008).unwrap_err();
        assert!(matches!(err, Error::Range(_)), "{err}");
        // Partial final year is also rejected.
        let s = series(1979, 1, 12 * 29 + 11); // ends 2008-11
        assert!(s.window(1979, 2008).is_err());
        // Window starting before the data.
        assert!(series(1980, 1, 24).window(1979, 1980).is_err());
        // Reversed bounds.
        assert!(series(1979, 1, 24).window(1980, 1979).is_err());
    }

    #[test]
    fn window_is_idempotent() {
        let s = series(1979, 1, 12 * 10);
        let once = s.window(1980, 1985).unwrap();
        let twice = once.window(1980, 1985).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn centered_axis_ssx_reference_value() {
        // 252-month window 1979-1999: ssx ~ 92.6.
        let s = series(1979, 1, 252);
        let ssx = s.centered_decadal_time().ssx();
        assert!((ssx - 92.6085).abs() < 5e-4, "ssx = {ssx}");
    }

    #[test]
    fn centered_axis_single_sample() {
        let s = series(1979, 1, 1);
        assert_eq!(s.centered_decadal_time().values(), &[0.0]);
    }

    #[test]
    fn centered_axis_matches_direct_summation() {
        // 24-month series: compare ssx against direct summation over the
        // raw decadal times minus their mean.
        let s = series(1983, 1, 24);
        let raw: Vec<f64> = (0..24).map(|k| k as f64 / 120.0).collect();
        let mean = raw.iter().sum::<f64>() / 24.0;
        let expected: f64 = raw.iter().map(|t| (t - mean) * (t - mean)).sum();
        let got = s.centered_decadal_time().ssx();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn centered_axis_sums_to_zero_and_has_exact_spacing() {
        for n in [1usize, 2, 5, 24, 252, 253] {
            let s = series(1979, 3, n);
            let axis = s.centered_decadal_time();
            let t = axis.values();
            let sum: f64 = t.iter().sum();
            let max = t.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            assert!(sum.abs() <= 1e-9 * max.max(1e-300), "n={n} sum={sum}");
            for w in t.windows(2) {
                assert!((w[1] - w[0] - 1.0 / 120.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn decimal_year_tracks_calendar() {
        let s = series(1979, 1, 14);
        assert_eq!(s.decimal_year(0), 1979.0);
        assert_eq!(s.decimal_year(12), 1980.0);
        assert!((s.decimal_year(1) - (1979.0 + 1.0 / 12.0)).abs() < 1e-12);
    }
}
