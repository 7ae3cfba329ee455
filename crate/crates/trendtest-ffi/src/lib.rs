//! C ABI for the trend-consistency library.
//!
//! Series handles are opaque. Every function returns a [`TrendtestStatus`]
//! and writes its result through out-pointers; on failure,
//! [`trendtest_last_error_message`] retrieves a description of the most
//! recent error on the calling thread.
//!
//! The generated header lands in `include/trendtest.h`.

use std::cell::RefCell;
use std::ffi::CStr;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trendtest::{
    Ar1Method, ColumnTableSpec, DofFormula, EnsembleStats, Error, MonthlySeries, PipelineOptions,
};

/// Status code returned by every C-ABI function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendtestStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    SchemaError = 4,
    ConfigError = 5,
    RangeError = 6,
    DomainError = 7,
    DegenerateInput = 8,
    DofTooSmall = 9,
    NonConvergence = 10,
    InvalidArgument = 11,
    InternalError = 12,
}

/// Opaque handle to a monthly series.
pub struct TrendtestSeries {
    inner: MonthlySeries,
}

/// Ensemble trend statistics (mean trend, inter-model sd, model count).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TrendtestEnsemble {
    pub mean_trend: f64,
    pub inter_model_sd: f64,
    pub n_models: u32,
}

impl TrendtestEnsemble {
    fn to_stats(self) -> EnsembleStats {
        EnsembleStats {
            mean_trend: self.mean_trend,
            inter_model_sd: self.inter_model_sd,
            n_models: self.n_models,
        }
    }
}

/// Summary of an OLS trend fit.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TrendtestTrendFit {
    pub slope: f64,
    pub intercept: f64,
    pub ols_se: f64,
    pub series_sd: f64,
    pub ssx: f64,
    pub n: u64,
}

/// One row of the rolling analysis.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TrendtestEndpointRow {
    pub end_year: i32,
    pub trend: f64,
    pub se_adj: f64,
    pub series_sd: f64,
    pub r1: f64,
    pub n_eff: f64,
    pub d1_star: f64,
    pub d_star: f64,
    pub adj_df: f64,
    pub d1_zero: f64,
}

/// Lag-1 estimator selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendtestAr1Method {
    Ml = 0,
    Lag1 = 1,
}

/// Effective-dof formula selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendtestDofFormula {
    Quenouille = 0,
    Nychka = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

fn fail(status: TrendtestStatus, message: impl Into<String>) -> TrendtestStatus {
    set_last_error(message);
    status
}

fn status_of(err: &Error) -> TrendtestStatus {
    match err {
        Error::Parse { .. } => TrendtestStatus::ParseError,
        Error::Schema(_) => TrendtestStatus::SchemaError,
        Error::Config { .. } => TrendtestStatus::ConfigError,
        Error::Range(_) => TrendtestStatus::RangeError,
        Error::Domain(_) => TrendtestStatus::DomainError,
        Error::DegenerateInput(_) => TrendtestStatus::DegenerateInput,
        Error::DofTooSmall { .. } => TrendtestStatus::DofTooSmall,
        Error::NonConvergence { .. } => TrendtestStatus::NonConvergence,
        Error::AtYear { source, .. } => status_of(source),
    }
}

fn from_result(err: Error) -> TrendtestStatus {
    let status = status_of(&err);
    set_last_error(err.to_string());
    status
}

fn guarded(f: impl FnOnce() -> TrendtestStatus) -> TrendtestStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(TrendtestStatus::InternalError, "internal panic"),
    }
}

/// Copy the most recent error message on this thread into `buffer`
/// (NUL-terminated, truncated to `capacity`). Returns the full length of
/// the message in bytes, excluding the NUL.
///
/// # Safety
/// `buffer` must point to at least `capacity` writable bytes, or be null.
#[no_mangle]
pub unsafe extern "C" fn trendtest_last_error_message(
    buffer: *mut c_char,
    capacity: usize,
) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buffer as *mut u8, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Result<Option<&'a str>, TrendtestStatus> {
    if ptr.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map(Some)
        .map_err(|_| fail(TrendtestStatus::InvalidUtf8, "string is not valid UTF-8"))
}

/// Build a series from raw monthly values anchored at (start_year,
/// start_month).
///
/// # Safety
/// `values` must point to `len` f64 values; `out` must be a valid pointer.
/// The returned handle must be released with [`trendtest_series_free`].
#[no_mangle]
pub unsafe extern "C" fn trendtest_series_from_values(
    start_year: i32,
    start_month: u32,
    values: *const f64,
    len: usize,
    out: *mut *mut TrendtestSeries,
) -> TrendtestStatus {
    guarded(|| {
        if values.is_null() || out.is_null() {
            return fail(TrendtestStatus::NullPointer, "values/out must not be null");
        }
        if start_month == 0 || start_month > 12 {
            return fail(TrendtestStatus::InvalidArgument, "start_month must be 1..=12");
        }
        let slice = std::slice::from_raw_parts(values, len);
        match MonthlySeries::new(start_year, start_month as u8, slice.to_vec(), "c-api") {
            Ok(series) => {
                *out = Box::into_raw(Box::new(TrendtestSeries { inner: series }));
                TrendtestStatus::Ok
            }
            Err(e) => from_result(e),
        }
    })
}

/// Parse a whitespace-delimited table with a header row.
///
/// `year_column` defaults to "year" when null; a null `month_column` means
/// the year column holds decimal years on the monthly grid.
///
/// # Safety
/// `text` and `value_column` must be valid NUL-terminated strings; `out`
/// must be a valid pointer. The returned handle must be released with
/// [`trendtest_series_free`].
#[no_mangle]
pub unsafe extern "C" fn trendtest_series_parse(
    text: *const c_char,
    value_column: *const c_char,
    year_column: *const c_char,
    month_column: *const c_char,
    skip_lines: usize,
    out: *mut *mut TrendtestSeries,
) -> TrendtestStatus {
    guarded(|| {
        if out.is_null() {
            return fail(TrendtestStatus::NullPointer, "out must not be null");
        }
        let (text, value_column) = match (cstr(text), cstr(value_column)) {
            (Ok(Some(t)), Ok(Some(v))) => (t, v),
            (Err(s), _) | (_, Err(s)) => return s,
            _ => return fail(TrendtestStatus::NullPointer, "text/value_column must not be null"),
        };
        let year_column = match cstr(year_column) {
            Ok(v) => v.unwrap_or("year").to_string(),
            Err(s) => return s,
        };
        let month_column = match cstr(month_column) {
            Ok(v) => v.map(str::to_string),
            Err(s) => return s,
        };
        let spec = ColumnTableSpec {
            year_column,
            month_column,
            value_column: value_column.to_string(),
            skip_lines,
        };
        match trendtest::parse_table(text, &spec) {
            Ok(series) => {
                *out = Box::into_raw(Box::new(TrendtestSeries { inner: series }));
                TrendtestStatus::Ok
            }
            Err(e) => from_result(e),
        }
    })
}

/// Release a series handle. Null is accepted and ignored.
///
/// # Safety
/// `series` must have been returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn trendtest_series_free(series: *mut TrendtestSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

unsafe fn borrow_series<'a>(
    series: *const TrendtestSeries,
) -> Result<&'a MonthlySeries, TrendtestStatus> {
    if series.is_null() {
        Err(fail(TrendtestStatus::NullPointer, "series must not be null"))
    } else {
        Ok(&(*series).inner)
    }
}

/// Number of monthly samples in the series.
///
/// # Safety
/// `series` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendtest_series_len(
    series: *const TrendtestSeries,
    out: *mut usize,
) -> TrendtestStatus {
    guarded(|| {
        let s = match borrow_series(series) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(TrendtestStatus::NullPointer, "out must not be null");
        }
        *out = s.len();
        TrendtestStatus::Ok
    })
}

/// First calendar year of the series.
///
/// # Safety
/// `series` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendtest_series_start_year(
    series: *const TrendtestSeries,
    out: *mut i32,
) -> TrendtestStatus {
    guarded(|| {
        let s = match borrow_series(series) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(TrendtestStatus::NullPointer, "out must not be null");
        }
        *out = s.start_year();
        TrendtestStatus::Ok
    })
}

/// First calendar month (1-12) of the series.
///
/// # Safety
/// `series` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendtest_series_start_month(
    series: *const TrendtestSeries,
    out: *mut u32,
) -> TrendtestStatus {
    guarded(|| {
        let s = match borrow_series(series) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(TrendtestStatus::NullPointer, "out must not be null");
        }
        *out = s.start_month() as u32;
        TrendtestStatus::Ok
    })
}

/// Copy the series values into `buffer`, which must hold at least
/// [`trendtest_series_len`] values.
///
/// # Safety
/// `series` must be a live handle; `buffer` must point to `capacity`
/// writable f64 slots.
#[no_mangle]
pub unsafe extern "C" fn trendtest_series_values(
    series: *const TrendtestSeries,
    buffer: *mut f64,
    capacity: usize,
) -> TrendtestStatus {
    guarded(|| {
        let s = match borrow_series(series) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if buffer.is_null() {
            return fail(TrendtestStatus::NullPointer, "buffer must not be null");
        }
        if capacity < s.len() {
            return fail(
                TrendtestStatus::InvalidArgument,
                format!("buffer capacity {capacity} below series length {}", s.len()),
            );
        }
        ptr::copy_nonoverlapping(s.values().as_ptr(), buffer, s.len());
        TrendtestStatus::Ok
    })
}

/// Restrict a series to January `start_year` .. December `end_year`.
///
/// # Safety
/// `series` must be a live handle; `out` must be a valid pointer. The
/// returned handle must be released with [`trendtest_series_free`].
#[no_mangle]
pub unsafe extern "C" fn trendtest_series_window(
    series: *const TrendtestSeries,
    start_year: i32,
    end_year: i32,
    out: *mut *mut TrendtestSeries,
) -> TrendtestStatus {
    guarded(|| {
        let s = match borrow_series(series) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(TrendtestStatus::NullPointer, "out must not be null");
        }
        match s.window(start_year, end_year) {
            Ok(w) => {
                *out = Box::into_raw(Box::new(TrendtestSeries { inner: w }));
                TrendtestStatus::Ok
            }
            Err(e) => from_result(e),
        }
    })
}

/// OLS trend fit on the series' centered decadal axis.
///
/// # Safety
/// `series` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendtest_fit_trend(
    series: *const TrendtestSeries,
    out: *mut TrendtestTrendFit,
) -> TrendtestStatus {
    guarded(|| {
        let s = match borrow_series(series) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(TrendtestStatus::NullPointer, "out must not be null");
        }
        match trendtest::fit_trend(s) {
            Ok(fit) => {
                *out = TrendtestTrendFit {
                    slope: fit.slope,
                    intercept: fit.intercept,
                    ols_se: fit.ols_se,
                    series_sd: fit.series_sd,
                    ssx: fit.ssx,
                    n: fit.n as u64,
                };
                TrendtestStatus::Ok
            }
            Err(e) => from_result(e),
        }
    })
}

/// Full pipeline on one window: fit, lag-1 estimate, effective dof,
/// adjusted standard error, and the consistency statistics.
///
/// # Safety
/// `series` must be a live handle; `ensemble` and `out` must be valid
/// pointers.
#[no_mangle]
pub unsafe extern "C" fn trendtest_evaluate_endpoint(
    series: *const TrendtestSeries,
    ensemble: *const TrendtestEnsemble,
    start_year: i32,
    end_year: i32,
    ar1_method: TrendtestAr1Method,
    dof_formula: TrendtestDofFormula,
    out: *mut TrendtestEndpointRow,
) -> TrendtestStatus {
    guarded(|| {
        let s = match borrow_series(series) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if ensemble.is_null() || out.is_null() {
            return fail(TrendtestStatus::NullPointer, "ensemble/out must not be null");
        }
        let opts = PipelineOptions {
            ar1_method: match ar1_method {
                TrendtestAr1Method::Ml => Ar1Method::MaximumLikelihood,
                TrendtestAr1Method::Lag1 => Ar1Method::Lag1Sample,
            },
            dof_formula: match dof_formula {
                TrendtestDofFormula::Quenouille => DofFormula::Quenouille,
                TrendtestDofFormula::Nychka => DofFormula::Nychka,
            },
        };
        match trendtest::evaluate_endpoint_with(s, &(*ensemble).to_stats(), start_year, end_year, opts)
        {
            Ok(row) => {
                *out = TrendtestEndpointRow {
                    end_year: row.end_year,
                    trend: row.trend,
                    se_adj: row.se_adj,
                    series_sd: row.series_sd,
                    r1: row.r1,
                    n_eff: row.n_eff,
                    d1_star: row.d1_star,
                    d_star: row.d_star,
                    adj_df: row.adj_df,
                    d1_zero: row.d1_zero,
                };
                TrendtestStatus::Ok
            }
            Err(e) => from_result(e),
        }
    })
}

unsafe fn write_scalar(
    out: *mut f64,
    value: trendtest::Result<f64>,
) -> TrendtestStatus {
    if out.is_null() {
        return fail(TrendtestStatus::NullPointer, "out must not be null");
    }
    match value {
        Ok(v) => {
            *out = v;
            TrendtestStatus::Ok
        }
        Err(e) => from_result(e),
    }
}

/// Quenouille effective degrees of freedom, n (1 - r1) / (1 + r1).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendtest_effective_dof_quenouille(
    n: u64,
    r1: f64,
    out: *mut f64,
) -> TrendtestStatus {
    guarded(|| write_scalar(out, trendtest::effective_dof_quenouille(n as usize, r1)))
}

/// Effective dof with the 0.68/sqrt(n) correction term.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendtest_effective_dof_nychka(
    n: u64,
    r1: f64,
    out: *mut f64,
) -> TrendtestStatus {
    guarded(|| write_scalar(out, trendtest::effective_dof_nychka(n as usize, r1)))
}

/// Scale an OLS standard error by sqrt((n - 2) / (n_eff - 2)).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendtest_adjust_se(
    ols_se: f64,
    n: u64,
    n_eff: f64,
    out: *mut f64,
) -> TrendtestStatus {
    guarded(|| write_scalar(out, trendtest::adjust_se(ols_se, n as usize, n_eff)))
}

/// Modified two-sample statistic with both trends stochastic.
///
/// # Safety
/// `ensemble` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn trendtest_d1_star(
    ensemble: *const TrendtestEnsemble,
    b0: f64,
    se_adj: f64,
    out: *mut f64,
) -> TrendtestStatus {
    guarded(|| {
        if ensemble.is_null() {
            return fail(TrendtestStatus::NullPointer, "ensemble must not be null");
        }
        write_scalar(out, trendtest::d1_star(&(*ensemble).to_stats(), b0, se_adj))
    })
}

/// Statistic treating the observed trend as non-stochastic.
///
/// # Safety
/// `ensemble` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn trendtest_d_star(
    ensemble: *const TrendtestEnsemble,
    b0: f64,
    out: *mut f64,
) -> TrendtestStatus {
    guarded(|| {
        if ensemble.is_null() {
            return fail(TrendtestStatus::NullPointer, "ensemble must not be null");
        }
        write_scalar(out, trendtest::d_star(&(*ensemble).to_stats(), b0))
    })
}

/// Trend-against-zero statistic, b0 / se_adj.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendtest_d1_zero(b0: f64, se_adj: f64, out: *mut f64) -> TrendtestStatus {
    guarded(|| write_scalar(out, trendtest::d1_zero(b0, se_adj)))
}

/// Combined degrees of freedom for the two-variance statistic.
///
/// # Safety
/// `ensemble` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn trendtest_welch_df(
    ensemble: *const TrendtestEnsemble,
    se_adj: f64,
    n_eff: f64,
    out: *mut f64,
) -> TrendtestStatus {
    guarded(|| {
        if ensemble.is_null() {
            return fail(TrendtestStatus::NullPointer, "ensemble must not be null");
        }
        write_scalar(out, trendtest::welch_df(&(*ensemble).to_stats(), se_adj, n_eff))
    })
}

/// Student-t CDF with (possibly fractional) df.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendtest_t_cdf(x: f64, df: f64, out: *mut f64) -> TrendtestStatus {
    guarded(|| write_scalar(out, trendtest::t_cdf(x, df)))
}

/// Student-t quantile with (possibly fractional) df.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendtest_t_quantile(p: f64, df: f64, out: *mut f64) -> TrendtestStatus {
    guarded(|| write_scalar(out, trendtest::t_quantile(p, df)))
}
