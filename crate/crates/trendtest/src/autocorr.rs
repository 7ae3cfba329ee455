//! Lag-1 autocorrelation estimation and the effective-degrees-of-freedom
//! corrections applied to trend standard errors.
//!
//! The default estimator maximizes the exact Gaussian likelihood of an
//! AR(1)-with-mean model with a stationary start. Mean and innovation
//! variance are profiled out in closed form, leaving a smooth 1-D problem
//! in the lag-1 coefficient that a coarse scan plus golden-section search
//! solves to 1e-7.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the lag-1 coefficient is estimated from trend residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ar1Method {
    /// Exact Gaussian maximum likelihood of an AR(1)-with-mean model.
    MaximumLikelihood,
    /// Sample lag-1 autocorrelation
    /// `sum (x_i - mean)(x_{i+1} - mean) / sum (x_i - mean)^2`.
    Lag1Sample,
}

impl Ar1Method {
    pub fn name(&self) -> &'static str {
        match self {
            Ar1Method::MaximumLikelihood => "ml",
            Ar1Method::Lag1Sample => "lag1",
        }
    }
}

/// Estimated lag-1 coefficient, always strictly inside (-1, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Estimate {
    pub r1: f64,
    pub method: Ar1Method,
}

/// Which effective-dof formula the pipeline applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DofFormula {
    Quenouille,
    Nychka,
}

impl DofFormula {
    pub fn name(&self) -> &'static str {
        match self {
            DofFormula::Quenouille => "quenouille",
            DofFormula::Nychka => "nychka",
        }
    }

    pub fn effective_dof(&self, n: usize, r1: f64) -> Result<f64> {
        match self {
            DofFormula::Quenouille => effective_dof_quenouille(n, r1),
            DofFormula::Nychka => effective_dof_nychka(n, r1),
        }
    }
}

/// Degrees-of-freedom correction applied to an OLS standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofAdjustment {
    pub n: usize,
    pub n_eff: f64,
    /// `sqrt((n - 2) / (n_eff - 2))`, the multiplier on the OLS standard error.
    pub se_ratio: f64,
}

impl DofAdjustment {
    pub fn new(n: usize, n_eff: f64) -> Result<Self> {
        if n <= 2 {
            return Err(Error::Domain(format!("need n > 2, got {n}")));
        }
        if !(n_eff > 2.0) {
            return Err(Error::DofTooSmall { n_eff });
        }
        let se_ratio = ((n as f64 - 2.0) / (n_eff - 2.0)).sqrt();
        Ok(DofAdjustment { n, n_eff, se_ratio })
    }
}

/// Estimate the lag-1 coefficient of a residual series.
pub fn estimate_ar1(residuals: &[f64], method: Ar1Method) -> Result<Ar1Estimate> {
    let n = residuals.len();
    if n < 8 {
        return Err(Error::DegenerateInput(format!(
            "AR1 estimation requires at least 8 residuals, got {n}"
        )));
    }
    let first = residuals[0];
    if residuals.iter().all(|&v| v == first) {
        return Err(Error::DegenerateInput(
            "residuals are constant; lag-1 coefficient undefined".into(),
        ));
    }
    let r1 = match method {
        Ar1Method::Lag1Sample => lag1_sample(residuals),
        Ar1Method::MaximumLikelihood => max_likelihood(residuals)?,
    };
    Ok(Ar1Estimate { r1, method })
}

fn lag1_sample(x: &[f64]) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let num: f64 = (0..n - 1).map(|i| (x[i] - mean) * (x[i + 1] - mean)).sum();
    let den: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    num / den
}

/// Profiled -2 log likelihood of the stationary AR(1)-with-mean model,
/// up to an additive constant. For fixed phi the conditional sum of squares
/// is quadratic in the mean, so the mean solves in closed form; the
/// innovation variance profiles to `S/n`.
fn profile_objective(x: &[f64], phi: f64) -> f64 {
    let n = x.len() as f64;
    let one_m = 1.0 - phi;
    let one_m2 = 1.0 - phi * phi;

    let mut sum_diff = 0.0;
    for t in 1..x.len() {
        sum_diff += x[t] - phi * x[t - 1];
    }
    let mu = (one_m2 * x[0] + one_m * sum_diff) / (one_m2 + (n - 1.0) * one_m * one_m);

    let e0 = x[0] - mu;
    let mut s = one_m2 * e0 * e0;
    for t in 1..x.len() {
        let d = (x[t] - mu) - phi * (x[t - 1] - mu);
        s += d * d;
    }
    n * s.max(1e-300).ln() - one_m2.ln()
}

const PHI_BOUND: f64 = 0.999;
const PHI_TOL: f64 = 1e-7;

fn max_likelihood(x: &[f64]) -> Result<f64> {
    // Coarse scan guards against a poor local bracket, then golden-section
    // refines to the requested tolerance.
    const SCAN_POINTS: usize = 101;
    let step = 2.0 * PHI_BOUND / (SCAN_POINTS - 1) as f64;
    let mut best_k = 0;
    let mut best_val = f64::INFINITY;
    for k in 0..SCAN_POINTS {
        let phi = -PHI_BOUND + k as f64 * step;
        let val = profile_objective(x, phi);
        if val < best_val {
            best_val = val;
            best_k = k;
        }
    }
    let lo = (-PHI_BOUND + best_k.saturating_sub(1) as f64 * step).max(-PHI_BOUND);
    let hi = (-PHI_BOUND + (best_k + 1) as f64 * step).min(PHI_BOUND);
    golden_section_min(|phi| profile_objective(x, phi), lo, hi, PHI_TOL)
}

/// Golden-section minimization of a unimodal function on [lo, hi].
fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    const MAX_ITER: usize = 200;

    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while hi - lo > tol {
        if iters >= MAX_ITER {
            return Err(Error::NonConvergence {
                lo,
                hi,
                iterations: iters,
            });
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        iters += 1;
    }
    Ok(0.5 * (lo + hi))
}

/// Quenouille effective degrees of freedom, `n (1 - r1) / (1 + r1)`.
pub fn effective_dof_quenouille(n: usize, r1: f64) -> Result<f64> {
    check_dof_inputs(n, r1)?;
    Ok(n as f64 * (1.0 - r1) / (1.0 + r1))
}

/// Variant effective-dof formula with a 0.68/sqrt(n) correction term:
/// `n (1 - r1 - 0.68/sqrt(n)) / (1 + r1 + 0.68/sqrt(n))`.
pub fn effective_dof_nychka(n: usize, r1: f64) -> Result<f64> {
    check_dof_inputs(n, r1)?;
    let c = 0.68 / (n as f64).sqrt();
    let den = 1.0 + r1 + c;
    if !(den > 0.0) {
        return Err(Error::Domain(format!(
            "1 + r1 + 0.68/sqrt(n) must be positive, got {den}"
        )));
    }
    Ok(n as f64 * (1.0 - r1 - c) / den)
}

fn check_dof_inputs(n: usize, r1: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!("need n >= 3, got {n}")));
    }
    if !(r1.abs() < 1.0) {
        return Err(Error::Domain(format!("need |r1| < 1, got {r1}")));
    }
    Ok(())
}

/// Scale an OLS standard error to the effective sample size:
/// `ols_se * sqrt((n - 2) / (n_eff - 2))`.
pub fn adjust_se(ols_se: f64, n: usize, n_eff: f64) -> Result<f64> {
    let adj = DofAdjustment::new(n, n_eff)?;
    Ok(ols_se * adj.se_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn ar1_series(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::with_capacity(n);
        let mut e: f64 = rng.sample::<f64, _>(StandardNormal) / (1.0 - phi * phi).sqrt();
        x.push(e);
        for _ in 1..n {
            e = phi * e + rng.sample::<f64, _>(StandardNormal);
            x.push(e);
        }
        x
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(estimate_ar1(&[1.0; 20], Ar1Method::MaximumLikelihood).is_err());
        assert!(estimate_ar1(&[1.0, 2.0, 3.0], Ar1Method::Lag1Sample).is_err());
    }

    #[test]
    fn white_noise_estimates_near_zero() {
        let x = ar1_series(0.0, 2048, 7);
        let tol = 3.0 / (x.len() as f64).sqrt();
        for method in [Ar1Method::MaximumLikelihood, Ar1Method::Lag1Sample] {
            let est = estimate_ar1(&x, method).unwrap();
            assert!(est.r1.abs() < tol, "{:?}: r1 = {}", method, est.r1);
        }
    }

    #[test]
    fn ml_matches_grid_search_oracle() {
        // Multi-stage grid refinement of the same exact likelihood, down to
        // 1e-6 resolution, written independently of the golden-section path.
        let x = ar1_series(0.7, 5000, 42);
        let est = estimate_ar1(&x, Ar1Method::MaximumLikelihood).unwrap();

        let mut lo = -PHI_BOUND;
        let mut hi = PHI_BOUND;
        let mut best = 0.0;
        let mut step = 1e-2;
        while step >= 1e-6 {
            let mut best_val = f64::INFINITY;
            let mut phi = lo;
            while phi <= hi {
                let val = profile_objective(&x, phi);
                if val < best_val {
                    best_val = val;
                    best = phi;
                }
                phi += step;
            }
            lo = (best - step).max(-PHI_BOUND);
            hi = (best + step).min(PHI_BOUND);
            step /= 100.0;
        }
        assert!(
            (est.r1 - best).abs() < 5e-3,
            "ml {} vs grid {}",
            est.r1,
            best
        );
        assert!((est.r1 - 0.7).abs() < 0.05);
    }

    #[test]
    fn estimators_are_affine_invariant() {
        let x = ar1_series(0.5, 400, 11);
        let shifted: Vec<f64> = x.iter().map(|v| 3.25 + 40.0 * v).collect();
        for method in [Ar1Method::MaximumLikelihood, Ar1Method::Lag1Sample] {
            let a = estimate_ar1(&x, method).unwrap().r1;
            let b = estimate_ar1(&shifted, method).unwrap().r1;
            let tol = match method {
                Ar1Method::MaximumLikelihood => 1e-5,
                Ar1Method::Lag1Sample => 1e-12,
            };
            assert!((a - b).abs() < tol, "{method:?}: {a} vs {b}");
        }
    }

    #[test]
    fn quenouille_reference_values() {
        let v = effective_dof_quenouille(252, 0.891).unwrap();
        assert!((v - 14.5256).abs() < 1e-3, "{v}");
        let v = effective_dof_quenouille(252, 0.888).unwrap();
        assert!((v - 14.9492).abs() < 1e-3, "{v}");
        assert_eq!(effective_dof_quenouille(500, 0.0).unwrap(), 500.0);
        assert!(effective_dof_quenouille(252, 1.0).is_err());
        assert!(effective_dof_quenouille(252, -1.2).is_err());
    }

    #[test]
    fn nychka_reference_values() {
        let v = effective_dof_nychka(252, 0.888).unwrap();
        assert!((v - 9.02683).abs() < 1e-3, "{v}");
        // Numerator vanishes exactly when r1 = 1 - 0.68/sqrt(n).
        let n = 400;
        let r1 = 1.0 - 0.68 / (n as f64).sqrt();
        let v = effective_dof_nychka(n, r1).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
        // Direct-formula check at (1000, 0.5).
        let v = effective_dof_nychka(1000, 0.5).unwrap();
        let c = 0.68 / 1000f64.sqrt();
        let expect = 1000.0 * (1.0 - 0.5 - c) / (1.0 + 0.5 + c);
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn adjust_se_reference_values() {
        let v = adjust_se(0.031, 252, 14.5).unwrap();
        assert!((v - 0.138636).abs() < 1e-5, "{v}");
        // n_eff = n leaves the standard error unchanged.
        assert_eq!(adjust_se(0.12, 100, 100.0).unwrap(), 0.12);
        assert!(matches!(
            adjust_se(0.031, 252, 2.0),
            Err(Error::DofTooSmall { .. })
        ));
        assert!(adjust_se(0.031, 2, 10.0).is_err());
    }

    #[test]
    fn dof_adjustment_ratio() {
        let adj = DofAdjustment::new(252, 14.5).unwrap();
        assert!((adj.se_ratio - (250.0f64 / 12.5).sqrt()).abs() < 1e-15);
    }
}
