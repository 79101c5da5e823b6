//! Least-squares line fits with t-based confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

/// Two-sided confidence level of reported half-widths.
pub const CONFIDENCE: f64 = 0.95;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("x values are all equal")]
    DegenerateX,
    #[error("non-finite input")]
    NonFinite,
    #[error("baseline slope must be positive, got {0}")]
    NonPositiveBaseline(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_ci_halfwidth: f64,
    pub intercept_ci_halfwidth: f64,
    /// `sqrt(SSE / (n − 2))`.
    pub residual_std_error: f64,
    pub max_abs_residual: f64,
    pub n: usize,
}

/// Ordinary least squares of `y` on `x`.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<FitResult, FitError> {
    let n = points.len();
    if n < 3 {
        return Err(FitError::TooFewPoints(n));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(FitError::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = points.iter().map(|&(x, y)| y - (intercept + slope * x));
    let (sse, max_abs) = residuals.fold((0.0, 0.0f64), |(s, m), r| (s + r * r, m.max(r.abs())));
    let s2 = sse / (nf - 2.0);
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .expect("n − 2 ≥ 1 degrees of freedom")
        .inverse_cdf(0.5 + CONFIDENCE / 2.0);
    Ok(FitResult {
        slope,
        intercept,
        slope_ci_halfwidth: t * (s2 / sxx).sqrt(),
        intercept_ci_halfwidth: t * (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
        residual_std_error: s2.sqrt(),
        max_abs_residual: max_abs,
        n,
    })
}

/// Percentage change of a slope relative to a baseline, with uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reduction {
    pub percent: f64,
    pub uncertainty: f64,
}

/// `100·(1 − b/a)` for slopes `a = base`, `b = other`, with first-order
/// propagation of both confidence half-widths.
pub fn scaling_reduction(base: &FitResult, other: &FitResult) -> Result<Reduction, FitError> {
    let a = base.slope;
    if !(a > 0.0) {
        return Err(FitError::NonPositiveBaseline(a));
    }
    let b = other.slope;
    let dr = ((other.slope_ci_halfwidth / a).powi(2)
        + (b * base.slope_ci_halfwidth / (a * a)).powi(2))
    .sqrt();
    Ok(Reduction {
        percent: 100.0 * (1.0 - b / a),
        uncertainty: 100.0 * dr,
    })
}
