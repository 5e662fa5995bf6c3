//! Welch's unequal-variance t-test.

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample {0} needs at least two values")]
    TooSmall(&'static str),
    #[error("sample {0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("sample {0} contains a non-finite value")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn check(x: &[f64], name: &'static str) -> Result<f64, StatsError> {
    if x.len() < 2 {
        return Err(StatsError::TooSmall(name));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(name));
    }
    let v = variance(x);
    if v <= 0.0 {
        return Err(StatsError::ZeroVariance(name));
    }
    Ok(v)
}

/// Two-sided Welch test of `mean(a) == mean(b)`; `t > 0` when `a` is larger.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult, StatsError> {
    let va = check(a, "a")?;
    let vb = check(b, "b")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se = (sa + sb).sqrt();
    let t = (mean(a) - mean(b)) / se;
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let p = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    Ok(WelchResult { t, df, p })
}
