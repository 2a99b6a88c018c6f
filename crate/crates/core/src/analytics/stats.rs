use serde::{Deserialize, Serialize};

use super::AnalyticsError;

/// Count, missing count, mean and standard deviation of a column of
/// optional scores. Missing values only contribute to `missing`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub missing: usize,
    pub mean: Option<f64>,
    /// Sample (n − 1) deviation unless population deviation was requested.
    /// `None` when undefined (no values, or a single value with n − 1).
    pub stddev: Option<f64>,
}

/// Welford accumulation over the present values.
pub fn describe<I>(values: I, population_stddev: bool) -> Summary
where
    I: IntoIterator<Item = Option<f64>>,
{
    let (mut n, mut missing) = (0usize, 0usize);
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for v in values {
        match v {
            Some(x) => {
                n += 1;
                let delta = x - mean;
                mean += delta / n as f64;
                m2 += delta * (x - mean);
            }
            None => missing += 1,
        }
    }
    let divisor = if population_stddev { n } else { n.saturating_sub(1) };
    Summary {
        count: n,
        missing,
        mean: (n > 0).then_some(mean),
        stddev: (divisor > 0).then(|| (m2 / divisor as f64).sqrt()),
    }
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(AnalyticsError::TooFewPoints(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub labels: (String, String),
    pub r: f64,
    pub n: usize,
}

impl CorrelationReport {
    pub fn compute(
        labels: (impl Into<String>, impl Into<String>),
        x: &[f64],
        y: &[f64],
    ) -> Result<Self, AnalyticsError> {
        Ok(Self {
            labels: (labels.0.into(), labels.1.into()),
            r: pearson(x, y)?,
            n: x.len(),
        })
    }
}
