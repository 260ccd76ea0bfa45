//! Small statistics helpers: log-log slope fits and batched standard errors.

use crate::error::{Error, Result};

/// Least-squares slope of log(y) against log(x).
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::domain("x", "need at least two paired points"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::domain("y", "log-log fit needs positive values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("x", "abscissae must not all coincide"));
    }
    Ok(sxy / sxx)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance (two-pass).
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

/// Summary of a replicate sample: mean, variance and batch-based standard
/// errors of both.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub batches: usize,
}

/// Splits the sample (in order) into `batches` contiguous batches; the
/// standard errors are the spread of the per-batch statistics divided by
/// √batches.
pub fn summarize(values: &[f64], batches: usize) -> Result<SampleSummary> {
    let n = values.len();
    if batches < 2 || n < 2 * batches {
        return Err(Error::domain(
            "replicates",
            format!(
                "need at least {} replicates for {batches} batches, got {n}",
                2 * batches
            ),
        ));
    }
    let m = mean(values);
    let var = sample_variance(values);
    let mut batch_means = Vec::with_capacity(batches);
    let mut batch_vars = Vec::with_capacity(batches);
    for b in 0..batches {
        let lo = b * n / batches;
        let hi = (b + 1) * n / batches;
        let chunk = &values[lo..hi];
        batch_means.push(mean(chunk));
        batch_vars.push(sample_variance(chunk));
    }
    let k = batches as f64;
    Ok(SampleSummary {
        n,
        mean: m,
        sd: var.sqrt(),
        mean_se: (sample_variance(&batch_means) / k).sqrt(),
        variance: var,
        variance_se: (sample_variance(&batch_vars) / k).sqrt(),
        batches,
    })
}
