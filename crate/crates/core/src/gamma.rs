//! Shifted-gamma fitting for delay distributions.
//!
//! Fit by method of moments after shifting by the sample minimum:
//! residuals r = x - min(x), shape = mean(r)^2 / var(r),
//! scale = var(r) / mean(r).

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaFit {
    pub shift: f64,
    pub shape: f64,
    pub scale: f64,
}

impl GammaFit {
    pub fn mean(&self) -> f64 {
        self.shift + self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GammaFitError {
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("degenerate sample: variance is zero")]
    ZeroVariance,
    #[error("samples must be finite")]
    NonFinite,
}

pub fn fit_shifted_gamma(samples: &[f64]) -> Result<GammaFit, GammaFitError> {
    if samples.len() < 3 {
        return Err(GammaFitError::TooFewSamples(samples.len()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(GammaFitError::NonFinite);
    }
    let shift = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let n = samples.len() as f64;
    let mean = samples.iter().map(|x| x - shift).sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - shift - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 || mean <= 0.0 {
        return Err(GammaFitError::ZeroVariance);
    }
    Ok(GammaFit {
        shift,
        shape: mean * mean / var,
        scale: var / mean,
    })
}
