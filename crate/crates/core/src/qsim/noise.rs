//! Distribution-level noise channel: global depolarizing mixing plus an
//! additive uniform readout background.

use crate::error::{QlbmError, Result};

/// Depolarizing channel on an outcome distribution over n qubits:
/// p'(x) = (1 - lambda) p(x) + lambda / 2^n.
pub fn apply_depolarizing(probs: &[f64], lambda: f64, n: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(QlbmError::BadNoiseParameter(format!(
            "lambda = {lambda} outside [0, 1]"
        )));
    }
    if probs.len() != 1usize << n {
        return Err(QlbmError::DimensionMismatch {
            expected: 1usize << n,
            got: probs.len(),
        });
    }
    let floor = lambda / (1usize << n) as f64;
    Ok(probs.iter().map(|p| (1.0 - lambda) * p + floor).collect())
}

/// Add a uniform readout floor of height `b` per outcome and renormalize.
pub fn add_background(probs: &[f64], b: f64) -> Result<Vec<f64>> {
    if b < 0.0 {
        return Err(QlbmError::BadNoiseParameter(format!(
            "background = {b} is negative"
        )));
    }
    let z = 1.0 + b * probs.len() as f64;
    Ok(probs.iter().map(|p| (p + b) / z).collect())
}

/// Noise settings for a run. `lambda` mixes the full joint readout
/// distribution toward uniform; `background` is the per-site floor applied to
/// grid-level readout histograms.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseParams {
    pub lambda: f64,
    pub background: f64,
}

impl NoiseParams {
    pub const OFF: NoiseParams = NoiseParams {
        lambda: 0.0,
        background: 0.0,
    };

    pub fn is_off(&self) -> bool {
        self.lambda == 0.0 && self.background == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(QlbmError::BadNoiseParameter(format!(
                "lambda = {}",
                self.lambda
            )));
        }
        if self.background < 0.0 {
            return Err(QlbmError::BadNoiseParameter(format!(
                "background = {}",
                self.background
            )));
        }
        Ok(())
    }
}
