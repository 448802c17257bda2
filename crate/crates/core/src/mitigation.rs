//! Error-mitigation stack: shot triage (flag, ancilla and direction
//! post-selection), depolarizing-rate estimation from companion-circuit
//! observables, inverse-map renormalization, and constant background removal.
//!
//! Observables feeding the rate estimate are coordinate moments centered at
//! the uniform-distribution mean of the unwrap frame. With that centering
//! the mean and cross-covariance observables have zero uniform expectation,
//! so their rate estimate is a plain relative drop; the variance observable
//! keeps its uniform term (L^2 - 1)/12 in the denominator.

use serde::Serialize;

use crate::error::{QlbmError, Result};
use crate::lbm::grid::Grid;
use crate::qsim::layout::{Register, RegisterLayout};
use crate::qsim::sampling::Counts;
use crate::readout::MomentEstimates;

/// Shot categories after post-selection. Perpendicular: direction register
/// left the all-zero readout subspace. Flagged: good subspace, but a flag or
/// multi-control ancilla shows a detected error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShotTriage {
    pub total: u64,
    pub perpendicular: u64,
    pub flagged: u64,
    pub usable: u64,
}

impl ShotTriage {
    pub fn shares(&self) -> (f64, f64, f64) {
        let t = self.total.max(1) as f64;
        (
            self.perpendicular as f64 / t,
            self.flagged as f64 / t,
            self.usable as f64 / t,
        )
    }
}

/// Split full-register counts into categories and keep the grid bits of the
/// usable shots. `flag_accept` is the expected flag-register readout (all
/// used flags at the accept value; zero for the companion circuit).
pub fn triage_shots(
    counts: &Counts,
    layout: &RegisterLayout,
    flag_accept: usize,
) -> Result<(Counts, ShotTriage)> {
    let mut grid_counts = Counts::new();
    let mut triage = ShotTriage {
        total: 0,
        perpendicular: 0,
        flagged: 0,
        usable: 0,
    };
    let max_basis = 1usize << layout.total_qubits();
    for (&basis, &n) in counts {
        if basis >= max_basis {
            return Err(QlbmError::DimensionMismatch {
                expected: max_basis,
                got: basis,
            });
        }
        triage.total += n;
        if layout.extract(basis, Register::Direction) != 0 {
            triage.perpendicular += n;
        } else if layout.extract(basis, Register::Flag) != flag_accept
            || layout.extract(basis, Register::Ancilla) != 0
        {
            triage.flagged += n;
        } else {
            triage.usable += n;
            *grid_counts.entry(layout.extract(basis, Register::Grid)).or_insert(0) += n;
        }
    }
    Ok((grid_counts, triage))
}

/// Per-observable depolarizing rates plus the readout background floor.
/// Rates sit in [0, 1]; an observable whose ideal denominator is degenerate
/// is left unavailable.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NoiseChannelEstimate {
    pub lambda_mean: Option<f64>,
    pub lambda_var: Option<f64>,
    pub lambda_cov: Option<f64>,
    pub background: f64,
}

impl NoiseChannelEstimate {
    pub const CLEAN: NoiseChannelEstimate = NoiseChannelEstimate {
        lambda_mean: Some(0.0),
        lambda_var: Some(0.0),
        lambda_cov: Some(0.0),
        background: 0.0,
    };

    /// Preferred single rate: variance first (statistically sturdiest), then
    /// mean, then covariance.
    pub fn pooled(&self) -> f64 {
        self.lambda_var
            .or(self.lambda_mean)
            .or(self.lambda_cov)
            .unwrap_or(0.0)
    }
}

const DENOM_GUARD: f64 = 1e-6;

/// Centered raw observables of a moment estimate: first moments around the
/// uniform in-frame mean and raw second moments around the same point.
struct CenteredObs {
    c1: Vec<f64>,
    c2: Vec<Vec<f64>>,
    uniform_var: Vec<f64>,
}

fn centered(m: &MomentEstimates, frame: &[usize], grid: &Grid) -> CenteredObs {
    let d = grid.dimension();
    // align the mean into the reference frame
    let mut mean = m.mean.clone();
    for a in 0..d {
        let side = grid.dims()[a] as f64;
        let anchor = frame[a] as f64;
        mean[a] -= side * ((mean[a] - anchor) / side).round();
    }
    let u: Vec<f64> = (0..d).map(|a| frame[a] as f64 - 0.5).collect();
    let c1: Vec<f64> = (0..d).map(|a| mean[a] - u[a]).collect();
    let c2: Vec<Vec<f64>> = (0..d)
        .map(|a| (0..d).map(|b| m.cov[a][b] + c1[a] * c1[b]).collect())
        .collect();
    let uniform_var = grid
        .dims()
        .iter()
        .map(|&l| ((l * l - 1) as f64) / 12.0)
        .collect();
    CenteredObs {
        c1,
        c2,
        uniform_var,
    }
}

fn average(vals: Vec<f64>) -> Option<f64> {
    if vals.is_empty() {
        None
    } else {
        Some((vals.iter().sum::<f64>() / vals.len() as f64).clamp(0.0, 1.0))
    }
}

/// Estimate the depolarizing rate per observable by comparing ideal and
/// noisy companion readouts.
pub fn estimate_lambda(
    ideal: &MomentEstimates,
    noisy: &MomentEstimates,
    grid: &Grid,
) -> NoiseChannelEstimate {
    let frame = &ideal.frame_mode;
    let i = centered(ideal, frame, grid);
    let n = centered(noisy, frame, grid);
    let d = grid.dimension();

    let mut mean_rates = Vec::new();
    let mut var_rates = Vec::new();
    for a in 0..d {
        if i.c1[a].abs() > DENOM_GUARD {
            mean_rates.push((i.c1[a] - n.c1[a]) / i.c1[a]);
        }
        let denom = i.c2[a][a] - i.uniform_var[a];
        if denom.abs() > DENOM_GUARD {
            var_rates.push((i.c2[a][a] - n.c2[a][a]) / denom);
        }
    }
    let mut cov_rates = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            if i.c2[a][b].abs() > DENOM_GUARD {
                cov_rates.push((i.c2[a][b] - n.c2[a][b]) / i.c2[a][b]);
            }
        }
    }
    NoiseChannelEstimate {
        lambda_mean: average(mean_rates),
        lambda_var: average(var_rates),
        lambda_cov: average(cov_rates),
        background: 0.0,
    }
}

/// Invert the depolarizing map on measured moments, each observable with its
/// own rate (falling back to the pooled rate where one is unavailable).
pub fn renormalize_observables(
    noisy: &MomentEstimates,
    est: &NoiseChannelEstimate,
    grid: &Grid,
) -> Result<MomentEstimates> {
    let lam_mean = est.lambda_mean.unwrap_or_else(|| est.pooled());
    let lam_var = est.lambda_var.unwrap_or_else(|| est.pooled());
    let lam_cov = est.lambda_cov.unwrap_or_else(|| est.pooled());
    for lam in [lam_mean, lam_var, lam_cov] {
        if lam >= 1.0 {
            return Err(QlbmError::BadNoiseParameter(
                "lambda = 1 leaves no signal to renormalize".into(),
            ));
        }
    }
    let frame = &noisy.frame_mode;
    let obs = centered(noisy, frame, grid);
    let d = grid.dimension();
    let u: Vec<f64> = (0..d).map(|a| frame[a] as f64 - 0.5).collect();

    let c1: Vec<f64> = (0..d).map(|a| obs.c1[a] / (1.0 - lam_mean)).collect();
    let mut c2 = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            c2[a][b] = if a == b {
                (obs.c2[a][a] - lam_var * obs.uniform_var[a]) / (1.0 - lam_var)
            } else {
                obs.c2[a][b] / (1.0 - lam_cov)
            };
        }
    }

    let mean: Vec<f64> = (0..d).map(|a| u[a] + c1[a]).collect();
    let cov: Vec<Vec<f64>> = (0..d)
        .map(|a| (0..d).map(|b| c2[a][b] - c1[a] * c1[b]).collect())
        .collect();
    let stderr = noisy.stderr.as_ref().map(|se| crate::readout::MomentStderr {
        mean: se.mean.iter().map(|s| s / (1.0 - lam_mean)).collect(),
        var: se.var.iter().map(|s| s / (1.0 - lam_var)).collect(),
        cov_xy: se.cov_xy / (1.0 - lam_cov),
    });
    Ok(MomentEstimates {
        mean,
        cov,
        frame_mode: noisy.frame_mode.clone(),
        shots: noisy.shots,
        stderr,
    })
}

/// Mean noisy probability over sites whose ideal value sits below the floor
/// threshold; zero when the ideal distribution has no such dead sites.
pub fn estimate_background(noisy: &[f64], ideal: &[f64], floor: f64) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (q, p) in noisy.iter().zip(ideal) {
        if *p < floor {
            sum += q;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Default floor threshold for background estimation.
pub const BACKGROUND_FLOOR: f64 = 1e-6;

/// Subtract a constant offset from a distribution, clip at zero and
/// renormalize.
pub fn remove_background(dist: &[f64], b: f64) -> Result<Vec<f64>> {
    if b < 0.0 {
        return Err(QlbmError::BadNoiseParameter(format!("background {b} < 0")));
    }
    let cleaned: Vec<f64> = dist.iter().map(|p| (p - b).max(0.0)).collect();
    let z: f64 = cleaned.iter().sum();
    if z <= 0.0 {
        return Err(QlbmError::BackgroundTooLarge(b));
    }
    Ok(cleaned.iter().map(|p| p / z).collect())
}
