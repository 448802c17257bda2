//! Observable readout: coordinate moments of measured grid distributions,
//! parameterized-Gaussian state reconstruction, fidelity, and a plain
//! square-root tomography baseline.
//!
//! Moments are computed in an unwrapped frame anchored at the distribution
//! mode, so a packet advecting across the periodic boundary does not pick up
//! wraparound bias. Measurements sample |phi|^2; a Gaussian amplitude field
//! with covariance S therefore shows up with measured covariance S/2, and
//! reconstruction doubles the measured covariance to undo it.

use crate::error::{QlbmError, Result};
use crate::lbm::field::{wrapped_delta, DensityField};
use crate::lbm::grid::Grid;
use crate::qsim::sampling::Counts;

/// First and second coordinate moments of a measured grid distribution.
/// `mean` lives in the unwrapped frame around `frame_mode` and may leave
/// [0, L).
#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentEstimates {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    /// Mode site coordinates anchoring the unwrap frame.
    pub frame_mode: Vec<usize>,
    pub shots: Option<u64>,
    pub stderr: Option<MomentStderr>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentStderr {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub cov_xy: f64,
}

fn moments_from_weighted(
    grid: &Grid,
    weights: impl Fn(usize) -> f64,
    total: f64,
    shots: Option<u64>,
) -> Result<MomentEstimates> {
    if total <= 0.0 {
        return Err(QlbmError::EmptyCounts);
    }
    let d = grid.dimension();
    // anchor the unwrap frame at the mode
    let mode_site = (0..grid.sites())
        .max_by(|&a, &b| weights(a).partial_cmp(&weights(b)).unwrap())
        .unwrap();
    let mode = grid.coords(mode_site);

    let mut m1 = vec![0.0; d];
    let mut m2 = vec![vec![0.0; d]; d];
    for site in 0..grid.sites() {
        let w = weights(site) / total;
        if w == 0.0 {
            continue;
        }
        let coords = grid.coords(site);
        let delta: Vec<f64> = (0..d)
            .map(|a| wrapped_delta(coords[a] as f64, mode[a] as f64, grid.dims()[a] as f64))
            .collect();
        for a in 0..d {
            m1[a] += w * delta[a];
            for b in 0..d {
                m2[a][b] += w * delta[a] * delta[b];
            }
        }
    }
    let mean: Vec<f64> = (0..d).map(|a| mode[a] as f64 + m1[a]).collect();
    let cov: Vec<Vec<f64>> = (0..d)
        .map(|a| (0..d).map(|b| m2[a][b] - m1[a] * m1[b]).collect())
        .collect();

    let stderr = shots.map(|n| {
        let n = n as f64;
        MomentStderr {
            mean: (0..d).map(|a| (cov[a][a] / n).sqrt()).collect(),
            var: (0..d)
                .map(|a| cov[a][a] * (2.0 / (n - 1.0).max(1.0)).sqrt())
                .collect(),
            cov_xy: if d >= 2 {
                ((cov[0][0] * cov[1][1] + cov[0][1] * cov[0][1]) / (n - 1.0).max(1.0)).sqrt()
            } else {
                0.0
            },
        }
    });

    Ok(MomentEstimates {
        mean,
        cov,
        frame_mode: mode,
        shots,
        stderr,
    })
}

/// Moments of an exact grid probability distribution.
pub fn estimate_moments(dist: &[f64], grid: &Grid) -> Result<MomentEstimates> {
    if dist.len() != grid.sites() {
        return Err(QlbmError::DimensionMismatch {
            expected: grid.sites(),
            got: dist.len(),
        });
    }
    let total: f64 = dist.iter().sum();
    moments_from_weighted(grid, |s| dist[s], total, None)
}

/// Moments of measurement counts over grid sites.
pub fn estimate_moments_from_counts(counts: &Counts, grid: &Grid) -> Result<MomentEstimates> {
    if counts.is_empty() {
        return Err(QlbmError::EmptyCounts);
    }
    let total: u64 = counts.values().sum();
    moments_from_weighted(
        grid,
        |s| counts.get(&s).copied().unwrap_or(0) as f64,
        total as f64,
        Some(total),
    )
}

/// Rebuild an amplitude-level Gaussian field from measured moments.
///
/// The amplitude covariance is twice the measured-distribution covariance.
pub fn reconstruct_gaussian(moments: &MomentEstimates, grid: &Grid) -> Result<DensityField> {
    let d = grid.dimension();
    if moments.mean.len() != d {
        return Err(QlbmError::DimensionMismatch {
            expected: d,
            got: moments.mean.len(),
        });
    }
    let amp_cov = nalgebra::DMatrix::from_fn(d, d, |i, j| 2.0 * moments.cov[i][j]);
    let inv = amp_cov
        .cholesky()
        .ok_or(QlbmError::NonPositiveDefinite)?
        .inverse();
    let values: Vec<f64> = (0..grid.sites())
        .map(|site| {
            let coords = grid.coords(site);
            let delta = nalgebra::DVector::from_fn(d, |a, _| {
                wrapped_delta(coords[a] as f64, moments.mean[a], grid.dims()[a] as f64)
            });
            (-0.5 * (inv.clone() * &delta).dot(&delta)).exp()
        })
        .collect();
    let norm: f64 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    DensityField::new(grid.clone(), values.iter().map(|v| v / norm).collect())
}

/// |<a|b>| after L2 normalization of both vectors.
pub fn state_fidelity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(QlbmError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na <= 0.0 || nb <= 0.0 {
        return Err(QlbmError::ZeroNormField);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).abs())
}

pub fn field_fidelity(a: &DensityField, b: &DensityField) -> Result<f64> {
    state_fidelity(&a.values, &b.values)
}

/// Full-tomography baseline: the field estimate is the elementwise square
/// root of the empirical frequencies (all-real, non-negative amplitudes).
pub fn qst_estimate(counts: &Counts, grid: &Grid) -> Result<DensityField> {
    if counts.is_empty() {
        return Err(QlbmError::EmptyCounts);
    }
    let total: u64 = counts.values().sum();
    let values: Vec<f64> = (0..grid.sites())
        .map(|s| (counts.get(&s).copied().unwrap_or(0) as f64 / total as f64).sqrt())
        .collect();
    DensityField::new(grid.clone(), values)
}

/// Same estimator applied to an exact distribution; recovers the field
/// exactly for non-negative states.
pub fn qst_from_distribution(dist: &[f64], grid: &Grid) -> Result<DensityField> {
    DensityField::new(grid.clone(), dist.iter().map(|p| p.max(0.0).sqrt()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbm::field::{initial_field, isotropic_cov, InitialCondition};
    use approx::assert_abs_diff_eq;

    #[test]
    fn delta_distribution_has_point_moments() {
        let grid = Grid::square(16).unwrap();
        let mut dist = vec![0.0; 256];
        dist[grid.index(&[3, 9])] = 1.0;
        let m = estimate_moments(&dist, &grid).unwrap();
        assert_abs_diff_eq!(m.mean[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.mean[1], 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.cov[0][0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn moments_match_brute_force_on_exact_distribution() {
        let grid = Grid::square(16).unwrap();
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![5.0, 11.0],
                cov: vec![vec![3.0, 0.8], vec![0.8, 2.0]],
            },
            &grid,
        )
        .unwrap();
        let dist = f.born_distribution();
        let m = estimate_moments(&dist, &grid).unwrap();
        // brute force without unwrapping (packet far from boundary)
        let mut mean = [0.0; 2];
        for (s, &p) in dist.iter().enumerate() {
            let c = grid.coords(s);
            mean[0] += p * c[0] as f64;
            mean[1] += p * c[1] as f64;
        }
        let mut cov = [[0.0; 2]; 2];
        for (s, &p) in dist.iter().enumerate() {
            let c = grid.coords(s);
            for a in 0..2 {
                for b in 0..2 {
                    cov[a][b] += p * (c[a] as f64 - mean[a]) * (c[b] as f64 - mean[b]);
                }
            }
        }
        for a in 0..2 {
            assert_abs_diff_eq!(m.mean[a], mean[a], epsilon = 1e-10);
            for b in 0..2 {
                assert_abs_diff_eq!(m.cov[a][b], cov[a][b], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn gaussian_amplitudes_halve_the_covariance() {
        let grid = Grid::square(16).unwrap();
        let sigma_sq = 4.0;
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![8.0, 8.0],
                cov: isotropic_cov(2, sigma_sq.sqrt()),
            },
            &grid,
        )
        .unwrap();
        let m = estimate_moments(&f.born_distribution(), &grid).unwrap();
        assert_abs_diff_eq!(m.cov[0][0], sigma_sq / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.cov[0][1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn moments_unwrap_across_the_boundary() {
        let grid = Grid::square(16).unwrap();
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![0.5, 8.0],
                cov: isotropic_cov(2, 1.5),
            },
            &grid,
        )
        .unwrap();
        let m = estimate_moments(&f.born_distribution(), &grid).unwrap();
        // mean near 0.5 or the unwrapped image 16.5, never dragged to ~8
        let folded = (m.mean[0] % 16.0 + 16.0) % 16.0;
        assert!(folded < 1.0 || folded > 15.0, "mean {}", m.mean[0]);
        assert!(m.cov[0][0] < 2.0, "wraparound inflated variance");
    }

    #[test]
    fn gaussian_roundtrip_reconstruction() {
        let grid = Grid::square(16).unwrap();
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![8.0, 8.0],
                cov: isotropic_cov(2, 2.0),
            },
            &grid,
        )
        .unwrap();
        let m = estimate_moments(&f.born_distribution(), &grid).unwrap();
        let rec = reconstruct_gaussian(&m, &grid).unwrap();
        let fid = field_fidelity(&rec, &f).unwrap();
        assert!(fid >= 1.0 - 1e-6, "fidelity {fid}");
    }

    #[test]
    fn zero_variance_moments_rejected() {
        let grid = Grid::square(8).unwrap();
        let mut dist = vec![0.0; 64];
        dist[0] = 1.0;
        let m = estimate_moments(&dist, &grid).unwrap();
        assert!(matches!(
            reconstruct_gaussian(&m, &grid),
            Err(QlbmError::NonPositiveDefinite)
        ));
    }

    #[test]
    fn fidelity_bounds_and_degenerate_cases() {
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        assert_abs_diff_eq!(state_fidelity(&a, &a).unwrap(), 1.0);
        assert_abs_diff_eq!(state_fidelity(&a, &b).unwrap(), 0.0);
        assert!(state_fidelity(&a, &[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn gaussian_overlap_matches_analytic_value() {
        // <G_sigma | G_2sigma> = 2 / sqrt(5) in the continuum
        let n = 64usize;
        let sigma = 6.0;
        let mk = |s: f64| {
            let vals: Vec<f64> = (0..n)
                .map(|i| (-((i as f64 - 32.0) / s).powi(2) / 2.0).exp())
                .collect();
            vals
        };
        let fid = state_fidelity(&mk(sigma), &mk(2.0 * sigma)).unwrap();
        assert_abs_diff_eq!(fid, 2.0 / 5.0f64.sqrt(), epsilon = 1e-3);
    }

    #[test]
    fn qst_recovers_field_from_exact_distribution() {
        let grid = Grid::square(8).unwrap();
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![4.0, 4.0],
                cov: isotropic_cov(2, 1.4),
            },
            &grid,
        )
        .unwrap();
        let est = qst_from_distribution(&f.born_distribution(), &grid).unwrap();
        let fid = field_fidelity(&est, &f).unwrap();
        assert_abs_diff_eq!(fid, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_shot_qst_is_a_delta_estimate() {
        let grid = Grid::square(4).unwrap();
        let mut counts = Counts::new();
        counts.insert(grid.index(&[2, 1]), 1);
        let est = qst_estimate(&counts, &grid).unwrap();
        assert_abs_diff_eq!(est.values[grid.index(&[2, 1])], 1.0);
        assert_eq!(est.values.iter().filter(|&&v| v > 0.0).count(), 1);
    }
}
