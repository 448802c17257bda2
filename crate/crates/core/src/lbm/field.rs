//! Concentration fields over periodic grids and the built-in initial conditions.

use std::io::{BufRead, Write};

use crate::error::{QlbmError, Result};
use crate::lbm::grid::Grid;

/// Real-valued concentration over a grid. Values are non-negative with a
/// positive L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// Built-in initial conditions.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum InitialCondition {
    /// Gaussian bump; mean and covariance in lattice-site units.
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    /// sin(2 pi x) sin(4 pi y) + 1
    Sin2d,
    /// sin(2 pi x) sin(2 pi y) sin(2 pi z) + 1
    Sin3d,
}

impl DensityField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.sites() {
            return Err(QlbmError::DimensionMismatch {
                expected: grid.sites(),
                got: values.len(),
            });
        }
        let field = DensityField { grid, values };
        if field.l2_norm() <= 0.0 {
            return Err(QlbmError::ZeroNormField);
        }
        Ok(field)
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Values normalized to unit L2 norm.
    pub fn normalized(&self) -> Vec<f64> {
        let n = self.l2_norm();
        self.values.iter().map(|v| v / n).collect()
    }

    /// Probability of each site under Born sampling of the encoded state.
    pub fn born_distribution(&self) -> Vec<f64> {
        let n2 = self.values.iter().map(|v| v * v).sum::<f64>();
        self.values.iter().map(|v| v * v / n2).collect()
    }

    /// Serialize as CSV: header `# dims=L1[,L2[,L3]]`, one value per line,
    /// row-major order, 17 significant digits.
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let dims = self
            .grid
            .dims()
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "# dims={dims}")?;
        for v in &self.values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }

    pub fn from_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| QlbmError::InvalidConfig("empty field file".into()))??;
        let dims_str = header
            .strip_prefix("# dims=")
            .ok_or_else(|| QlbmError::InvalidConfig("missing '# dims=' header".into()))?;
        let dims: Vec<usize> = dims_str
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| QlbmError::InvalidConfig(format!("bad dim '{t}': {e}")))
            })
            .collect::<Result<_>>()?;
        let grid = Grid::new(&dims)?;
        let mut values = Vec::with_capacity(grid.sites());
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            values.push(
                t.parse::<f64>()
                    .map_err(|e| QlbmError::InvalidConfig(format!("bad value '{t}': {e}")))?,
            );
        }
        DensityField::new(grid, values)
    }
}

/// Sample an initial condition on a grid.
///
/// Analytic fields are evaluated at unit-interval coordinates x_j = i_j / L_j.
/// Gaussians use the nearest periodic image of the displacement from the mean.
pub fn initial_field(spec: &InitialCondition, grid: &Grid) -> Result<DensityField> {
    match spec {
        InitialCondition::Gaussian { mean, cov } => gaussian_field(grid, mean, cov),
        InitialCondition::Sin2d => {
            if grid.dimension() != 2 {
                return Err(QlbmError::DimensionMismatch {
                    expected: 2,
                    got: grid.dimension(),
                });
            }
            let values = (0..grid.sites())
                .map(|s| {
                    let u = grid.unit_coords(s);
                    (2.0 * std::f64::consts::PI * u[0]).sin()
                        * (4.0 * std::f64::consts::PI * u[1]).sin()
                        + 1.0
                })
                .collect();
            DensityField::new(grid.clone(), values)
        }
        InitialCondition::Sin3d => {
            if grid.dimension() != 3 {
                return Err(QlbmError::DimensionMismatch {
                    expected: 3,
                    got: grid.dimension(),
                });
            }
            let values = (0..grid.sites())
                .map(|s| {
                    let u = grid.unit_coords(s);
                    let tau = 2.0 * std::f64::consts::PI;
                    (tau * u[0]).sin() * (tau * u[1]).sin() * (tau * u[2]).sin() + 1.0
                })
                .collect();
            DensityField::new(grid.clone(), values)
        }
    }
}

/// Shortest periodic displacement from `b` to `a` on an axis of length `side`.
pub fn wrapped_delta(a: f64, b: f64, side: f64) -> f64 {
    let mut d = (a - b) % side;
    if d >= side / 2.0 {
        d -= side;
    } else if d < -side / 2.0 {
        d += side;
    }
    d
}

fn gaussian_field(grid: &Grid, mean: &[f64], cov: &[Vec<f64>]) -> Result<DensityField> {
    let d = grid.dimension();
    if mean.len() != d || cov.len() != d || cov.iter().any(|r| r.len() != d) {
        return Err(QlbmError::DimensionMismatch {
            expected: d,
            got: mean.len(),
        });
    }
    let mat = nalgebra::DMatrix::from_fn(d, d, |i, j| cov[i][j]);
    let inv = mat
        .clone()
        .cholesky()
        .ok_or(QlbmError::NonPositiveDefinite)?
        .inverse();
    let values = (0..grid.sites())
        .map(|s| {
            let coords = grid.coords(s);
            let delta = nalgebra::DVector::from_fn(d, |i, _| {
                wrapped_delta(coords[i] as f64, mean[i], grid.dims()[i] as f64)
            });
            (-0.5 * (inv.clone() * &delta).dot(&delta)).exp()
        })
        .collect();
    DensityField::new(grid.clone(), values)
}

/// Isotropic covariance helper: sigma^2 * I.
pub fn isotropic_cov(dim: usize, sigma: f64) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { sigma * sigma } else { 0.0 }).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sin3d_peak_at_quarter_period() {
        let grid = Grid::cube(8).unwrap();
        let f = initial_field(&InitialCondition::Sin3d, &grid).unwrap();
        let site = grid.index(&[2, 2, 2]); // (0.25, 0.25, 0.25)
        assert_abs_diff_eq!(f.values[site], 2.0, epsilon = 1e-12);
        assert!(f.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn sin2d_is_one_along_x_zero() {
        let grid = Grid::square(16).unwrap();
        let f = initial_field(&InitialCondition::Sin2d, &grid).unwrap();
        for y in 0..16 {
            assert_abs_diff_eq!(f.values[grid.index(&[0, y])], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gaussian_argmax_at_center() {
        let grid = Grid::square(16).unwrap();
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![8.0, 8.0],
                cov: isotropic_cov(2, 2.0),
            },
            &grid,
        )
        .unwrap();
        let argmax = f
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(grid.coords(argmax), vec![8, 8]);
    }

    #[test]
    fn gaussian_rejects_non_pd_covariance() {
        let grid = Grid::square(8).unwrap();
        let res = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![4.0, 4.0],
                cov: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
            },
            &grid,
        );
        assert!(matches!(res, Err(QlbmError::NonPositiveDefinite)));
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let grid = Grid::new(&[4, 8]).unwrap();
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![2.0, 3.5],
                cov: isotropic_cov(2, 1.3),
            },
            &grid,
        )
        .unwrap();
        let mut buf = Vec::new();
        f.to_csv(&mut buf).unwrap();
        let back = DensityField::from_csv(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.grid, f.grid);
        assert_eq!(back.values, f.values);
    }

    #[test]
    fn zero_field_rejected() {
        let grid = Grid::new(&[4]).unwrap();
        assert!(matches!(
            DensityField::new(grid, vec![0.0; 4]),
            Err(QlbmError::ZeroNormField)
        ));
    }
}
