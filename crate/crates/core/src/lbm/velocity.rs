//! Velocity fields and per-direction collision weights k_i(x).

use crate::error::{QlbmError, Result};
use crate::lbm::grid::Grid;
use crate::lbm::lattice::LatticeModel;

/// An advection velocity field, resolvable at every lattice site.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum VelocityField {
    /// Constant velocity.
    Uniform(Vec<f64>),
    /// 2D swirl: u = ( sin(-2 pi y)/3, sin(2 pi x)/3 ).
    Swirl2d,
    /// 3D swirl: u = ( sin(-2 pi z)/3, 1/3, sin(2 pi x)/3 ).
    Swirl3d,
    /// Tabulated velocity per site (row-major).
    Custom(Vec<Vec<f64>>),
}

impl VelocityField {
    /// Velocity at a site, using unit-interval coordinates for the analytic fields.
    pub fn at(&self, grid: &Grid, site: usize) -> Vec<f64> {
        let tau = 2.0 * std::f64::consts::PI;
        match self {
            VelocityField::Uniform(u) => u.clone(),
            VelocityField::Swirl2d => {
                let c = grid.unit_coords(site);
                vec![(-tau * c[1]).sin() / 3.0, (tau * c[0]).sin() / 3.0]
            }
            VelocityField::Swirl3d => {
                let c = grid.unit_coords(site);
                vec![
                    (-tau * c[2]).sin() / 3.0,
                    1.0 / 3.0,
                    (tau * c[0]).sin() / 3.0,
                ]
            }
            VelocityField::Custom(table) => table[site].clone(),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, VelocityField::Uniform(_))
    }
}

/// Collision weights k_i(x) = w_i (1 + c_i . u(x) / c_s^2), one row per site.
#[derive(Debug, Clone)]
pub struct KField {
    pub grid: Grid,
    pub directions: usize,
    values: Vec<f64>,
}

impl KField {
    pub fn k(&self, site: usize, direction: usize) -> f64 {
        self.values[site * self.directions + direction]
    }

    pub fn row(&self, site: usize) -> &[f64] {
        &self.values[site * self.directions..(site + 1) * self.directions]
    }
}

/// Evaluate the collision weights of a velocity field on a grid.
///
/// Rejects any site where a weight would go negative (velocity too large for
/// the lattice); weights within 1e-12 below zero are clamped to zero.
pub fn compute_k_field(model: &LatticeModel, vel: &VelocityField, grid: &Grid) -> Result<KField> {
    if grid.dimension() != model.dimension {
        return Err(QlbmError::DimensionMismatch {
            expected: model.dimension,
            got: grid.dimension(),
        });
    }
    let m = model.directions();
    let mut values = Vec::with_capacity(grid.sites() * m);
    for site in 0..grid.sites() {
        let u = vel.at(grid, site);
        for (i, c) in model.velocities.iter().enumerate() {
            let cu: f64 = c.iter().zip(&u).map(|(&ci, &ui)| ci as f64 * ui).sum();
            let k = model.weights[i] * (1.0 + cu / model.sound_speed_sq);
            if k < -1e-12 {
                return Err(QlbmError::NegativeWeight {
                    site,
                    direction: i,
                    value: k,
                });
            }
            values.push(k.max(0.0));
        }
    }
    Ok(KField {
        grid: grid.clone(),
        directions: m,
        values,
    })
}

/// Report of the unitarity condition `sum_i k_i(x - c_i) = 1`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StochasticConsistencyReport {
    pub max_deviation: f64,
    pub worst_site: usize,
    pub pass: bool,
}

/// Check that the incoming weights sum to one at every site (the condition
/// under which the combined collision/streaming block is realizable as a
/// post-selected unitary and the classical step conserves mass).
pub fn check_stochastic_consistency(
    kfield: &KField,
    model: &LatticeModel,
) -> StochasticConsistencyReport {
    let grid = &kfield.grid;
    let mut max_deviation = 0.0;
    let mut worst_site = 0;
    for site in 0..grid.sites() {
        let mut sum = 0.0;
        for (i, c) in model.velocities.iter().enumerate() {
            let src = grid.shift(site, &c.iter().map(|x| -x).collect::<Vec<_>>());
            sum += kfield.k(src, i);
        }
        let dev = (sum - 1.0).abs();
        if dev > max_deviation {
            max_deviation = dev;
            worst_site = site;
        }
    }
    StochasticConsistencyReport {
        max_deviation,
        worst_site,
        pass: max_deviation <= 1e-12,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbm::lattice::{make_model, ModelName};
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_velocity_reduces_to_weights() {
        let model = make_model(ModelName::D2Q5);
        let grid = Grid::square(8).unwrap();
        let k = compute_k_field(&model, &VelocityField::Uniform(vec![0.0, 0.0]), &grid).unwrap();
        for site in 0..grid.sites() {
            for i in 0..5 {
                assert_abs_diff_eq!(k.k(site, i), model.weights[i], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn k_rows_sum_to_one() {
        let model = make_model(ModelName::D2Q5);
        let grid = Grid::square(16).unwrap();
        let k = compute_k_field(&model, &VelocityField::Swirl2d, &grid).unwrap();
        for site in 0..grid.sites() {
            let sum: f64 = k.row(site).iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            assert!(k.row(site).iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn d3q7_swirl_matches_closed_form() {
        let model = make_model(ModelName::D3Q7);
        let grid = Grid::cube(8).unwrap();
        let k = compute_k_field(&model, &VelocityField::Swirl3d, &grid).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        for site in 0..grid.sites() {
            let u = grid.unit_coords(site);
            // direction (1,0,0): k = (1 - sin 2 pi z) / 8
            assert_abs_diff_eq!(
                k.k(site, 1),
                (1.0 - (tau * u[2]).sin()) / 8.0,
                epsilon = 1e-13
            );
            // direction (0,-1,0): k = 0 everywhere
            assert_abs_diff_eq!(k.k(site, 4), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn too_fast_velocity_is_rejected_with_site() {
        let model = make_model(ModelName::D2Q5);
        let grid = Grid::square(4).unwrap();
        let mut table = vec![vec![0.0, 0.0]; grid.sites()];
        table[5] = vec![-0.5, 0.0]; // |c.u|/cs^2 = 1.5 > 1
        let err = compute_k_field(&model, &VelocityField::Custom(table), &grid).unwrap_err();
        match err {
            QlbmError::NegativeWeight { site, .. } => assert_eq!(site, 5),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn uniform_field_is_consistent() {
        let model = make_model(ModelName::D2Q5);
        let grid = Grid::square(8).unwrap();
        let k = compute_k_field(
            &model,
            &VelocityField::Uniform(vec![0.125, 0.125]),
            &grid,
        )
        .unwrap();
        let report = check_stochastic_consistency(&k, &model);
        assert!(report.pass);
        assert_abs_diff_eq!(report.max_deviation, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn swirl3d_satisfies_unitarity_on_8_cubed() {
        let model = make_model(ModelName::D3Q7);
        let grid = Grid::cube(8).unwrap();
        let k = compute_k_field(&model, &VelocityField::Swirl3d, &grid).unwrap();
        let report = check_stochastic_consistency(&k, &model);
        assert!(report.pass, "deviation {}", report.max_deviation);
    }

    #[test]
    fn violating_field_reports_failing_site() {
        let model = make_model(ModelName::D2Q5);
        let grid = Grid::square(4).unwrap();
        // x-velocity varying along x breaks the incoming-weight sum
        let table: Vec<Vec<f64>> = (0..grid.sites())
            .map(|s| {
                let c = grid.coords(s);
                vec![if c[0] == 0 { 0.25 } else { 0.0 }, 0.0]
            })
            .collect();
        let k = compute_k_field(&model, &VelocityField::Custom(table), &grid).unwrap();
        let report = check_stochastic_consistency(&k, &model);
        assert!(!report.pass);
        assert!(report.max_deviation > 1e-3);
    }
}
