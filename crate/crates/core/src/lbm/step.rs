//! Classical lattice Boltzmann update, the correctness oracle for the
//! quantum pipeline.

use crate::error::{QlbmError, Result};
use crate::lbm::field::DensityField;
use crate::lbm::lattice::LatticeModel;
use crate::lbm::velocity::KField;

/// One relaxation-to-equilibrium step:
///
/// `phi'(x) = sum_i k_i(x - c_i) phi(x - c_i)` with periodic wraparound.
///
/// Mass is conserved whenever the incoming weights sum to one at every site.
pub fn classical_step(
    field: &DensityField,
    kfield: &KField,
    model: &LatticeModel,
) -> Result<DensityField> {
    if field.grid != kfield.grid {
        return Err(QlbmError::DimensionMismatch {
            expected: kfield.grid.sites(),
            got: field.grid.sites(),
        });
    }
    if kfield.directions != model.directions() {
        return Err(QlbmError::DimensionMismatch {
            expected: model.directions(),
            got: kfield.directions,
        });
    }
    let grid = &field.grid;
    let mut out = vec![0.0; grid.sites()];
    for (site, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, c) in model.velocities.iter().enumerate() {
            let src = grid.shift(site, &c.iter().map(|x| -x).collect::<Vec<_>>());
            acc += kfield.k(src, i) * field.values[src];
        }
        *slot = acc;
    }
    DensityField::new(grid.clone(), out)
}

/// Apply `classical_step` T times.
pub fn evolve(
    field: &DensityField,
    kfield: &KField,
    model: &LatticeModel,
    steps: usize,
) -> Result<Vec<DensityField>> {
    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push(field.clone());
    for _ in 0..steps {
        let next = classical_step(trajectory.last().unwrap(), kfield, model)?;
        trajectory.push(next);
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbm::field::{initial_field, isotropic_cov, InitialCondition};
    use crate::lbm::grid::Grid;
    use crate::lbm::lattice::{make_model, ModelName};
    use crate::lbm::velocity::{check_stochastic_consistency, compute_k_field, VelocityField};
    use approx::assert_abs_diff_eq;

    fn uniform_setup(u: Vec<f64>) -> (LatticeModel, Grid, KField) {
        let model = make_model(ModelName::D2Q5);
        let grid = Grid::square(8).unwrap();
        let k = compute_k_field(&model, &VelocityField::Uniform(u), &grid).unwrap();
        (model, grid, k)
    }

    #[test]
    fn constant_field_is_fixed_point_under_diffusion() {
        let (model, grid, k) = uniform_setup(vec![0.0, 0.0]);
        let f = DensityField::new(grid, vec![1.0; 64]).unwrap();
        let next = classical_step(&f, &k, &model).unwrap();
        for v in &next.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn delta_spike_spreads_with_stencil_weights() {
        let (model, grid, k) = uniform_setup(vec![0.0, 0.0]);
        let mut values = vec![0.0; 64];
        let center = grid.index(&[4, 4]);
        values[center] = 1.0;
        let f = DensityField::new(grid.clone(), values).unwrap();
        let next = classical_step(&f, &k, &model).unwrap();
        assert_abs_diff_eq!(next.values[center], 1.0 / 3.0, epsilon = 1e-14);
        for c in [[5usize, 4usize], [3, 4], [4, 5], [4, 3]] {
            assert_abs_diff_eq!(next.values[grid.index(&c)], 1.0 / 6.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(next.total_mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mass_conserved_when_consistent() {
        let model = make_model(ModelName::D2Q5);
        let grid = Grid::square(16).unwrap();
        let k = compute_k_field(&model, &VelocityField::Swirl2d, &grid).unwrap();
        assert!(check_stochastic_consistency(&k, &model).pass);
        let f = initial_field(&InitialCondition::Sin2d, &grid).unwrap();
        let next = classical_step(&f, &k, &model).unwrap();
        let rel = (next.total_mass() - f.total_mass()).abs() / f.total_mass();
        assert!(rel < 1e-10, "relative mass drift {rel}");
    }

    #[test]
    fn diffusion_is_norm_nonincreasing() {
        let (model, grid, k) = uniform_setup(vec![0.0, 0.0]);
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![4.0, 4.0],
                cov: isotropic_cov(2, 1.5),
            },
            &grid,
        )
        .unwrap();
        let mut prev = f;
        for _ in 0..5 {
            let next = classical_step(&prev, &k, &model).unwrap();
            assert!(next.l2_norm() <= prev.l2_norm() + 1e-12);
            assert!(next.values.iter().all(|&v| v >= 0.0));
            prev = next;
        }
    }

    #[test]
    fn uniform_advection_commutes_with_shift() {
        let (model, grid, k) = uniform_setup(vec![0.125, 0.125]);
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![3.0, 5.0],
                cov: isotropic_cov(2, 1.2),
            },
            &grid,
        )
        .unwrap();
        let shift_field = |f: &DensityField| {
            let values = (0..grid.sites())
                .map(|s| f.values[grid.shift(s, &[-1, 0])])
                .collect();
            DensityField::new(grid.clone(), values).unwrap()
        };
        let a = classical_step(&shift_field(&f), &k, &model).unwrap();
        let b = shift_field(&classical_step(&f, &k, &model).unwrap());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-13);
        }
    }
}
