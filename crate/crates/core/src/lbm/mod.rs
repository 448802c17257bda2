//! Classical lattice Boltzmann reference solver for the advection-diffusion
//! equation, with relaxation fixed at one: the full update collapses to
//! `phi'(x) = sum_i k_i(x - c_i) phi(x - c_i)` on a periodic grid.

pub mod field;
pub mod grid;
pub mod lattice;
pub mod step;
pub mod velocity;

pub use field::{initial_field, isotropic_cov, DensityField, InitialCondition};
pub use grid::Grid;
pub use lattice::{make_model, LatticeModel, ModelName};
pub use step::{classical_step, evolve};
pub use velocity::{
    check_stochastic_consistency, compute_k_field, KField, StochasticConsistencyReport,
    VelocityField,
};
