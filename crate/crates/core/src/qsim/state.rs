//! Dense statevector simulation with register-level post-selection.

use num_complex::Complex64;

use crate::error::{QlbmError, Result};
use crate::lbm::field::DensityField;
use crate::qsim::gate::{GateKind, GateOp};
use crate::qsim::layout::{Register, RegisterLayout};

type C64 = Complex64;

/// Complex amplitude vector over the full register layout, little-endian.
#[derive(Debug, Clone)]
pub struct QuantumState {
    pub layout: RegisterLayout,
    pub amps: Vec<C64>,
}

/// Outcome of projecting a register during execution.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MeasurementRecord {
    pub register: Register,
    pub outcome: usize,
    pub probability: f64,
}

/// All-zeros state for a layout.
pub fn init_state(layout: &RegisterLayout) -> Result<QuantumState> {
    let n = layout.total_qubits();
    if n == 0 {
        return Err(QlbmError::EmptyLayout);
    }
    if n > crate::qsim::layout::MAX_QUBITS {
        return Err(QlbmError::TooManyQubits(n));
    }
    let mut amps = vec![C64::new(0.0, 0.0); 1usize << n];
    amps[0] = C64::new(1.0, 0.0);
    Ok(QuantumState {
        layout: layout.clone(),
        amps,
    })
}

/// Write a normalized field directly into the grid register amplitudes.
/// All other registers must be in |0>; used as the exact loader path.
pub fn load_exact_amplitudes(state: &mut QuantumState, field: &DensityField) -> Result<()> {
    let sites = field.grid.sites();
    let n_g = state.layout.grid_qubits;
    if sites != 1usize << n_g {
        return Err(QlbmError::DimensionMismatch {
            expected: 1usize << n_g,
            got: sites,
        });
    }
    let norm = field.l2_norm();
    if norm <= 0.0 {
        return Err(QlbmError::ZeroNormField);
    }
    for amp in state.amps.iter_mut() {
        *amp = C64::new(0.0, 0.0);
    }
    for (site, v) in field.values.iter().enumerate() {
        state.amps[site] = C64::new(v / norm, 0.0);
    }
    Ok(())
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Born-rule probabilities over the full register.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Marginal probability distribution of one register.
    pub fn register_marginal(&self, reg: Register) -> Vec<f64> {
        let range = self.layout.register_qubits(reg);
        let width = range.end - range.start;
        let mut out = vec![0.0; 1usize << width];
        for (basis, amp) in self.amps.iter().enumerate() {
            out[self.layout.extract(basis, reg)] += amp.norm_sqr();
        }
        out
    }

    /// Grid-register amplitudes when every other register is exactly in |0>.
    pub fn grid_amplitudes(&self) -> Vec<C64> {
        let n_g = self.layout.grid_qubits;
        self.amps[..1usize << n_g].to_vec()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits() {
            return Err(QlbmError::QubitOutOfRange {
                qubit: q,
                total: self.n_qubits(),
            });
        }
        Ok(())
    }

    /// Apply a single gate in place.
    pub fn apply_gate(&mut self, gate: &GateOp) -> Result<()> {
        for &t in &gate.targets {
            self.check_qubit(t)?;
        }
        for c in &gate.controls {
            self.check_qubit(c.qubit)?;
        }
        let ctrl_mask: usize = gate.controls.iter().map(|c| 1usize << c.qubit).sum();
        let ctrl_value: usize = gate
            .controls
            .iter()
            .filter(|c| c.value)
            .map(|c| 1usize << c.qubit)
            .sum();

        match &gate.kind {
            GateKind::X => {
                let t = 1usize << gate.targets[0];
                for i in 0..self.amps.len() {
                    if i & t == 0 && i & ctrl_mask == ctrl_value && (i | t) & ctrl_mask == ctrl_value
                    {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            GateKind::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_1q(gate.targets[0], ctrl_mask, ctrl_value, |a0, a1| {
                    ((a0 + a1) * s, (a0 - a1) * s)
                });
            }
            GateKind::Ry(theta) => {
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                self.apply_1q(gate.targets[0], ctrl_mask, ctrl_value, |a0, a1| {
                    (a0 * c - a1 * s, a0 * s + a1 * c)
                });
            }
            GateKind::Rbs(theta) => {
                // rotation in the (|01>, |10>) subspace of (hi, lo)
                let (c, s) = (theta.cos(), theta.sin());
                let hi = 1usize << gate.targets[0];
                let lo = 1usize << gate.targets[1];
                for i in 0..self.amps.len() {
                    if i & hi == 0 && i & lo != 0 {
                        let j = (i & !lo) | hi;
                        let in_ctrl = |b: usize| b & ctrl_mask == ctrl_value;
                        if in_ctrl(i) && in_ctrl(j) {
                            let a01 = self.amps[i];
                            let a10 = self.amps[j];
                            self.amps[i] = a01 * c - a10 * s;
                            self.amps[j] = a01 * s + a10 * c;
                        }
                    }
                }
            }
            GateKind::Unitary4(m) => {
                let hi = 1usize << gate.targets[0];
                let lo = 1usize << gate.targets[1];
                for i in 0..self.amps.len() {
                    if i & hi == 0 && i & lo == 0 && i & ctrl_mask == ctrl_value {
                        let idx = [i, i | lo, i | hi, i | hi | lo];
                        if idx.iter().all(|&b| b & ctrl_mask == ctrl_value) {
                            let v = [
                                self.amps[idx[0]],
                                self.amps[idx[1]],
                                self.amps[idx[2]],
                                self.amps[idx[3]],
                            ];
                            for (r, &b) in idx.iter().enumerate() {
                                self.amps[b] = m[r][0] * v[0]
                                    + m[r][1] * v[1]
                                    + m[r][2] * v[2]
                                    + m[r][3] * v[3];
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn apply_1q<F: Fn(C64, C64) -> (C64, C64)>(
        &mut self,
        target: usize,
        ctrl_mask: usize,
        ctrl_value: usize,
        f: F,
    ) {
        let t = 1usize << target;
        for i in 0..self.amps.len() {
            if i & t == 0 {
                let j = i | t;
                if i & ctrl_mask == ctrl_value && j & ctrl_mask == ctrl_value {
                    let (a0, a1) = f(self.amps[i], self.amps[j]);
                    self.amps[i] = a0;
                    self.amps[j] = a1;
                }
            }
        }
    }

    /// Project a register onto a basis outcome, renormalize, and return the
    /// outcome probability. Fails when the outcome carries essentially no
    /// probability mass.
    pub fn post_select(&mut self, reg: Register, outcome: usize) -> Result<MeasurementRecord> {
        let range = self.layout.register_qubits(reg);
        let width = range.end - range.start;
        let mask = ((1usize << width) - 1) << range.start;
        let want = outcome << range.start;
        let mut p = 0.0;
        for (basis, amp) in self.amps.iter().enumerate() {
            if basis & mask == want {
                p += amp.norm_sqr();
            }
        }
        if p < 1e-14 {
            return Err(QlbmError::PostSelectionImpossible(p));
        }
        let scale = 1.0 / p.sqrt();
        for (basis, amp) in self.amps.iter_mut().enumerate() {
            if basis & mask == want {
                *amp *= scale;
            } else {
                *amp = C64::new(0.0, 0.0);
            }
        }
        Ok(MeasurementRecord {
            register: reg,
            outcome,
            probability: p,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbm::field::{initial_field, isotropic_cov, InitialCondition};
    use crate::lbm::grid::Grid;
    use crate::qsim::gate::Control;
    use crate::qsim::layout::DirectionEncoding;
    use approx::assert_abs_diff_eq;

    fn small_layout(n: usize) -> RegisterLayout {
        // n grid qubits only
        let grid = Grid::new(&[1usize << n]).unwrap();
        RegisterLayout::grid_only(&grid).unwrap()
    }

    #[test]
    fn init_state_is_all_zeros() {
        let s = init_state(&small_layout(3)).unwrap();
        assert_eq!(s.amps.len(), 8);
        assert_abs_diff_eq!(s.amps[0].re, 1.0);
        assert!(s.amps[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn oversized_layout_rejected() {
        let grid = Grid::new(&[1usize << 16]).unwrap();
        let mut layout = RegisterLayout::grid_only(&grid).unwrap();
        layout.ancilla_qubits = 15; // push past 30
        assert!(matches!(
            init_state(&layout),
            Err(QlbmError::TooManyQubits(31))
        ));
    }

    #[test]
    fn x_flips_least_significant_qubit() {
        let mut s = init_state(&small_layout(3)).unwrap();
        s.apply_gate(&GateOp::x(0)).unwrap();
        assert_abs_diff_eq!(s.amps[1].re, 1.0);
    }

    #[test]
    fn h_is_involutive() {
        let mut s = init_state(&small_layout(2)).unwrap();
        s.apply_gate(&GateOp::x(1)).unwrap();
        s.apply_gate(&GateOp::h(0)).unwrap();
        s.apply_gate(&GateOp::h(0)).unwrap();
        assert_abs_diff_eq!(s.amps[2].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn open_controls_fire_on_zero() {
        let mut s = init_state(&small_layout(3)).unwrap();
        let g = GateOp::mcx(vec![Control::open(1), Control::open(2)], 0);
        s.apply_gate(&g).unwrap();
        assert_abs_diff_eq!(s.amps[0b001].re, 1.0);
    }

    #[test]
    fn rbs_rotates_one_hot_pair() {
        let mut s = init_state(&small_layout(2)).unwrap();
        s.apply_gate(&GateOp::x(0)).unwrap(); // |01> with (hi=1, lo=0)
        let theta = 0.3;
        s.apply_gate(&GateOp::rbs(1, 0, theta)).unwrap();
        assert_abs_diff_eq!(s.amps[0b01].re, theta.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.amps[0b10].re, theta.sin(), epsilon = 1e-12);
    }

    #[test]
    fn load_exact_amplitudes_normalizes() {
        let grid = Grid::square(4).unwrap();
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![2.0, 2.0],
                cov: isotropic_cov(2, 1.0),
            },
            &grid,
        )
        .unwrap();
        let layout = RegisterLayout::grid_only(&grid).unwrap();
        let mut s = init_state(&layout).unwrap();
        load_exact_amplitudes(&mut s, &f).unwrap();
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        // amplitude ratios equal field ratios
        let r_state = s.amps[5].re / s.amps[6].re;
        let r_field = f.values[5] / f.values[6];
        assert_abs_diff_eq!(r_state, r_field, epsilon = 1e-12);
    }

    #[test]
    fn delta_field_loads_single_basis_state() {
        let grid = Grid::new(&[8]).unwrap();
        let mut values = vec![0.0; 8];
        values[5] = 2.5;
        let f = DensityField::new(grid.clone(), values).unwrap();
        let layout = RegisterLayout::grid_only(&grid).unwrap();
        let mut s = init_state(&layout).unwrap();
        load_exact_amplitudes(&mut s, &f).unwrap();
        assert_abs_diff_eq!(s.amps[5].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn post_select_on_equal_superposition() {
        let mut s = init_state(&small_layout(1)).unwrap();
        s.apply_gate(&GateOp::h(0)).unwrap();
        let rec = s.post_select(Register::Grid, 0).unwrap();
        assert_abs_diff_eq!(rec.probability, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amps[0].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn post_select_already_in_subspace_is_identity() {
        let grid = Grid::new(&[4]).unwrap();
        let layout = RegisterLayout::new(&grid, 2, DirectionEncoding::Dense, 0, 0).unwrap();
        let mut s = init_state(&layout).unwrap();
        s.apply_gate(&GateOp::h(0)).unwrap();
        s.apply_gate(&GateOp::h(1)).unwrap();
        let before = s.amps.clone();
        let rec = s.post_select(Register::Direction, 0).unwrap();
        assert_abs_diff_eq!(rec.probability, 1.0, epsilon = 1e-12);
        for (a, b) in s.amps.iter().zip(&before) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
        }
    }

    #[test]
    fn impossible_post_selection_errors() {
        let mut s = init_state(&small_layout(2)).unwrap();
        assert!(matches!(
            s.post_select(Register::Grid, 3),
            Err(QlbmError::PostSelectionImpossible(_))
        ));
    }
}
