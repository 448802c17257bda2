//! Flag-qubit error detection for the one-hot encoding.
//!
//! A cascade of CX gates from every direction qubit onto a fresh flag
//! ancilla accumulates the parity of the direction register. A legal
//! Hamming-weight-1 state drives the ancilla to |1> (the accept value); any
//! single weight-changing error leaves it at |0>.

use crate::circuits::spec::{CircuitSpec, Segment};
use crate::error::{QlbmError, Result};
use crate::qsim::gate::GateOp;
use crate::qsim::layout::{DirectionEncoding, RegisterLayout};

/// Parity check onto flag ancilla `checkpoint`.
pub fn flag_check_circuit(layout: &RegisterLayout, checkpoint: usize) -> Result<CircuitSpec> {
    if layout.encoding != DirectionEncoding::OneHot {
        return Err(QlbmError::UnsupportedSynthesis(
            "flag checks require the one-hot direction encoding".into(),
        ));
    }
    if checkpoint >= layout.flag_qubits {
        return Err(QlbmError::QubitOutOfRange {
            qubit: layout.flag_qubit(checkpoint),
            total: layout.total_qubits(),
        });
    }
    let mut circuit = CircuitSpec::new(layout.clone());
    let flag = layout.flag_qubit(checkpoint);
    for i in 0..layout.directions {
        circuit.push(Segment::FlagCheck, GateOp::cx(layout.direction_qubit(i), flag));
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::spec::apply_circuit;
    use crate::lbm::grid::Grid;
    use crate::qsim::state::init_state;
    use approx::assert_abs_diff_eq;

    fn layout() -> RegisterLayout {
        let grid = Grid::new(&[2]).unwrap();
        RegisterLayout::new(&grid, 5, DirectionEncoding::OneHot, 0, 2).unwrap()
    }

    #[test]
    fn weight_one_state_sets_flag() {
        let layout = layout();
        let c = flag_check_circuit(&layout, 0).unwrap();
        assert_eq!(c.gate_count(), 5);
        let mut s = init_state(&layout).unwrap();
        s.apply_gate(&GateOp::x(layout.direction_qubit(2))).unwrap();
        apply_circuit(&mut s, &c).unwrap();
        let expect = (1usize << layout.direction_qubit(2)) | (1usize << layout.flag_qubit(0));
        assert_abs_diff_eq!(s.amps[expect].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn weight_two_error_leaves_flag_clear() {
        let layout = layout();
        let c = flag_check_circuit(&layout, 0).unwrap();
        let mut s = init_state(&layout).unwrap();
        s.apply_gate(&GateOp::x(layout.direction_qubit(2))).unwrap();
        s.apply_gate(&GateOp::x(layout.direction_qubit(4))).unwrap(); // injected error
        apply_circuit(&mut s, &c).unwrap();
        let expect =
            (1usize << layout.direction_qubit(2)) | (1usize << layout.direction_qubit(4));
        assert_abs_diff_eq!(s.amps[expect].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn weight_zero_state_flagged() {
        let layout = layout();
        let c = flag_check_circuit(&layout, 1).unwrap();
        let mut s = init_state(&layout).unwrap();
        apply_circuit(&mut s, &c).unwrap();
        assert_abs_diff_eq!(s.amps[0].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dense_encoding_rejected() {
        let grid = Grid::new(&[2]).unwrap();
        let dense = RegisterLayout::new(&grid, 5, DirectionEncoding::Dense, 0, 1).unwrap();
        assert!(flag_check_circuit(&dense, 0).is_err());
    }
}
