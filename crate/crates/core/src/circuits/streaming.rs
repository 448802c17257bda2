//! Streaming operator synthesis: per-direction cyclic shifts of the grid
//! coordinate registers, controlled on the direction register.
//!
//! A cyclic increment on an m-qubit coordinate register is a descending
//! ladder of multi-controlled X gates (flip bit j when all lower bits are 1),
//! a decrement uses open controls (flip bit j when all lower bits are 0).
//! Every rung additionally carries the direction controls: a single qubit
//! under the one-hot encoding, the full binary code word under dense.

use crate::circuits::prep::dense_codes;
use crate::circuits::spec::{CircuitSpec, Segment};
use crate::error::{QlbmError, Result};
use crate::lbm::grid::Grid;
use crate::lbm::lattice::LatticeModel;
use crate::qsim::gate::{Control, GateOp};
use crate::qsim::layout::{DirectionEncoding, Register, RegisterLayout};

/// Controls selecting direction `i` in the given encoding.
pub fn direction_controls(layout: &RegisterLayout, model: &LatticeModel, i: usize) -> Vec<Control> {
    match layout.encoding {
        DirectionEncoding::OneHot => vec![Control::filled(layout.direction_qubit(i))],
        DirectionEncoding::Dense => {
            let code = dense_codes(model)[i];
            let start = layout.register_qubits(Register::Direction).start;
            (0..layout.direction_qubits)
                .map(|b| Control {
                    qubit: start + b,
                    value: code >> b & 1 == 1,
                })
                .collect()
        }
    }
}

/// Gates shifting the grid register by velocity `c_i`, controlled on
/// direction `i`.
pub fn streaming_for_direction(
    model: &LatticeModel,
    layout: &RegisterLayout,
    i: usize,
) -> Vec<GateOp> {
    let dir = direction_controls(layout, model, i);
    let mut gates = Vec::new();
    for (axis, &step) in model.velocities[i].iter().enumerate() {
        if step == 0 {
            continue;
        }
        let range = layout.coord_register(axis);
        let m = range.end - range.start;
        let up = step > 0;
        for j in (0..m).rev() {
            let mut controls = dir.clone();
            for t in 0..j {
                controls.push(Control {
                    qubit: range.start + t,
                    value: up,
                });
            }
            gates.push(GateOp::mcx(controls, range.start + j));
        }
    }
    gates
}

/// The full streaming operator: shifts for every nonzero direction applied
/// in direction order. The rest direction contributes no gates.
pub fn streaming_circuit(
    model: &LatticeModel,
    grid: &Grid,
    layout: &RegisterLayout,
) -> Result<CircuitSpec> {
    if layout.directions != model.directions() {
        return Err(QlbmError::DimensionMismatch {
            expected: model.directions(),
            got: layout.directions,
        });
    }
    if layout.coord_qubits != grid.coord_qubits() {
        return Err(QlbmError::DimensionMismatch {
            expected: grid.total_qubits(),
            got: layout.grid_qubits,
        });
    }
    let mut circuit = CircuitSpec::new(layout.clone());
    for i in model.nonzero_directions() {
        for gate in streaming_for_direction(model, layout, i) {
            circuit.push(Segment::Streaming, gate);
        }
    }
    Ok(circuit)
}
