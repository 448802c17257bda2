//! Noise-estimation companion circuit: the step circuit with its collision
//! unitaries removed. With the direction register pinned to |0...0> the
//! streaming controls never fire, so the ideal companion reproduces the
//! state-preparation output exactly while sharing the step's structure.

use crate::circuits::spec::{CircuitItem, CircuitSpec, Segment};
use crate::error::{QlbmError, Result};
use crate::qsim::layout::Register;

/// Strip Prep/Unprep segments from a tagged step circuit. Flag markers are
/// re-pointed at the all-zero outcome, which is the companion's ideal flag
/// value (no direction qubit ever fires the parity cascade).
pub fn noise_estimation_circuit(step: &CircuitSpec) -> Result<CircuitSpec> {
    if !step.has_segment(Segment::Prep) && !step.has_segment(Segment::Unprep) {
        return Err(QlbmError::UntaggedCircuit);
    }
    let mut out = CircuitSpec::new(step.layout.clone());
    for item in &step.items {
        match item {
            CircuitItem::Gate { segment, op } => {
                if !matches!(segment, Segment::Prep | Segment::Unprep) {
                    out.push(*segment, op.clone());
                }
            }
            CircuitItem::Marker(m) => {
                if m.register == Register::Flag {
                    out.push_marker(Register::Flag, 0);
                } else {
                    out.items.push(CircuitItem::Marker(*m));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::spec::Segment;
    use crate::lbm::grid::Grid;
    use crate::qsim::gate::GateOp;
    use crate::qsim::layout::{DirectionEncoding, RegisterLayout};

    #[test]
    fn untagged_circuit_rejected() {
        let grid = Grid::new(&[4]).unwrap();
        let layout = RegisterLayout::grid_only(&grid).unwrap();
        let mut c = CircuitSpec::new(layout);
        c.push(Segment::Streaming, GateOp::x(0));
        assert!(matches!(
            noise_estimation_circuit(&c),
            Err(QlbmError::UntaggedCircuit)
        ));
    }

    #[test]
    fn gate_count_drops_by_collision_segments() {
        let grid = Grid::new(&[4]).unwrap();
        let layout = RegisterLayout::new(&grid, 5, DirectionEncoding::OneHot, 0, 0).unwrap();
        let mut c = CircuitSpec::new(layout);
        c.push(Segment::Loader, GateOp::x(0));
        c.push(Segment::Prep, GateOp::x(2));
        c.push(Segment::Prep, GateOp::ry(2, 0.5));
        c.push(Segment::Streaming, GateOp::cx(2, 0));
        c.push(Segment::Unprep, GateOp::ry(2, -0.5));
        let est = noise_estimation_circuit(&c).unwrap();
        let prep_count = c.gates_in(Segment::Prep).count() + c.gates_in(Segment::Unprep).count();
        assert_eq!(est.gate_count(), c.gate_count() - prep_count);
        assert_eq!(est.gate_count(), 2);
    }
}
