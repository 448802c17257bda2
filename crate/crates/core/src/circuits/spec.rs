//! Circuit container: an ordered gate list with segment tags, mid-circuit
//! post-selection markers and two-qubit cost annotations.

use std::io::Write;

use crate::error::Result;
use crate::qsim::gate::GateOp;
use crate::qsim::layout::{Register, RegisterLayout};
use crate::qsim::state::{MeasurementRecord, QuantumState};

/// Which stage of a QLBM step a gate belongs to. The noise-estimation
/// companion is derived by dropping the collision segments (Prep/Unprep).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Segment {
    Loader,
    Prep,
    Streaming,
    FlagCheck,
    Unprep,
}

/// Deferred mid-circuit measurement: project `register` onto `outcome`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PostSelectMarker {
    pub register: Register,
    pub outcome: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CircuitItem {
    Gate { segment: Segment, op: GateOp },
    Marker(PostSelectMarker),
}

#[derive(Debug, Clone)]
pub struct CircuitSpec {
    pub layout: RegisterLayout,
    pub items: Vec<CircuitItem>,
}

impl CircuitSpec {
    pub fn new(layout: RegisterLayout) -> Self {
        CircuitSpec {
            layout,
            items: Vec::new(),
        }
    }

    pub fn push(&mut self, segment: Segment, op: GateOp) {
        self.items.push(CircuitItem::Gate { segment, op });
    }

    pub fn push_marker(&mut self, register: Register, outcome: usize) {
        self.items
            .push(CircuitItem::Marker(PostSelectMarker { register, outcome }));
    }

    pub fn extend(&mut self, other: &CircuitSpec) {
        self.items.extend(other.items.iter().cloned());
    }

    pub fn gates(&self) -> impl Iterator<Item = &GateOp> {
        self.items.iter().filter_map(|item| match item {
            CircuitItem::Gate { op, .. } => Some(op),
            CircuitItem::Marker(_) => None,
        })
    }

    pub fn gates_in(&self, segment: Segment) -> impl Iterator<Item = &GateOp> + '_ {
        self.items.iter().filter_map(move |item| match item {
            CircuitItem::Gate { segment: s, op } if *s == segment => Some(op),
            _ => None,
        })
    }

    pub fn gate_count(&self) -> usize {
        self.gates().count()
    }

    /// Total two-qubit budget under the per-gate annotation convention.
    pub fn total_cx_cost(&self) -> usize {
        self.gates().map(|g| g.cx_cost()).sum()
    }

    pub fn has_segment(&self, segment: Segment) -> bool {
        self.items
            .iter()
            .any(|i| matches!(i, CircuitItem::Gate { segment: s, .. } if *s == segment))
    }

    /// Gate-for-gate reversed adjoint of the unitary part. Markers are
    /// dropped; segment tags are kept with Prep and Unprep swapped.
    pub fn adjoint(&self) -> CircuitSpec {
        let mut out = CircuitSpec::new(self.layout.clone());
        for item in self.items.iter().rev() {
            if let CircuitItem::Gate { segment, op } = item {
                let segment = match segment {
                    Segment::Prep => Segment::Unprep,
                    Segment::Unprep => Segment::Prep,
                    s => *s,
                };
                out.push(segment, op.adjoint());
            }
        }
        out
    }

    /// Line-oriented text serialization:
    /// `GATE name t=<targets> c=<+/-qubit,...> p=<params> // cx_cost=k`
    /// and `MARKER postselect <register> <outcome>` lines.
    pub fn to_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# qubits={} grid={} direction={} ancilla={} flag={}",
            self.layout.total_qubits(),
            self.layout.grid_qubits,
            self.layout.direction_qubits,
            self.layout.ancilla_qubits,
            self.layout.flag_qubits
        )?;
        for item in &self.items {
            match item {
                CircuitItem::Gate { segment, op } => {
                    let targets = op
                        .targets
                        .iter()
                        .map(|t| t.to_string())
                        .collect::<Vec<_>>()
                        .join(",");
                    let controls = op
                        .controls
                        .iter()
                        .map(|c| format!("{}{}", if c.value { '+' } else { '-' }, c.qubit))
                        .collect::<Vec<_>>()
                        .join(",");
                    let params = match &op.kind {
                        crate::qsim::gate::GateKind::Ry(t)
                        | crate::qsim::gate::GateKind::Rbs(t) => format!(" p={t:.16e}"),
                        _ => String::new(),
                    };
                    let ctrl_part = if controls.is_empty() {
                        String::new()
                    } else {
                        format!(" c={controls}")
                    };
                    writeln!(
                        w,
                        "GATE {} t={targets}{ctrl_part}{params} // segment={segment:?} cx_cost={}",
                        op.name(),
                        op.cx_cost()
                    )?;
                }
                CircuitItem::Marker(m) => {
                    writeln!(w, "MARKER postselect {:?} {}", m.register, m.outcome)?;
                }
            }
        }
        Ok(())
    }
}

/// Apply the unitary gate sequence of a circuit; markers are left to the
/// execution driver.
pub fn apply_circuit(state: &mut QuantumState, circuit: &CircuitSpec) -> Result<()> {
    for gate in circuit.gates() {
        state.apply_gate(gate)?;
    }
    Ok(())
}

/// Apply gates in order, performing deferred projection at each marker.
/// Returns one record per marker with its outcome probability.
pub fn execute_with_markers(
    state: &mut QuantumState,
    circuit: &CircuitSpec,
) -> Result<Vec<MeasurementRecord>> {
    let mut records = Vec::new();
    for item in &circuit.items {
        match item {
            CircuitItem::Gate { op, .. } => state.apply_gate(op)?,
            CircuitItem::Marker(m) => {
                records.push(state.post_select(m.register, m.outcome)?);
            }
        }
    }
    Ok(records)
}
