//! Gate primitives executed by the statevector kernel.

use num_complex::Complex64;

use crate::error::{QlbmError, Result};

pub type C64 = Complex64;

/// A control qubit with polarity: `value = true` fires on |1> (filled dot),
/// `false` on |0> (open dot).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub value: bool,
}

impl Control {
    pub fn filled(qubit: usize) -> Self {
        Control { qubit, value: true }
    }

    pub fn open(qubit: usize) -> Self {
        Control { qubit, value: false }
    }
}

/// Gate kinds. Any kind may carry a control list; a plain CX is an `X` with
/// one filled control, a multi-controlled Toffoli is an `X` with several.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// Pauli X on one target.
    X,
    /// Hadamard on one target.
    H,
    /// RY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
    Ry(f64),
    /// Reconfigurable beam splitter on two targets (hi, lo): rotates the
    /// (|01>, |10>) subspace by theta, identity on |00> and |11>.
    Rbs(f64),
    /// Arbitrary 4x4 unitary on two targets (hi, lo), row-major over the
    /// basis |hi lo> = 00,01,10,11.
    Unitary4(Box<[[C64; 4]; 4]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    /// Target qubits: one entry for X/H/Ry, two (hi, lo) for Rbs/Unitary4.
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl GateOp {
    pub fn x(target: usize) -> Self {
        GateOp {
            kind: GateKind::X,
            targets: vec![target],
            controls: vec![],
        }
    }

    pub fn h(target: usize) -> Self {
        GateOp {
            kind: GateKind::H,
            targets: vec![target],
            controls: vec![],
        }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        GateOp {
            kind: GateKind::X,
            targets: vec![target],
            controls: vec![Control::filled(control)],
        }
    }

    pub fn mcx(controls: Vec<Control>, target: usize) -> Self {
        GateOp {
            kind: GateKind::X,
            targets: vec![target],
            controls,
        }
    }

    pub fn ry(target: usize, theta: f64) -> Self {
        GateOp {
            kind: GateKind::Ry(theta),
            targets: vec![target],
            controls: vec![],
        }
    }

    pub fn cry(controls: Vec<Control>, target: usize, theta: f64) -> Self {
        GateOp {
            kind: GateKind::Ry(theta),
            targets: vec![target],
            controls,
        }
    }

    pub fn rbs(hi: usize, lo: usize, theta: f64) -> Self {
        GateOp {
            kind: GateKind::Rbs(theta),
            targets: vec![hi, lo],
            controls: vec![],
        }
    }

    pub fn unitary4(hi: usize, lo: usize, m: [[C64; 4]; 4]) -> Result<Self> {
        let dev = unitarity_deviation(&m);
        if dev > 1e-10 {
            return Err(QlbmError::NonUnitaryGate(dev));
        }
        Ok(GateOp {
            kind: GateKind::Unitary4(Box::new(m)),
            targets: vec![hi, lo],
            controls: vec![],
        })
    }

    pub fn with_controls(mut self, controls: Vec<Control>) -> Self {
        self.controls = controls;
        self
    }

    /// Inverse gate.
    pub fn adjoint(&self) -> Self {
        let kind = match &self.kind {
            GateKind::X => GateKind::X,
            GateKind::H => GateKind::H,
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rbs(t) => GateKind::Rbs(-t),
            GateKind::Unitary4(m) => {
                let mut adj = [[C64::new(0.0, 0.0); 4]; 4];
                for (r, row) in m.iter().enumerate() {
                    for (c, v) in row.iter().enumerate() {
                        adj[c][r] = v.conj();
                    }
                }
                GateKind::Unitary4(Box::new(adj))
            }
        };
        GateOp {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    /// Highest qubit index the gate touches.
    pub fn max_qubit(&self) -> usize {
        self.targets
            .iter()
            .copied()
            .chain(self.controls.iter().map(|c| c.qubit))
            .max()
            .unwrap_or(0)
    }

    /// Two-qubit cost annotation for the gate under the ancilla-assisted
    /// decomposition estimate used for whole-circuit budgets: a C^nX costs
    /// 6n for n >= 3 controls, a Toffoli 6, a CX 1; controlled rotations
    /// sandwich two such gates; an RBS or generic real two-qubit block
    /// costs 2.
    pub fn cx_cost(&self) -> usize {
        let n = self.controls.len();
        match &self.kind {
            GateKind::X | GateKind::H => mcx_estimate(n),
            GateKind::Ry(_) => {
                if n == 0 {
                    0
                } else {
                    2 * mcx_estimate(n)
                }
            }
            GateKind::Rbs(_) | GateKind::Unitary4(_) => {
                if n == 0 {
                    2
                } else {
                    // outer CX pair plus a rotation controlled on n+1 qubits
                    2 + 2 * mcx_estimate(n + 1)
                }
            }
        }
    }

    /// Short mnemonic for the text serialization.
    pub fn name(&self) -> &'static str {
        match &self.kind {
            GateKind::X => {
                if self.controls.len() == 1 {
                    "CX"
                } else if self.controls.is_empty() {
                    "X"
                } else {
                    "MCX"
                }
            }
            GateKind::H => "H",
            GateKind::Ry(_) => "RY",
            GateKind::Rbs(_) => "RBS",
            GateKind::Unitary4(_) => "U4",
        }
    }
}

fn mcx_estimate(controls: usize) -> usize {
    match controls {
        0 => 0,
        1 => 1,
        2 => 6,
        n => 6 * n,
    }
}

/// Max-abs deviation of m * m^dagger from identity.
pub fn unitarity_deviation(m: &[[C64; 4]; 4]) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..4 {
                acc += m[r][k] * m[c][k].conj();
            }
            let expect = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((acc - expect).norm());
        }
    }
    dev
}
