//! Direction-register state preparation: the collision operator's PREP and
//! UNPREP circuits, for dense and one-hot encodings, uniform and
//! position-dependent weights.
//!
//! PREP maps |x>_G |0>_D to |x>_G sum_i sqrt(k_i(x)) |i>_D. For the built-in
//! swirl fields every k_i is invariant along its own shift axis, so UNPREP
//! is exactly PREP^dagger. The position dependence enters through rotation
//! ladders controlled on grid coordinate bits: one controlled RY per
//! coordinate bit, wrapped in a single CX pair, accumulating an angle
//! proportional to the binary fraction the coordinate register spells.
//!
//! Amplitudes produced at a grid point may differ from sqrt(k_i) by a sign
//! when the rotation angle leaves the first quadrant; because the sign is
//! also invariant along the direction's shift axis, the composed
//! PREP/streaming/UNPREP block still applies exactly sum_i k_i(x - c_i).

use crate::circuits::spec::{CircuitSpec, Segment};
use crate::error::{QlbmError, Result};
use crate::lbm::grid::Grid;
use crate::lbm::lattice::{LatticeModel, ModelName};
use crate::lbm::velocity::{check_stochastic_consistency, compute_k_field, KField, VelocityField};
use crate::qsim::gate::{Control, GateOp};
use crate::qsim::layout::{DirectionEncoding, RegisterLayout};

/// Whether the circuit plays the PREP role (before streaming) or the UNPREP
/// role (after streaming).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrepRole {
    Prep,
    Unprep,
}

/// Binary code words assigned to directions under the dense encoding.
///
/// Codes are the direction index except for D2Q5, where the second +/- pair
/// is moved to 101/110 so that both rotation pairs differ only in the two
/// low direction bits (with the high bit selecting the pair).
pub fn dense_codes(model: &LatticeModel) -> Vec<usize> {
    match model.name {
        ModelName::D2Q5 => vec![0b000, 0b001, 0b010, 0b101, 0b110],
        _ => (0..model.directions()).collect(),
    }
}

fn validate_weights(k: &[f64]) -> Result<()> {
    if k.iter().any(|&v| v < -1e-12) {
        return Err(QlbmError::BadWeights("negative weight".into()));
    }
    let sum: f64 = k.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(QlbmError::BadWeights(format!("weights sum to {sum}")));
    }
    Ok(())
}

/// PREP circuit for position-independent weights k.
pub fn prep_circuit(
    k: &[f64],
    model: &LatticeModel,
    layout: &RegisterLayout,
) -> Result<CircuitSpec> {
    if k.len() != layout.directions {
        return Err(QlbmError::DimensionMismatch {
            expected: layout.directions,
            got: k.len(),
        });
    }
    validate_weights(k)?;
    let mut circuit = CircuitSpec::new(layout.clone());
    let amps: Vec<f64> = k.iter().map(|&v| v.max(0.0).sqrt()).collect();
    match layout.encoding {
        DirectionEncoding::Dense => {
            let codes = dense_codes(model);
            let mut target = vec![0.0; 1usize << layout.direction_qubits];
            for (i, &a) in amps.iter().enumerate() {
                target[codes[i]] = a;
            }
            let dir_qubits: Vec<usize> = layout
                .register_qubits(crate::qsim::layout::Register::Direction)
                .collect();
            synthesize_real_state(&mut circuit, &dir_qubits, &target, Vec::new());
        }
        DirectionEncoding::OneHot => {
            unary_prep(&mut circuit, layout, &amps);
        }
    }
    Ok(circuit)
}

/// Multiplexed-RY synthesis of a nonnegative real amplitude vector on the
/// given qubits (little-endian). Zero-angle rotations are elided, so delta
/// weight vectors synthesize to the identity.
fn synthesize_real_state(
    circuit: &mut CircuitSpec,
    qubits: &[usize],
    v: &[f64],
    controls: Vec<Control>,
) {
    debug_assert_eq!(v.len(), 1usize << qubits.len());
    if qubits.is_empty() {
        return;
    }
    let msb = qubits[qubits.len() - 1];
    let half = v.len() / 2;
    let low: f64 = v[..half].iter().map(|x| x * x).sum::<f64>().sqrt();
    let high: f64 = v[half..].iter().map(|x| x * x).sum::<f64>().sqrt();
    if low + high < 1e-15 {
        return;
    }
    let theta = 2.0 * high.atan2(low);
    if theta.abs() > 1e-14 {
        circuit.push(
            Segment::Prep,
            GateOp::cry(controls.clone(), msb, theta),
        );
    }
    let rest = &qubits[..qubits.len() - 1];
    if low > 1e-15 {
        let mut c = controls.clone();
        c.push(Control::open(msb));
        synthesize_real_state(circuit, rest, &v[..half], c);
    }
    if high > 1e-15 {
        let mut c = controls;
        c.push(Control::filled(msb));
        synthesize_real_state(circuit, rest, &v[half..], c);
    }
}

/// Unary loading cascade: X on the first direction qubit, then a chain of
/// partial-swap rotations pushing the residual amplitude down the register.
fn unary_prep(circuit: &mut CircuitSpec, layout: &RegisterLayout, amps: &[f64]) {
    circuit.push(Segment::Prep, GateOp::x(layout.direction_qubit(0)));
    let mut residual = 1.0f64;
    for i in 0..amps.len() - 1 {
        if residual < 1e-15 {
            break;
        }
        let cos_t = (amps[i] / residual).clamp(-1.0, 1.0);
        let theta = cos_t.acos();
        if theta.abs() > 1e-14 {
            circuit.push(
                Segment::Prep,
                GateOp::rbs(
                    layout.direction_qubit(i + 1),
                    layout.direction_qubit(i),
                    theta,
                ),
            );
        }
        residual = (residual * residual - amps[i] * amps[i]).max(0.0).sqrt();
    }
}

/// Rotation pair descriptor for the structured swirl fields: the amplitudes
/// of directions (a, b) rotate by sign * pi * coordinate(axis).
struct PairRotation {
    dir_a: usize,
    dir_b: usize,
    axis: usize,
    sign: f64,
}

fn swirl_rotations(vel: &VelocityField, model: &LatticeModel) -> Result<Vec<PairRotation>> {
    match (vel, model.name) {
        (VelocityField::Swirl2d, ModelName::D2Q5) => Ok(vec![
            PairRotation {
                dir_a: 1,
                dir_b: 2,
                axis: 1,
                sign: 1.0,
            },
            PairRotation {
                dir_a: 3,
                dir_b: 4,
                axis: 0,
                sign: -1.0,
            },
        ]),
        (VelocityField::Swirl3d, ModelName::D3Q7) => Ok(vec![
            PairRotation {
                dir_a: 1,
                dir_b: 2,
                axis: 2,
                sign: 1.0,
            },
            PairRotation {
                dir_a: 5,
                dir_b: 6,
                axis: 0,
                sign: -1.0,
            },
        ]),
        _ => Err(QlbmError::UnsupportedSynthesis(format!(
            "no structured preparation for this velocity field on {}",
            model.name
        ))),
    }
}

/// PREP / UNPREP circuit for a possibly position-dependent velocity field.
///
/// Uniform fields reduce to [`prep_circuit`]; the swirl fields add
/// grid-controlled rotation ladders on one direction pair per velocity
/// component. The UNPREP role requires the incoming-weight unitarity
/// condition to hold.
pub fn prep_nonuniform_circuit(
    model: &LatticeModel,
    grid: &Grid,
    vel: &VelocityField,
    layout: &RegisterLayout,
    role: PrepRole,
) -> Result<CircuitSpec> {
    let kfield = compute_k_field(model, vel, grid)?;
    if role == PrepRole::Unprep {
        let report = check_stochastic_consistency(&kfield, model);
        if !report.pass {
            return Err(QlbmError::NotStochastic {
                site: report.worst_site,
                deviation: report.max_deviation,
            });
        }
    }
    let prep = match vel {
        VelocityField::Uniform(_) => prep_circuit(kfield.row(0), model, layout)?,
        VelocityField::Swirl2d | VelocityField::Swirl3d => {
            verify_shift_invariance(&kfield, model)?;
            let rotations = swirl_rotations(vel, model)?;
            let mut circuit = prep_circuit(kfield.row(0), model, layout)?;
            for rot in rotations {
                append_rotation_ladder(&mut circuit, layout, model, grid, &rot)?;
            }
            circuit
        }
        VelocityField::Custom(_) => {
            return Err(QlbmError::UnsupportedSynthesis(
                "tabulated velocity fields have no circuit synthesis; use the classical solver"
                    .into(),
            ))
        }
    };
    Ok(match role {
        PrepRole::Prep => prep,
        PrepRole::Unprep => prep.adjoint(),
    })
}

/// UNPREP = PREP^dagger is only valid when each k_i is constant along its own
/// velocity, i.e. k_i(x - c_i) = k_i(x).
fn verify_shift_invariance(kfield: &KField, model: &LatticeModel) -> Result<()> {
    let grid = &kfield.grid;
    for site in 0..grid.sites() {
        for (i, c) in model.velocities.iter().enumerate() {
            let src = grid.shift(site, &c.iter().map(|x| -x).collect::<Vec<_>>());
            let dev = (kfield.k(src, i) - kfield.k(site, i)).abs();
            if dev > 1e-12 {
                return Err(QlbmError::UnsupportedSynthesis(format!(
                    "weight k_{i} varies along its own shift axis (site {site}, dev {dev:.3e})"
                )));
            }
        }
    }
    Ok(())
}

/// Append the grid-controlled rotation ladder for one direction pair:
/// a CX pair around one controlled RY per coordinate bit, accumulating a
/// rotation of sign * pi * C / 2^m for coordinate value C on an m-bit axis
/// register.
fn append_rotation_ladder(
    circuit: &mut CircuitSpec,
    layout: &RegisterLayout,
    model: &LatticeModel,
    grid: &Grid,
    rot: &PairRotation,
) -> Result<()> {
    let coord = layout.coord_register(rot.axis);
    let m_bits = coord.end - coord.start;
    debug_assert_eq!(m_bits, grid.coord_qubits()[rot.axis]);

    // qubit pair carrying the rotating amplitudes and any block controls
    let (hi, lo, block): (usize, usize, Vec<Control>) = match layout.encoding {
        DirectionEncoding::OneHot => (
            layout.direction_qubit(rot.dir_b),
            layout.direction_qubit(rot.dir_a),
            vec![],
        ),
        DirectionEncoding::Dense => {
            let codes = dense_codes(model);
            let (ca, cb) = (codes[rot.dir_a], codes[rot.dir_b]);
            if ca & 3 != 1 || cb & 3 != 2 || ca >> 2 != cb >> 2 {
                return Err(QlbmError::UnsupportedSynthesis(format!(
                    "dense codes {ca:b}/{cb:b} do not share a two-bit rotation block"
                )));
            }
            let dir_start = layout
                .register_qubits(crate::qsim::layout::Register::Direction)
                .start;
            let block = (2..layout.direction_qubits)
                .map(|b| Control {
                    qubit: dir_start + b,
                    value: ca >> b & 1 == 1,
                })
                .collect();
            (dir_start + 1, dir_start, block)
        }
    };

    circuit.push(Segment::Prep, GateOp::cx(hi, lo));
    for j in 0..m_bits {
        // CRY angle is twice the subspace rotation
        let theta = rot.sign * 2.0 * std::f64::consts::PI * (1usize << j) as f64
            / (1usize << m_bits) as f64;
        let mut controls = vec![Control::filled(lo), Control::filled(coord.start + j)];
        controls.extend(block.iter().copied());
        circuit.push(Segment::Prep, GateOp::cry(controls, hi, theta));
    }
    circuit.push(Segment::Prep, GateOp::cx(hi, lo));
    Ok(())
}
