//! Assembly of one full QLBM step circuit from its synthesized pieces.

use crate::circuits::flags::flag_check_circuit;
use crate::circuits::mps::{mps_fit, mps_loader_circuit};
use crate::circuits::prep::{prep_nonuniform_circuit, PrepRole};
use crate::circuits::spec::{CircuitSpec, Segment};
use crate::circuits::streaming::streaming_for_direction;
use crate::error::Result;
use crate::lbm::field::DensityField;
use crate::lbm::lattice::{make_model, LatticeModel};
use crate::pipeline::config::{ExperimentConfig, LoaderSpec};
use crate::qsim::layout::{DirectionEncoding, Register, RegisterLayout};

/// Ancilla pool implied by the widest multi-controlled X of the streaming
/// ladders (n - 2 workspace qubits for an n-control gate).
pub fn cnx_ancillas(model: &LatticeModel, grid: &crate::lbm::grid::Grid, encoding: DirectionEncoding) -> usize {
    let m = grid.coord_qubits().iter().copied().max().unwrap_or(0);
    let dir_controls = match encoding {
        DirectionEncoding::OneHot => 1,
        DirectionEncoding::Dense => DirectionEncoding::Dense.qubits(model.directions()),
    };
    (m - 1 + dir_controls).saturating_sub(2)
}

/// Register layout for a run. Multi-control ancillas are carried only in
/// shot mode, where they appear in sampled bitstrings for triage; exact
/// runs handle them implicitly.
pub fn make_layout(cfg: &ExperimentConfig) -> Result<RegisterLayout> {
    let model = make_model(cfg.model);
    let grid = cfg.grid()?;
    let ancillas = if cfg.shots > 0 {
        cnx_ancillas(&model, &grid, cfg.encoding)
    } else {
        0
    };
    RegisterLayout::new(&grid, model.directions(), cfg.encoding, ancillas, cfg.flag_checks)
}

/// One QLBM step: PREP, streaming interleaved with flag checks, UNPREP,
/// then post-selection markers (flags at their accept value, ancillas and
/// direction register at zero).
pub fn build_step_circuit(cfg: &ExperimentConfig, layout: &RegisterLayout) -> Result<CircuitSpec> {
    let model = make_model(cfg.model);
    let grid = cfg.grid()?;
    let prep = prep_nonuniform_circuit(&model, &grid, &cfg.velocity, layout, PrepRole::Prep)?;
    let unprep = prep_nonuniform_circuit(&model, &grid, &cfg.velocity, layout, PrepRole::Unprep)?;

    let mut circuit = CircuitSpec::new(layout.clone());
    circuit.extend(&prep);
    for (idx, dir) in model.nonzero_directions().enumerate() {
        for gate in streaming_for_direction(&model, layout, dir) {
            circuit.push(Segment::Streaming, gate);
        }
        if idx < cfg.flag_checks {
            circuit.extend(&flag_check_circuit(layout, idx)?);
        }
    }
    circuit.extend(&unprep);

    if cfg.flag_checks > 0 {
        circuit.push_marker(Register::Flag, flag_accept(cfg.flag_checks));
    }
    if layout.ancilla_qubits > 0 {
        circuit.push_marker(Register::Ancilla, 0);
    }
    circuit.push_marker(Register::Direction, 0);
    Ok(circuit)
}

/// Expected flag-register readout: every used checkpoint at |1>.
pub fn flag_accept(flag_checks: usize) -> usize {
    (1usize << flag_checks) - 1
}

/// Loader circuit for the current field, when the config asks for one.
/// Returns the circuit and its preparation fidelity.
pub fn build_loader(
    cfg: &ExperimentConfig,
    layout: &RegisterLayout,
    field: &DensityField,
) -> Result<Option<(CircuitSpec, f64)>> {
    match cfg.loader {
        LoaderSpec::Exact => Ok(None),
        LoaderSpec::Mps { chi, layers } => {
            let mps = mps_fit(field, chi)?;
            let (grid_circuit, fidelity) = mps_loader_circuit(&mps, layers)?;
            // re-home the loader gates onto the full layout
            let mut circuit = CircuitSpec::new(layout.clone());
            for gate in grid_circuit.gates() {
                circuit.push(Segment::Loader, gate.clone());
            }
            Ok(Some((circuit, fidelity)))
        }
    }
}

/// Per-segment two-qubit budget of a full step (loader included), plus the
/// qubit count of the shot-mode layout.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StepBudget {
    pub qubits: usize,
    pub loader_cx: usize,
    pub prep_cx: usize,
    pub streaming_cx: usize,
    pub flag_cx: usize,
    pub unprep_cx: usize,
    pub total_cx: usize,
}

pub fn step_budget(cfg: &ExperimentConfig) -> Result<StepBudget> {
    let model = make_model(cfg.model);
    let grid = cfg.grid()?;
    let layout = RegisterLayout::new(
        &grid,
        model.directions(),
        cfg.encoding,
        cnx_ancillas(&model, &grid, cfg.encoding),
        cfg.flag_checks,
    )?;
    let step = build_step_circuit(cfg, &layout)?;
    let field = crate::lbm::field::initial_field(&cfg.initial, &grid)?;
    let loader_cx = match build_loader(cfg, &layout, &field)? {
        Some((loader, _)) => loader.total_cx_cost(),
        None => 0,
    };
    let seg = |s: Segment| step.gates_in(s).map(|g| g.cx_cost()).sum::<usize>();
    let budget = StepBudget {
        qubits: layout.total_qubits(),
        loader_cx,
        prep_cx: seg(Segment::Prep),
        streaming_cx: seg(Segment::Streaming),
        flag_cx: seg(Segment::FlagCheck),
        unprep_cx: seg(Segment::Unprep),
        total_cx: 0,
    };
    Ok(StepBudget {
        total_cx: budget.loader_cx
            + budget.prep_cx
            + budget.streaming_cx
            + budget.flag_cx
            + budget.unprep_cx,
        ..budget
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::spec::CircuitItem;

    #[test]
    fn uniform_unprep_is_reversed_prep() {
        let cfg = ExperimentConfig::default();
        let layout = make_layout(&cfg).unwrap();
        let step = build_step_circuit(&cfg, &layout).unwrap();
        let prep: Vec<_> = step.gates_in(Segment::Prep).collect();
        let unprep: Vec<_> = step.gates_in(Segment::Unprep).collect();
        assert_eq!(prep.len(), unprep.len());
        for (p, u) in prep.iter().zip(unprep.iter().rev()) {
            assert_eq!(**p, u.adjoint());
        }
    }

    #[test]
    fn flag_checks_add_m_cx_each() {
        let mut cfg = ExperimentConfig::default();
        cfg.flag_checks = 0;
        let bare = step_budget(&cfg).unwrap();
        cfg.flag_checks = 4;
        let flagged = step_budget(&cfg).unwrap();
        assert_eq!(flagged.total_cx - bare.total_cx, 4 * 5);
    }

    #[test]
    fn hardware_replication_budget() {
        // D2Q5 16^2, one-hot, MPS(2,2) loader, 4 flag checks
        let mut cfg = ExperimentConfig::default();
        cfg.flag_checks = 4;
        let budget = step_budget(&cfg).unwrap();
        assert_eq!(budget.qubits, 19);
        assert_eq!(budget.loader_cx, 28);
        assert_eq!(budget.total_cx, 260);
    }

    #[test]
    fn markers_follow_gates() {
        let mut cfg = ExperimentConfig::default();
        cfg.flag_checks = 2;
        cfg.shots = 100;
        let layout = make_layout(&cfg).unwrap();
        let step = build_step_circuit(&cfg, &layout).unwrap();
        let first_marker = step
            .items
            .iter()
            .position(|i| matches!(i, CircuitItem::Marker(_)))
            .unwrap();
        assert!(step.items[first_marker..]
            .iter()
            .all(|i| matches!(i, CircuitItem::Marker(_))));
        assert_eq!(step.items.len() - first_marker, 3);
    }
}
