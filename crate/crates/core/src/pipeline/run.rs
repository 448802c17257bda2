//! Experiment drivers: per-step readout runs, single-circuit multi-timestep
//! runs, and the noise-estimation companion.

use num_complex::Complex64;

use crate::circuits::estimation::noise_estimation_circuit;
use crate::circuits::resources::resource_report;
use crate::circuits::spec::{apply_circuit, execute_with_markers, CircuitSpec};
use crate::circuits::SynthesisReport;
use crate::error::{QlbmError, Result};
use crate::lbm::field::{initial_field, DensityField};
use crate::lbm::lattice::make_model;
use crate::lbm::step::evolve;
use crate::lbm::velocity::compute_k_field;
use crate::mitigation::{
    estimate_background, estimate_lambda, renormalize_observables, triage_shots,
    NoiseChannelEstimate, ShotTriage, BACKGROUND_FLOOR,
};
use crate::pipeline::config::{ExperimentConfig, RunMode};
use crate::pipeline::step::{build_loader, build_step_circuit, flag_accept, make_layout};
use crate::qsim::layout::{DirectionEncoding, Register, RegisterLayout};
use crate::qsim::noise::{add_background, apply_depolarizing};
use crate::qsim::sampling::{frequencies, sample_distribution, Counts};
use crate::qsim::state::{init_state, load_exact_amplitudes, QuantumState};
use crate::readout::{
    estimate_moments, estimate_moments_from_counts, field_fidelity, reconstruct_gaussian,
    MomentEstimates,
};

/// Per-timestep record of a run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StepRecord {
    pub t: usize,
    /// Noiseless post-selection probability of this step.
    pub success_probability: f64,
    pub cumulative_success: f64,
    pub fidelity_to_oracle: f64,
    pub loader_fidelity: Option<f64>,
    pub moments: Option<MomentEstimates>,
    pub triage: Option<ShotTriage>,
}

/// Device-level and readout-path noise estimates from the companion circuit.
/// `device` compares raw grid marginals and estimates the injected rate;
/// `readout` compares the post-selected, background-carrying readout and is
/// the rate actually used to renormalize target observables.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CompanionEstimate {
    pub device: NoiseChannelEstimate,
    pub readout: NoiseChannelEstimate,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RunArtifacts {
    pub config: ExperimentConfig,
    #[serde(skip)]
    pub fields: Vec<DensityField>,
    #[serde(skip)]
    pub oracle: Vec<DensityField>,
    pub steps: Vec<StepRecord>,
    /// ||phi_T||^2 / ||phi_0||^2 from the classical oracle.
    pub norm_ratio_sq: f64,
    /// Product of per-step success probabilities.
    pub success_product: f64,
    /// log2 of the overall success probability the pre-LCU construction
    /// would have at each timestep (the 2^{2 T n_d} suppression).
    pub legacy_success_log2: Vec<f64>,
    pub resource: SynthesisReport,
    pub noise_estimate: Option<CompanionEstimate>,
}

fn fidelity_amps_field(amps: &[Complex64], field: &DensityField) -> f64 {
    let norm_f = field.l2_norm();
    let norm_a: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let dot: Complex64 = amps
        .iter()
        .zip(&field.values)
        .map(|(a, &v)| a.conj() * v)
        .sum();
    dot.norm() / (norm_a * norm_f)
}

impl QuantumState {
    /// Grid-register amplitudes at a fixed readout of the other registers
    /// (`rest` packs direction/ancilla/flag bits above the grid register).
    pub fn grid_slice(&self, rest: usize) -> Vec<Complex64> {
        let n_g = self.layout.grid_qubits;
        let offset = rest << n_g;
        (0..1usize << n_g).map(|g| self.amps[offset | g]).collect()
    }
}

fn accept_rest_bits(cfg: &ExperimentConfig, layout: &RegisterLayout) -> usize {
    // direction and ancillas at zero, used flags at their accept value
    let flag_start = layout.register_qubits(Register::Flag).start - layout.grid_qubits;
    flag_accept(cfg.flag_checks) << flag_start
}

fn deterministic_seed(base: u64, t: usize, purpose: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((t as u64) << 8)
        .wrapping_add(purpose)
}

/// Accept-set masses of a joint distribution: (perpendicular, flagged,
/// usable) and the usable-conditional grid distribution.
fn analytic_triage(
    joint: &[f64],
    layout: &RegisterLayout,
    accept: usize,
) -> (f64, f64, f64, Vec<f64>) {
    let mut perpendicular = 0.0;
    let mut flagged = 0.0;
    let mut usable = 0.0;
    let mut grid = vec![0.0; 1usize << layout.grid_qubits];
    for (basis, &p) in joint.iter().enumerate() {
        if layout.extract(basis, Register::Direction) != 0 {
            perpendicular += p;
        } else if layout.extract(basis, Register::Flag) != accept
            || layout.extract(basis, Register::Ancilla) != 0
        {
            flagged += p;
        } else {
            usable += p;
            grid[layout.extract(basis, Register::Grid)] += p;
        }
    }
    if usable > 0.0 {
        for v in grid.iter_mut() {
            *v /= usable;
        }
    }
    (perpendicular, flagged, usable, grid)
}

fn marginalize_counts(counts: &Counts, layout: &RegisterLayout) -> Counts {
    let mut out = Counts::new();
    for (&basis, &n) in counts {
        *out.entry(layout.extract(basis, Register::Grid)).or_insert(0) += n;
    }
    out
}

struct CompanionOutcome {
    estimate: CompanionEstimate,
}

/// Run the noise-estimation companion of one step and derive rate and
/// background estimates.
fn run_companion(
    cfg: &ExperimentConfig,
    layout: &RegisterLayout,
    step: &CircuitSpec,
    loader: Option<&CircuitSpec>,
    field: &DensityField,
    t: usize,
) -> Result<CompanionOutcome> {
    let grid = cfg.grid()?;
    let mut full = CircuitSpec::new(layout.clone());
    if let Some(l) = loader {
        full.extend(l);
    }
    full.extend(step);
    let companion = noise_estimation_circuit(&full)?;

    let mut state = init_state(layout)?;
    if loader.is_none() {
        load_exact_amplitudes(&mut state, field)?;
    }
    for gate in companion.gates() {
        state.apply_gate(gate)?;
    }
    let ideal_joint = state.probabilities();
    let noisy_joint = if cfg.noise.lambda > 0.0 {
        apply_depolarizing(&ideal_joint, cfg.noise.lambda, layout.total_qubits())?
    } else {
        ideal_joint.clone()
    };

    let sites = 1usize << layout.grid_qubits;
    // the companion's flags never fire: accept value zero
    let (_, _, _, ideal_readout) = analytic_triage(&ideal_joint, layout, 0);

    let (device_ideal_m, device_noisy_m, noisy_readout) = if cfg.shots > 0 {
        let counts = sample_distribution(
            &noisy_joint,
            cfg.shots,
            deterministic_seed(cfg.seed, t, 1),
        )?;
        let ideal_counts = sample_distribution(
            &ideal_joint,
            cfg.shots,
            deterministic_seed(cfg.seed, t, 2),
        )?;
        let device_ideal = estimate_moments_from_counts(
            &marginalize_counts(&ideal_counts, layout),
            &grid,
        )?;
        let device_noisy =
            estimate_moments_from_counts(&marginalize_counts(&counts, layout), &grid)?;
        let (grid_counts, _) = triage_shots(&counts, layout, 0)?;
        let freqs = frequencies(&grid_counts, sites);
        let readout = if cfg.noise.background > 0.0 {
            add_background(&freqs, cfg.noise.background)?
        } else {
            freqs
        };
        (device_ideal, device_noisy, readout)
    } else {
        let marginal = |joint: &[f64]| -> Vec<f64> {
            let mut m = vec![0.0; sites];
            for (basis, &p) in joint.iter().enumerate() {
                m[layout.extract(basis, Register::Grid)] += p;
            }
            m
        };
        let device_ideal = estimate_moments(&marginal(&ideal_joint), &grid)?;
        let device_noisy = estimate_moments(&marginal(&noisy_joint), &grid)?;
        let (_, _, _, conditional) = analytic_triage(&noisy_joint, layout, 0);
        let readout = if cfg.noise.background > 0.0 {
            add_background(&conditional, cfg.noise.background)?
        } else {
            conditional
        };
        (device_ideal, device_noisy, readout)
    };

    let mut device = estimate_lambda(&device_ideal_m, &device_noisy_m, &grid);
    device.background = estimate_background(&noisy_readout, &ideal_readout, BACKGROUND_FLOOR);

    let ideal_readout_m = estimate_moments(&ideal_readout, &grid)?;
    let noisy_readout_m = estimate_moments(&noisy_readout, &grid)?;
    let mut readout = estimate_lambda(&ideal_readout_m, &noisy_readout_m, &grid);
    readout.background = device.background;

    Ok(CompanionOutcome {
        estimate: CompanionEstimate { device, readout },
    })
}

/// Standalone companion run for the first step of a configuration.
pub fn run_noise_companion(cfg: &ExperimentConfig) -> Result<CompanionEstimate> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let layout = make_layout(cfg)?;
    let step = build_step_circuit(cfg, &layout)?;
    let field = initial_field(&cfg.initial, &grid)?;
    let loader = build_loader(cfg, &layout, &field)?;
    let outcome = run_companion(
        cfg,
        &layout,
        &step,
        loader.as_ref().map(|(c, _)| c),
        &field,
        1,
    )?;
    Ok(outcome.estimate)
}

fn oracle_trajectory(cfg: &ExperimentConfig) -> Result<Vec<DensityField>> {
    let model = make_model(cfg.model);
    let grid = cfg.grid()?;
    let kfield = compute_k_field(&model, &cfg.velocity, &grid)?;
    let field = initial_field(&cfg.initial, &grid)?;
    evolve(&field, &kfield, &model, cfg.steps)
}

fn legacy_curve(oracle: &[DensityField], model: crate::lbm::lattice::ModelName) -> Vec<f64> {
    let n_dense = DirectionEncoding::Dense.qubits(make_model(model).directions()) as f64;
    let base = oracle[0].l2_norm().powi(2);
    oracle
        .iter()
        .enumerate()
        .skip(1)
        .map(|(t, f)| (f.l2_norm().powi(2) / base).log2() - 2.0 * t as f64 * n_dense)
        .collect()
}

/// Multi-timestep run in a single circuit with deferred mid-circuit
/// post-selection. Records the per-step success probability and its
/// telescoping product.
pub fn run_single_circuit(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    if cfg.mode != RunMode::SingleCircuit {
        return Err(QlbmError::InvalidConfig("mode must be single-circuit".into()));
    }
    let grid = cfg.grid()?;
    let oracle = oracle_trajectory(cfg)?;
    let layout = make_layout(cfg)?;
    let step = build_step_circuit(cfg, &layout)?;
    let initial = initial_field(&cfg.initial, &grid)?;

    let mut state = init_state(&layout)?;
    let loader = build_loader(cfg, &layout, &initial)?;
    let mut loader_fidelity = None;
    match &loader {
        None => load_exact_amplitudes(&mut state, &initial)?,
        Some((circuit, fid)) => {
            apply_circuit(&mut state, circuit)?;
            loader_fidelity = Some(*fid);
        }
    }

    let norm0 = initial.l2_norm();
    let mut fields = vec![initial.clone()];
    let mut steps = Vec::with_capacity(cfg.steps);
    let mut cumulative = 1.0f64;
    for t in 1..=cfg.steps {
        let records = execute_with_markers(&mut state, &step)?;
        let p = records
            .iter()
            .find(|r| r.register == Register::Direction)
            .map(|r| r.probability)
            .unwrap_or(1.0);
        cumulative *= p;
        let amps = state.grid_slice(0);
        let fidelity = fidelity_amps_field(&amps, &oracle[t]);
        // rescale the unit-norm state by the telescoped norm
        let scale = norm0 * cumulative.sqrt();
        let values: Vec<f64> = amps.iter().map(|a| a.re.abs().max(0.0) * scale).collect();
        fields.push(DensityField::new(grid.clone(), values)?);
        let dist: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
        steps.push(StepRecord {
            t,
            success_probability: p,
            cumulative_success: cumulative,
            fidelity_to_oracle: fidelity,
            loader_fidelity: if t == 1 { loader_fidelity } else { None },
            moments: estimate_moments(&dist, &grid).ok(),
            triage: None,
        });
    }

    let norm_ratio_sq = oracle[cfg.steps].l2_norm().powi(2) / oracle[0].l2_norm().powi(2);
    Ok(RunArtifacts {
        legacy_success_log2: legacy_curve(&oracle, cfg.model),
        resource: resource_report(cfg.model, &grid)?,
        config: cfg.clone(),
        fields,
        oracle,
        steps,
        norm_ratio_sq,
        success_product: cumulative,
        noise_estimate: None,
    })
}

/// Per-step readout run: load, step, post-select, read moments, mitigate,
/// reconstruct the Gaussian and reload for the next step.
pub fn run_per_step(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    if cfg.mode != RunMode::PerStepReadout {
        return Err(QlbmError::InvalidConfig("mode must be per-step".into()));
    }
    let grid = cfg.grid()?;
    let oracle = oracle_trajectory(cfg)?;
    let layout = make_layout(cfg)?;
    let step = build_step_circuit(cfg, &layout)?;
    let accept = flag_accept(cfg.flag_checks);
    let rest_bits = accept_rest_bits(cfg, &layout);
    let sites = grid.sites();

    let mut current = initial_field(&cfg.initial, &grid)?;
    let mut fields = vec![current.clone()];
    let mut steps = Vec::with_capacity(cfg.steps);
    let mut cumulative = 1.0f64;
    let mut companion_estimate = None;

    for t in 1..=cfg.steps {
        let loader = build_loader(cfg, &layout, &current)?;
        let mut state = init_state(&layout)?;
        let loader_fidelity = match &loader {
            None => {
                load_exact_amplitudes(&mut state, &current)?;
                None
            }
            Some((circuit, fid)) => {
                apply_circuit(&mut state, circuit)?;
                Some(*fid)
            }
        };

        let (p_ideal, moments, triage) = if cfg.noise.is_off() && cfg.shots == 0 {
            let records = execute_with_markers(&mut state, &step)?;
            let p = records
                .iter()
                .find(|r| r.register == Register::Direction)
                .map(|r| r.probability)
                .unwrap_or(1.0);
            let dist: Vec<f64> = state
                .grid_slice(rest_bits)
                .iter()
                .map(|a| a.norm_sqr())
                .collect();
            (p, estimate_moments(&dist, &grid)?, None)
        } else {
            for gate in step.gates() {
                state.apply_gate(gate)?;
            }
            let ideal_joint = state.probabilities();
            let (_, _, p_ideal, _) = analytic_triage(&ideal_joint, &layout, accept);
            let noisy_joint = if cfg.noise.lambda > 0.0 {
                apply_depolarizing(&ideal_joint, cfg.noise.lambda, layout.total_qubits())?
            } else {
                ideal_joint
            };

            let (raw_moments, triage) = if cfg.shots > 0 {
                let counts = sample_distribution(
                    &noisy_joint,
                    cfg.shots,
                    deterministic_seed(cfg.seed, t, 0),
                )?;
                let (grid_counts, triage) = triage_shots(&counts, &layout, accept)?;
                if triage.usable == 0 {
                    return Err(QlbmError::PostSelectionImpossible(0.0));
                }
                let freqs = frequencies(&grid_counts, sites);
                let readout = if cfg.noise.background > 0.0 {
                    add_background(&freqs, cfg.noise.background)?
                } else {
                    freqs
                };
                let mut m = estimate_moments(&readout, &grid)?;
                m.shots = Some(triage.usable);
                m.stderr = estimate_moments_from_counts(&grid_counts, &grid)?.stderr;
                (m, Some(triage))
            } else {
                let (_, _, usable, conditional) = analytic_triage(&noisy_joint, &layout, accept);
                if usable < 1e-14 {
                    return Err(QlbmError::PostSelectionImpossible(usable));
                }
                let readout = if cfg.noise.background > 0.0 {
                    add_background(&conditional, cfg.noise.background)?
                } else {
                    conditional
                };
                (estimate_moments(&readout, &grid)?, None)
            };

            let mitigated = if cfg.noise.is_off() {
                raw_moments
            } else {
                let outcome = run_companion(
                    cfg,
                    &layout,
                    &step,
                    loader.as_ref().map(|(c, _)| c),
                    &current,
                    t,
                )?;
                let fixed = renormalize_observables(&raw_moments, &outcome.estimate.readout, &grid)?;
                if companion_estimate.is_none() {
                    companion_estimate = Some(outcome.estimate);
                }
                fixed
            };
            (p_ideal, mitigated, triage)
        };

        cumulative *= p_ideal;
        let reconstructed = reconstruct_gaussian(&moments, &grid)?;
        let fidelity = field_fidelity(&reconstructed, &oracle[t])?;
        // carry the telescoped physical scale forward
        let scale = oracle[0].l2_norm() * cumulative.sqrt();
        let scaled = DensityField::new(
            grid.clone(),
            reconstructed.values.iter().map(|v| v * scale).collect(),
        )?;
        steps.push(StepRecord {
            t,
            success_probability: p_ideal,
            cumulative_success: cumulative,
            fidelity_to_oracle: fidelity,
            loader_fidelity,
            moments: Some(moments),
            triage,
        });
        fields.push(scaled);
        current = reconstructed;
    }

    let norm_ratio_sq = oracle[cfg.steps].l2_norm().powi(2) / oracle[0].l2_norm().powi(2);
    Ok(RunArtifacts {
        legacy_success_log2: legacy_curve(&oracle, cfg.model),
        resource: resource_report(cfg.model, &grid)?,
        config: cfg.clone(),
        fields,
        oracle,
        steps,
        norm_ratio_sq,
        success_product: cumulative,
        noise_estimate: companion_estimate,
    })
}

/// Dispatch on the configured mode.
pub fn run(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    match cfg.mode {
        RunMode::PerStepReadout => run_per_step(cfg),
        RunMode::SingleCircuit => run_single_circuit(cfg),
    }
}
