//! Deterministic shot sampling from exact distributions.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{QlbmError, Result};
use crate::qsim::layout::RegisterLayout;
use crate::qsim::state::QuantumState;

/// Measurement counts keyed by basis index.
pub type Counts = BTreeMap<usize, u64>;

/// Sample `shots` outcomes from an explicit probability vector.
/// Deterministic for a given seed.
pub fn sample_distribution(probs: &[f64], shots: u64, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(QlbmError::EmptyCounts);
    }
    let dist = WeightedIndex::new(probs)
        .map_err(|e| QlbmError::BadNoiseParameter(format!("invalid distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Counts::new();
    for _ in 0..shots {
        *counts.entry(dist.sample(&mut rng)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Sample computational-basis measurements of all qubits.
pub fn sample_shots(state: &QuantumState, shots: u64, seed: u64) -> Result<Counts> {
    sample_distribution(&state.probabilities(), shots, seed)
}

/// Empirical frequencies from counts over a space of `size` outcomes.
pub fn frequencies(counts: &Counts, size: usize) -> Vec<f64> {
    let total: u64 = counts.values().sum();
    let mut out = vec![0.0; size];
    for (&basis, &n) in counts {
        out[basis] += n as f64 / total as f64;
    }
    out
}

/// JSON wrapper for persisted counts: bitstrings are written MSB-first.
#[derive(Debug, Serialize)]
pub struct CountsRecord<'a> {
    pub shots: u64,
    pub seed: u64,
    pub layout: &'a RegisterLayout,
    pub counts: BTreeMap<String, u64>,
}

impl<'a> CountsRecord<'a> {
    pub fn new(counts: &Counts, shots: u64, seed: u64, layout: &'a RegisterLayout) -> Self {
        let n = layout.total_qubits();
        let as_bits = counts
            .iter()
            .map(|(&basis, &c)| {
                let bits: String = (0..n).rev().map(|q| if basis >> q & 1 == 1 { '1' } else { '0' }).collect();
                (bits, c)
            })
            .collect();
        CountsRecord {
            shots,
            seed,
            layout,
            counts: as_bits,
        }
    }
}
