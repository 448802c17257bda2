//! Exact dense statevector simulator: register layouts, gate kernels,
//! post-selection, shot sampling and the distribution-level noise channel.

pub mod gate;
pub mod layout;
pub mod noise;
pub mod sampling;
pub mod state;

pub use gate::{Control, GateKind, GateOp};
pub use layout::{DirectionEncoding, Register, RegisterLayout, MAX_QUBITS};
pub use noise::{add_background, apply_depolarizing, NoiseParams};
pub use sampling::{frequencies, sample_distribution, sample_shots, Counts, CountsRecord};
pub use state::{init_state, load_exact_amplitudes, MeasurementRecord, QuantumState};
