//! Circuit synthesis for every stage of a QLBM step: the MPS loader, the
//! PREP/UNPREP collision operators, controlled streaming shifts, flag-qubit
//! error detection, the noise-estimation companion, and gate-count
//! resource accounting.

pub mod estimation;
pub mod flags;
pub mod mps;
pub mod prep;
pub mod resources;
pub mod spec;
pub mod streaming;

pub use estimation::noise_estimation_circuit;
pub use flags::flag_check_circuit;
pub use mps::{mps_fit, mps_loader_circuit, MpsApprox, SiteTensor};
pub use prep::{dense_codes, prep_circuit, prep_nonuniform_circuit, PrepRole};
pub use resources::{
    cnx_cost, reference_reports, reports_to_csv, resource_report, streaming_sweep, CnxScheme,
    SynthesisReport, REFERENCE_ROWS,
};
pub use spec::{
    apply_circuit, execute_with_markers, CircuitItem, CircuitSpec, PostSelectMarker, Segment,
};
pub use streaming::{direction_controls, streaming_circuit, streaming_for_direction};
