//! Dense self-adjoint linear algebra: spectral calculus, spectral
//! projections, distances, tensor structure, channels and random ensembles.

pub mod calculus;
pub mod channel;
pub mod density;
pub mod distance;
pub mod hermitian;
pub mod projector;
pub mod random;
pub mod tensor;

pub use calculus::{generalized_inverse_sqrt, log2_on_support, power_on_support, project_psd, sqrt_psd};
pub use channel::{QuantumChannel, QuantumInstrument};
pub use density::DensityOperator;
pub use distance::{fidelity, trace_distance, trace_distance_projector_form};
pub use hermitian::{CMatrix, CVector, HermitianOperator, Spectrum};
pub use projector::{compare_projector, spectral_projector, support_projector, Projector, Relation};
pub use tensor::{partial_trace, partial_trace_state, partial_transpose, tensor, Subsystem};
