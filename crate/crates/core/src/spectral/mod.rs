//! Information-spectrum quantities of i.i.d. sequences `ρ^⊗n`, `σ^⊗n` at finite `n`.

mod pair;
mod rate;
mod trace;
mod types;

pub use pair::{tensor_power, IidPair, COMMUTING_TOL, DENSE_MAX_DIM};
pub use rate::{
    classical_smooth_dmax, classical_smooth_dmin, divergence_rate_estimate, rate_curve, rate_curve_with, RateEstimate,
    RatePoint, DEFAULT_EPS,
};
pub use trace::{
    lemma2_bound_check, lemma2_bound_check_with, spectral_trace, spectral_trace_with, Lemma2Check, SpectralPath,
    LEMMA2_TOL,
};
pub use types::{LOG_RATIO_QUANTUM, MAX_ALPHABET, MAX_BLOCK, MAX_TYPE_CLASSES};
