//! ε-smoothed min- and max-relative entropies over the trace-norm ball of
//! subnormalized neighbours.

pub mod ball;
pub mod certificate;
pub mod dmax;
pub mod dmin;

pub use ball::EpsilonBall;
pub use certificate::{lemma5_smooth, SmoothingCertificate};
pub use dmax::{
    dmax_feasibility, gentle_epsilon, smooth_dmax_exact, smooth_dmax_upper, DmaxExact, DmaxUpperBound, Feasibility,
};
pub use dmin::{smooth_dmin_exact_classical, smooth_dmin_lower, DminLowerBound};
