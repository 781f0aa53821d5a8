//! Entanglement measures built on `D_max` over separable states.

pub mod emax;
pub mod monotone;
pub mod ppt;
pub mod separable;
pub mod state;

pub use emax::{emax, rel_ent_entanglement, EmaxConfig, EmaxResult, ReeResult};
pub use monotone::{monotone_condition_suite, ConditionCheck, MonotoneReport};
pub use ppt::{is_ppt, ppt_emax_lower, PptBound};
pub use state::{isotropic, maximally_entangled, BipartiteState, SeparableEnsemble, SeparableTerm};

use crate::error::Result;
use crate::operator::{HermitianOperator, Subsystem};
use crate::scalar::Real;

/// Partial transpose of a bipartite state on the chosen factor.
pub fn partial_transpose<T: Real>(rho: &BipartiteState<T>, which: Subsystem) -> Result<HermitianOperator<T>> {
    Ok(rho.partial_transpose(which))
}
