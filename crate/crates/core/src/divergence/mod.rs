//! Non-smooth divergences in bits and the entropies derived from them.

pub mod entropy;
pub mod relative;
pub mod report;
pub mod value;

pub use entropy::{
    h_max, h_max_cond, h_min, h_min_cond, helstrom_min_error, mutual_max, mutual_min, von_neumann_entropy,
};
pub use relative::{
    chernoff, chernoff_bound, d_max, d_max_forms, d_max_residual, d_min, relative_entropy, renyi_relative,
    support_contained, Chernoff, DmaxForms,
};
pub use report::DivergenceReport;
pub use value::DivergenceValue;
