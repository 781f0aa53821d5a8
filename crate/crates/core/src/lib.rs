pub mod divergence;
pub mod entanglement;
pub mod error;
pub mod io;
pub mod operator;
pub mod scalar;
pub mod smoothing;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

macro_rules! scalar_aliases {
    ($name:ident, $t:ty, $doc:literal) => {
        #[doc = $doc]
        pub mod $name {
            pub type HermitianOperator = crate::operator::HermitianOperator<$t>;
            pub type DensityOperator = crate::operator::DensityOperator<$t>;
            pub type Projector = crate::operator::Projector<$t>;
            pub type QuantumChannel = crate::operator::QuantumChannel<$t>;
            pub type QuantumInstrument = crate::operator::QuantumInstrument<$t>;
            pub type DivergenceValue = crate::divergence::DivergenceValue<$t>;
            pub type BipartiteState = crate::entanglement::BipartiteState<$t>;
            pub type SeparableEnsemble = crate::entanglement::SeparableEnsemble<$t>;
            pub type EmaxResult = crate::entanglement::EmaxResult<$t>;
            pub type SmoothingCertificate = crate::smoothing::SmoothingCertificate<$t>;
            pub type EpsilonBall = crate::smoothing::EpsilonBall<$t>;
            pub type IidPair = crate::spectral::IidPair<$t>;
            pub type RatePoint = crate::spectral::RatePoint<$t>;
        }
    };
}

scalar_aliases!(double, f64, "Double-precision instantiations.");
scalar_aliases!(single, f32, "Single-precision instantiations.");
