use crate::operator::{DensityOperator, HermitianOperator};
use crate::scalar::Real;

pub const BALL_PSD_TOL: f64 = 1e-10;
pub const BALL_DISTANCE_TOL: f64 = 1e-9;
pub const BALL_TRACE_TOL: f64 = 1e-10;

/// `B^ε(ρ)`: positive operators within trace distance `ε` of `ρ` whose trace
/// does not exceed `Tr ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonBall<T: Real> {
    pub center: DensityOperator<T>,
    pub epsilon: T,
}

/// Amounts by which a candidate misses each ball constraint (zero when met).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallViolation<T> {
    pub negativity: T,
    pub distance: T,
    pub trace: T,
}

impl<T: Real> BallViolation<T> {
    pub fn worst(&self) -> T {
        self.negativity.max(self.distance).max(self.trace)
    }
}

impl<T: Real> EpsilonBall<T> {
    pub fn new(center: DensityOperator<T>, epsilon: T) -> Self {
        Self { center, epsilon }
    }

    pub fn violation(&self, candidate: &HermitianOperator<T>) -> BallViolation<T> {
        let zero = T::zero();
        BallViolation {
            negativity: (-candidate.min_eigenvalue()).max(zero),
            distance: ((candidate - self.center.op()).trace_norm() - self.epsilon).max(zero),
            trace: (candidate.trace() - self.center.trace()).max(zero),
        }
    }

    pub fn contains(&self, candidate: &HermitianOperator<T>) -> bool {
        if candidate.dim() != self.center.dim() {
            return false;
        }
        let v = self.violation(candidate);
        v.negativity <= T::tol(BALL_PSD_TOL)
            && v.distance <= T::tol(BALL_DISTANCE_TOL)
            && v.trace <= T::tol(BALL_TRACE_TOL)
    }
}
