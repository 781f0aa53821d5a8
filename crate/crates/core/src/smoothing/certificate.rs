use crate::divergence::relative::{d_max_unchecked, SigmaFrame};
use crate::divergence::DivergenceValue;
use crate::error::{Error, Result};
use crate::operator::{generalized_inverse_sqrt, sqrt_psd, DensityOperator, HermitianOperator};
use crate::scalar::Real;
use crate::smoothing::ball::{EpsilonBall, BALL_PSD_TOL, BALL_TRACE_TOL};

/// Slack on both certificate inequalities.
pub const CERTIFICATE_TOL: f64 = 1e-7;

/// Output of the `T ρ T†` smoothing construction with `T = α^{1/2} β^{-1/2}`,
/// `α = 2^λ σ` and `β = α + Δ`, where `Δ` is the positive part of `ρ − α`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingCertificate<T: Real> {
    pub lambda_bits: T,
    /// `√(8 Tr Δ)`.
    pub epsilon_used: T,
    pub delta: HermitianOperator<T>,
    pub smoothed: DensityOperator<T>,
    /// `‖ρ′ − ρ‖₁`.
    pub transform_trace_dist: T,
}

impl<T: Real> SmoothingCertificate<T> {
    /// Re-checks the three certificate inequalities against `ρ` and `σ`.
    pub fn verify(&self, rho: &DensityOperator<T>, sigma: &HermitianOperator<T>) -> Result<()> {
        let tol = T::tol(CERTIFICATE_TOL);
        let frame = SigmaFrame::new(sigma)?;
        match d_max_unchecked(&self.smoothed, &frame)? {
            DivergenceValue::Finite(v) if v <= self.lambda_bits + tol => {}
            v => {
                return Err(Error::Certificate(format!(
                    "smoothed d_max {v} exceeds lambda {}",
                    self.lambda_bits.as_f64()
                )))
            }
        }
        let bound = (T::lit(8.0) * self.delta.trace()).sqrt();
        if self.transform_trace_dist > bound + tol {
            return Err(Error::Certificate(format!(
                "trace distance {} exceeds sqrt(8 Tr delta) = {}",
                self.transform_trace_dist.as_f64(),
                bound.as_f64()
            )));
        }
        let ball = EpsilonBall::new(rho.clone(), self.epsilon_used);
        let v = ball.violation(&self.smoothed);
        if v.negativity > T::tol(BALL_PSD_TOL) || v.distance > tol || v.trace > T::tol(BALL_TRACE_TOL) {
            return Err(Error::Certificate(format!(
                "smoothed operator leaves the ball (worst violation {})",
                v.worst().as_f64()
            )));
        }
        Ok(())
    }
}

/// Builds `ρ′ = T ρ T†` with `D_max(ρ′‖σ) ≤ λ` and `‖ρ′ − ρ‖₁ ≤ √(8 Tr Δ)`,
/// checking the certificate before returning.
pub fn lemma5_smooth<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &HermitianOperator<T>,
    lambda_bits: T,
) -> Result<SmoothingCertificate<T>> {
    if rho.dim() != sigma.dim() {
        return Err(Error::mismatch("rho and sigma differ in dimension"));
    }
    let alpha = sigma.scale(T::lit(2.0).powf(lambda_bits));
    let delta = (rho.op() - &alpha).positive_part();
    let beta = &alpha + &delta;
    let t = sqrt_psd(&alpha)?.into_entries() * generalized_inverse_sqrt(&beta)?.into_entries();
    let smoothed_op = rho.conjugate(&t);
    let transform_trace_dist = (&smoothed_op - rho.op()).trace_norm();
    let smoothed = DensityOperator::new(smoothed_op)
        .map_err(|e| Error::Certificate(format!("smoothed operator is not a density operator: {e}")))?;
    let cert = SmoothingCertificate {
        lambda_bits,
        epsilon_used: (T::lit(8.0) * delta.trace()).sqrt(),
        delta,
        smoothed,
        transform_trace_dist,
    };
    cert.verify(rho, sigma)?;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::d_max;
    use crate::operator::random::{random_density_with, seeded};
    use approx::assert_abs_diff_eq;

    #[test]
    fn no_smoothing_above_d_max() {
        let mut rng = seeded(3, 0);
        let rho = random_density_with::<f64, _>(3, 2, &mut rng).unwrap();
        let sigma = random_density_with::<f64, _>(3, 3, &mut rng).unwrap();
        let dm = d_max(&rho, &sigma).unwrap().expect_finite("full rank sigma");
        let c = lemma5_smooth(&rho, &sigma, dm + 0.1).unwrap();
        assert!(c.delta.trace() <= 1e-12);
        assert!(c.smoothed.max_abs_diff(&rho) <= 1e-10);
    }

    #[test]
    fn diagonal_construction() {
        let rho = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
        let sigma = HermitianOperator::from_real_diagonal(&[0.5, 0.5]);
        let c = lemma5_smooth(&rho, &sigma, 1.4f64.log2()).unwrap();
        assert!(
            c.delta
                .max_abs_diff(&HermitianOperator::from_real_diagonal(&[0.2, 0.0]))
                <= 1e-12
        );
        // T = diag(√(0.7/0.9), 1), so ρ′ = diag(0.7, 0.1).
        assert!(
            c.smoothed
                .max_abs_diff(&HermitianOperator::from_real_diagonal(&[0.7, 0.1]))
                <= 1e-12
        );
        assert!(d_max(&c.smoothed, &sigma).unwrap().expect_finite("") <= 1.4f64.log2() + 1e-7);
        assert!(c.transform_trace_dist <= 1.6f64.sqrt());
        assert_abs_diff_eq!(c.epsilon_used, 1.6f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn random_certificates_hold() {
        for seed in 0..100 {
            let mut rng = seeded(seed, 1);
            let rho = random_density_with::<f64, _>(4, 1 + seed as usize % 4, &mut rng).unwrap();
            let sigma = random_density_with::<f64, _>(4, 4, &mut rng).unwrap();
            let dm = d_max(&rho, &sigma).unwrap().expect_finite("full rank sigma");
            let c = lemma5_smooth(&rho, &sigma, dm - 0.3).unwrap();
            assert!(c.epsilon_used > 0.0);
        }
    }
}
