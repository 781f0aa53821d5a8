use crate::error::{Error, Result};
use crate::operator::density::DensityOperator;
use crate::operator::hermitian::{CMatrix, HermitianOperator};
use crate::scalar::{cabs, creal, Real};

/// `Σ K†K = I` within this max-abs tolerance.
pub const TRACE_PRESERVING_TOL: f64 = 1e-10;

/// CPTP map in Kraus form; each operator is `out_dim × in_dim`.
#[derive(Clone, Debug)]
pub struct QuantumChannel<T: Real> {
    kraus: Vec<CMatrix<T>>,
    in_dim: usize,
    out_dim: usize,
}

/// Family `{Vᵢ}` with `Σ Vᵢ†Vᵢ = I`; outcome `i` maps `ρ ↦ Vᵢ ρ Vᵢ†`.
#[derive(Clone, Debug)]
pub struct QuantumInstrument<T: Real> {
    elements: Vec<CMatrix<T>>,
    dim: usize,
}

fn completeness_deviation<T: Real>(ops: &[CMatrix<T>], in_dim: usize) -> T {
    let mut sum = CMatrix::<T>::zeros(in_dim, in_dim);
    for k in ops {
        sum += k.adjoint() * k;
    }
    let id = CMatrix::<T>::identity(in_dim, in_dim);
    (sum - id).iter().fold(T::zero(), |acc, c| acc.max(cabs(*c)))
}

fn common_shape<T: Real>(ops: &[CMatrix<T>]) -> Result<(usize, usize)> {
    let first = ops.first().ok_or_else(|| Error::invalid("empty Kraus family"))?;
    let shape = first.shape();
    if ops.iter().any(|k| k.shape() != shape) {
        return Err(Error::mismatch("Kraus operators of differing shapes"));
    }
    Ok(shape)
}

impl<T: Real> QuantumChannel<T> {
    pub fn new(kraus: Vec<CMatrix<T>>) -> Result<Self> {
        let (out_dim, in_dim) = common_shape(&kraus)?;
        let deviation = completeness_deviation(&kraus, in_dim);
        if deviation > T::tol(TRACE_PRESERVING_TOL) {
            return Err(Error::NotTracePreserving {
                deviation: deviation.as_f64(),
            });
        }
        Ok(Self { kraus, in_dim, out_dim })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![CMatrix::identity(dim, dim)]).expect("identity is CPTP")
    }

    /// Unitary conjugation `ρ ↦ U ρ U†`.
    pub fn unitary(u: CMatrix<T>) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Replaces every input by `I/d`, Kraus `{|i⟩⟨j|/√d}`.
    pub fn completely_depolarizing(dim: usize) -> Self {
        let w = creal(T::one() / T::lit(dim as f64).sqrt());
        let mut kraus = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut k = CMatrix::zeros(dim, dim);
                k[(i, j)] = w;
                kraus.push(k);
            }
        }
        Self::new(kraus).expect("depolarizing channel is CPTP")
    }

    /// `Λ_A ⊗ Λ_B`.
    pub fn local(a: &Self, b: &Self) -> Self {
        let kraus = a
            .kraus
            .iter()
            .flat_map(|ka| b.kraus.iter().map(move |kb| ka.kronecker(kb)))
            .collect();
        Self {
            kraus,
            in_dim: a.in_dim * b.in_dim,
            out_dim: a.out_dim * b.out_dim,
        }
    }

    pub fn kraus(&self) -> &[CMatrix<T>] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// `Σ K A K†` for any self-adjoint `A`.
    pub fn apply(&self, a: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
        if a.dim() != self.in_dim {
            return Err(Error::mismatch(format!(
                "channel expects {}-dim input, got {}",
                self.in_dim,
                a.dim()
            )));
        }
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * a.entries() * k.adjoint();
        }
        Ok(HermitianOperator::hermitize(out))
    }

    pub fn apply_state(&self, rho: &DensityOperator<T>) -> Result<DensityOperator<T>> {
        DensityOperator::new(self.apply(rho)?)
    }
}

impl<T: Real> QuantumInstrument<T> {
    pub fn new(elements: Vec<CMatrix<T>>) -> Result<Self> {
        let (rows, dim) = common_shape(&elements)?;
        if rows != dim {
            return Err(Error::mismatch("instrument elements must be square"));
        }
        let deviation = completeness_deviation(&elements, dim);
        if deviation > T::tol(TRACE_PRESERVING_TOL) {
            return Err(Error::NotTracePreserving {
                deviation: deviation.as_f64(),
            });
        }
        Ok(Self { elements, dim })
    }

    pub fn elements(&self) -> &[CMatrix<T>] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unnormalized post-measurement operators `Vᵢ A Vᵢ†`.
    pub fn outcomes(&self, a: &HermitianOperator<T>) -> Result<Vec<HermitianOperator<T>>> {
        if a.dim() != self.dim {
            return Err(Error::mismatch("instrument/operator dimension"));
        }
        Ok(self.elements.iter().map(|v| a.conjugate(v)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::random::{random_channel_with, random_density_with, seeded};

    #[test]
    fn identity_channel_is_noop() {
        let mut rng = seeded(1, 0);
        let rho = random_density_with::<f64, _>(3, 3, &mut rng).unwrap();
        let out = QuantumChannel::identity(3).apply_state(&rho).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn depolarizing_fixed_point() {
        let mut rng = seeded(2, 0);
        let rho = random_density_with::<f64, _>(3, 2, &mut rng).unwrap();
        let out = QuantumChannel::completely_depolarizing(3).apply_state(&rho).unwrap();
        assert!(out.max_abs_diff(&DensityOperator::maximally_mixed(3)) < 1e-14);
    }

    #[test]
    fn random_channel_preserves_trace() {
        let mut rng = seeded(3, 0);
        for _ in 0..20 {
            let ch = random_channel_with::<f64, _>(3, 2, 3, &mut rng).unwrap();
            let rho = random_density_with::<f64, _>(3, 2, &mut rng).unwrap();
            let out = ch.apply(&rho).unwrap();
            assert!((out.trace() - rho.trace()).abs() <= 1e-10);
            assert!(out.is_psd(1e-12));
        }
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let k = CMatrix::<f64>::identity(2, 2) * creal(0.9);
        assert!(matches!(
            QuantumChannel::new(vec![k]),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = QuantumChannel::<f64>::identity(2);
        assert!(ch.apply(&HermitianOperator::identity(3)).is_err());
    }
}
