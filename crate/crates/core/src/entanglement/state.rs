use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::operator::{partial_trace_state, partial_transpose, CVector, DensityOperator, HermitianOperator, Subsystem};
use crate::scalar::{cabs, cplx, Real};

/// Weight and vector-norm tolerance for separable ensembles.
pub const ENSEMBLE_TOL: f64 = 1e-10;

/// A state on `H_A ⊗ H_B` with its factor dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState<T: Real> {
    dims: (usize, usize),
    state: DensityOperator<T>,
}

impl<T: Real> BipartiteState<T> {
    pub fn new(state: DensityOperator<T>, dims: (usize, usize)) -> Result<Self> {
        let (da, db) = dims;
        if da == 0 || db == 0 || da * db != state.dim() {
            return Err(Error::mismatch(format!(
                "dims ({da}, {db}) do not factor a {}-dim state",
                state.dim()
            )));
        }
        Ok(Self { dims, state })
    }

    pub fn product(a: &DensityOperator<T>, b: &DensityOperator<T>) -> Self {
        let state = DensityOperator::new(a.kron(b)).expect("product of states is a state");
        Self {
            dims: (a.dim(), b.dim()),
            state,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn state(&self) -> &DensityOperator<T> {
        &self.state
    }

    pub fn into_state(self) -> DensityOperator<T> {
        self.state
    }

    pub fn marginal(&self, keep: Subsystem) -> DensityOperator<T> {
        partial_trace_state(&self.state, self.dims, keep).expect("dims validated on construction")
    }

    pub fn partial_transpose(&self, which: Subsystem) -> HermitianOperator<T> {
        partial_transpose(&self.state, self.dims, which).expect("dims validated on construction")
    }

    /// Errors unless both factors have dimension at least two.
    pub(crate) fn require_entangleable(&self) -> Result<()> {
        if self.dims.0 < 2 || self.dims.1 < 2 {
            return Err(Error::invalid(format!(
                "entanglement needs both factors of dimension >= 2, got {:?}",
                self.dims
            )));
        }
        Ok(())
    }
}

/// One product term `w |a⟩⟨a| ⊗ |b⟩⟨b|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableTerm<T: Real> {
    pub weight: T,
    pub a: CVector<T>,
    pub b: CVector<T>,
}

/// Convex combination of pure product states.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableEnsemble<T: Real> {
    dims: (usize, usize),
    terms: Vec<SeparableTerm<T>>,
}

fn unit_norm_error<T: Real>(v: &CVector<T>) -> T {
    (v.iter().fold(T::zero(), |acc, c| acc + cabs(*c) * cabs(*c)).sqrt() - T::one()).abs()
}

impl<T: Real> SeparableEnsemble<T> {
    pub fn new(dims: (usize, usize), terms: Vec<SeparableTerm<T>>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("separable ensemble needs at least one term"));
        }
        let tol = T::tol(ENSEMBLE_TOL);
        let mut total = T::zero();
        for (k, t) in terms.iter().enumerate() {
            if t.a.len() != dims.0 || t.b.len() != dims.1 {
                return Err(Error::mismatch(format!("term {k} has wrong local dimensions")));
            }
            if t.weight <= T::zero() {
                return Err(Error::invalid(format!("term {k} has non-positive weight")));
            }
            if unit_norm_error(&t.a) > tol || unit_norm_error(&t.b) > tol {
                return Err(Error::invalid(format!("term {k} vectors are not unit norm")));
            }
            total += t.weight;
        }
        if (total - T::one()).abs() > tol {
            return Err(Error::invalid(format!("weights sum to {}", total.as_f64())));
        }
        Ok(Self { dims, terms })
    }

    /// Builds from raw parts, normalizing vectors, dropping zero weights and
    /// renormalizing the weights.
    pub fn from_parts(dims: (usize, usize), parts: Vec<(T, CVector<T>, CVector<T>)>) -> Result<Self> {
        let total = parts.iter().fold(T::zero(), |acc, p| acc + p.0.max(T::zero()));
        if total <= T::zero() {
            return Err(Error::invalid("all weights are zero"));
        }
        let terms = parts
            .into_iter()
            .filter(|p| p.0 > T::zero())
            .map(|(w, a, b)| SeparableTerm {
                weight: w / total,
                a: normalize(a),
                b: normalize(b),
            })
            .collect();
        Self::new(dims, terms)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn terms(&self) -> &[SeparableTerm<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `σ = Σ w |a⟩⟨a| ⊗ |b⟩⟨b|`.
    pub fn assemble(&self) -> DensityOperator<T> {
        let (da, db) = self.dims;
        let mut acc = HermitianOperator::zeros(da * db);
        for t in &self.terms {
            let v = t.a.kronecker(&t.b);
            acc = &acc + &HermitianOperator::ket_bra(&v).scale(t.weight);
        }
        DensityOperator::new(acc).expect("convex combination of product states")
    }
}

/// `|Φ⟩⟨Φ|` with `|Φ⟩ = Σᵢ |ii⟩/√d`.
pub fn maximally_entangled<T: Real>(d: usize) -> BipartiteState<T> {
    let mut v = CVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = cplx(T::one(), T::zero());
    }
    BipartiteState::new(DensityOperator::pure(&v).expect("non-zero vector"), (d, d)).expect("square dims")
}

/// `p |Φ⟩⟨Φ| + (1 − p) I/d²`.
pub fn isotropic<T: Real>(d: usize, visibility: T) -> Result<BipartiteState<T>> {
    if !(visibility >= T::zero() && visibility <= T::one()) {
        return Err(Error::invalid("visibility must lie in [0, 1]"));
    }
    let phi = maximally_entangled::<T>(d);
    let mixed = DensityOperator::<T>::maximally_mixed(d * d);
    let op = &phi.state().scale(visibility) + &mixed.scale(T::one() - visibility);
    BipartiteState::new(DensityOperator::new(op)?, (d, d))
}

fn normalize<T: Real>(v: CVector<T>) -> CVector<T> {
    let n = v.iter().fold(T::zero(), |acc, c| acc + cabs(*c) * cabs(*c)).sqrt();
    v.map(|c| c / cplx(n, T::zero()))
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    weight: f64,
    a: Vec<[f64; 2]>,
    b: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleRepr {
    dims: [usize; 2],
    terms: Vec<TermRepr>,
}

fn vec_repr<T: Real>(v: &CVector<T>) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re.as_f64(), c.im.as_f64()]).collect()
}

fn repr_vec<T: Real>(v: &[[f64; 2]]) -> CVector<T> {
    CVector::from_iterator(v.len(), v.iter().map(|p| cplx(T::lit(p[0]), T::lit(p[1]))))
}

impl<T: Real> Serialize for SeparableEnsemble<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        EnsembleRepr {
            dims: [self.dims.0, self.dims.1],
            terms: self
                .terms
                .iter()
                .map(|t| TermRepr {
                    weight: t.weight.as_f64(),
                    a: vec_repr(&t.a),
                    b: vec_repr(&t.b),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for SeparableEnsemble<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = EnsembleRepr::deserialize(deserializer)?;
        let terms = r
            .terms
            .iter()
            .map(|t| SeparableTerm {
                weight: T::lit(t.weight),
                a: repr_vec(&t.a),
                b: repr_vec(&t.b),
            })
            .collect();
        SeparableEnsemble::new((r.dims[0], r.dims[1]), terms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::random::{random_pure_vector_with, seeded};

    fn sample(seed: u64, k: usize) -> SeparableEnsemble<f64> {
        let mut rng = seeded(seed, 0);
        let parts = (0..k)
            .map(|i| {
                (
                    (i + 1) as f64,
                    random_pure_vector_with(2, &mut rng),
                    random_pure_vector_with(3, &mut rng),
                )
            })
            .collect();
        SeparableEnsemble::from_parts((2, 3), parts).unwrap()
    }

    #[test]
    fn assembly_is_normalized_state() {
        let e = sample(1, 4);
        let s = e.assemble();
        assert!(s.is_normalized());
        assert_eq!(s.dim(), 6);
    }

    #[test]
    fn json_round_trip_reassembles() {
        let e = sample(2, 3);
        let text = serde_json::to_string(&e).unwrap();
        let back: SeparableEnsemble<f64> = serde_json::from_str(&text).unwrap();
        assert!(back.assemble().max_abs_diff(&e.assemble()) < 1e-14);
    }

    #[test]
    fn rejects_bad_weights() {
        let e = sample(3, 2);
        let mut terms = e.terms().to_vec();
        terms[0].weight += 1e-6;
        assert!(SeparableEnsemble::new((2, 3), terms).is_err());
    }

    #[test]
    fn bipartite_dims_checked() {
        let rho = DensityOperator::<f64>::maximally_mixed(6);
        assert!(BipartiteState::new(rho.clone(), (2, 3)).is_ok());
        assert!(BipartiteState::new(rho, (2, 2)).is_err());
    }
}
