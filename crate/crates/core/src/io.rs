//! JSON operator files.
//!
//! Layout: `{"dim": n, "entries": [[[re, im], ...], ...]}` in row-major order;
//! bipartite states additionally carry `"dims": [dA, dB]`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::entanglement::BipartiteState;
use crate::error::{Error, Result};
use crate::operator::{CMatrix, DensityOperator, HermitianOperator, QuantumChannel};
use crate::scalar::{cplx, Real};

/// Hermiticity tolerance applied to files (max-abs entrywise).
pub const FILE_HERMITIAN_TOL: f64 = 1e-9;
/// Most negative eigenvalue a state file may carry before rejection.
pub const FILE_EIGEN_TOL: f64 = 1e-8;
/// Slack on the unit-trace bound for state files.
pub const FILE_TRACE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

/// A parsed state file: bipartite when the file declares `dims`.
#[derive(Clone, Debug)]
pub enum StateFile<T: Real> {
    Single(DensityOperator<T>),
    Bipartite(BipartiteState<T>),
}

impl<T: Real> StateFile<T> {
    pub fn density(&self) -> &DensityOperator<T> {
        match self {
            StateFile::Single(rho) => rho,
            StateFile::Bipartite(b) => b.state(),
        }
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        match self {
            StateFile::Single(_) => None,
            StateFile::Bipartite(b) => Some(b.dims()),
        }
    }
}

fn matrix_rows<T: Real>(m: &CMatrix<T>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
                .collect()
        })
        .collect()
}

fn rows_matrix<T: Real>(rows: &[Vec<[f64; 2]>], nrows: usize, ncols: usize) -> Result<CMatrix<T>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::mismatch(format!("entries are not {nrows}x{ncols}")));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite entry"));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
        cplx(T::lit(rows[i][j][0]), T::lit(rows[i][j][1]))
    }))
}

impl OperatorFile {
    pub fn from_operator<T: Real>(op: &HermitianOperator<T>, dims: Option<(usize, usize)>) -> Self {
        Self {
            dim: op.dim(),
            entries: matrix_rows(op.entries()),
            dims: dims.map(|(a, b)| [a, b]),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("operator files always serialize")
    }

    /// Self-adjoint operator after the file-level Hermiticity check.
    pub fn to_hermitian<T: Real>(&self) -> Result<HermitianOperator<T>> {
        if self.dim == 0 {
            return Err(Error::invalid("dim must be positive"));
        }
        let m = rows_matrix(&self.entries, self.dim, self.dim)?;
        HermitianOperator::with_tolerance(m, T::tol(FILE_HERMITIAN_TOL))
    }

    /// Positive operator (used for the second argument of divergences).
    pub fn to_positive<T: Real>(&self) -> Result<HermitianOperator<T>> {
        let op = self.to_hermitian::<T>()?;
        repair_negative(op)
    }

    pub fn to_state<T: Real>(&self) -> Result<StateFile<T>> {
        let op = self.to_positive::<T>()?;
        let tr = op.trace();
        if tr > T::one() + T::tol(FILE_TRACE_TOL) || tr <= T::zero() {
            return Err(Error::InvalidTrace { trace: tr.as_f64() });
        }
        let op = if (tr - T::one()).abs() <= T::tol(FILE_TRACE_TOL) {
            op.scale(T::one() / tr)
        } else {
            op
        };
        let rho = DensityOperator::new(op)?;
        match self.dims {
            None => Ok(StateFile::Single(rho)),
            Some([a, b]) => Ok(StateFile::Bipartite(BipartiteState::new(rho, (a, b))?)),
        }
    }
}

fn repair_negative<T: Real>(op: HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    let spec = op.eig();
    let min = spec.min();
    if min < -T::tol(FILE_EIGEN_TOL) {
        return Err(Error::NegativeEigenvalue { value: min.as_f64() });
    }
    if min < T::zero() {
        Ok(spec.map(|l| l.max(T::zero())))
    } else {
        Ok(op)
    }
}

impl ChannelFile {
    pub fn from_channel<T: Real>(ch: &QuantumChannel<T>) -> Self {
        Self {
            in_dim: ch.in_dim(),
            out_dim: ch.out_dim(),
            kraus: ch.kraus().iter().map(matrix_rows).collect(),
        }
    }

    pub fn to_channel<T: Real>(&self) -> Result<QuantumChannel<T>> {
        let kraus = self
            .kraus
            .iter()
            .map(|k| rows_matrix(k, self.out_dim, self.in_dim))
            .collect::<Result<Vec<_>>>()?;
        QuantumChannel::new(kraus)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn with_path<V>(path: &Path, r: Result<V>) -> Result<V> {
    r.map_err(|e| Error::File {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

pub fn parse_state_file<T: Real>(path: impl AsRef<Path>) -> Result<StateFile<T>> {
    let path = path.as_ref();
    let text = read(path)?;
    with_path(path, OperatorFile::parse(&text).and_then(|f| f.to_state()))
}

/// A positive operator with the local dimensions its file declares, if any.
pub type OperatorWithDims<T> = (HermitianOperator<T>, Option<(usize, usize)>);

pub fn parse_operator_file<T: Real>(path: impl AsRef<Path>) -> Result<OperatorWithDims<T>> {
    let path = path.as_ref();
    let text = read(path)?;
    with_path(
        path,
        OperatorFile::parse(&text).and_then(|f| Ok((f.to_positive()?, f.dims.map(|[a, b]| (a, b))))),
    )
}

pub fn write_operator_file<T: Real>(
    path: impl AsRef<Path>,
    op: &HermitianOperator<T>,
    dims: Option<(usize, usize)>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, OperatorFile::from_operator(op, dims).to_json()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::random::random_density;

    #[test]
    fn identity_half_is_maximally_mixed() {
        let f = OperatorFile::parse(r#"{"dim":2,"entries":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#).unwrap();
        let st = f.to_state::<f64>().unwrap();
        assert!(st.density().is_normalized());
        assert!(st.density().max_abs_diff(&DensityOperator::maximally_mixed(2)) < 1e-15);
    }

    #[test]
    fn trace_error_names_value() {
        let f = OperatorFile::parse(r#"{"dim":2,"entries":[[[1.0,0],[0,0]],[[0,0],[0.5,0]]]}"#).unwrap();
        let err = f.to_state::<f64>().unwrap_err();
        assert!(matches!(err, Error::InvalidTrace { trace } if trace == 1.5));
        assert!(err.to_string().contains("1.5"));
    }

    #[test]
    fn non_hermitian_names_worst_entry() {
        let f = OperatorFile::parse(r#"{"dim":2,"entries":[[[0.5,0],[0.1,0]],[[0,0],[0.5,0]]]}"#).unwrap();
        let msg = f.to_state::<f64>().unwrap_err().to_string();
        assert!(msg.contains("(0, 1)"), "{msg}");
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        let f = OperatorFile::parse(r#"{"dim":2,"entries":[[[1.1,0],[0,0]],[[0,0],[-0.1,0]]]}"#).unwrap();
        assert!(matches!(f.to_state::<f64>(), Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn malformed_json_rejected() {
        assert!(matches!(OperatorFile::parse("{\"dim\": 2"), Err(Error::Parse(_))));
        let f = OperatorFile::parse(r#"{"dim":3,"entries":[[[1,0]]]}"#).unwrap();
        assert!(f.to_hermitian::<f64>().is_err());
    }

    #[test]
    fn round_trip() {
        let rho = random_density::<f64>(3, 2, 17).unwrap();
        let text = OperatorFile::from_operator(&rho, None).to_json();
        let back = OperatorFile::parse(&text).unwrap().to_state::<f64>().unwrap();
        assert!(back.density().max_abs_diff(&rho) <= 1e-12);
    }

    #[test]
    fn bipartite_dims_are_kept() {
        let rho = random_density::<f64>(4, 4, 3).unwrap();
        let text = OperatorFile::from_operator(&rho, Some((2, 2))).to_json();
        let st = OperatorFile::parse(&text).unwrap().to_state::<f64>().unwrap();
        assert_eq!(st.dims(), Some((2, 2)));
    }
}
