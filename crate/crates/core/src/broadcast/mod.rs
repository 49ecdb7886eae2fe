//! Broadcasting channels and the semidefinite programs for their optimal
//! fidelities.
//!
//! Choi convention: for a channel from `A` to `A_1 ... A_n`,
//! `J = sum_{ij} |i><j| (x) E(|i><j|)` with the input factor first, and
//! `E(rho) = tr_A(J^{T_A} (rho (x) I))`.

mod channels;
mod model;
mod power;
mod symmetry;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmat::{partial_trace, ComplexMatrix, DensityMatrix, MatrixJson, QmatError, C64};
use crate::sdp::SdpError;

pub use channels::{identity_choi, uqcm_choi, xi_choi};
pub use model::{
    ensemble_fidelity, pure_dual_certificate, unilocal_fidelity, unilocal_fidelity_piani_variant,
    unilocal_fidelity_pure_dual, unilocal_fidelity_with, unilocal_sdp, BroadcastOptions,
    PureDualCertificate, SymmetryMode,
};
pub use power::{broadcasting_power_sampled, channel_broadcast_fidelity, PowerEstimate};
pub use symmetry::{symmetric_subspace_isometry, twirl_outputs};

/// Choi matrices must be PSD to this tolerance.
pub const CP_TOL: f64 = 1e-9;
/// Partial trace over the outputs must match the identity to this tolerance.
pub const TP_TOL: f64 = 1e-8;
/// Largest entrywise change under an output permutation for a Choi matrix
/// to count as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Largest realified side of a broadcasting SDP that will be attempted.
pub const MAX_REALIFIED_SIDE: usize = 4096;
/// Largest number of copies; the permutation group is enumerated.
pub const MAX_COPIES: usize = 5;
/// Certified results have a duality gap at most this large.
pub const CERTIFIED_GAP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BroadcastError {
    #[error(transparent)]
    Matrix(#[from] QmatError),
    #[error(transparent)]
    Solver(#[from] SdpError),
    #[error("Choi matrix is not completely positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotCp { min_eigenvalue: f64 },
    #[error("Choi matrix is not trace preserving (max deviation {deviation:.3e})")]
    NotTp { deviation: f64 },
    #[error(
        "Choi matrix is not symmetric under output permutations (max deviation {deviation:.3e})"
    )]
    NotSymmetric { deviation: f64 },
    #[error("output dimensions {0:?} are not all equal")]
    UnequalOutputs(Vec<usize>),
    #[error("copy count {0} outside 2..={max}", max = MAX_COPIES)]
    CopyCount(usize),
    #[error("problem needs realified side {side}, above the limit {limit}")]
    TooLarge { side: usize, limit: usize },
    #[error("state is not pure (second eigenvalue {0:.3e})")]
    NotPure(f64),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Choi matrix of a channel from one input system to `out_dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    mat: ComplexMatrix,
    in_dim: usize,
    out_dims: Vec<usize>,
}

impl ChoiMatrix {
    /// Validates complete positivity and trace preservation.
    pub fn new(
        mat: ComplexMatrix,
        in_dim: usize,
        out_dims: &[usize],
    ) -> Result<Self, BroadcastError> {
        let j = Self::unchecked(mat, in_dim, out_dims)?;
        j.check_cp()?;
        j.check_tp()?;
        Ok(j)
    }

    fn unchecked(
        mat: ComplexMatrix,
        in_dim: usize,
        out_dims: &[usize],
    ) -> Result<Self, BroadcastError> {
        if out_dims.is_empty() || in_dim == 0 || out_dims.contains(&0) {
            return Err(BroadcastError::Dimension(
                "a channel needs a non-empty input and at least one output".into(),
            ));
        }
        let dims = [&[in_dim][..], out_dims].concat();
        let mat = mat.set_dims(&dims)?;
        if !mat.is_finite() {
            return Err(QmatError::NonFinite.into());
        }
        Ok(Self {
            mat,
            in_dim,
            out_dims: out_dims.to_vec(),
        })
    }

    /// Projects a numerically optimal Choi matrix back onto the trace
    /// preserving set by `J -> (T^{-1/2} (x) I) J (T^{-1/2} (x) I)`, with
    /// `T` its input marginal, then validates it.
    pub fn from_numerical(
        mat: ComplexMatrix,
        in_dim: usize,
        out_dims: &[usize],
    ) -> Result<Self, BroadcastError> {
        let j = Self::unchecked(mat.hermitian_part(), in_dim, out_dims)?;
        let t = partial_trace(&j.mat, &[0])?;
        let e = crate::qmat::eigh(&t);
        if e.values[0] <= 0.0 {
            return Err(BroadcastError::NotTp {
                deviation: (e.values[0] - 1.0).abs(),
            });
        }
        let inv_sqrt = ComplexMatrix::new(e.reconstruct(|i| 1.0 / e.values[i].sqrt()));
        let left = crate::qmat::kron(&inv_sqrt, &ComplexMatrix::identity(j.out_dim()));
        let polished = (&(&left * &j.mat) * &left).hermitian_part();
        Self::new(polished, in_dim, out_dims)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn copies(&self) -> usize {
        self.out_dims.len()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dims.iter().product()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.mat.min_eigenvalue()
    }

    /// Largest entry of |tr_out J - I|.
    pub fn tp_deviation(&self) -> f64 {
        let t = partial_trace(&self.mat, &[0]).expect("dims set at construction");
        t.max_abs_diff(&ComplexMatrix::identity(self.in_dim))
    }

    /// Largest entrywise change of J under any output permutation; infinite
    /// if the outputs have different dimensions.
    pub fn symmetry_deviation(&self) -> f64 {
        if self.out_dims.iter().any(|&d| d != self.out_dims[0]) {
            return f64::INFINITY;
        }
        symmetry::max_permutation_deviation(self.mat.matrix(), self.out_dims[0], self.copies())
    }

    fn check_cp(&self) -> Result<(), BroadcastError> {
        let min_eigenvalue = self.min_eigenvalue();
        if min_eigenvalue < -CP_TOL {
            return Err(BroadcastError::NotCp { min_eigenvalue });
        }
        Ok(())
    }

    fn check_tp(&self) -> Result<(), BroadcastError> {
        let deviation = self.tp_deviation();
        if deviation > TP_TOL {
            return Err(BroadcastError::NotTp { deviation });
        }
        Ok(())
    }

    /// Fails unless the channel is symmetric under output permutations.
    pub fn require_symmetric(&self) -> Result<(), BroadcastError> {
        if self.out_dims.iter().any(|&d| d != self.out_dims[0]) {
            return Err(BroadcastError::UnequalOutputs(self.out_dims.clone()));
        }
        let deviation = self.symmetry_deviation();
        if deviation > SYMMETRY_TOL {
            return Err(BroadcastError::NotSymmetric { deviation });
        }
        Ok(())
    }

    /// The single-output channel obtained by discarding all outputs but
    /// `keep`.
    pub fn marginal(&self, keep: usize) -> Result<Self, BroadcastError> {
        if keep >= self.copies() {
            return Err(QmatError::SubsystemOutOfRange {
                index: keep,
                count: self.copies(),
            }
            .into());
        }
        let m = partial_trace(&self.mat, &[0, keep + 1])?;
        Self::new(m, self.in_dim, &[self.out_dims[keep]])
    }

    pub fn to_json(&self) -> MatrixJson {
        let mut j = MatrixJson::from_matrix(&self.mat);
        j.kind = Some("choi".into());
        j.in_dim = Some(self.in_dim);
        j.out_dims = Some(self.out_dims.clone());
        j
    }

    /// Reads a `"kind": "choi"` matrix and validates it.
    pub fn from_json(j: &MatrixJson) -> Result<Self, BroadcastError> {
        if let Some(kind) = &j.kind {
            if kind != "choi" {
                return Err(QmatError::Json(format!(
                    "field `kind`: expected \"choi\", got {kind:?}"
                ))
                .into());
            }
        }
        let in_dim = j
            .in_dim
            .ok_or_else(|| QmatError::Json("missing field `in_dim`".into()))?;
        let out_dims = j
            .out_dims
            .clone()
            .ok_or_else(|| QmatError::Json("missing field `out_dims`".into()))?;
        let m = j.to_matrix()?.without_dims();
        Self::new(m, in_dim, &out_dims)
    }
}

/// Output of the channel applied to the first factor of `rho`; the result
/// lives on `(A_1, ..., A_n, rest of rho)`.
pub fn apply_channel(j: &ChoiMatrix, rho: &DensityMatrix) -> Result<DensityMatrix, BroadcastError> {
    let dims = rho.dims();
    if dims[0] != j.in_dim {
        return Err(BroadcastError::Dimension(format!(
            "channel input has dimension {}, state's first factor has {}",
            j.in_dim, dims[0]
        )));
    }
    let rest: usize = dims[1..].iter().product();
    let out = apply_raw(j.mat.matrix(), j.in_dim, j.out_dim(), rho.matrix(), rest);
    let out_dims = [&j.out_dims[..], &dims[1..]].concat();
    let m = ComplexMatrix::with_dims(out, &out_dims)?.hermitian_part();
    DensityMatrix::new(m.clone())
        .or_else(|_| DensityMatrix::from_numerical(&m))
        .map_err(Into::into)
}

/// out[(x, b), (x', b')] = sum_{a, a''} J[(a'', x), (a, x')] rho[(a'', b), (a, b')].
pub(crate) fn apply_raw(
    j: &DMatrix<C64>,
    din: usize,
    dout: usize,
    rho: &DMatrix<C64>,
    db: usize,
) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::zeros(dout * db, dout * db);
    let zero = C64::new(0.0, 0.0);
    for x in 0..dout {
        for xp in 0..dout {
            for a2 in 0..din {
                for a in 0..din {
                    let jv = j[(a2 * dout + x, a * dout + xp)];
                    if jv == zero {
                        continue;
                    }
                    for b in 0..db {
                        for bp in 0..db {
                            out[(x * db + b, xp * db + bp)] += jv * rho[(a2 * db + b, a * db + bp)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Average of `(I (x) W_pi) J (I (x) W_pi)^dagger` over all output
/// permutations.
pub fn symmetrize_choi(j: &ChoiMatrix) -> Result<ChoiMatrix, BroadcastError> {
    if j.out_dims.iter().any(|&d| d != j.out_dims[0]) {
        return Err(BroadcastError::UnequalOutputs(j.out_dims.clone()));
    }
    let m = twirl_outputs(j.mat.matrix(), j.in_dim, j.out_dims[0], j.copies());
    ChoiMatrix::new(
        ComplexMatrix::new(m).hermitian_part(),
        j.in_dim,
        &j.out_dims,
    )
}

/// Value of an optimal broadcasting problem with its certificate data.
#[derive(Debug, Clone)]
pub struct BroadcastResult {
    pub value: f64,
    pub choi: ChoiMatrix,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
}

impl BroadcastResult {
    pub fn is_certified(&self) -> bool {
        self.gap <= CERTIFIED_GAP
    }
}

/// A finite ensemble of states with prior probabilities.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, DensityMatrix)>,
}

/// Probabilities must sum to one within this tolerance.
pub const PROBABILITY_TOL: f64 = 1e-9;

impl Ensemble {
    pub fn new(members: Vec<(f64, DensityMatrix)>) -> Result<Self, BroadcastError> {
        if members.is_empty() {
            return Err(BroadcastError::InvalidEnsemble("no states".into()));
        }
        let dim = members[0].1.dim();
        for (k, (p, rho)) in members.iter().enumerate() {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(BroadcastError::InvalidEnsemble(format!(
                    "probability {k} is {p}, expected a non-negative number"
                )));
            }
            if rho.dim() != dim {
                return Err(BroadcastError::InvalidEnsemble(format!(
                    "state {k} has dimension {}, state 0 has {dim}",
                    rho.dim()
                )));
            }
        }
        let total: f64 = members.iter().map(|m| m.0).sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(BroadcastError::InvalidEnsemble(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, DensityMatrix)] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    /// Parses `[{"p": 0.5, "matrix": {...}}, ...]`.
    pub fn from_json(text: &str) -> Result<Self, BroadcastError> {
        let raw: Vec<EnsembleEntryJson> =
            serde_json::from_str(text).map_err(|e| QmatError::Json(e.to_string()))?;
        let members = raw
            .into_iter()
            .map(|e| {
                let m = e.matrix.to_matrix()?;
                let d = m.rows();
                let rho = DensityMatrix::new(m.set_dims(&[d])?)?;
                Ok((e.p, rho))
            })
            .collect::<Result<Vec<_>, BroadcastError>>()?;
        Self::new(members)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct EnsembleEntryJson {
    p: f64,
    matrix: MatrixJson,
}

#[cfg(test)]
mod tests;
