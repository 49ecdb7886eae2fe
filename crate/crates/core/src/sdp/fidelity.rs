//! Fidelity as the value of
//! `max Re tr X  s.t.  [[rho, X], [X^dagger, sigma]] >= 0`.
//!
//! Both states are first restricted to their supports. With
//! `rho = V L V^dagger` and `sigma = W M W^dagger` the block becomes
//! `[[L, Y], [Y^dagger, M]]` with `X = V Y W^dagger`, which keeps the
//! problem strictly feasible for rank-deficient inputs.

use nalgebra::DMatrix;

use super::{hermitian_basis, solve, SdpError, SdpProblem, SparseHermitian, DEFAULT_TOL};
use crate::qmat::{eigh, ComplexMatrix, DensityMatrix, QmatError, C64};

/// Relative eigenvalue cutoff below which directions are dropped from a
/// support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Spectral restriction of a PSD matrix to its numerical support.
#[derive(Debug, Clone)]
pub struct Support {
    /// Columns form an orthonormal basis of the support.
    pub isometry: DMatrix<C64>,
    /// Eigenvalues matching the columns, descending.
    pub values: Vec<f64>,
}

impl Support {
    pub fn of(m: &ComplexMatrix) -> Self {
        let e = eigh(m);
        let top = e.values.iter().fold(0.0f64, |a, &x| a.max(x));
        let cut = SUPPORT_CUTOFF * top.max(f64::MIN_POSITIVE);
        let keep: Vec<usize> = (0..e.values.len())
            .rev()
            .filter(|&i| e.values[i] > cut)
            .collect();
        let isometry = e.vectors.select_columns(&keep);
        let values = keep.iter().map(|&i| e.values[i]).collect();
        Self { isometry, values }
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn diagonal(&self) -> DMatrix<C64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.rank(),
            self.values.iter().map(|&v| C64::new(v, 0.0)),
        ))
    }
}

/// Solved fidelity SDP together with its dual bound.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityCertificate {
    pub value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub rank_rho: usize,
    pub rank_sigma: usize,
}

/// Adds the constraints fixing the diagonal sub-block at `offset` of a
/// `side` x `side` variable to equal `target`.
pub(crate) fn fix_sub_block(
    p: &mut SdpProblem,
    block: super::BlockId,
    offset: usize,
    side: usize,
    target: &DMatrix<C64>,
) {
    let target = ComplexMatrix::new(target.clone());
    for e in hermitian_basis(target.rows()) {
        let rhs = e.inner(target.matrix());
        p.add_constraint(vec![(block, e.embed(offset, side))], rhs);
    }
}

/// Objective coefficient on `[[., Y], [Y^dagger, .]]` (sides r, s) whose
/// value is Re tr(K Y), for K of shape s x r.
pub(crate) fn off_diagonal_objective(k: &DMatrix<C64>) -> SparseHermitian {
    let (s, r) = (k.nrows(), k.ncols());
    let mut c = SparseHermitian::new(r + s);
    for i in 0..s {
        for j in 0..r {
            let z = k[(i, j)];
            if z != C64::new(0.0, 0.0) {
                // entry (r + i, j) holds K/2, its mirror K^dagger/2
                c.push_pair(r + i, j, z * 0.5);
            }
        }
    }
    c
}

pub fn fidelity_sdp_certified(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<FidelityCertificate, SdpError> {
    if rho.dim() != sigma.dim() {
        return Err(SdpError::Matrix(QmatError::Shape(format!(
            "fidelity of a {}-dimensional and a {}-dimensional state",
            rho.dim(),
            sigma.dim()
        ))));
    }
    let sr = Support::of(rho.as_matrix());
    let ss = Support::of(sigma.as_matrix());
    let (r, s) = (sr.rank(), ss.rank());
    let side = r + s;
    let k = ss.isometry.adjoint() * &sr.isometry;

    let mut p = SdpProblem::new();
    let z = p.add_block("fidelity", side);
    p.set_objective(z, off_diagonal_objective(&k));
    fix_sub_block(&mut p, z, 0, side, &sr.diagonal());
    fix_sub_block(&mut p, z, r, side, &ss.diagonal());
    let sol = solve(&p, DEFAULT_TOL)?.require_optimal()?;
    Ok(FidelityCertificate {
        value: sol.primal_value.clamp(0.0, 1.0),
        dual_value: sol.dual_value,
        gap: sol.gap(),
        iterations: sol.iterations,
        rank_rho: r,
        rank_sigma: s,
    })
}

pub fn fidelity_sdp(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, SdpError> {
    fidelity_sdp_certified(rho, sigma).map(|c| c.value)
}
