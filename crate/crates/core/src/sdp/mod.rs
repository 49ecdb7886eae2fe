//! Semidefinite programs over Hermitian matrix variables.
//!
//! A problem is posed as
//!
//! ```text
//! maximize   sum_b Re tr(C_b X_b)
//! subject to sum_b Re tr(A_ib X_b) = b_i   for each constraint i
//!            X_b >= 0                      for each block b
//! ```
//!
//! with dual `minimize b^T y  s.t.  sum_i y_i A_ib - C_b >= 0`. Solving goes
//! through a real-symmetric embedding (see [`realify`]) and the primal-dual
//! interior-point method in [`ipm`].

pub(crate) mod fidelity;
pub mod ipm;
mod realify;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::qmat::{ComplexMatrix, QmatError, C64};

pub use fidelity::{fidelity_sdp, fidelity_sdp_certified, FidelityCertificate, Support};
pub use ipm::{solve, solve_with, SolverOptions};
pub use realify::{realify, RealSdp, SparseSym};

/// Tolerance on Hermiticity of coefficient matrices.
pub const COEFF_HERMITIAN_TOL: f64 = 1e-12;

/// Default relative duality-gap tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("invalid SDP: {0}")]
    InvalidProblem(String),
    #[error("tolerance {0} outside (0, 1e-4]")]
    InvalidTolerance(f64),
    #[error("Schur complement not positive definite at iteration {iteration} (relative gap {rel_gap:.2e}, primal infeasibility {primal_infeasibility:.2e})")]
    SingularNewtonSystem {
        iteration: usize,
        rel_gap: f64,
        primal_infeasibility: f64,
    },
    #[error("solver did not certify optimality: {status:?} after {iterations} iterations")]
    NotOptimal {
        status: SdpStatus,
        iterations: usize,
    },
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// Sparse Hermitian matrix stored as (row, col, value) triplets with both
/// triangles present.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseHermitian {
    side: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseHermitian {
    pub fn new(side: usize) -> Self {
        Self {
            side,
            entries: Vec::new(),
        }
    }

    /// Drops exact zeros; does not check Hermiticity.
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if z != C64::new(0.0, 0.0) {
                    entries.push((i, j, z));
                }
            }
        }
        Self {
            side: m.nrows(),
            entries,
        }
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self::from_dense(m.matrix())
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `z` at (i, j) and conj(z) at (j, i) (once on the diagonal).
    pub fn push_pair(&mut self, i: usize, j: usize, z: C64) {
        if i == j {
            self.entries.push((i, i, C64::new(z.re, 0.0)));
        } else {
            self.entries.push((i, j, z));
            self.entries.push((j, i, z.conj()));
        }
    }

    /// Places this matrix as the diagonal sub-block starting at `offset` of
    /// a `side` x `side` matrix.
    pub fn embed(&self, offset: usize, side: usize) -> Self {
        Self {
            side,
            entries: self
                .entries
                .iter()
                .map(|&(i, j, z)| (i + offset, j + offset, z))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.side, self.side);
        for &(i, j, z) in &self.entries {
            m[(i, j)] += z;
        }
        m
    }

    /// Re tr(self * x).
    pub fn inner(&self, x: &DMatrix<C64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, z)| (z * x[(j, i)]).re)
            .sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.to_dense();
        (&d - d.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Orthonormal basis of the Hermitian n x n matrices under Re tr(AB):
/// E_kk, (E_kl + E_lk)/sqrt2 and i(E_lk - E_kl)/sqrt2 for k < l.
pub fn hermitian_basis(n: usize) -> Vec<SparseHermitian> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        let mut e = SparseHermitian::new(n);
        e.push_pair(k, k, C64::new(1.0, 0.0));
        out.push(e);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let mut re = SparseHermitian::new(n);
            re.push_pair(k, l, C64::new(s, 0.0));
            out.push(re);
            let mut im = SparseHermitian::new(n);
            im.push_pair(k, l, C64::new(0.0, -s));
            out.push(im);
        }
    }
    out
}

/// A Hermitian PSD variable block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub name: String,
    pub side: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockId(usize);

impl BlockId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(BlockId, SparseHermitian)>,
    pub rhs: f64,
}

/// A maximization SDP over Hermitian PSD blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SdpProblem {
    blocks: Vec<BlockSpec>,
    objective: Vec<SparseHermitian>,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, name: &str, side: usize) -> BlockId {
        self.blocks.push(BlockSpec {
            name: name.to_string(),
            side,
        });
        self.objective.push(SparseHermitian::new(side));
        BlockId(self.blocks.len() - 1)
    }

    pub fn set_objective(&mut self, block: BlockId, coeff: SparseHermitian) {
        self.objective[block.0] = coeff;
    }

    pub fn add_constraint(&mut self, terms: Vec<(BlockId, SparseHermitian)>, rhs: f64) {
        self.constraints.push(Constraint { terms, rhs });
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn objective(&self) -> &[SparseHermitian] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Checks shapes, Hermiticity of every coefficient, and the constraint
    /// and block counts.
    pub fn validate(&self) -> Result<(), SdpError> {
        let bad = |s: String| Err(SdpError::InvalidProblem(s));
        if self.blocks.is_empty() {
            return bad("no variable blocks".into());
        }
        if self.constraints.is_empty() {
            return bad("no constraints".into());
        }
        for b in &self.blocks {
            if b.side == 0 {
                return bad(format!("block `{}` has side 0", b.name));
            }
        }
        let check = |what: String, block: usize, c: &SparseHermitian| -> Result<(), SdpError> {
            if c.side != self.blocks[block].side {
                return Err(SdpError::InvalidProblem(format!(
                    "{what}: coefficient side {} != block side {}",
                    c.side, self.blocks[block].side
                )));
            }
            if c.entries.iter().any(|&(i, j, z)| {
                i >= c.side || j >= c.side || !z.re.is_finite() || !z.im.is_finite()
            }) {
                return Err(SdpError::InvalidProblem(format!(
                    "{what}: entry out of range or non-finite"
                )));
            }
            let dev = c.hermiticity_deviation();
            if dev > COEFF_HERMITIAN_TOL {
                return Err(SdpError::InvalidProblem(format!(
                    "{what}: coefficient not Hermitian (deviation {dev:.2e})"
                )));
            }
            Ok(())
        };
        for (b, c) in self.objective.iter().enumerate() {
            check(
                format!("objective of block `{}`", self.blocks[b].name),
                b,
                c,
            )?;
        }
        for (k, con) in self.constraints.iter().enumerate() {
            if !con.rhs.is_finite() {
                return bad(format!("constraint {k}: non-finite right-hand side"));
            }
            for (id, c) in &con.terms {
                if id.0 >= self.blocks.len() {
                    return bad(format!("constraint {k}: unknown block"));
                }
                check(format!("constraint {k}"), id.0, c)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
}

/// Solver output. Values refer to the maximization problem as posed;
/// `dual_multipliers` satisfy `sum_i y_i A_i - C >= 0` up to the reported
/// dual residual.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    pub blocks: Vec<ComplexMatrix>,
    pub dual_multipliers: Vec<f64>,
    /// Relative primal residual ||b - A(X)|| / (1 + ||b||).
    pub primal_residual: f64,
    /// Relative dual residual ||C - S - A*(y)|| / (1 + ||C||).
    pub dual_residual: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn gap(&self) -> f64 {
        (self.primal_value - self.dual_value).abs()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Fails unless the status is optimal.
    pub fn require_optimal(self) -> Result<Self, SdpError> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(SdpError::NotOptimal {
                status: self.status,
                iterations: self.iterations,
            })
        }
    }
}
