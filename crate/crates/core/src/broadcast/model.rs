//! Builders for the broadcasting SDPs.
//!
//! The Choi variable `J` lives on `A (x) A_1 (x) ... (x) A_n`. Each state to
//! be broadcast contributes a fidelity block
//! `[[L, Y], [Y^dagger, tr_{\A_1 B}(J^{T_A} rho)]]` where `rho = V L V^dagger`
//! is the spectral restriction of the state to its support, and the
//! objective is `Re tr(V Y)`. Linear constraints tie the lower-right corner
//! of every fidelity block to `J`.
//!
//! Output-permutation symmetry of `J` is imposed in one of three ways:
//! - [`SymmetryMode::Projected`]: every coefficient acting on `J` is replaced
//!   by its average over output permutations. Any optimizer then symmetrizes
//!   to a symmetric optimizer with the same value, so no extra constraints
//!   are needed.
//! - [`SymmetryMode::Explicit`]: `J` is left general and equalities force its
//!   entries to be constant on permutation orbits.
//! - the stronger two-sided symmetry is obtained by writing
//!   `J = (I (x) V) K (I (x) V)^dagger` with `V` the isometry onto the
//!   symmetric subspace of the outputs.

use nalgebra::DMatrix;

use super::symmetry::{symmetric_subspace_isometry, symmetry_constraints, twirl_outputs};
use super::{
    BroadcastError, BroadcastResult, ChoiMatrix, Ensemble, MAX_COPIES, MAX_REALIFIED_SIDE,
};
use crate::qmat::{kron, partial_trace, ComplexMatrix, DensityMatrix, C64};
use crate::sdp::fidelity::{fix_sub_block, off_diagonal_objective};
use crate::sdp::{
    hermitian_basis, solve, BlockId, SdpProblem, SdpSolution, SparseHermitian, Support, DEFAULT_TOL,
};

/// Eigenvalue threshold for treating a state as pure.
pub const PURITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymmetryMode {
    #[default]
    Projected,
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastOptions {
    pub tol: f64,
    pub symmetry: SymmetryMode,
}

impl Default for BroadcastOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            symmetry: SymmetryMode::Projected,
        }
    }
}

/// How the Choi variable is represented in the SDP.
enum ChoiParam {
    Projected,
    Explicit,
    SymmetricRange(DMatrix<C64>),
}

impl ChoiParam {
    fn from_mode(mode: SymmetryMode) -> Self {
        match mode {
            SymmetryMode::Projected => Self::Projected,
            SymmetryMode::Explicit => Self::Explicit,
        }
    }

    fn side(&self, din: usize, n: usize) -> usize {
        match self {
            Self::SymmetricRange(v) => v.ncols(),
            _ => din * din.pow(n as u32),
        }
    }

    /// Coefficient acting on the SDP variable for a coefficient `a` on J.
    fn pull_back(&self, a: &DMatrix<C64>, din: usize, n: usize) -> DMatrix<C64> {
        match self {
            Self::Projected => twirl_outputs(a, din, din, n),
            Self::Explicit => a.clone(),
            Self::SymmetricRange(v) => v.adjoint() * a * v,
        }
    }

    fn recover(&self, x: &ComplexMatrix, din: usize, n: usize) -> ComplexMatrix {
        match self {
            Self::Projected => ComplexMatrix::new(twirl_outputs(x.matrix(), din, din, n)),
            Self::Explicit => x.clone().without_dims(),
            Self::SymmetricRange(v) => ComplexMatrix::new(v * x.matrix() * v.adjoint()),
        }
    }
}

fn check_copies(n: usize) -> Result<(), BroadcastError> {
    if (2..=MAX_COPIES).contains(&n) {
        Ok(())
    } else {
        Err(BroadcastError::CopyCount(n))
    }
}

fn check_bipartite(rho: &DensityMatrix) -> Result<(usize, usize), BroadcastError> {
    match rho.dims() {
        &[a, b] => Ok((a, b)),
        other => Err(BroadcastError::Dimension(format!(
            "expected a bipartite state, got subsystem dims {other:?}"
        ))),
    }
}

/// Coefficient `C` on `J` with `Re tr(C J) = Re tr(E tr_{\A_1 B}(J^{T_A} rho))`
/// for `rho` on `(A, B)` and `E` on `(A_1, B)`, with `n` outputs of
/// dimension `|A|`:
/// `C = herm(K (x) I)` with
/// `K[(a, a1'), (a'', a1)] = sum_{b, b'} E[(a1', b'), (a1, b)] rho[(a'', b), (a, b')]`.
pub(crate) fn marginal_adjoint(
    e: &DMatrix<C64>,
    rho: &DMatrix<C64>,
    din: usize,
    db: usize,
    n: usize,
) -> DMatrix<C64> {
    let d = din;
    let rest = d.pow(n as u32 - 1);
    let mut k = DMatrix::<C64>::zeros(din * d, din * d);
    for a in 0..din {
        for a1p in 0..d {
            for a2 in 0..din {
                for a1 in 0..d {
                    let mut s = C64::new(0.0, 0.0);
                    for b in 0..db {
                        for bp in 0..db {
                            s += e[(a1p * db + bp, a1 * db + b)] * rho[(a2 * db + b, a * db + bp)];
                        }
                    }
                    k[(a * d + a1p, a2 * d + a1)] = s;
                }
            }
        }
    }
    let full = k.kronecker(&DMatrix::<C64>::identity(rest, rest));
    (&full + full.adjoint()) * C64::new(0.5, 0.0)
}

/// One state to be broadcast and its weight in the objective.
struct Term {
    weight: f64,
    rho: DMatrix<C64>,
    db: usize,
}

/// Restricts the B factor of a state on (A, B) to the support of its
/// B marginal; fidelities are unchanged by this local isometry.
fn reduce_b(rho: &DensityMatrix) -> Result<Term, BroadcastError> {
    let (da, db) = check_bipartite(rho)?;
    let rho_b = partial_trace(rho.as_matrix(), &[1])?;
    let sb = Support::of(&rho_b);
    if sb.rank() == db {
        return Ok(Term {
            weight: 1.0,
            rho: rho.matrix().clone(),
            db,
        });
    }
    let m = kron(
        &ComplexMatrix::identity(da),
        &ComplexMatrix::new(sb.isometry.clone()),
    );
    let reduced = m.matrix().adjoint() * rho.matrix() * m.matrix();
    Ok(Term {
        weight: 1.0,
        rho: (&reduced + reduced.adjoint()) * C64::new(0.5, 0.0),
        db: sb.rank(),
    })
}

struct Model {
    problem: SdpProblem,
    j_block: BlockId,
    param: ChoiParam,
    din: usize,
    n: usize,
}

/// Size measure checked against [`MAX_REALIFIED_SIDE`]: the realified
/// side of the assembled problem, or of a state on `A (x) A^n (x) B`
/// when that is larger.
fn realified_side(
    param: &ChoiParam,
    din: usize,
    n: usize,
    terms: &[(usize, usize)],
    db: usize,
) -> usize {
    let assembled = 2 * (param.side(din, n) + terms.iter().map(|(r, nn)| r + nn).sum::<usize>());
    assembled.max(2 * din.pow(n as u32 + 1) * db)
}

fn build(terms: &[Term], din: usize, n: usize, param: ChoiParam) -> Result<Model, BroadcastError> {
    check_copies(n)?;
    let supports: Vec<Support> = terms
        .iter()
        .map(|t| Support::of(&ComplexMatrix::new(t.rho.clone())))
        .collect();
    let shapes: Vec<(usize, usize)> = supports
        .iter()
        .zip(terms)
        .map(|(s, t)| (s.rank(), din * t.db))
        .collect();
    let db = terms.iter().map(|t| t.db).max().unwrap_or(1);
    let side = realified_side(&param, din, n, &shapes, db);
    if side > MAX_REALIFIED_SIDE {
        return Err(BroadcastError::TooLarge {
            side,
            limit: MAX_REALIFIED_SIDE,
        });
    }

    let mut p = SdpProblem::new();
    let j_side = param.side(din, n);
    let j_block = p.add_block("choi", j_side);
    let dout = din.pow(n as u32);

    for e in hermitian_basis(din) {
        let coeff = kron(
            &ComplexMatrix::new(e.to_dense()),
            &ComplexMatrix::identity(dout),
        );
        let pulled = param.pull_back(coeff.matrix(), din, n);
        let rhs = e.to_dense().trace().re;
        p.add_constraint(vec![(j_block, SparseHermitian::from_dense(&pulled))], rhs);
    }
    if let ChoiParam::Explicit = param {
        for g in symmetry_constraints(din, din, n) {
            p.add_constraint(vec![(j_block, g)], 0.0);
        }
    }

    for (k, (term, support)) in terms.iter().zip(&supports).enumerate() {
        let r = support.rank();
        let nn = din * term.db;
        let z_side = r + nn;
        let z = p.add_block(&format!("fidelity-{k}"), z_side);
        let mut obj = off_diagonal_objective(&support.isometry);
        if term.weight != 1.0 {
            let scaled = obj.to_dense() * C64::new(term.weight, 0.0);
            obj = SparseHermitian::from_dense(&scaled);
        }
        p.set_objective(z, obj);
        fix_sub_block(&mut p, z, 0, z_side, &support.diagonal());
        for e in hermitian_basis(nn) {
            let adj = marginal_adjoint(&e.to_dense(), &term.rho, din, term.db, n);
            let pulled = param.pull_back(&adj, din, n) * C64::new(-1.0, 0.0);
            p.add_constraint(
                vec![
                    (z, e.embed(r, z_side)),
                    (j_block, SparseHermitian::from_dense(&pulled)),
                ],
                0.0,
            );
        }
    }
    Ok(Model {
        problem: p,
        j_block,
        param,
        din,
        n,
    })
}

fn solve_model(model: &Model, tol: f64) -> Result<BroadcastResult, BroadcastError> {
    let sol: SdpSolution = solve(&model.problem, tol)?.require_optimal()?;
    let j = model
        .param
        .recover(&sol.blocks[model.j_block.index()], model.din, model.n);
    let choi = ChoiMatrix::from_numerical(j, model.din, &vec![model.din; model.n])?;
    choi.require_symmetric()?;
    Ok(BroadcastResult {
        value: sol.primal_value.clamp(0.0, 1.0),
        dual_value: sol.dual_value,
        gap: sol.gap(),
        iterations: sol.iterations,
        choi,
    })
}

/// The SDP for the optimal unilocal n-broadcasting fidelity, as it is
/// handed to the solver.
pub fn unilocal_sdp(
    rho: &DensityMatrix,
    n: usize,
    symmetry: SymmetryMode,
) -> Result<SdpProblem, BroadcastError> {
    let term = reduce_b(rho)?;
    let din = rho.dims()[0];
    Ok(build(&[term], din, n, ChoiParam::from_mode(symmetry))?.problem)
}

/// Optimal fidelity between `rho` and the `(A_1, B)` marginal of a
/// symmetric n-broadcasting channel applied on `A`.
pub fn unilocal_fidelity(rho: &DensityMatrix, n: usize) -> Result<BroadcastResult, BroadcastError> {
    unilocal_fidelity_with(rho, n, &BroadcastOptions::default())
}

pub fn unilocal_fidelity_with(
    rho: &DensityMatrix,
    n: usize,
    opts: &BroadcastOptions,
) -> Result<BroadcastResult, BroadcastError> {
    let term = reduce_b(rho)?;
    let din = rho.dims()[0];
    let model = build(&[term], din, n, ChoiParam::from_mode(opts.symmetry))?;
    solve_model(&model, opts.tol)
}

/// The same problem with the output restricted to the symmetric subspace,
/// i.e. `J = W_p J W_q^dagger` for every pair of output permutations.
pub fn unilocal_fidelity_piani_variant(
    rho: &DensityMatrix,
    n: usize,
) -> Result<BroadcastResult, BroadcastError> {
    check_copies(n)?;
    let term = reduce_b(rho)?;
    let din = rho.dims()[0];
    let v = kron(
        &ComplexMatrix::identity(din),
        &ComplexMatrix::new(symmetric_subspace_isometry(din, n)),
    )
    .into_matrix();
    let model = build(&[term], din, n, ChoiParam::SymmetricRange(v))?;
    solve_model(&model, DEFAULT_TOL)
}

/// Optimal weighted average fidelity of a single symmetric channel
/// broadcasting every member of the ensemble.
pub fn ensemble_fidelity(eta: &Ensemble, n: usize) -> Result<BroadcastResult, BroadcastError> {
    let din = eta.dim();
    let terms: Vec<Term> = eta
        .members()
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, rho)| Term {
            weight: *p,
            rho: rho.matrix().clone(),
            db: 1,
        })
        .collect();
    let model = build(&terms, din, n, ChoiParam::Projected)?;
    solve_model(&model, DEFAULT_TOL)
}

/// Dual certificate for the pure-state problem: Hermitian `Y_A` and `Z`
/// with `Q - Y_A (x) I + Z - (1/n!) sum_pi W_pi^dagger Z W_pi <= 0`, where
/// `Q = tr_B(psi^{T_A} psi_{A_1 B}) (x) I`, certifying
/// `f_n(psi) <= sqrt(tr Y_A)`.
#[derive(Debug, Clone)]
pub struct PureDualCertificate {
    /// `sqrt(tr Y_A)`.
    pub value: f64,
    /// Square root of the primal optimum of the same solve.
    pub primal_value: f64,
    pub y_a: ComplexMatrix,
    pub z: ComplexMatrix,
    /// Largest eigenvalue of the left-hand side above; at most rounding
    /// error for a valid certificate.
    pub lmi_max_eigenvalue: f64,
    pub iterations: usize,
}

pub fn pure_dual_certificate(
    psi: &DensityMatrix,
    n: usize,
) -> Result<PureDualCertificate, BroadcastError> {
    check_copies(n)?;
    let (din, db) = check_bipartite(psi)?;
    let spectrum = psi.spectrum();
    let second = spectrum[spectrum.len() - 2];
    if second > PURITY_TOL {
        return Err(BroadcastError::NotPure(second));
    }
    let j_side = din * din.pow(n as u32);
    if 2 * j_side > MAX_REALIFIED_SIDE {
        return Err(BroadcastError::TooLarge {
            side: 2 * j_side,
            limit: MAX_REALIFIED_SIDE,
        });
    }
    let q = marginal_adjoint(psi.matrix(), psi.matrix(), din, db, n);
    let q_sym = twirl_outputs(&q, din, din, n);

    let mut p = SdpProblem::new();
    let j = p.add_block("choi", j_side);
    p.set_objective(j, SparseHermitian::from_dense(&q_sym));
    let dout = din.pow(n as u32);
    let basis = hermitian_basis(din);
    for e in &basis {
        let coeff = e
            .to_dense()
            .kronecker(&DMatrix::<C64>::identity(dout, dout));
        p.add_constraint(
            vec![(j, SparseHermitian::from_dense(&coeff))],
            e.to_dense().trace().re,
        );
    }
    let sol = solve(&p, DEFAULT_TOL)?.require_optimal()?;

    let mut y = DMatrix::<C64>::zeros(din, din);
    for (e, &yk) in basis.iter().zip(&sol.dual_multipliers) {
        y += e.to_dense() * C64::new(yk, 0.0);
    }
    let eye_out = DMatrix::<C64>::identity(dout, dout);
    let slack = ComplexMatrix::new(&q_sym - y.kronecker(&eye_out));
    let excess = slack.eigenvalues().into_iter().fold(f64::MIN, f64::max);
    if excess > 0.0 {
        // shift Y_A so the certificate is exactly feasible
        y += DMatrix::<C64>::identity(din, din) * C64::new(excess, 0.0);
    }
    let z = &q_sym - &q;
    let lhs = &q - y.kronecker(&eye_out) + &z - twirl_outputs(&z, din, din, n);
    let lmi_max_eigenvalue = ComplexMatrix::new(lhs)
        .eigenvalues()
        .into_iter()
        .fold(f64::MIN, f64::max);
    let trace_y = y.trace().re;
    Ok(PureDualCertificate {
        value: trace_y.max(0.0).sqrt(),
        primal_value: sol.primal_value.max(0.0).sqrt(),
        y_a: ComplexMatrix::new(y),
        z: ComplexMatrix::new(z),
        lmi_max_eigenvalue,
        iterations: sol.iterations,
    })
}

/// `sqrt(tr Y_A)` from [`pure_dual_certificate`].
pub fn unilocal_fidelity_pure_dual(psi: &DensityMatrix, n: usize) -> Result<f64, BroadcastError> {
    pure_dual_certificate(psi, n).map(|c| c.value)
}
