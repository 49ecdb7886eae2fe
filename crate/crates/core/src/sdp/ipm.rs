//! Infeasible-start primal-dual path-following method with the HKM search
//! direction and Mehrotra predictor-corrector steps.
//!
//! Internally the problem is handled in minimization form
//! `min <C, X> s.t. A(X) = b, X >= 0` with dual
//! `max b^T y s.t. A*(y) + S = C, S >= 0`, where `C` is the negated
//! objective of the maximization problem.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::realify::{complexify, RealSdp, SparseSym};
use super::{SdpError, SdpProblem, SdpSolution, SdpStatus, DEFAULT_TOL};
use crate::qmat::ComplexMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Target relative duality gap; feasibility residuals must reach 10x this.
    pub tol: f64,
    pub max_iterations: usize,
    /// Threshold on the normalized Farkas residual that declares
    /// infeasibility or unboundedness.
    pub infeasibility_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iterations: 200,
            infeasibility_tol: 1e-8,
        }
    }
}

/// Solves a maximization SDP with default options and the given tolerance.
pub fn solve(p: &SdpProblem, tol: f64) -> Result<SdpSolution, SdpError> {
    solve_with(
        p,
        &SolverOptions {
            tol,
            ..SolverOptions::default()
        },
    )
}

pub fn solve_with(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution, SdpError> {
    if !(opts.tol > 0.0 && opts.tol <= 1e-4) {
        return Err(SdpError::InvalidTolerance(opts.tol));
    }
    p.validate()?;
    let real = RealSdp::from_problem(p);
    let out = solve_real(&real, opts)?;
    let blocks = out
        .x
        .iter()
        .zip(p.blocks())
        .map(|(x, spec)| {
            ComplexMatrix::new(complexify(x))
                .hermitian_part()
                .set_dims(&[spec.side])
                .expect("square block")
        })
        .collect();
    Ok(SdpSolution {
        status: out.status,
        primal_value: out.primal_value,
        dual_value: out.dual_value,
        blocks,
        dual_multipliers: out.y.iter().copied().collect(),
        primal_residual: out.primal_residual,
        dual_residual: out.dual_residual,
        iterations: out.iterations,
    })
}

/// Result of a real solve, in maximization convention.
#[derive(Debug, Clone)]
pub struct RealSolution {
    pub status: SdpStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    pub x: Vec<DMatrix<f64>>,
    pub y: DVector<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

struct Problem<'a> {
    sdp: &'a RealSdp,
    /// Minimization-form objective, dense per block.
    c: Vec<DMatrix<f64>>,
    /// Per block: (constraint index, coefficient).
    by_block: Vec<Vec<(usize, &'a SparseSym)>>,
    b_norm: f64,
    c_norm: f64,
}

impl<'a> Problem<'a> {
    fn new(sdp: &'a RealSdp) -> Self {
        let c: Vec<DMatrix<f64>> = sdp
            .sizes
            .iter()
            .zip(&sdp.c)
            .map(|(&n, cs)| {
                let mut m = DMatrix::zeros(n, n);
                cs.add_scaled_to(-1.0, &mut m);
                m
            })
            .collect();
        let mut by_block = vec![Vec::new(); sdp.sizes.len()];
        for (i, terms) in sdp.a.iter().enumerate() {
            for (blk, a) in terms {
                by_block[*blk].push((i, a));
            }
        }
        let c_norm = c.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
        Self {
            sdp,
            c,
            by_block,
            b_norm: sdp.b.norm(),
            c_norm,
        }
    }

    fn m(&self) -> usize {
        self.sdp.a.len()
    }

    fn a_op(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.sdp
                .a
                .iter()
                .map(|terms| terms.iter().map(|(blk, a)| a.inner(&x[*blk])).sum()),
        )
    }

    fn at_op(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self
            .sdp
            .sizes
            .iter()
            .map(|&n| DMatrix::zeros(n, n))
            .collect();
        for (i, terms) in self.sdp.a.iter().enumerate() {
            for (blk, a) in terms {
                a.add_scaled_to(y[i], &mut out[*blk]);
            }
        }
        out
    }

    /// M_ij = sum_b tr(A_ib X_b A_jb S_b^{-1}).
    fn schur(&self, x: &[DMatrix<f64>], s_inv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.m();
        let mut schur = DMatrix::zeros(m, m);
        for (blk, terms) in self.by_block.iter().enumerate() {
            let n = self.sdp.sizes[blk];
            let mut pos = vec![usize::MAX; n];
            for &(j, aj) in terms {
                let rows = aj.rows();
                for (k, &r) in rows.iter().enumerate() {
                    pos[r] = k;
                }
                // rows of A_j S^{-1} that can be non-zero
                let mut t = DMatrix::<f64>::zeros(rows.len(), n);
                for &(p, q, v) in &aj.entries {
                    let k = pos[p];
                    for col in 0..n {
                        t[(k, col)] += v * s_inv[blk][(q, col)];
                    }
                }
                let g = x[blk].select_columns(&rows) * t;
                for &(i, ai) in terms {
                    schur[(i, j)] += ai.inner(&g);
                }
                for &r in &rows {
                    pos[r] = usize::MAX;
                }
            }
        }
        (&schur + schur.transpose()) * 0.5
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Largest alpha (possibly infinite) with x + alpha dx PSD, for PD x.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(chol) = Cholesky::<f64, Dyn>::new(x.clone()) else {
        return 0.0;
    };
    let l = chol.l();
    let Some(w) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(z) = l.solve_lower_triangular(&w.transpose()) else {
        return 0.0;
    };
    let lmin = sym(z)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn step_length(x: &[DMatrix<f64>], dx: &[DMatrix<f64>]) -> f64 {
    x.iter()
        .zip(dx)
        .map(|(x, dx)| max_step(x, dx))
        .fold(f64::INFINITY, f64::min)
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    rel_gap: f64,
}

/// Cholesky factor of the Schur complement. Near convergence the matrix
/// can lose definiteness to rounding; the diagonal is then shifted by a
/// growing multiple of its largest entry.
fn factor_schur(schur: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::<f64, Dyn>::new(schur.clone()) {
        return Some(c);
    }
    let scale = schur.diagonal().amax().max(f64::MIN_POSITIVE);
    [1e-14, 1e-12, 1e-10].iter().find_map(|&shift| {
        let mut m = schur.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += shift * scale;
        }
        Cholesky::<f64, Dyn>::new(m)
    })
}

pub fn solve_real(sdp: &RealSdp, opts: &SolverOptions) -> Result<RealSolution, SdpError> {
    let prob = Problem::new(sdp);
    let m = prob.m();
    let total_dim: usize = sdp.sizes.iter().sum();

    // Starting point: scaled identities.
    let mut x: Vec<DMatrix<f64>> = Vec::with_capacity(sdp.sizes.len());
    let mut s: Vec<DMatrix<f64>> = Vec::with_capacity(sdp.sizes.len());
    for (blk, &n) in sdp.sizes.iter().enumerate() {
        let nf = n as f64;
        let mut xi = 10f64.max(nf.sqrt());
        let mut eta = 10f64.max(nf.sqrt()).max(prob.c[blk].norm());
        for &(i, a) in &prob.by_block[blk] {
            let an = a.norm_sq().sqrt();
            xi = xi.max(nf * (1.0 + sdp.b[i].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        x.push(DMatrix::identity(n, n) * xi);
        s.push(DMatrix::identity(n, n) * eta);
    }
    let mut y = DVector::zeros(m);

    let residuals = |x: &[DMatrix<f64>], y: &DVector<f64>, s: &[DMatrix<f64>]| {
        let rp = &sdp.b - prob.a_op(x);
        let aty = prob.at_op(y);
        let rd: Vec<DMatrix<f64>> = prob
            .c
            .iter()
            .zip(s)
            .zip(&aty)
            .map(|((c, s), a)| c - s - a)
            .collect();
        let pobj = inner(&prob.c, x);
        let dobj = sdp.b.dot(y);
        let rd_norm = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt();
        Residuals {
            pinf: rp.norm() / (1.0 + prob.b_norm),
            dinf: rd_norm / (1.0 + prob.c_norm),
            rel_gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
            rp,
            rd,
            pobj,
            dobj,
        }
    };

    let finish = |status: SdpStatus,
                  x: Vec<DMatrix<f64>>,
                  y: &DVector<f64>,
                  r: &Residuals,
                  iterations: usize| RealSolution {
        status,
        primal_value: -r.pobj,
        dual_value: -r.dobj,
        x,
        y: -y,
        primal_residual: r.pinf,
        dual_residual: r.dinf,
        iterations,
    };

    let mut stalls = 0;
    for iter in 0..opts.max_iterations {
        let r = residuals(&x, &y, &s);
        if r.rel_gap <= opts.tol && r.pinf <= 10.0 * opts.tol && r.dinf <= 10.0 * opts.tol {
            return Ok(finish(SdpStatus::Optimal, x, &y, &r, iter));
        }
        // Farkas-type certificates along the iterates.
        if r.dobj > 0.0 {
            let aty_s: f64 = prob
                .c
                .iter()
                .zip(&r.rd)
                .map(|(c, rd)| (c - rd).norm_squared())
                .sum::<f64>()
                .sqrt();
            if aty_s / r.dobj < opts.infeasibility_tol {
                return Ok(finish(SdpStatus::Infeasible, x, &y, &r, iter));
            }
        }
        if r.pobj < 0.0 {
            let ax = (&sdp.b - &r.rp).norm();
            if ax / -r.pobj < opts.infeasibility_tol {
                return Ok(finish(SdpStatus::Unbounded, x, &y, &r, iter));
            }
        }

        let mu = inner(&x, &s) / total_dim as f64;
        let s_inv: Vec<DMatrix<f64>> = s
            .iter()
            .map(|si| {
                Cholesky::<f64, Dyn>::new(si.clone())
                    .map(|c| c.inverse())
                    .ok_or(())
            })
            .collect::<Result<_, _>>()
            .map_err(|_| SdpError::SingularNewtonSystem {
                iteration: iter,
                rel_gap: r.rel_gap,
                primal_infeasibility: r.pinf,
            })?;
        let schur = prob.schur(&x, &s_inv);
        let chol = factor_schur(schur).ok_or(SdpError::SingularNewtonSystem {
            iteration: iter,
            rel_gap: r.rel_gap,
            primal_infeasibility: r.pinf,
        })?;

        let direction = |rc: &[DMatrix<f64>]| -> Direction {
            // T_b = (Rc_b - X_b Rd_b) S_b^{-1}
            let t: Vec<DMatrix<f64>> = rc
                .iter()
                .zip(&x)
                .zip(&r.rd)
                .zip(&s_inv)
                .map(|(((rc, x), rd), si)| (rc - x * rd) * si)
                .collect();
            let rhs = &r.rp - prob.a_op(&t);
            let dy = chol.solve(&rhs);
            let aty = prob.at_op(&dy);
            let ds: Vec<DMatrix<f64>> = r.rd.iter().zip(&aty).map(|(rd, a)| rd - a).collect();
            let dx: Vec<DMatrix<f64>> = rc
                .iter()
                .zip(&x)
                .zip(&ds)
                .zip(&s_inv)
                .map(|(((rc, x), ds), si)| sym((rc - x * ds) * si))
                .collect();
            Direction { dx, dy, ds }
        };

        // Predictor.
        let xs: Vec<DMatrix<f64>> = x.iter().zip(&s).map(|(x, s)| x * s).collect();
        let rc_aff: Vec<DMatrix<f64>> = xs.iter().map(|m| -m).collect();
        let aff = direction(&rc_aff);
        let ap = step_length(&x, &aff.dx).min(1.0);
        let ad = step_length(&s, &aff.ds).min(1.0);
        let x_aff: Vec<DMatrix<f64>> = x.iter().zip(&aff.dx).map(|(x, d)| x + d * ap).collect();
        let s_aff: Vec<DMatrix<f64>> = s.iter().zip(&aff.ds).map(|(s, d)| s + d * ad).collect();
        let mu_aff = inner(&x_aff, &s_aff) / total_dim as f64;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // Corrector.
        let rc: Vec<DMatrix<f64>> = xs
            .iter()
            .zip(aff.dx.iter().zip(&aff.ds))
            .map(|(xs, (dx, ds))| {
                let n = xs.nrows();
                DMatrix::identity(n, n) * (sigma * mu) - xs - dx * ds
            })
            .collect();
        let dir = direction(&rc);
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let alpha_p = (gamma * step_length(&x, &dir.dx)).min(1.0);
        let alpha_d = (gamma * step_length(&s, &dir.ds)).min(1.0);

        for (xb, d) in x.iter_mut().zip(&dir.dx) {
            *xb += d * alpha_p;
            *xb = sym(xb.clone());
        }
        y += &dir.dy * alpha_d;
        for (sb, d) in s.iter_mut().zip(&dir.ds) {
            *sb += d * alpha_d;
            *sb = sym(sb.clone());
        }

        if alpha_p < 1e-10 && alpha_d < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                let r = residuals(&x, &y, &s);
                return Ok(finish(SdpStatus::MaxIterations, x, &y, &r, iter + 1));
            }
        } else {
            stalls = 0;
        }
    }
    let r = residuals(&x, &y, &s);
    Ok(finish(
        SdpStatus::MaxIterations,
        x,
        &y,
        &r,
        opts.max_iterations,
    ))
}
