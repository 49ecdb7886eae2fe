use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::{SdpError, SdpProblem, SparseHermitian, COEFF_HERMITIAN_TOL};
use crate::qmat::{ComplexMatrix, C64};

/// The embedding H -> [[Re H, -Im H], [Im H, Re H]]. Each eigenvalue of H
/// appears twice in the output, so tr(out) = 2 tr(H).
pub fn realify(h: &ComplexMatrix) -> Result<DMatrix<f64>, SdpError> {
    if !h.is_square() {
        return Err(SdpError::InvalidProblem(
            "realify needs a square matrix".into(),
        ));
    }
    let dev = h.hermiticity_deviation();
    if dev > COEFF_HERMITIAN_TOL {
        return Err(SdpError::InvalidProblem(format!(
            "realify needs a Hermitian matrix (deviation {dev:.2e})"
        )));
    }
    let n = h.rows();
    let m = h.matrix();
    Ok(DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    }))
}

/// Inverse of the embedding, applied to the symmetrized projection of a
/// real 2n x 2n matrix.
pub(crate) fn complexify(y: &DMatrix<f64>) -> DMatrix<C64> {
    let n = y.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| {
        C64::new(
            0.5 * (y[(i, j)] + y[(n + i, n + j)]),
            0.5 * (y[(n + i, j)] - y[(i, n + j)]),
        )
    })
}

/// Real symmetric sparse matrix, both triangles stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    /// Half the realification of a Hermitian coefficient, so that
    /// <out, realify(X)> = Re tr(H X).
    pub(crate) fn from_hermitian(h: &SparseHermitian) -> Self {
        let n = h.side();
        let mut acc = std::collections::BTreeMap::<(usize, usize), f64>::new();
        for &(i, j, z) in h.entries() {
            let mut add = |r: usize, c: usize, v: f64| {
                if v != 0.0 {
                    *acc.entry((r, c)).or_insert(0.0) += 0.5 * v;
                }
            };
            add(i, j, z.re);
            add(n + i, n + j, z.re);
            add(i, n + j, -z.im);
            add(n + i, j, z.im);
        }
        Self {
            entries: acc
                .into_iter()
                .filter(|&(_, v)| v != 0.0)
                .map(|((r, c), v)| (r, c, v))
                .collect(),
        }
    }

    pub fn inner(&self, x: &DMatrix<f64>) -> f64 {
        self.entries.iter().map(|&(i, j, v)| v * x[(i, j)]).sum()
    }

    pub fn add_scaled_to(&self, s: f64, out: &mut DMatrix<f64>) {
        for &(i, j, v) in &self.entries {
            out[(i, j)] += s * v;
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, _, v)| v * v).sum()
    }

    /// Distinct row indices, ascending.
    pub(crate) fn rows(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.entries.iter().map(|e| e.0).collect();
        r.sort_unstable();
        r.dedup();
        r
    }
}

/// A real-symmetric SDP: maximize sum <C_b, X_b> s.t. sum <A_ib, X_b> = b_i.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSdp {
    pub sizes: Vec<usize>,
    pub c: Vec<SparseSym>,
    /// Per constraint, the non-zero (block, coefficient) terms.
    pub a: Vec<Vec<(usize, SparseSym)>>,
    pub b: DVector<f64>,
}

impl RealSdp {
    pub fn from_problem(p: &SdpProblem) -> Self {
        let sizes = p.blocks().iter().map(|b| 2 * b.side).collect();
        let c = p
            .objective()
            .iter()
            .map(SparseSym::from_hermitian)
            .collect();
        let a = p
            .constraints()
            .iter()
            .map(|con| {
                con.terms
                    .iter()
                    .map(|(id, h)| (id.index(), SparseSym::from_hermitian(h)))
                    .filter(|(_, s)| !s.entries.is_empty())
                    .collect()
            })
            .collect();
        let b =
            DVector::from_iterator(p.constraints().len(), p.constraints().iter().map(|c| c.rhs));
        Self { sizes, c, a, b }
    }

    pub fn num_constraints(&self) -> usize {
        self.a.len()
    }

    /// Plain-text dump for cross-checking with an external solver.
    ///
    /// ```text
    /// realsdp maximize
    /// blocks <k> <size_1> ... <size_k>
    /// constraints <m>
    /// objective
    /// <block> <row> <col> <value>      (one line per stored entry)
    /// constraint <i> rhs <b_i>
    /// <block> <row> <col> <value>
    /// end
    /// ```
    /// Indices are 0-based, both triangles are listed.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "realsdp maximize");
        let sizes: Vec<String> = self.sizes.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "blocks {} {}", self.sizes.len(), sizes.join(" "));
        let _ = writeln!(s, "constraints {}", self.a.len());
        let _ = writeln!(s, "objective");
        for (blk, c) in self.c.iter().enumerate() {
            for &(i, j, v) in &c.entries {
                let _ = writeln!(s, "{blk} {i} {j} {v:e}");
            }
        }
        for (k, terms) in self.a.iter().enumerate() {
            let _ = writeln!(s, "constraint {k} rhs {:e}", self.b[k]);
            for (blk, a) in terms {
                for &(i, j, v) in &a.entries {
                    let _ = writeln!(s, "{blk} {i} {j} {v:e}");
                }
            }
        }
        let _ = writeln!(s, "end");
        s
    }
}
