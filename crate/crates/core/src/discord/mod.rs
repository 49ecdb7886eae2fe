//! Measurement channels, discord search over qubit projective measurements,
//! and correlation loss under local broadcasting.

mod search;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::broadcast::{apply_channel, BroadcastError, ChoiMatrix};
use crate::qmat::{
    bipartite_mutual_information, eigh, parse_matrix_list_json, partial_trace, permute_systems,
    ComplexMatrix, DensityMatrix, QmatError, C64,
};

pub use search::{discord_one_sided, discord_two_sided, BlochAngles, DiscordResult};

/// POVM elements must sum to the identity within this tolerance.
pub const POVM_SUM_TOL: f64 = 1e-9;
/// POVM elements must be PSD within this tolerance.
pub const POVM_PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscordError {
    #[error(transparent)]
    Matrix(#[from] QmatError),
    #[error(transparent)]
    Broadcast(#[from] BroadcastError),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("unsupported dimensions: {0}")]
    UnsupportedDimension(String),
}

/// Which factor of a bipartite state a map acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self, DiscordError> {
        let Some(first) = elements.first() else {
            return Err(DiscordError::InvalidPovm("no elements".into()));
        };
        let d = first.rows();
        let mut sum = DMatrix::<C64>::zeros(d, d);
        for (k, e) in elements.iter().enumerate() {
            if !e.is_square() || e.rows() != d {
                return Err(DiscordError::InvalidPovm(format!(
                    "element {k} is {}x{}, expected {d}x{d}",
                    e.rows(),
                    e.cols()
                )));
            }
            if e.hermiticity_deviation() > POVM_PSD_TOL {
                return Err(DiscordError::InvalidPovm(format!(
                    "element {k} is not Hermitian"
                )));
            }
            let min = e.min_eigenvalue();
            if min < -POVM_PSD_TOL {
                return Err(DiscordError::InvalidPovm(format!(
                    "element {k} has eigenvalue {min:.3e}"
                )));
            }
            sum += e.matrix();
        }
        let dev = (sum - DMatrix::<C64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > POVM_SUM_TOL {
            return Err(DiscordError::InvalidPovm(format!(
                "elements sum to the identity only within {dev:.3e}"
            )));
        }
        let elements = elements.into_iter().map(|e| e.without_dims()).collect();
        Ok(Self { elements })
    }

    /// Parses a JSON list of matrices.
    pub fn from_json(text: &str) -> Result<Self, DiscordError> {
        Self::new(parse_matrix_list_json(text)?)
    }

    /// Measurement in the computational basis of `C^d`.
    pub fn computational(d: usize) -> Self {
        let elements = (0..d)
            .map(|k| {
                let mut diag = vec![0.0; d];
                diag[k] = 1.0;
                ComplexMatrix::from_real_diagonal(&diag)
            })
            .collect();
        Self { elements }
    }

    /// The single-outcome measurement `{I}`.
    pub fn trivial(d: usize) -> Self {
        Self {
            elements: vec![ComplexMatrix::identity(d)],
        }
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }
}

/// The measure-and-record channel `X -> sum_j tr(M_j X) |j><j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct QcChannel {
    povm: Povm,
}

impl QcChannel {
    pub fn new(povm: Povm) -> Self {
        Self { povm }
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    /// Outcome `j` is recorded as the basis state `|j>` of `C^outcomes`.
    pub fn outcomes(&self) -> usize {
        self.povm.outcomes()
    }
}

fn bipartite_dims(rho: &DensityMatrix) -> Result<(usize, usize), DiscordError> {
    match rho.dims() {
        &[a, b] => Ok((a, b)),
        other => Err(DiscordError::UnsupportedDimension(format!(
            "expected a bipartite state, got subsystem dims {other:?}"
        ))),
    }
}

/// Applies the QC channel to one side of a bipartite state; the measured
/// side is replaced by the classical outcome register.
pub fn apply_qc(
    q: &QcChannel,
    rho: &DensityMatrix,
    side: Side,
) -> Result<DensityMatrix, DiscordError> {
    let (da, db) = bipartite_dims(rho)?;
    let measured = match side {
        Side::A => da,
        Side::B => db,
    };
    if q.povm.dim() != measured {
        return Err(DiscordError::UnsupportedDimension(format!(
            "POVM acts on dimension {}, measured side has {measured}",
            q.povm.dim()
        )));
    }
    let k = q.outcomes();
    let (out_dims, other) = match side {
        Side::A => ([k, db], db),
        Side::B => ([da, k], da),
    };
    let mut out = DMatrix::<C64>::zeros(k * other, k * other);
    for (j, m) in q.povm.elements.iter().enumerate() {
        let (lifted, keep) = match side {
            Side::A => (m.matrix().kronecker(&DMatrix::identity(db, db)), 1),
            Side::B => (DMatrix::identity(da, da).kronecker(m.matrix()), 0),
        };
        let weighted = ComplexMatrix::with_dims(lifted * rho.matrix(), &[da, db])?;
        let block = partial_trace(&weighted, &[keep])?;
        for r in 0..other {
            for c in 0..other {
                let (row, col) = match side {
                    Side::A => (j * other + r, j * other + c),
                    Side::B => (r * k + j, c * k + j),
                };
                out[(row, col)] = block.get(r, c);
            }
        }
    }
    let m = ComplexMatrix::with_dims(out, &out_dims)?.hermitian_part();
    Ok(DensityMatrix::new(m.clone()).or_else(|_| DensityMatrix::from_numerical(&m))?)
}

/// Choi matrix of `X -> sum_i tr(M_i X) |i..i><i..i|` with `n` copies of
/// the outcome register: `J = sum_i M_i^T (x) |i^n><i^n|`.
pub fn measure_prepare_broadcast(povm: &Povm, n: usize) -> Result<ChoiMatrix, DiscordError> {
    if n == 0 {
        return Err(BroadcastError::CopyCount(0).into());
    }
    let d = povm.dim();
    let k = povm.outcomes();
    let dout = k.pow(n as u32);
    let mut j = DMatrix::<C64>::zeros(d * dout, d * dout);
    for (i, m) in povm.elements.iter().enumerate() {
        // index of |i i ... i> in base k
        let x = (0..n).fold(0, |acc, _| acc * k + i);
        let mt = m.matrix().transpose();
        for a in 0..d {
            for ap in 0..d {
                j[(a * dout + x, ap * dout + x)] += mt[(a, ap)];
            }
        }
    }
    Ok(ChoiMatrix::new(ComplexMatrix::new(j), d, &vec![k; n])?)
}

/// The map applied to B in [`avg_loss`].
#[derive(Debug, Clone)]
pub enum SideMap {
    Identity,
    Broadcast(ChoiMatrix),
}

/// `(1/n) sum_j (I(A:B)_rho - I(A_j:B_j))` after broadcasting A with
/// `lambda` and B with `gamma`. With [`SideMap::Identity`] every `A_j` is
/// paired with the untouched B.
pub fn avg_loss(
    rho: &DensityMatrix,
    lambda: &ChoiMatrix,
    gamma: &SideMap,
) -> Result<f64, DiscordError> {
    let (_, db) = bipartite_dims(rho)?;
    let n = lambda.copies();
    let i_rho = bipartite_mutual_information(rho)?;
    let after_a = apply_channel(lambda, rho)?;
    let (state, pairs): (DensityMatrix, Vec<[usize; 2]>) = match gamma {
        SideMap::Identity => (after_a, (0..n).map(|j| [j, n]).collect()),
        SideMap::Broadcast(g) => {
            if g.copies() != n {
                return Err(DiscordError::UnsupportedDimension(format!(
                    "A is broadcast to {n} parts but B to {}",
                    g.copies()
                )));
            }
            if g.in_dim() != db {
                return Err(DiscordError::UnsupportedDimension(format!(
                    "B has dimension {db}, its channel expects {}",
                    g.in_dim()
                )));
            }
            // move B to the front so the channel acts on it
            let order: Vec<usize> = std::iter::once(n).chain(0..n).collect();
            let moved = permute_systems(after_a.as_matrix(), &order)?;
            let moved = DensityMatrix::new(moved)?;
            let out = apply_channel(g, &moved)?;
            // systems are now (B_1..B_n, A_1..A_n)
            (out, (0..n).map(|j| [j, n + j]).collect())
        }
    };
    let mut total = 0.0;
    for pair in pairs {
        let marginal = state.reduce(&pair)?;
        total += i_rho - bipartite_mutual_information(&marginal)?;
    }
    Ok(total / n as f64)
}

/// Mutual information of `sum_j |j><j| (x) sigma_j` given the unnormalized
/// conditional blocks `sigma_j`, in bits:
/// `H(sum_j sigma_j) - sum_j p_j H(sigma_j / p_j)`.
pub(crate) fn cq_mutual_information(blocks: &[DMatrix<C64>]) -> f64 {
    let entropy = |m: &DMatrix<C64>| -> f64 {
        let e = eigh(&ComplexMatrix::new(m.clone()));
        crate::qmat::shannon_entropy(&e.values)
    };
    let total: DMatrix<C64> = blocks.iter().fold(
        DMatrix::zeros(blocks[0].nrows(), blocks[0].ncols()),
        |acc, b| acc + b,
    );
    let mut conditional = 0.0;
    for b in blocks {
        let p = b.trace().re;
        if p > 1e-15 {
            conditional += p * entropy(&(b / C64::new(p, 0.0)));
        }
    }
    entropy(&total) - conditional
}

#[cfg(test)]
mod tests;
