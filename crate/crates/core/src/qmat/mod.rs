//! Dense complex matrices with tensor-factor metadata, and the
//! quantum-information primitives built on top of them.

mod json;
mod linalg;
pub mod random;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub use json::{parse_matrix_json, parse_matrix_list_json, MatrixJson};
pub use linalg::{eigh, psd_sqrt, Eigh};

pub type C64 = Complex64;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmatError {
    #[error("matrix has no subsystem dimensions; partial operations need explicit dims")]
    MissingDims,
    #[error("subsystem dims {dims:?} multiply to {product}, but matrix side is {side}")]
    DimsMismatch {
        dims: Vec<usize>,
        product: usize,
        side: usize,
    },
    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },
    #[error("subsystem index {0} listed twice")]
    DuplicateSubsystem(usize),
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("invalid density matrix: {}", format_violations(.0))]
    InvalidState(Vec<Violation>),
    #[error("bipartition {a:?} | {b:?} does not split {count} subsystems")]
    BadCut {
        a: Vec<usize>,
        b: Vec<usize>,
        count: usize,
    },
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("malformed matrix JSON: {0}")]
    Json(String),
}

/// One failed density-matrix invariant and how badly it failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    Hermiticity { max_deviation: f64 },
    Trace { trace: f64 },
    Positivity { min_eigenvalue: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Hermiticity { max_deviation } => write!(
                f,
                "Hermiticity violated (max |M - M^dag| = {max_deviation:.3e} > {HERMITIAN_TOL:.0e})"
            ),
            Violation::Trace { trace } => write!(
                f,
                "trace violated (tr M = {trace:.12}, |tr M - 1| = {:.3e} > {TRACE_TOL:.0e})",
                (trace - 1.0).abs()
            ),
            Violation::Positivity { min_eigenvalue } => write!(
                f,
                "PSD violated (min eigenvalue = {min_eigenvalue:.3e} < -{PSD_TOL:.0e})"
            ),
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Dense complex matrix, optionally tagged with the dimensions of the tensor
/// factors it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
    dims: Option<Vec<usize>>,
}

impl ComplexMatrix {
    pub fn new(data: DMatrix<C64>) -> Self {
        Self { data, dims: None }
    }

    pub fn with_dims(data: DMatrix<C64>, dims: &[usize]) -> Result<Self, QmatError> {
        Self::new(data).set_dims(dims)
    }

    pub fn set_dims(mut self, dims: &[usize]) -> Result<Self, QmatError> {
        let product: usize = dims.iter().product();
        if product != self.data.nrows() || (self.is_square() && product != self.data.ncols()) {
            return Err(QmatError::DimsMismatch {
                dims: dims.to_vec(),
                product,
                side: self.data.nrows(),
            });
        }
        self.dims = Some(dims.to_vec());
        Ok(self)
    }

    pub fn without_dims(mut self) -> Self {
        self.dims = None;
        self
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(DMatrix::from_diagonal(&v))
    }

    /// Row-major real/imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<Self, QmatError> {
        let rows = re.len();
        let cols = re.first().map_or(0, Vec::len);
        if re.iter().any(|r| r.len() != cols) {
            return Err(QmatError::Shape("ragged real part".into()));
        }
        if let Some(im) = im {
            if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                return Err(QmatError::Shape(format!(
                    "imaginary part shape differs from real part ({rows}x{cols})"
                )));
            }
        }
        let data = DMatrix::from_fn(rows, cols, |i, j| {
            C64::new(re[i][j], im.map_or(0.0, |im| im[i][j]))
        });
        let m = Self::new(data);
        if !m.is_finite() {
            return Err(QmatError::NonFinite);
        }
        Ok(m)
    }

    /// |v><v| for a column vector v.
    pub fn projector(v: &DVector<C64>) -> Self {
        Self::new(v * v.adjoint())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn dims(&self) -> Option<&[usize]> {
        self.dims.as_deref()
    }

    fn require_dims(&self) -> Result<&[usize], QmatError> {
        self.dims.as_deref().ok_or(QmatError::MissingDims)
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.data.nrows() == self.data.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.adjoint(),
            dims: self.dims.clone(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            data: self.data.transpose(),
            dims: self.dims.clone(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            data: self.data.map(|z| z * s),
            dims: self.dims.clone(),
        }
    }

    /// Largest entrywise |M - M^dag|.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// (M + M^dag)/2.
    pub fn hermitian_part(&self) -> Self {
        Self {
            data: (&self.data + self.data.adjoint()).map(|z| z * 0.5),
            dims: self.dims.clone(),
        }
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.data.shape(), other.data.shape());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Re tr(A^dag B), the real inner product on matrices.
    pub fn inner(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Eigenvalues (ascending) of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(self).values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Trace norm of the Hermitian part.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|x| x.abs()).sum()
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data + &rhs.data,
            dims: self.dims.clone().or_else(|| rhs.dims.clone()),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data - &rhs.data,
            dims: self.dims.clone().or_else(|| rhs.dims.clone()),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data * &rhs.data,
            dims: self.dims.clone().or_else(|| rhs.dims.clone()),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            data: -&self.data,
            dims: self.dims.clone(),
        }
    }
}

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `mat` as a state. A matrix without dims is treated as a
    /// single system.
    pub fn new(mat: ComplexMatrix) -> Result<Self, QmatError> {
        if !mat.is_square() {
            return Err(QmatError::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        if !mat.is_finite() {
            return Err(QmatError::NonFinite);
        }
        let mat = match mat.dims {
            Some(_) => mat,
            None => {
                let n = mat.rows();
                mat.set_dims(&[n])?
            }
        };
        let mut violations = Vec::new();
        let herm = mat.hermiticity_deviation();
        if herm > HERMITIAN_TOL {
            violations.push(Violation::Hermiticity {
                max_deviation: herm,
            });
        }
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            violations.push(Violation::Trace { trace: tr });
        }
        let min_eig = mat.min_eigenvalue();
        if min_eig < -PSD_TOL {
            violations.push(Violation::Positivity {
                min_eigenvalue: min_eig,
            });
        }
        if violations.is_empty() {
            Ok(Self { mat })
        } else {
            Err(QmatError::InvalidState(violations))
        }
    }

    pub fn from_matrix(data: DMatrix<C64>, dims: &[usize]) -> Result<Self, QmatError> {
        Self::new(ComplexMatrix::with_dims(data, dims)?)
    }

    /// |psi><psi| after normalizing `psi`.
    pub fn pure(psi: &DVector<C64>, dims: &[usize]) -> Result<Self, QmatError> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QmatError::Shape("zero or non-finite state vector".into()));
        }
        let v = psi.map(|z| z / norm);
        Self::new(ComplexMatrix::projector(&v).set_dims(dims)?)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(d)
                .scale(1.0 / d as f64)
                .set_dims(&[d])
                .expect("square"),
        }
    }

    /// |Phi_d> = d^{-1/2} sum_j |jj>.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = DVector::zeros(d * d);
        for j in 0..d {
            v[j * d + j] = C64::new(1.0, 0.0);
        }
        Self::pure(&v, &[d, d]).expect("valid")
    }

    /// |0><0| on a d-level system, or more generally |k><k|.
    pub fn basis_state(k: usize, d: usize) -> Self {
        let mut v = DVector::zeros(d);
        v[k] = C64::new(1.0, 0.0);
        Self::pure(&v, &[d]).expect("valid")
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.mat.matrix()
    }

    pub fn dims(&self) -> &[usize] {
        self.mat.dims().expect("density matrices always carry dims")
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Eigenvalues clamped at zero, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        self.mat
            .eigenvalues()
            .into_iter()
            .map(|x| x.max(0.0))
            .collect()
    }

    /// Tensor product of two states.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            mat: kron(&self.mat, &other.mat),
        }
    }

    /// Reduced state on the listed subsystems.
    pub fn reduce(&self, keep: &[usize]) -> Result<Self, QmatError> {
        let mut m = partial_trace(&self.mat, keep)?;
        if m.dims().is_none_or(|d| d.is_empty()) {
            m = m.set_dims(&[1])?;
        }
        Ok(Self { mat: m })
    }

    /// Conjugates by a unitary: U rho U^dag.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self, QmatError> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(QmatError::Shape(format!(
                "unitary is {}x{}, state side is {}",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        let data = u.matrix() * self.matrix() * u.matrix().adjoint();
        let m = ComplexMatrix::new(data).hermitian_part();
        Self::new(m.set_dims(self.dims())?)
    }

    /// Second-largest eigenvalue at most `tol`.
    pub fn is_pure(&self, tol: f64) -> bool {
        let s = self.spectrum();
        s.len() < 2 || s[s.len() - 2] <= tol
    }

    /// Wraps a matrix known to be a state up to rounding: Hermitian part,
    /// clamped spectrum, renormalized trace.
    pub fn from_numerical(m: &ComplexMatrix) -> Result<Self, QmatError> {
        let dims = m.require_dims()?.to_vec();
        let e = eigh(&m.hermitian_part());
        let vals: Vec<f64> = e.values.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = vals.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(QmatError::InvalidState(vec![Violation::Trace {
                trace: total,
            }]));
        }
        let data = e.reconstruct(|i| vals[i] / total);
        Self::new(ComplexMatrix::with_dims(data, &dims)?.hermitian_part())
    }
}

/// Kronecker product a (x) b with concatenated dims.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let data = a.data.kronecker(&b.data);
    let dims = match (a.dims(), b.dims()) {
        (Some(da), Some(db)) => Some([da, db].concat()),
        (Some(da), None) => Some([da, &[b.rows()]].concat()),
        (None, Some(db)) => Some([&[a.rows()], db].concat()),
        (None, None) => None,
    };
    let square = data.nrows() == data.ncols();
    ComplexMatrix {
        data,
        dims: if square { dims } else { None },
    }
}

/// Row-major strides for a list of dims.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn check_subsystems(indices: &[usize], count: usize) -> Result<(), QmatError> {
    let mut seen = vec![false; count];
    for &i in indices {
        if i >= count {
            return Err(QmatError::SubsystemOutOfRange { index: i, count });
        }
        if seen[i] {
            return Err(QmatError::DuplicateSubsystem(i));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Traces out every subsystem not listed in `keep`. Kept subsystems appear
/// in increasing index order. Keeping nothing gives the 1x1 matrix [tr m].
pub fn partial_trace(m: &ComplexMatrix, keep: &[usize]) -> Result<ComplexMatrix, QmatError> {
    if !m.is_square() {
        return Err(QmatError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let dims = m.require_dims()?;
    check_subsystems(keep, dims.len())?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();

    let st = strides(dims);
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let kept_st = strides(&kept_dims);
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let traced_st = strides(&traced_dims);
    let n_keep: usize = kept_dims.iter().product();
    let n_trace: usize = traced_dims.iter().product();

    // Group full indices by their traced coordinate.
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(n_keep); n_trace];
    for idx in 0..m.rows() {
        let mut ki = 0;
        let mut ti = 0;
        for (pos, &k) in keep.iter().enumerate() {
            ki += (idx / st[k]) % dims[k] * kept_st[pos];
        }
        for (pos, &k) in traced.iter().enumerate() {
            ti += (idx / st[k]) % dims[k] * traced_st[pos];
        }
        groups[ti].push((idx, ki));
    }
    let mut out = DMatrix::<C64>::zeros(n_keep, n_keep);
    for g in &groups {
        for &(i, ki) in g {
            for &(j, kj) in g {
                out[(ki, kj)] += m.data[(i, j)];
            }
        }
    }
    Ok(ComplexMatrix {
        data: out,
        dims: Some(kept_dims),
    })
}

/// Transposes the tensor factor `sys` only.
pub fn partial_transpose(m: &ComplexMatrix, sys: usize) -> Result<ComplexMatrix, QmatError> {
    if !m.is_square() {
        return Err(QmatError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let dims = m.require_dims()?;
    if sys >= dims.len() {
        return Err(QmatError::SubsystemOutOfRange {
            index: sys,
            count: dims.len(),
        });
    }
    let stride = strides(dims)[sys];
    let d = dims[sys];
    let n = m.rows();
    let data = DMatrix::from_fn(n, n, |i, j| {
        let di = (i / stride) % d;
        let dj = (j / stride) % d;
        let i2 = i - di * stride + dj * stride;
        let j2 = j - dj * stride + di * stride;
        m.data[(i2, j2)]
    });
    Ok(ComplexMatrix {
        data,
        dims: m.dims.clone(),
    })
}

/// Reorders tensor factors: output factor k is input factor `order[k]`.
pub fn permute_systems(m: &ComplexMatrix, order: &[usize]) -> Result<ComplexMatrix, QmatError> {
    let dims = m.require_dims()?;
    if order.len() != dims.len() {
        return Err(QmatError::NotAPermutation(dims.len()));
    }
    check_subsystems(order, dims.len())?;
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let old_st = strides(dims);
    let new_st = strides(&new_dims);
    let n = m.rows();
    // map[new index] = old index
    let map: Vec<usize> = (0..n)
        .map(|idx| {
            order
                .iter()
                .enumerate()
                .map(|(pos, &k)| (idx / new_st[pos]) % new_dims[pos] * old_st[k])
                .sum()
        })
        .collect();
    let data = if m.is_square() {
        DMatrix::from_fn(n, n, |i, j| m.data[(map[i], map[j])])
    } else {
        DMatrix::from_fn(n, m.cols(), |i, j| m.data[(map[i], j)])
    };
    Ok(ComplexMatrix {
        data,
        dims: Some(new_dims),
    })
}

/// A bijection on {0, ..., n-1}; `images[j]` is the image of j.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, QmatError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(QmatError::NotAPermutation(n));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, j: usize) -> usize {
        self.images[j]
    }

    /// (self o other)(j) = self(other(j)).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Self {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (j, &i) in self.images.iter().enumerate() {
            inv[i] = j;
        }
        Self { images: inv }
    }

    /// All n! permutations of n points, in lexicographic order.
    pub fn all(n: usize) -> Vec<Self> {
        use itertools::Itertools;
        (0..n)
            .permutations(n)
            .map(|images| Self { images })
            .collect()
    }

    /// Index of the basis vector W_pi |j_1 ... j_n> where `index` encodes
    /// j_1 ... j_n in base `d`: the digit at position k moves to position pi(k).
    pub fn act_on_index(&self, index: usize, d: usize) -> usize {
        let n = self.len();
        let mut out = 0;
        let mut rest = index;
        for k in (0..n).rev() {
            let digit = rest % d;
            rest /= d;
            out += digit * d.pow((n - 1 - self.images[k]) as u32);
        }
        out
    }
}

/// The unitary W_pi on (C^d)^{(x) n} with W_pi |j_1..j_n> = |j_{pi^-1(1)} .. j_{pi^-1(n)}>.
pub fn permutation_operator(p: &Permutation, local_dim: usize) -> ComplexMatrix {
    let n = p.len();
    let size = local_dim.pow(n as u32);
    let mut data = DMatrix::<C64>::zeros(size, size);
    for idx in 0..size {
        data[(p.act_on_index(idx, local_dim), idx)] = C64::new(1.0, 0.0);
    }
    ComplexMatrix {
        data,
        dims: Some(vec![local_dim; n]),
    }
}

/// Base-2 Shannon entropy of a probability vector, with 0 log 0 = 0.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .map(|&p| p.max(0.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// -sum lambda log2 lambda over the clamped spectrum.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy(&rho.spectrum())
}

/// A split of a state's subsystems into two groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Bipartition {
    pub fn new(a: &[usize], b: &[usize]) -> Self {
        Self {
            a: a.to_vec(),
            b: b.to_vec(),
        }
    }

    /// Systems [0, k) versus [k, total).
    pub fn at(k: usize, total: usize) -> Self {
        Self {
            a: (0..k).collect(),
            b: (k..total).collect(),
        }
    }

    fn validate(&self, count: usize) -> Result<(), QmatError> {
        let bad = || QmatError::BadCut {
            a: self.a.clone(),
            b: self.b.clone(),
            count,
        };
        if self.a.is_empty() || self.b.is_empty() || self.a.len() + self.b.len() != count {
            return Err(bad());
        }
        let all: Vec<usize> = self.a.iter().chain(&self.b).copied().collect();
        check_subsystems(&all, count).map_err(|_| bad())
    }
}

/// I(A:B) = H(A) + H(B) - H(AB) in bits.
pub fn mutual_information(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64, QmatError> {
    cut.validate(rho.dims().len())?;
    let ha = von_neumann_entropy(&rho.reduce(&cut.a)?);
    let hb = von_neumann_entropy(&rho.reduce(&cut.b)?);
    let hab = von_neumann_entropy(rho);
    Ok(ha + hb - hab)
}

/// I(A:B) for a two-party state with dims [|A|, |B|].
pub fn bipartite_mutual_information(rho: &DensityMatrix) -> Result<f64, QmatError> {
    mutual_information(rho, &Bipartition::at(1, 2))
}

/// F(rho, sigma) = tr sqrt(sqrt(rho) sigma sqrt(rho)).
pub fn fidelity_eigen(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QmatError> {
    if rho.dim() != sigma.dim() {
        return Err(QmatError::Shape(format!(
            "fidelity of {}-dimensional and {}-dimensional states",
            rho.dim(),
            sigma.dim()
        )));
    }
    // tr sqrt(sqrt(rho) sigma sqrt(rho)) is the nuclear norm of sqrt(rho) sqrt(sigma)
    let product = psd_sqrt(rho.as_matrix()).matrix() * psd_sqrt(sigma.as_matrix()).matrix();
    let f: f64 = product.singular_values().iter().sum();
    Ok(f.min(1.0))
}

/// Half the trace norm of rho - sigma.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QmatError> {
    if rho.dim() != sigma.dim() {
        return Err(QmatError::Shape(
            "trace distance of unequal dimensions".into(),
        ));
    }
    Ok(0.5 * (rho.as_matrix() - sigma.as_matrix()).trace_norm())
}
