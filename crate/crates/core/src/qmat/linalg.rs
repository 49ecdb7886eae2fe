use nalgebra::{DMatrix, SymmetricEigen};

use super::{ComplexMatrix, C64};

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: DMatrix<C64>,
}

impl Eigh {
    /// sum_i f(i) |v_i><v_i|.
    pub fn reconstruct(&self, f: impl Fn(usize) -> f64) -> DMatrix<C64> {
        let n = self.vectors.nrows();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for (i, v) in self.vectors.column_iter().enumerate() {
            let w = f(i);
            if w != 0.0 {
                out += (v * v.adjoint()).map(|z| z * w);
            }
        }
        out
    }
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn eigh(m: &ComplexMatrix) -> Eigh {
    let h = m.hermitian_part().into_matrix();
    let n = h.nrows();
    if n == 0 {
        return Eigh {
            values: Vec::new(),
            vectors: h,
        };
    }
    let se = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    Eigh { values, vectors }
}

/// Eigenvalues this close to zero relative to the spectral radius are
/// rounding noise; their square roots would not be.
pub(crate) fn noise_floor(values: &[f64]) -> f64 {
    let radius = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    4.0 * values.len() as f64 * f64::EPSILON * radius
}

/// Principal square root of a PSD matrix. Negative eigenvalues and those
/// below the rounding-noise floor map to 0.
pub fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let e = eigh(m);
    let floor = noise_floor(&e.values);
    let data = e.reconstruct(|i| {
        let x = e.values[i];
        if x <= floor {
            0.0
        } else {
            x.sqrt()
        }
    });
    let out = ComplexMatrix::new(data);
    match m.dims() {
        Some(d) => out.set_dims(d).expect("same shape"),
        None => out,
    }
}
