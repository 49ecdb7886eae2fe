use nalgebra::DVector;

use super::ChoiMatrix;
use crate::qmat::{ComplexMatrix, C64};

/// Choi matrix of the identity channel on `C^d`: the unnormalized
/// `sum_ij |ii><jj|`.
pub fn identity_choi(d: usize) -> ChoiMatrix {
    let mut v = DVector::<C64>::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = C64::new(1.0, 0.0);
    }
    ChoiMatrix::new(ComplexMatrix::projector(&v), d, &[d]).expect("identity channel is valid")
}

/// The universal symmetric 1 -> 2 cloner on `C^d`:
/// `J = sum_i |v_i><v_i|` with
/// `|v_i> = (2|i>|ii> + sum_{j != i} |j>(|ij> + |ji>)) / sqrt(2(d+1))`.
pub fn uqcm_choi(d: usize) -> ChoiMatrix {
    let side = d * d * d;
    let idx = |a: usize, x: usize, y: usize| (a * d + x) * d + y;
    let norm = 1.0 / (2.0 * (d as f64 + 1.0)).sqrt();
    let mut m = ComplexMatrix::zeros(side).into_matrix();
    for i in 0..d {
        let mut v = DVector::<C64>::zeros(side);
        v[idx(i, i, i)] += C64::new(2.0 * norm, 0.0);
        for j in (0..d).filter(|&j| j != i) {
            v[idx(j, i, j)] += C64::new(norm, 0.0);
            v[idx(j, j, i)] += C64::new(norm, 0.0);
        }
        m += &v * v.adjoint();
    }
    ChoiMatrix::new(ComplexMatrix::new(m), d, &[d, d]).expect("cloner is a valid channel")
}

/// The qubit channel with Choi matrix `|v><v|`,
/// `|v> = |000> + (|101> + |110>) / sqrt 2`.
pub fn xi_choi() -> ChoiMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DVector::<C64>::zeros(8);
    v[0b000] = C64::new(1.0, 0.0);
    v[0b101] = C64::new(s, 0.0);
    v[0b110] = C64::new(s, 0.0);
    ChoiMatrix::new(ComplexMatrix::projector(&v), 2, &[2, 2]).expect("valid channel")
}
