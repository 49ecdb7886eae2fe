//! Seeded random states and unitaries.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{partial_trace, ComplexMatrix, DensityMatrix, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector: a normalized complex Gaussian vector.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.map(|z| z / n)
}

pub fn haar_pure_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityMatrix {
    let dim = dims.iter().product();
    DensityMatrix::pure(&haar_vector(dim, rng), dims).expect("normalized vector")
}

/// Reduced state of a Haar-random pure state on dims (x) C^env.
pub fn random_mixed_state<R: Rng + ?Sized>(
    dims: &[usize],
    env: usize,
    rng: &mut R,
) -> DensityMatrix {
    let dim: usize = dims.iter().product();
    let v = haar_vector(dim * env, rng);
    let full_dims = [dims, &[env]].concat();
    let full = ComplexMatrix::with_dims(&v * v.adjoint(), &full_dims).expect("dims match");
    let keep: Vec<usize> = (0..dims.len()).collect();
    let reduced = partial_trace(&full, &keep).expect("valid subsystems");
    DensityMatrix::new(reduced.hermitian_part()).expect("reduced state of a pure state")
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    ComplexMatrix::new(q * phases)
}
