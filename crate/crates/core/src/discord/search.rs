//! Optimization of mutual information over qubit projective measurements.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{cq_mutual_information, DiscordError, Povm};
use crate::qmat::{
    bipartite_mutual_information, partial_trace, permute_systems, shannon_entropy, ComplexMatrix,
    DensityMatrix, C64,
};

/// Grid resolution in the azimuthal angle.
pub const AZIMUTH_STEPS: usize = 72;
/// Grid resolution in the polar angle, poles included.
pub const POLAR_STEPS: usize = 36;
/// Number of grid points refined by the simplex search.
const REFINED_STARTS: usize = 5;
const SIMPLEX_ITERATIONS: usize = 400;
const SIMPLEX_TOL: f64 = 1e-13;
const ALTERNATION_ROUNDS: usize = 10;
const ALTERNATION_TOL: f64 = 1e-8;

/// Direction `(sin t cos p, sin t sin p, cos t)` of a projective qubit
/// measurement `{(I + n.sigma)/2, (I - n.sigma)/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAngles {
    pub polar: f64,
    pub azimuth: f64,
}

impl BlochAngles {
    pub fn new(polar: f64, azimuth: f64) -> Self {
        Self { polar, azimuth }
    }

    pub fn axis(&self) -> [f64; 3] {
        let (st, ct) = self.polar.sin_cos();
        let (sp, cp) = self.azimuth.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn povm(&self) -> Povm {
        let paulis = pauli_matrices();
        let n = self.axis();
        let mut ns = DMatrix::<C64>::zeros(2, 2);
        for (p, nk) in paulis.iter().zip(n) {
            ns += p * C64::new(nk, 0.0);
        }
        let id = DMatrix::<C64>::identity(2, 2);
        let half = C64::new(0.5, 0.0);
        Povm {
            elements: vec![
                ComplexMatrix::new((&id + &ns) * half),
                ComplexMatrix::new((&id - &ns) * half),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscordResult {
    /// `I(A:B) - max I_classical`, in bits.
    pub value: f64,
    pub mutual_information: f64,
    /// The optimized classical mutual information.
    pub classical_information: f64,
    /// Measurement on A, when A is measured.
    pub measurement_a: Option<BlochAngles>,
    /// Measurement on B, when B is measured.
    pub measurement_b: Option<BlochAngles>,
}

fn pauli_matrices() -> [DMatrix<C64>; 3] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

fn qubit_dims(rho: &DensityMatrix, need_b: bool) -> Result<(usize, usize), DiscordError> {
    let dims = rho.dims();
    let ok = dims.len() == 2 && dims[0] == 2 && (!need_b || dims[1] == 2);
    if !ok {
        let want = if need_b { "[2, 2]" } else { "[2, d]" };
        return Err(DiscordError::UnsupportedDimension(format!(
            "expected subsystem dims {want}, got {dims:?}"
        )));
    }
    Ok((dims[0], dims[1]))
}

/// Minimizes a function of two variables from a starting point.
fn nelder_mead(f: &impl Fn(f64, f64) -> f64, start: [f64; 2], step: f64) -> ([f64; 2], f64) {
    let eval = |p: [f64; 2]| f(p[0], p[1]);
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = simplex.map(eval);
    let combine =
        |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..SIMPLEX_ITERATIONS {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        if values[2] - values[0] < SIMPLEX_TOL {
            break;
        }
        let centroid = combine(simplex[0], simplex[1], 0.5);
        let reflected = combine(centroid, simplex[2], -1.0);
        let fr = eval(reflected);
        if fr < values[0] {
            let expanded = combine(centroid, simplex[2], -2.0);
            let fe = eval(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let (contracted, fc) = if fr < values[2] {
                let c = combine(centroid, reflected, 0.5);
                (c, eval(c))
            } else {
                let c = combine(centroid, simplex[2], 0.5);
                (c, eval(c))
            };
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = combine(simplex[0], simplex[k], 0.5);
                    values[k] = eval(simplex[k]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("three vertices");
    (simplex[best], values[best])
}

/// Maximizes `f` over the sphere: a full angular grid followed by simplex
/// refinement of its best points.
fn maximize_over_sphere(f: impl Fn(f64, f64) -> f64 + Sync) -> (BlochAngles, f64) {
    let polar_step = PI / (POLAR_STEPS - 1) as f64;
    let azimuth_step = 2.0 * PI / AZIMUTH_STEPS as f64;
    let mut grid: Vec<(f64, f64, f64)> = (0..POLAR_STEPS * AZIMUTH_STEPS)
        .into_par_iter()
        .map(|idx| {
            let t = (idx / AZIMUTH_STEPS) as f64 * polar_step;
            let p = (idx % AZIMUTH_STEPS) as f64 * azimuth_step;
            (t, p, f(t, p))
        })
        .collect();
    grid.sort_by(|a, b| b.2.total_cmp(&a.2));
    let negated = |t: f64, p: f64| -f(t, p);
    let mut best = (BlochAngles::new(grid[0].0, grid[0].1), grid[0].2);
    for &(t, p, _) in grid.iter().take(REFINED_STARTS) {
        let (point, value) = nelder_mead(&negated, [t, p], 0.5 * polar_step);
        if -value > best.1 {
            best = (BlochAngles::new(point[0], point[1]), -value);
        }
    }
    best
}

/// Classical information `I(X:B)` after measuring qubit A along `n`, as a
/// function of the angles of `n`.
struct OneSided {
    rho_b: DMatrix<C64>,
    /// `tr_A((sigma_k (x) I) rho)` for k = x, y, z.
    moments: [DMatrix<C64>; 3],
}

impl OneSided {
    fn new(rho: &DensityMatrix) -> Result<Self, DiscordError> {
        let (_, db) = qubit_dims(rho, false)?;
        let id = DMatrix::<C64>::identity(db, db);
        let reduce = |op: &DMatrix<C64>| -> Result<DMatrix<C64>, DiscordError> {
            let m = ComplexMatrix::with_dims(op.kronecker(&id) * rho.matrix(), rho.dims())?;
            Ok(partial_trace(&m, &[1])?.into_matrix())
        };
        let [x, y, z] = pauli_matrices();
        Ok(Self {
            rho_b: rho.reduce(&[1])?.matrix().clone(),
            moments: [reduce(&x)?, reduce(&y)?, reduce(&z)?],
        })
    }

    fn information(&self, polar: f64, azimuth: f64) -> f64 {
        let n = BlochAngles::new(polar, azimuth).axis();
        let mut shift = DMatrix::<C64>::zeros(self.rho_b.nrows(), self.rho_b.ncols());
        for (m, nk) in self.moments.iter().zip(n) {
            shift += m * C64::new(nk, 0.0);
        }
        let half = C64::new(0.5, 0.0);
        cq_mutual_information(&[(&self.rho_b + &shift) * half, (&self.rho_b - &shift) * half])
    }
}

/// One-sided discord with projective measurements on qubit A:
/// `I(A:B) - max_n I(X:B)`.
pub fn discord_one_sided(rho: &DensityMatrix) -> Result<DiscordResult, DiscordError> {
    let model = OneSided::new(rho)?;
    let mi = bipartite_mutual_information(rho)?;
    let (angles, classical) = maximize_over_sphere(|t, p| model.information(t, p));
    Ok(DiscordResult {
        value: (mi - classical).max(0.0),
        mutual_information: mi,
        classical_information: classical,
        measurement_a: Some(angles),
        measurement_b: None,
    })
}

/// Outcome statistics of two local qubit measurements in Bloch form.
struct TwoSided {
    r_a: [f64; 3],
    r_b: [f64; 3],
    t: [[f64; 3]; 3],
}

impl TwoSided {
    fn new(rho: &DensityMatrix) -> Result<Self, DiscordError> {
        qubit_dims(rho, true)?;
        let paulis = pauli_matrices();
        let id = DMatrix::<C64>::identity(2, 2);
        let expect = |op: DMatrix<C64>| (op * rho.matrix()).trace().re;
        let mut t = [[0.0; 3]; 3];
        for (k, row) in t.iter_mut().enumerate() {
            for (l, v) in row.iter_mut().enumerate() {
                *v = expect(paulis[k].kronecker(&paulis[l]));
            }
        }
        Ok(Self {
            r_a: std::array::from_fn(|k| expect(paulis[k].kronecker(&id))),
            r_b: std::array::from_fn(|k| expect(id.kronecker(&paulis[k]))),
            t,
        })
    }

    fn information(&self, a: BlochAngles, b: BlochAngles) -> f64 {
        let (a, b) = (a.axis(), b.axis());
        let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let ea = dot(a, self.r_a);
        let eb = dot(b, self.r_b);
        let tb: [f64; 3] = std::array::from_fn(|k| dot(self.t[k], b));
        let eab = dot(a, tb);
        let joint: Vec<f64> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .map(|&(s, u)| 0.25 * (1.0 + s * ea + u * eb + s * u * eab))
            .collect();
        let pa = [0.5 * (1.0 + ea), 0.5 * (1.0 - ea)];
        let pb = [0.5 * (1.0 + eb), 0.5 * (1.0 - eb)];
        shannon_entropy(&pa) + shannon_entropy(&pb) - shannon_entropy(&joint)
    }
}

/// Two-sided discord with projective measurements on both qubits:
/// `I(A:B) - max_{n, m} I(X:Y)`. Alternates between the two sides, starting
/// from each one-sided optimum.
pub fn discord_two_sided(rho: &DensityMatrix) -> Result<DiscordResult, DiscordError> {
    let model = TwoSided::new(rho)?;
    let mi = bipartite_mutual_information(rho)?;
    let start_a = discord_one_sided(rho)?
        .measurement_a
        .expect("one-sided search measures A");
    let swapped = DensityMatrix::new(permute_systems(rho.as_matrix(), &[1, 0])?)?;
    let start_b = discord_one_sided(&swapped)?
        .measurement_a
        .expect("one-sided search measures A");

    let alternate = |mut a: BlochAngles, mut b: BlochAngles, a_first: bool| {
        let mut value = model.information(a, b);
        for _ in 0..ALTERNATION_ROUNDS {
            let previous = value;
            for update_a in [a_first, !a_first] {
                if update_a {
                    (a, value) =
                        maximize_over_sphere(|t, p| model.information(BlochAngles::new(t, p), b));
                } else {
                    (b, value) =
                        maximize_over_sphere(|t, p| model.information(a, BlochAngles::new(t, p)));
                }
            }
            if value - previous < ALTERNATION_TOL {
                break;
            }
        }
        (a, b, value)
    };
    let from_a = alternate(start_a, start_a, false);
    let from_b = alternate(start_b, start_b, true);
    let (a, b, classical) = if from_b.2 > from_a.2 { from_b } else { from_a };
    Ok(DiscordResult {
        value: (mi - classical).max(0.0),
        mutual_information: mi,
        classical_information: classical,
        measurement_a: Some(a),
        measurement_b: Some(b),
    })
}
