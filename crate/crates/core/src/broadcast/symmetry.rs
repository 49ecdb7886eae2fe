//! Permutations of the output systems of a Choi matrix on
//! `A (x) (C^d)^{(x) n}`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::qmat::{Permutation, C64};
use crate::sdp::SparseHermitian;

/// Index maps `a d^n + x -> a d^n + pi(x)` for every output permutation.
fn index_maps(din: usize, d: usize, n: usize) -> Vec<Vec<usize>> {
    let dout = d.pow(n as u32);
    Permutation::all(n)
        .iter()
        .map(|p| {
            (0..din * dout)
                .map(|idx| (idx / dout) * dout + p.act_on_index(idx % dout, d))
                .collect()
        })
        .collect()
}

/// Average of `(I (x) W_pi) M (I (x) W_pi)^dagger` over all `pi` in `S_n`.
pub fn twirl_outputs(m: &DMatrix<C64>, din: usize, d: usize, n: usize) -> DMatrix<C64> {
    let maps = index_maps(din, d, n);
    let side = m.nrows();
    let mut out = DMatrix::<C64>::zeros(side, side);
    for map in &maps {
        for q in 0..side {
            for p in 0..side {
                out[(map[p], map[q])] += m[(p, q)];
            }
        }
    }
    out / C64::new(maps.len() as f64, 0.0)
}

/// Largest entrywise change of `M` under conjugation by an adjacent
/// transposition of outputs; these generate the whole group.
pub(crate) fn max_permutation_deviation(m: &DMatrix<C64>, d: usize, n: usize) -> f64 {
    let dout = d.pow(n as u32);
    let side = m.nrows();
    let mut worst = 0.0f64;
    for k in 0..n.saturating_sub(1) {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(k, k + 1);
        let p = Permutation::new(images).expect("transposition");
        let map: Vec<usize> = (0..side)
            .map(|idx| (idx / dout) * dout + p.act_on_index(idx % dout, d))
            .collect();
        for q in 0..side {
            for r in 0..side {
                worst = worst.max((m[(map[r], map[q])] - m[(r, q)]).norm());
            }
        }
    }
    worst
}

/// Orthonormal basis of the symmetric subspace of `(C^d)^{(x) n}` as the
/// columns of a `d^n x binom(n+d-1, n)` isometry. Column `k` is the
/// normalized sum of all basis strings with the k-th occupation pattern.
pub fn symmetric_subspace_isometry(d: usize, n: usize) -> DMatrix<C64> {
    let dout = d.pow(n as u32);
    let mut classes: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for x in 0..dout {
        let mut counts = vec![0usize; d];
        let mut rest = x;
        for _ in 0..n {
            counts[rest % d] += 1;
            rest /= d;
        }
        classes.entry(counts).or_default().push(x);
    }
    let mut v = DMatrix::<C64>::zeros(dout, classes.len());
    for (col, members) in classes.values().enumerate() {
        let w = 1.0 / (members.len() as f64).sqrt();
        for &x in members {
            v[(x, col)] = C64::new(w, 0.0);
        }
    }
    v
}

/// Real coordinates of a Hermitian matrix: Re of each entry on or above
/// the diagonal, and Im strictly above it.
type Coord = (usize, usize, bool);

/// Sparse real-linear functional of a Hermitian matrix in [`Coord`]s.
type Functional = BTreeMap<Coord, f64>;

/// `c * Re J[p, q]` and `c * Im J[p, q]` in coordinates, using
/// `J[q, p] = conj J[p, q]`.
fn entry_parts(p: usize, q: usize, c: f64, out_re: &mut Functional, out_im: &mut Functional) {
    let (i, j, sign) = if p <= q { (p, q, 1.0) } else { (q, p, -1.0) };
    *out_re.entry((i, j, false)).or_insert(0.0) += c;
    if i != j {
        *out_im.entry((i, j, true)).or_insert(0.0) += sign * c;
    }
}

fn dot(a: &Functional, b: &Functional) -> f64 {
    a.iter().filter_map(|(k, v)| b.get(k).map(|w| v * w)).sum()
}

fn to_hermitian(f: &Functional, side: usize) -> SparseHermitian {
    let mut h = SparseHermitian::new(side);
    for (&(i, j, imag), &c) in f {
        if c == 0.0 {
            continue;
        }
        if i == j {
            h.push_pair(i, i, C64::new(c, 0.0));
        } else if imag {
            h.push_pair(j, i, C64::new(0.0, -c / 2.0));
        } else {
            h.push_pair(j, i, C64::new(c / 2.0, 0.0));
        }
    }
    h
}

/// Linearly independent functionals whose common kernel, among Hermitian
/// matrices on `A (x) (C^d)^{(x) n}`, is the set of matrices invariant under
/// every output permutation.
///
/// Entries of an invariant matrix are constant on orbits of index pairs;
/// each orbit contributes the differences between its first entry and the
/// others, with an orbit and its transpose handled together.
pub(crate) fn symmetry_constraints(din: usize, d: usize, n: usize) -> Vec<SparseHermitian> {
    let maps = index_maps(din, d, n);
    let side = din * d.pow(n as u32);
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut out = Vec::new();
    for p in 0..side {
        for q in p..side {
            if seen.contains(&(p, q)) {
                continue;
            }
            let orbit: BTreeSet<(usize, usize)> = maps.iter().map(|m| (m[p], m[q])).collect();
            for &(a, b) in &orbit {
                seen.insert((a.min(b), a.max(b)));
            }
            if orbit.len() < 2 {
                continue;
            }
            let mut members = orbit.iter();
            let &(p0, q0) = members.next().expect("non-empty orbit");
            let mut basis: Vec<Functional> = Vec::new();
            for &(pk, qk) in members {
                let mut re = Functional::new();
                let mut im = Functional::new();
                entry_parts(p0, q0, 1.0, &mut re, &mut im);
                entry_parts(pk, qk, -1.0, &mut re, &mut im);
                for mut f in [re, im] {
                    f.retain(|_, v| *v != 0.0);
                    for b in &basis {
                        let c = dot(&f, b);
                        for (k, v) in b {
                            *f.entry(*k).or_insert(0.0) -= c * v;
                        }
                    }
                    f.retain(|_, v| v.abs() > 1e-12);
                    let norm = dot(&f, &f).sqrt();
                    if norm > 1e-9 {
                        f.values_mut().for_each(|v| *v /= norm);
                        basis.push(f);
                    }
                }
            }
            out.extend(basis.iter().map(|f| to_hermitian(f, side)));
        }
    }
    out
}
