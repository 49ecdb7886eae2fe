use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::marginal_adjoint;
use super::*;
use crate::qmat::random::{haar_pure_state, haar_unitary, random_mixed_state};
use crate::qmat::{fidelity_eigen, kron, partial_transpose};

fn theta_state(theta: f64) -> DensityMatrix {
    let mut v = DVector::<C64>::zeros(4);
    v[0] = C64::new(theta.cos(), 0.0);
    v[3] = C64::new(theta.sin(), 0.0);
    DensityMatrix::pure(&v, &[2, 2]).unwrap()
}

fn two_case(theta: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    if theta <= 2f64.powf(-0.25).atan() {
        c * c + s * s / 2f64.sqrt()
    } else {
        (1.5 * (c.powi(4) + s.powi(4))).sqrt()
    }
}

fn cq_state() -> DensityMatrix {
    let s0 = DensityMatrix::basis_state(0, 2);
    let s1 = DensityMatrix::maximally_mixed(2);
    let m = &kron(DensityMatrix::basis_state(0, 2).as_matrix(), s0.as_matrix()).scale(0.5)
        + &kron(DensityMatrix::basis_state(1, 2).as_matrix(), s1.as_matrix()).scale(0.5);
    DensityMatrix::new(m.set_dims(&[2, 2]).unwrap()).unwrap()
}

fn random_choi(din: usize, d: usize, n: usize, rng: &mut ChaCha8Rng) -> ChoiMatrix {
    let dout = d.pow(n as u32);
    let side = din * dout;
    let g = DMatrix::from_fn(side, side, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let raw = ComplexMatrix::new(&g * g.adjoint())
        .set_dims(&[&[din][..], &vec![d; n]].concat())
        .unwrap();
    ChoiMatrix::from_numerical(raw.without_dims(), din, &vec![d; n]).unwrap()
}

/// Reference channel action by explicit Kraus-free contraction with dense
/// partial transposes.
fn apply_dense(j: &ChoiMatrix, rho: &DensityMatrix) -> ComplexMatrix {
    let din = j.in_dim();
    let db = rho.dim() / din;
    let jt = partial_transpose(j.matrix(), 0).unwrap();
    let big_j = kron(&jt, &ComplexMatrix::identity(db));
    // rho on (A, B) lifted to (A, out, B)
    let dout = j.out_dim();
    let mut lifted = DMatrix::<C64>::zeros(din * dout * db, din * dout * db);
    for a in 0..din {
        for ap in 0..din {
            for x in 0..dout {
                for b in 0..db {
                    for bp in 0..db {
                        lifted[((a * dout + x) * db + b, (ap * dout + x) * db + bp)] =
                            rho.matrix()[(a * db + b, ap * db + bp)];
                    }
                }
            }
        }
    }
    let prod = ComplexMatrix::new(big_j.matrix() * lifted)
        .set_dims(&[din, dout, db])
        .unwrap();
    crate::qmat::partial_trace(&prod, &[1, 2]).unwrap()
}

#[test]
fn identity_channel_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rho = random_mixed_state(&[3, 2], 3, &mut rng);
    let out = apply_channel(&identity_choi(3), &rho).unwrap();
    assert!(out.as_matrix().max_abs_diff(rho.as_matrix()) < 1e-12);
    assert_eq!(out.dims(), &[3, 2]);
}

#[test]
fn fully_depolarizing_channel() {
    let j = ChoiMatrix::new(ComplexMatrix::identity(4).scale(0.5), 2, &[2]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rho = random_mixed_state(&[2], 2, &mut rng);
    let out = apply_channel(&j, &rho).unwrap();
    assert!(
        out.as_matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(2).as_matrix())
            < 1e-12
    );
}

#[test]
fn apply_channel_matches_dense_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let j = random_choi(2, 2, 2, &mut rng);
    let rho = random_mixed_state(&[2, 3], 2, &mut rng);
    let fast = apply_channel(&j, &rho).unwrap();
    let slow = apply_dense(&j, &rho);
    assert!(fast.as_matrix().max_abs_diff(&slow) < 1e-12);
    assert_eq!(fast.dims(), &[2, 2, 3]);
}

#[test]
fn apply_channel_rejects_wrong_input() {
    let rho = DensityMatrix::maximally_mixed(3);
    assert!(matches!(
        apply_channel(&identity_choi(2), &rho),
        Err(BroadcastError::Dimension(_))
    ));
}

#[test]
fn choi_validation() {
    let not_tp = ComplexMatrix::identity(4);
    assert!(matches!(
        ChoiMatrix::new(not_tp, 2, &[2]),
        Err(BroadcastError::NotTp { .. })
    ));
    let not_cp = ComplexMatrix::from_real_diagonal(&[1.5, -0.5, 1.5, -0.5]);
    assert!(matches!(
        ChoiMatrix::new(not_cp, 2, &[2]),
        Err(BroadcastError::NotCp { .. })
    ));
    assert!(matches!(
        ChoiMatrix::new(ComplexMatrix::identity(4), 2, &[3]),
        Err(BroadcastError::Matrix(_))
    ));
}

#[test]
fn symmetrize_two_element_orbit() {
    // trivial input factor, J = |01><01| on the outputs
    let j = ChoiMatrix::new(
        ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 0.0, 0.0]),
        1,
        &[2, 2],
    )
    .unwrap();
    let s = symmetrize_choi(&j).unwrap();
    let expected = ComplexMatrix::from_real_diagonal(&[0.0, 0.5, 0.5, 0.0]);
    assert!(s.matrix().max_abs_diff(&expected) < 1e-15);
}

#[test]
fn symmetrize_fixes_symmetric_channels() {
    let u = uqcm_choi(2);
    let s = symmetrize_choi(&u).unwrap();
    assert!(s.matrix().max_abs_diff(u.matrix()) < 1e-14);
}

#[test]
fn symmetrize_rejects_unequal_outputs() {
    let j = ChoiMatrix::new(ComplexMatrix::identity(6).scale(1.0 / 6.0), 1, &[2, 3]).unwrap();
    assert!(matches!(
        symmetrize_choi(&j),
        Err(BroadcastError::UnequalOutputs(_))
    ));
}

#[test]
fn uqcm_is_valid_and_symmetric() {
    for d in [2, 3] {
        let u = uqcm_choi(d);
        assert!(u.tp_deviation() < 1e-12);
        assert!(u.min_eigenvalue() > -1e-12);
        u.require_symmetric().unwrap();
    }
}

#[test]
fn uqcm_marginal_is_depolarizing() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in [2usize, 3] {
        let m = uqcm_choi(d).marginal(0).unwrap();
        let rho = random_mixed_state(&[d], 2, &mut rng);
        let out = apply_channel(&m, &rho).unwrap();
        let p = (d as f64 + 2.0) / (2.0 * d as f64 + 2.0);
        let expected = &rho.as_matrix().scale(p)
            + &ComplexMatrix::identity(d).scale(1.0 / (2.0 * d as f64 + 2.0));
        assert!(out.as_matrix().max_abs_diff(&expected) < 1e-12);
    }
}

#[test]
fn uqcm_reaches_mes_value() {
    for d in [2usize, 3] {
        let phi = DensityMatrix::maximally_entangled(d);
        let m = uqcm_choi(d).marginal(0).unwrap();
        let out = apply_channel(&m, &phi).unwrap();
        let f = fidelity_eigen(&phi, &out).unwrap();
        assert_abs_diff_eq!(
            f,
            ((d as f64 + 1.0) / (2.0 * d as f64)).sqrt(),
            epsilon = 1e-10
        );
    }
}

#[test]
fn xi_is_valid_and_symmetric() {
    let x = xi_choi();
    assert!(x.tp_deviation() < 1e-12);
    x.require_symmetric().unwrap();
}

#[test]
fn xi_values() {
    let m = xi_choi().marginal(0).unwrap();
    for theta in [std::f64::consts::PI / 8.0, 2f64.powf(-0.25).atan()] {
        let psi = theta_state(theta);
        let out = apply_channel(&m, &psi).unwrap();
        let f = fidelity_eigen(&psi, &out).unwrap();
        assert_abs_diff_eq!(f, two_case(theta), epsilon = 1e-10);
    }
    let phi = DensityMatrix::maximally_entangled(2);
    let f = fidelity_eigen(&phi, &apply_channel(&m, &phi).unwrap()).unwrap();
    assert!(f <= 0.75f64.sqrt());
    // 1/2 + 1/(2 sqrt 2)
    assert_abs_diff_eq!(
        f,
        0.5 + 0.5 * std::f64::consts::FRAC_1_SQRT_2,
        epsilon = 1e-10
    );
}

#[test]
fn marginal_adjoint_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (da, db, n) in [(2usize, 2usize, 2usize), (2, 3, 3), (3, 1, 2)] {
        let j = random_choi(da, da, n, &mut rng);
        let rho = random_mixed_state(&[da, db], 2, &mut rng);
        let e = random_mixed_state(&[da, db], 3, &mut rng);
        let out = apply_channel(&j, &rho).unwrap();
        let keep = [0, n];
        let marg = crate::qmat::partial_trace(out.as_matrix(), &keep).unwrap();
        let direct = (e.matrix() * marg.matrix()).trace().re;
        let coeff = marginal_adjoint(e.matrix(), rho.matrix(), da, db, n);
        let via_adjoint = (coeff * j.matrix().matrix()).trace().re;
        assert_abs_diff_eq!(direct, via_adjoint, epsilon = 1e-12);
    }
}

#[test]
fn symmetric_subspace_isometry_properties() {
    let v = symmetric_subspace_isometry(2, 3);
    assert_eq!(v.shape(), (8, 4));
    let gram = v.adjoint() * &v;
    assert!((gram - DMatrix::<C64>::identity(4, 4))
        .iter()
        .all(|z| z.norm() < 1e-14));
    let proj = &v * v.adjoint();
    let twirled = twirl_outputs(&proj, 1, 2, 3);
    assert!((&twirled - &proj).iter().all(|z| z.norm() < 1e-14));
    assert_eq!(symmetric_subspace_isometry(3, 2).ncols(), 6);
}

#[test]
fn explicit_symmetry_constraints_cut_out_the_invariant_subspace() {
    // the number of independent functionals equals dim(all) - dim(invariant)
    let (din, d, n) = (2usize, 2usize, 2usize);
    let side = din * d.pow(n as u32);
    let gs = super::symmetry::symmetry_constraints(din, d, n);
    // dimension of the invariant Hermitian subspace is the number of
    // orbits of index pairs under the group acting on both indices
    let mut orbits = std::collections::BTreeSet::new();
    for p in 0..side {
        for q in 0..side {
            let swap = |i: usize| (i / 4) * 4 + [0, 2, 1, 3][i % 4];
            let a = (p, q).min((swap(p), swap(q)));
            orbits.insert(a);
        }
    }
    assert_eq!(gs.len(), side * side - orbits.len());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let j = random_choi(din, d, n, &mut rng);
    let sym = symmetrize_choi(&j).unwrap();
    for g in &gs {
        assert!(g.inner(sym.matrix().matrix()).abs() < 1e-12);
    }
    assert!(gs.iter().any(|g| g.inner(j.matrix().matrix()).abs() > 1e-6));
}

#[test]
fn mes_fidelity_two_copies() {
    for d in [2usize, 3] {
        let r = unilocal_fidelity(&DensityMatrix::maximally_entangled(d), 2).unwrap();
        assert_abs_diff_eq!(
            r.value,
            ((d as f64 + 1.0) / (2.0 * d as f64)).sqrt(),
            epsilon = 1e-7
        );
        assert!(r.is_certified());
        r.choi.require_symmetric().unwrap();
    }
}

#[test]
fn classical_on_a_is_broadcastable() {
    let r = unilocal_fidelity(&cq_state(), 2).unwrap();
    assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-7);
    let p = unilocal_fidelity_piani_variant(&cq_state(), 2).unwrap();
    assert_abs_diff_eq!(p.value, 1.0, epsilon = 1e-7);
}

#[test]
fn theta_states_match_two_case_formula() {
    for theta in [std::f64::consts::PI / 6.0, std::f64::consts::PI / 16.0, 0.7] {
        let r = unilocal_fidelity(&theta_state(theta), 2).unwrap();
        assert_abs_diff_eq!(r.value, two_case(theta), epsilon = 1e-6);
    }
}

#[test]
fn optimal_channel_attains_reported_value() {
    let rho = theta_state(0.5);
    let r = unilocal_fidelity(&rho, 2).unwrap();
    let out = apply_channel(&r.choi.marginal(0).unwrap(), &rho).unwrap();
    let f = fidelity_eigen(&rho, &out).unwrap();
    assert_abs_diff_eq!(f, r.value, epsilon = 1e-6);
}

#[test]
fn explicit_mode_agrees_with_projected() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rho = random_mixed_state(&[2, 2], 2, &mut rng);
    let a = unilocal_fidelity(&rho, 2).unwrap();
    let b = unilocal_fidelity_with(
        &rho,
        2,
        &BroadcastOptions {
            symmetry: SymmetryMode::Explicit,
            ..BroadcastOptions::default()
        },
    )
    .unwrap();
    assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-7);
    assert!(b.is_certified());
}

#[test]
fn pure_dual_examples() {
    let phi = pure_dual_certificate(&DensityMatrix::maximally_entangled(2), 2).unwrap();
    assert_abs_diff_eq!(phi.value, 0.75f64.sqrt(), epsilon = 1e-7);
    assert_abs_diff_eq!(phi.value, phi.primal_value, epsilon = 1e-7);
    assert!(phi.lmi_max_eigenvalue <= 1e-9);
    let expected_y = ComplexMatrix::identity(2).scale(3.0 / 8.0);
    assert!(phi.y_a.max_abs_diff(&expected_y) < 1e-6);

    let theta = std::f64::consts::PI / 6.0;
    let v = unilocal_fidelity_pure_dual(&theta_state(theta), 2).unwrap();
    assert_abs_diff_eq!(v, 0.926777, epsilon = 1e-6);

    let product = DensityMatrix::basis_state(0, 2).tensor(&DensityMatrix::basis_state(0, 2));
    assert_abs_diff_eq!(
        unilocal_fidelity_pure_dual(&product, 2).unwrap(),
        1.0,
        epsilon = 1e-7
    );
}

#[test]
fn pure_dual_rejects_mixed_states() {
    assert!(matches!(
        unilocal_fidelity_pure_dual(&cq_state(), 2),
        Err(BroadcastError::NotPure(_))
    ));
}

#[test]
fn piani_variant_is_no_larger() {
    let phi = DensityMatrix::maximally_entangled(2);
    let p = unilocal_fidelity_piani_variant(&phi, 2).unwrap();
    assert!(p.value <= 0.75f64.sqrt() + 1e-7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rho = random_mixed_state(&[2, 2], 3, &mut rng);
    let s = unilocal_fidelity(&rho, 2).unwrap();
    let v = unilocal_fidelity_piani_variant(&rho, 2).unwrap();
    assert!(v.value <= s.value + 1e-7);
}

#[test]
fn three_copies_do_not_beat_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rho = random_mixed_state(&[2, 2], 2, &mut rng);
    let f2 = unilocal_fidelity(&rho, 2).unwrap();
    let f3 = unilocal_fidelity(&rho, 3).unwrap();
    assert!(f3.value <= f2.value + 1e-7);
    assert!(f3.is_certified());
}

#[test]
fn value_is_local_unitary_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let rho = random_mixed_state(&[2, 2], 2, &mut rng);
    let u = kron(&haar_unitary(2, &mut rng), &haar_unitary(2, &mut rng));
    let rotated = rho.conjugate(&u).unwrap();
    let a = unilocal_fidelity(&rho, 2).unwrap().value;
    let b = unilocal_fidelity(&rotated, 2).unwrap().value;
    assert_abs_diff_eq!(a, b, epsilon = 1e-6);
}

#[test]
fn rank_deficient_b_is_handled() {
    // B lives in a 3-dimensional space but only uses two levels
    let mut v = DVector::<C64>::zeros(6);
    v[0] = C64::new(1.0, 0.0);
    v[4] = C64::new(1.0, 0.0);
    let rho = DensityMatrix::pure(&v, &[2, 3]).unwrap();
    let r = unilocal_fidelity(&rho, 2).unwrap();
    assert_abs_diff_eq!(r.value, 0.75f64.sqrt(), epsilon = 1e-7);
}

#[test]
fn copy_count_and_size_guards() {
    let phi = DensityMatrix::maximally_entangled(2);
    assert!(matches!(
        unilocal_fidelity(&phi, 1),
        Err(BroadcastError::CopyCount(1))
    ));
    assert!(matches!(
        unilocal_fidelity(&phi, 6),
        Err(BroadcastError::CopyCount(6))
    ));
    let big = DensityMatrix::maximally_entangled(5);
    assert!(matches!(
        unilocal_fidelity(&big, 5),
        Err(BroadcastError::TooLarge { .. })
    ));
    let tri = DensityMatrix::maximally_mixed(2)
        .tensor(&DensityMatrix::maximally_mixed(2))
        .tensor(&DensityMatrix::maximally_mixed(2));
    assert!(matches!(
        unilocal_fidelity(&tri, 2),
        Err(BroadcastError::Dimension(_))
    ));
}

#[test]
fn ensemble_examples() {
    let zero = DensityMatrix::basis_state(0, 2);
    let one = DensityMatrix::basis_state(1, 2);
    let commuting = Ensemble::new(vec![(0.5, zero.clone()), (0.5, one)]).unwrap();
    assert_abs_diff_eq!(
        ensemble_fidelity(&commuting, 2).unwrap().value,
        1.0,
        epsilon = 1e-6
    );
    let single = Ensemble::new(vec![(1.0, zero.clone())]).unwrap();
    assert_abs_diff_eq!(
        ensemble_fidelity(&single, 2).unwrap().value,
        1.0,
        epsilon = 1e-6
    );
    let plus = DensityMatrix::pure(
        &DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]),
        &[2],
    )
    .unwrap();
    let pair = Ensemble::new(vec![(0.5, zero), (0.5, plus)]).unwrap();
    let r = ensemble_fidelity(&pair, 2).unwrap();
    assert!(r.value > 0.9 && r.value < 1.0 - 1e-4);
    assert!(r.is_certified());
}

#[test]
fn ensemble_validation() {
    let zero = DensityMatrix::basis_state(0, 2);
    assert!(Ensemble::new(vec![]).is_err());
    assert!(Ensemble::new(vec![(0.7, zero.clone())]).is_err());
    assert!(Ensemble::new(vec![(1.5, zero.clone()), (-0.5, zero.clone())]).is_err());
    assert!(Ensemble::new(vec![(0.5, zero), (0.5, DensityMatrix::maximally_mixed(3))]).is_err());
    let text = r#"[{"p": 1.0, "matrix": {"dims": [2], "re": [[1, 0], [0, 0]]}}]"#;
    assert_eq!(Ensemble::from_json(text).unwrap().members().len(), 1);
}

#[test]
fn uqcm_power_sampling() {
    let est = broadcasting_power_sampled(&uqcm_choi(2), 60, 11).unwrap();
    let bound = 0.75f64.sqrt();
    assert_abs_diff_eq!(est.phi_value, bound, epsilon = 1e-10);
    assert!(est.samples.iter().all(|&f| f >= bound - 1e-7));
    assert_abs_diff_eq!(est.value, bound, epsilon = 1e-7);
    let again = broadcasting_power_sampled(&uqcm_choi(2), 60, 11).unwrap();
    assert_eq!(est, again);
}

#[test]
fn xi_power_sampling_is_below_uqcm() {
    let est = broadcasting_power_sampled(&xi_choi(), 20, 3).unwrap();
    assert!(est.value < 0.75f64.sqrt());
}

#[test]
fn power_rejects_asymmetric_channels() {
    // first clone receives the input, second is reset to |0>
    let id = identity_choi(2);
    let zero = DensityMatrix::basis_state(0, 2);
    let j = ChoiMatrix::new(
        kron(id.matrix(), zero.as_matrix()).without_dims(),
        2,
        &[2, 2],
    )
    .unwrap();
    assert!(matches!(
        broadcasting_power_sampled(&j, 5, 1),
        Err(BroadcastError::NotSymmetric { .. })
    ));
}

#[test]
fn choi_json_round_trip() {
    let u = uqcm_choi(2);
    let j = u.to_json();
    assert_eq!(j.kind.as_deref(), Some("choi"));
    let text = serde_json::to_string(&j).unwrap();
    let parsed: crate::qmat::MatrixJson = serde_json::from_str(&text).unwrap();
    let back = ChoiMatrix::from_json(&parsed).unwrap();
    assert!(back.matrix().max_abs_diff(u.matrix()) == 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn symmetrize_is_an_idempotent_channel_projection(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = random_choi(2, 2, n, &mut rng);
        let s = symmetrize_choi(&j).unwrap();
        let ss = symmetrize_choi(&s).unwrap();
        prop_assert!(ss.matrix().max_abs_diff(s.matrix()) < 1e-13);
        prop_assert!((s.matrix().trace() - j.matrix().trace()).norm() < 1e-12);
        prop_assert!(s.tp_deviation() < 1e-12);
        prop_assert!(s.min_eigenvalue() > -1e-12);
        prop_assert!(s.symmetry_deviation() < 1e-13);
    }

    #[test]
    fn marginals_of_symmetric_channels_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = symmetrize_choi(&random_choi(2, 2, 3, &mut rng)).unwrap();
        let m0 = s.marginal(0).unwrap();
        for k in 1..3 {
            prop_assert!(s.marginal(k).unwrap().matrix().max_abs_diff(m0.matrix()) < 1e-13);
        }
    }

    #[test]
    fn channel_output_has_unit_trace(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = random_choi(2, 2, 2, &mut rng);
        let rho = haar_pure_state(&[2, 2], &mut rng);
        let out = apply_channel(&j, &rho).unwrap();
        prop_assert!((out.as_matrix().trace().re - 1.0).abs() < 1e-9);
    }
}
