use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::broadcast::{identity_choi, uqcm_choi};
use crate::qmat::random::random_mixed_state;

fn werner(p: f64) -> DensityMatrix {
    let phi = DensityMatrix::maximally_entangled(2).into_matrix();
    let mixed = DensityMatrix::maximally_mixed(4).into_matrix();
    let m = &phi.scale(p) + &mixed.scale(1.0 - p);
    DensityMatrix::new(m.set_dims(&[2, 2]).unwrap()).unwrap()
}

fn classical_state() -> DensityMatrix {
    let m = ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]);
    DensityMatrix::new(m.set_dims(&[2, 2]).unwrap()).unwrap()
}

fn product_state() -> DensityMatrix {
    let mut plus = DVector::<C64>::zeros(2);
    plus.fill(C64::new(0.5f64.sqrt(), 0.0));
    let a = DensityMatrix::pure(&plus, &[2]).unwrap();
    a.tensor(&DensityMatrix::basis_state(1, 2))
}

/// `I(X:B)` of the state after measuring A along the given direction,
/// evaluated on the full classical-quantum state.
fn measured_information(rho: &DensityMatrix, a: BlochAngles, side: Side) -> f64 {
    let q = QcChannel::new(a.povm());
    bipartite_mutual_information(&apply_qc(&q, rho, side).unwrap()).unwrap()
}

fn grid_oracle(f: impl Fn(BlochAngles) -> f64, steps: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        for j in 0..2 * steps {
            let a = BlochAngles::new(PI * i as f64 / steps as f64, PI * j as f64 / steps as f64);
            best = best.max(f(a));
        }
    }
    best
}

#[test]
fn povm_validation() {
    assert!(Povm::new(vec![]).is_err());
    let half = ComplexMatrix::identity(2).scale(0.5);
    assert!(matches!(
        Povm::new(vec![half.clone()]),
        Err(DiscordError::InvalidPovm(_))
    ));
    let negative = ComplexMatrix::from_real_diagonal(&[1.5, 1.0]);
    let complement = ComplexMatrix::from_real_diagonal(&[-0.5, 0.0]);
    assert!(Povm::new(vec![negative, complement]).is_err());
    let ok = Povm::new(vec![half.clone(), half]).unwrap();
    assert_eq!(ok.outcomes(), 2);
    assert_eq!(ok.dim(), 2);
    let three = ComplexMatrix::identity(3);
    assert!(Povm::new(vec![ComplexMatrix::identity(2), three]).is_err());
}

#[test]
fn povm_from_json() {
    let text = r#"[{"dims": [2], "re": [[1, 0], [0, 0]]}, {"dims": [2], "re": [[0, 0], [0, 1]]}]"#;
    let p = Povm::from_json(text).unwrap();
    assert_eq!(p, Povm::computational(2));
    let bad = r#"[{"dims": [2], "re": [[1, 0], [0, 0]]}]"#;
    assert!(Povm::from_json(bad).is_err());
}

#[test]
fn bloch_povm_is_valid_projective_pair() {
    for (t, p) in [(0.0, 0.0), (0.7, 1.3), (PI / 2.0, PI), (2.5, 5.9)] {
        let povm = BlochAngles::new(t, p).povm();
        let checked = Povm::new(povm.elements().to_vec()).unwrap();
        for e in checked.elements() {
            let sq = e * e;
            assert!(sq.max_abs_diff(e) < 1e-12);
        }
    }
    assert_eq!(BlochAngles::new(0.0, 0.0).povm(), Povm::computational(2));
}

#[test]
fn measuring_maximally_entangled_state() {
    let phi = DensityMatrix::maximally_entangled(2);
    let q = QcChannel::new(Povm::computational(2));
    for side in [Side::A, Side::B] {
        let out = apply_qc(&q, &phi, side).unwrap();
        assert_eq!(out.dims(), &[2, 2]);
        assert!(out.as_matrix().max_abs_diff(classical_state().as_matrix()) < 1e-12);
    }
}

#[test]
fn qc_output_register_has_outcome_dimension() {
    let rho = DensityMatrix::maximally_mixed(3).tensor(&DensityMatrix::basis_state(0, 2));
    let out = apply_qc(&QcChannel::new(Povm::trivial(3)), &rho, Side::A).unwrap();
    assert_eq!(out.dims(), &[1, 2]);
    assert_abs_diff_eq!(out.as_matrix().trace().re, 1.0, epsilon = 1e-12);
    let out = apply_qc(&QcChannel::new(Povm::computational(2)), &rho, Side::B).unwrap();
    assert_eq!(out.dims(), &[3, 2]);
    assert!(apply_qc(&QcChannel::new(Povm::computational(2)), &rho, Side::A).is_err());
}

#[test]
fn discord_of_maximally_entangled_state_is_one() {
    let phi = DensityMatrix::maximally_entangled(2);
    let one = discord_one_sided(&phi).unwrap();
    assert_abs_diff_eq!(one.mutual_information, 2.0, epsilon = 1e-10);
    assert_abs_diff_eq!(one.value, 1.0, epsilon = 1e-9);
    let two = discord_two_sided(&phi).unwrap();
    assert_abs_diff_eq!(two.value, 1.0, epsilon = 1e-9);
}

#[test]
fn classical_and_product_states_have_no_discord() {
    for rho in [classical_state(), product_state()] {
        assert_abs_diff_eq!(discord_one_sided(&rho).unwrap().value, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(discord_two_sided(&rho).unwrap().value, 0.0, epsilon = 1e-8);
    }
}

#[test]
fn werner_discord_against_grid_oracle() {
    let rho = werner(0.5);
    let oracle_a = grid_oracle(|a| measured_information(&rho, a, Side::A), 12);
    let mi = bipartite_mutual_information(&rho).unwrap();
    let one = discord_one_sided(&rho).unwrap();
    assert!(one.classical_information >= oracle_a - 1e-9);
    assert_abs_diff_eq!(one.value, mi - oracle_a, epsilon = 2e-3);
    assert_abs_diff_eq!(one.value, 0.262483, epsilon = 1e-5);

    let two = discord_two_sided(&rho).unwrap();
    let oracle_ab = grid_oracle(
        |a| {
            let measured = apply_qc(&QcChannel::new(a.povm()), &rho, Side::A).unwrap();
            grid_oracle(|b| measured_information(&measured, b, Side::B), 6)
        },
        6,
    );
    assert!(two.classical_information >= oracle_ab - 1e-9);
    assert_abs_diff_eq!(two.value, mi - oracle_ab, epsilon = 2e-3);
    assert_abs_diff_eq!(two.value, 0.262483, epsilon = 1e-5);
}

#[test]
fn reported_measurements_attain_reported_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = random_mixed_state(&[2, 2], 3, &mut rng);
    let one = discord_one_sided(&rho).unwrap();
    let a = one.measurement_a.unwrap();
    assert_abs_diff_eq!(
        measured_information(&rho, a, Side::A),
        one.classical_information,
        epsilon = 1e-10
    );
    let two = discord_two_sided(&rho).unwrap();
    let measured = apply_qc(
        &QcChannel::new(two.measurement_a.unwrap().povm()),
        &rho,
        Side::A,
    )
    .unwrap();
    assert_abs_diff_eq!(
        measured_information(&measured, two.measurement_b.unwrap(), Side::B),
        two.classical_information,
        epsilon = 1e-10
    );
}

#[test]
fn one_sided_accepts_larger_unmeasured_side() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho = random_mixed_state(&[2, 3], 2, &mut rng);
    let one = discord_one_sided(&rho).unwrap();
    let oracle = grid_oracle(|a| measured_information(&rho, a, Side::A), 10);
    assert!(one.classical_information >= oracle - 1e-9);
    assert!(discord_two_sided(&rho).is_err());
    let qutrit = random_mixed_state(&[3, 2], 2, &mut rng);
    assert!(matches!(
        discord_one_sided(&qutrit),
        Err(DiscordError::UnsupportedDimension(_))
    ));
}

#[test]
fn measure_prepare_broadcaster_is_symmetric_channel() {
    for n in 1..=3 {
        let j = measure_prepare_broadcast(&Povm::computational(2), n).unwrap();
        assert_eq!(j.out_dims(), vec![2; n].as_slice());
        assert!(j.min_eigenvalue() > -1e-12);
        assert!(j.tp_deviation() < 1e-12);
        assert!(j.symmetry_deviation() < 1e-12);
    }
    assert!(measure_prepare_broadcast(&Povm::computational(2), 0).is_err());
}

#[test]
fn measure_prepare_marginal_is_qc_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = random_mixed_state(&[2, 2], 4, &mut rng);
    let povm = BlochAngles::new(0.9, 2.1).povm();
    let j = measure_prepare_broadcast(&povm, 3).unwrap();
    let out = apply_channel(&j, &rho).unwrap().reduce(&[1, 3]).unwrap();
    let direct = apply_qc(&QcChannel::new(povm), &rho, Side::A).unwrap();
    assert!(out.as_matrix().max_abs_diff(direct.as_matrix()) < 1e-12);
}

#[test]
fn avg_loss_is_discord_gap_for_every_copy_count() {
    let phi = DensityMatrix::maximally_entangled(2);
    for n in 1..=3 {
        let j = measure_prepare_broadcast(&Povm::computational(2), n).unwrap();
        assert_abs_diff_eq!(
            avg_loss(&phi, &j, &SideMap::Identity).unwrap(),
            1.0,
            epsilon = 1e-10
        );
        let g = SideMap::Broadcast(measure_prepare_broadcast(&Povm::computational(2), n).unwrap());
        assert_abs_diff_eq!(avg_loss(&phi, &j, &g).unwrap(), 1.0, epsilon = 1e-10);
    }
}

#[test]
fn classical_state_broadcasts_without_loss() {
    let rho = classical_state();
    for n in 1..=3 {
        let j = measure_prepare_broadcast(&Povm::computational(2), n).unwrap();
        let g = SideMap::Broadcast(j.clone());
        assert_abs_diff_eq!(
            avg_loss(&rho, &j, &SideMap::Identity).unwrap(),
            0.0,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(avg_loss(&rho, &j, &g).unwrap(), 0.0, epsilon = 1e-10);
    }
}

#[test]
fn identity_channel_loses_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rho = random_mixed_state(&[2, 3], 2, &mut rng);
    let loss = avg_loss(&rho, &identity_choi(2), &SideMap::Identity).unwrap();
    assert_abs_diff_eq!(loss, 0.0, epsilon = 1e-10);
}

#[test]
fn avg_loss_rejects_mismatched_maps() {
    let phi = DensityMatrix::maximally_entangled(2);
    let lambda = uqcm_choi(2);
    let one = SideMap::Broadcast(identity_choi(2));
    assert!(avg_loss(&phi, &lambda, &one).is_err());
    let wrong_dim = SideMap::Broadcast(uqcm_choi(3));
    assert!(avg_loss(&phi, &lambda, &wrong_dim).is_err());
}

#[test]
fn qc_output_is_classical_on_measured_side() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let rho = random_mixed_state(&[2, 2], 4, &mut rng);
    let q = QcChannel::new(BlochAngles::new(1.1, 0.4).povm());
    for side in [Side::A, Side::B] {
        let out = apply_qc(&q, &rho, side).unwrap();
        for j in 0..2 {
            let mut diag = [0.0; 2];
            diag[j] = 1.0;
            let proj = ComplexMatrix::from_real_diagonal(&diag);
            let id = ComplexMatrix::identity(2);
            let lifted = match side {
                Side::A => crate::qmat::kron(&proj, &id),
                Side::B => crate::qmat::kron(&id, &proj),
            };
            let m = out.as_matrix().clone().without_dims();
            let commutator = &(&lifted * &m) - &(&m * &lifted);
            assert!(commutator.matrix().iter().all(|z| z.norm() < 1e-10));
        }
    }
}

#[test]
fn avg_loss_matches_locally_measured_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let rho = random_mixed_state(&[2, 2], 3, &mut rng);
    let m = BlochAngles::new(0.3, 2.0).povm();
    let nq = BlochAngles::new(2.2, 0.9).povm();
    let measured = apply_qc(&QcChannel::new(m.clone()), &rho, Side::A).unwrap();
    let measured = apply_qc(&QcChannel::new(nq.clone()), &measured, Side::B).unwrap();
    let expected = bipartite_mutual_information(&rho).unwrap()
        - bipartite_mutual_information(&measured).unwrap();
    for n in 1..=3 {
        let lambda = measure_prepare_broadcast(&m, n).unwrap();
        let gamma = SideMap::Broadcast(measure_prepare_broadcast(&nq, n).unwrap());
        assert_abs_diff_eq!(
            avg_loss(&rho, &lambda, &gamma).unwrap(),
            expected,
            epsilon = 1e-9
        );
    }
}

#[test]
fn broadcasting_loss_bounded_by_two_sided_discord() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..4 {
        let rho = random_mixed_state(&[2, 2], 2, &mut rng);
        let discord = discord_two_sided(&rho).unwrap().value;
        let angles = |k: f64| BlochAngles::new(0.4 * k, 1.3 * k);
        for n in 2..=3 {
            let mp = |k| measure_prepare_broadcast(&angles(k).povm(), n).unwrap();
            let mut pairs = vec![(mp(1.0), SideMap::Broadcast(mp(2.0)))];
            if n == 2 {
                pairs.push((uqcm_choi(2), SideMap::Broadcast(uqcm_choi(2))));
                pairs.push((mp(3.0), SideMap::Broadcast(uqcm_choi(2))));
            }
            for (lambda, gamma) in &pairs {
                assert!(avg_loss(&rho, lambda, gamma).unwrap() >= discord - 2e-3);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn discord_bounds(seed in any::<u64>(), env in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_mixed_state(&[2, 2], env, &mut rng);
        let one = discord_one_sided(&rho).unwrap();
        let two = discord_two_sided(&rho).unwrap();
        prop_assert!(one.value >= 0.0);
        prop_assert!(one.value <= one.mutual_information + 1e-12);
        prop_assert!(two.value >= one.value - 1e-7);
        let probe = BlochAngles::new(seed as f64 % PI, (seed >> 7) as f64 % (2.0 * PI));
        prop_assert!(one.classical_information >= measured_information(&rho, probe, Side::A) - 1e-9);
    }

    #[test]
    fn uqcm_loss_is_nonnegative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_mixed_state(&[2, 2], 2, &mut rng);
        let loss = avg_loss(&rho, &uqcm_choi(2), &SideMap::Identity).unwrap();
        prop_assert!(loss >= -1e-10);
    }
}
