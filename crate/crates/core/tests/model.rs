use dyson_core::gibbs::{boltzmann, boltzmann_matrix};
use dyson_core::model::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn dyson(alpha: f64) -> CouplingFamily {
    CouplingFamily::power_law(alpha).unwrap()
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.dim(), m.dim(), |i, j| m.get(i, j))
}

#[test]
fn rescaled_matrices_satisfy_bd_conditions_for_all_masks() {
    for alpha in [1.2, 1.5, 2.0, 3.0] {
        let j = dyson(alpha);
        let kappa = j.kappa().hi;
        for n in 1..=12 {
            let volume = Window::new(-(n as i64 / 2), n as i64 - n as i64 / 2 - 1).unwrap();
            let ks = [0, 1, 3, k_n(3), k_n(6)];
            let masks = ks
                .iter()
                .map(|&k| InteractionMask::intermediate(k))
                .chain([InteractionMask::full()]);
            for mask in masks {
                let a = rescale_bd(&coupling_matrix(volume, &mask, &j), kappa).unwrap();
                let r = check_bd_conditions(&a).unwrap();
                assert!(r.all(), "alpha={alpha} n={n} {mask:?}: {r:?}");
            }
        }
    }
}

#[test]
fn jacobi_spectrum_matches_nalgebra() {
    let j = dyson(1.5);
    for n in [2, 5, 9, 12] {
        let a = rescale_bd(
            &coupling_matrix(Window::from_origin(n), &InteractionMask::full(), &j),
            j.kappa().hi,
        )
        .unwrap();
        let mut ours = a.symmetric_eigenvalues().unwrap();
        ours.sort_by(f64::total_cmp);
        let mut oracle: Vec<f64> = to_nalgebra(&a)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        oracle.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-12, "n={n}: {x} vs {y}");
        }
        let r = check_bd_conditions(&a).unwrap();
        assert!((r.smallest_eigenvalue - oracle[0]).abs() < 1e-12);
    }
}

#[test]
fn matrix_ansatz_reproduces_boltzmann_after_rescaling() {
    // (A + kappa I) / (2 kappa) at inverse temperature 2 kappa beta differs from A at beta by a constant.
    let j = dyson(2.0);
    let volume = Window::symmetric(3);
    let kappa = j.kappa().hi;
    let beta = 0.35;
    let a = coupling_matrix(volume, &InteractionMask::full(), &j);
    let direct = boltzmann(
        volume,
        beta,
        &InteractionMask::full(),
        &BoundaryCondition::Free,
        &j,
    )
    .unwrap();
    let plain = boltzmann_matrix(&a, volume, beta).unwrap();
    let rescaled =
        boltzmann_matrix(&rescale_bd(&a, kappa).unwrap(), volume, 2.0 * kappa * beta).unwrap();
    for x in 0..direct.probabilities().len() {
        let p = direct.probabilities()[x];
        assert!((plain.probabilities()[x] - p).abs() < 1e-15);
        assert!((rescaled.probabilities()[x] - p).abs() < 1e-14);
    }
}

#[test]
fn non_symmetric_matrix_is_rejected() {
    let m = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
    assert!(check_bd_conditions(&m).is_err());
}

#[test]
fn summability_examples() {
    let r = summability_report(&dyson(2.0));
    assert!(r.condition_i && r.condition_ii && r.condition_iii);
    let kappa = r.kappa;
    let exact = std::f64::consts::PI.powi(2) / 3.0;
    assert!(kappa.lo <= exact && exact <= kappa.hi && kappa.hi - kappa.lo < 1e-9);
    assert!(summability_report(&dyson(1.6)).condition_iii);
    let r = summability_report(&dyson(1.4));
    assert!(r.condition_i && r.condition_ii && !r.condition_iii);
    assert!(!r.c1.is_finite());
}

#[test]
fn tail_at_ten_brackets_partial_sum_oracle() {
    // Partial sum of 10^6 terms plus the integral-test bracket for the rest.
    let mut s = 0.0f64;
    for k in (10..1_000_010u64).rev() {
        s += 1.0 / (k as f64 * k as f64);
    }
    let n = 1_000_010.0f64;
    let (lo, hi) = (s + 1.0 / n, s + 1.0 / (n - 1.0));
    let t = dyson(2.0).tail(10);
    assert!(t.lo <= hi && lo <= t.hi, "{t:?} vs [{lo}, {hi}]");
    assert!(t.hi - t.lo <= 1e-10);
    assert!((t.lo - 0.105166).abs() < 1e-6);
}

#[test]
fn explicit_table_tail() {
    let j = CouplingFamily::table(vec![1.0], TailRule::Zero).unwrap();
    let t = j.tail(2);
    assert_eq!((t.lo, t.hi), (0.0, 0.0));
}

#[test]
fn plus_boundary_hand_enumeration() {
    let j = CouplingFamily::table(vec![1.0, 0.25], TailRule::Zero).unwrap();
    let volume = Window::new(0, 1).unwrap();
    let bc = BoundaryCondition::Plus {
        outer: Window::new(0, 2).unwrap(),
    };
    let config = SpinConfig::from_spins(volume, &[1, -1]).unwrap();
    let e = hamiltonian(volume, &config, &bc, &InteractionMask::full(), 1.0, &j).unwrap();
    assert!((e.value - 1.75).abs() < 1e-15, "{e:?}");
}

proptest! {
    #[test]
    fn tail_intervals_are_nested(alpha in 1.05f64..4.0, i in 1usize..5000) {
        let j = dyson(alpha);
        let (a, b) = (j.tail(i), j.tail(i + 1));
        prop_assert!(b.lo >= 0.0);
        prop_assert!(b.hi <= a.hi);
        prop_assert!(a.lo <= a.hi);
    }

    #[test]
    fn free_hamiltonian_is_flip_symmetric(alpha in 1.1f64..3.0, len in 1usize..10, bits in any::<u64>(), beta in 0.0f64..2.0) {
        let j = dyson(alpha);
        let volume = Window::from_origin(len);
        let c = SpinConfig::from_bits(volume, bits & ((1u64 << len) - 1)).unwrap();
        let h = hamiltonian(volume, &c, &BoundaryCondition::Free, &InteractionMask::full(), beta, &j).unwrap();
        let g = hamiltonian(volume, &c.negated(), &BoundaryCondition::Free, &InteractionMask::full(), beta, &j).unwrap();
        prop_assert!((h.value - g.value).abs() <= 1e-12 * (1.0 + h.value.abs()));
    }

    #[test]
    fn suac_norm_scales_with_beta(alpha in 1.1f64..3.0, beta in 0.0f64..2.0) {
        let j = dyson(alpha);
        let s = suac_norm(&InteractionMask::full(), beta, &j);
        let k = j.kappa();
        prop_assert!(s.lo <= beta * k.hi + 1e-12 && s.hi >= beta * k.lo - 1e-12);
    }
}
