use dyson_core::concentration::*;
use dyson_core::gibbs::{boltzmann, lsi_constant_search, ExactMeasure};
use dyson_core::math::exp;
use dyson_core::model::{
    suac_norm, BoundaryCondition, CouplingFamily, InteractionMask, LocalFunction, Window,
};
use dyson_core::Error;

fn dyson(alpha: f64) -> CouplingFamily {
    CouplingFamily::power_law(alpha).unwrap()
}

fn measure(n: usize, beta: f64, alpha: f64) -> ExactMeasure {
    boltzmann(
        Window::from_origin(n),
        beta,
        &InteractionMask::full(),
        &BoundaryCondition::Free,
        &dyson(alpha),
    )
    .unwrap()
}

#[test]
fn constant_formulas_match_independent_evaluation() {
    let j = dyson(2.0);
    let (beta, chi) = (0.3, 2.7);
    let b = constants(beta, chi, ChiSource::User, &j, &InteractionMask::full()).unwrap();
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    let lsi = 0.25 + beta / 2.0 * (2.0 * beta * chi).exp();
    let gcb =
        (1.0 + 2.0 * beta * (2.0 * beta * chi).exp()) * ((4.0 * beta * zeta2).exp() + 1.0) / 8.0;
    let herbst = lsi * ((2.0 * 2.0 * beta * zeta2).exp() + 1.0) / 2.0;
    assert!((b.d_lsi_bound - lsi).abs() < 1e-15);
    assert!((b.d_gcb - gcb).abs() < 1e-12 * gcb);
    assert!((b.d_herbst - herbst).abs() < 1e-12 * herbst);
    let again = constants(beta, chi, ChiSource::User, &j, &InteractionMask::full()).unwrap();
    assert_eq!(b, again);
}

#[test]
fn hoeffding_regime_at_zero_beta() {
    let m = measure(5, 0.0, 2.0);
    let spec = FamilySpec {
        sparse_tables: false,
        lsi_witnesses: false,
        ..FamilySpec::default()
    };
    let r = verify_gcb(&m, 0.25, &spec, 500, 1).unwrap();
    assert!(r.pass, "{r:?}");
    // log cosh(a) ~ a^2 / 2 while D osc^2 = sum a^2, so the ratio tends to 1/2.
    let f = LocalFunction::linear(&[0, 1], &[1e-3, -2e-3]).unwrap();
    let table = dyson_core::gibbs::functional::tabulate(&m, &f).unwrap();
    let r = gcb_check_ratio(&m, 0.25, &table).unwrap();
    assert!(r < 0.5 && r > 0.499_99, "{r}");
}

#[test]
fn second_moment_is_the_boundary_case() {
    let m = measure(4, 0.0, 2.0);
    let f = LocalFunction::linear(&[0, 1, 3], &[0.5, -1.0, 2.0]).unwrap();
    let r = verify_mcb(&m, 0.25, &f, &[2]).unwrap();
    assert!((r.worst_ratio - 1.0).abs() < 1e-12, "{}", r.worst_ratio);
    assert!(r.pass);
    let c = verify_mcb(&m, 0.25, &LocalFunction::constant(3.0), &[2, 4]).unwrap();
    assert_eq!(c.worst_ratio, 0.0);
}

#[test]
fn lsi_bound_holds_on_small_exact_measures() {
    let spec = FamilySpec::default();
    for n in 2..=4 {
        for beta in [0.1, 0.3, 0.6] {
            let m = measure(n, beta, 2.0);
            let d = lsi_bound(beta, m.susceptibility());
            let r = verify_lsi(&m, d, &spec, 600, 7).unwrap();
            assert!(r.pass, "n={n} beta={beta}: {r:?}");
        }
    }
}

/// `Var(M) / Dirichlet(M)` for the magnetization: `sum_ij <s_i s_j> / (4 n)` on a free, flip-symmetric measure.
/// Linearizing the log-Sobolev inequality around `1 + eps M` shows the constant is at least this.
fn magnetization_poincare_ratio(m: &ExactMeasure) -> f64 {
    let n = m.sites();
    let c = m.two_point_matrix();
    c.iter().sum::<f64>() / (4.0 * n as f64)
}

#[test]
fn small_beta_bound_loses_to_the_magnetization_direction() {
    // At small beta chi ~ 1 + 2 beta sum J, so D >= chi / 4 outgrows 1/4 + (beta/2) e^{2 beta chi} once sum J > 1.
    let (beta, j) = (0.1, dyson(2.0));
    let m = measure(8, beta, 2.0);
    let chi = m.susceptibility();
    let poincare = magnetization_poincare_ratio(&m);
    assert!(
        poincare > lsi_bound(beta, chi),
        "{poincare} vs {}",
        lsi_bound(beta, chi)
    );
    let b = constants(
        beta,
        chi,
        ChiSource::ExactFv { sites: 8 },
        &j,
        &InteractionMask::full(),
    )
    .unwrap();
    assert!(poincare < b.d_lsi_rescaled);

    let m6 = measure(6, beta, 2.0);
    let chi6 = m6.susceptibility();
    let stated = verify_lsi(&m6, lsi_bound(beta, chi6), &FamilySpec::default(), 200, 1).unwrap();
    assert!(!stated.pass && stated.worst_ratio < 1.01, "{stated:?}");
    let rescaled = lsi_bound_rescaled(beta, chi6, j.kappa().hi);
    assert!(
        verify_lsi(&m6, rescaled, &FamilySpec::default(), 200, 1)
            .unwrap()
            .pass
    );
}

#[test]
fn undersized_constant_fails_with_witness() {
    let m = measure(3, 0.3, 2.0);
    let best = lsi_constant_search(&m, 16, 3).unwrap().lower_bound;
    let r = verify_lsi(&m, 0.9 * best, &FamilySpec::default(), 50, 3).unwrap();
    assert!(!r.pass);
    assert!(r.worst_ratio > 1.1);
    assert!(r.worst_witness.contains("search"));
    assert!(r.witness_table.is_some());
}

#[test]
fn herbst_chain_on_small_measures() {
    let j = dyson(2.0);
    let spec = FamilySpec::default();
    for n in [2, 4, 6] {
        let m = measure(n, 0.3, 2.0);
        let d_lsi = lsi_bound(0.3, m.susceptibility());
        assert!(verify_lsi(&m, d_lsi, &spec, 200, 5).unwrap().pass);
        let suac = suac_norm(&InteractionMask::full(), 0.3, &j).hi;
        let d = herbst_constant(d_lsi, suac);
        assert!(verify_gcb(&m, d, &spec, 300, 5).unwrap().pass);
        assert!(
            verify_mcb_family(&m, d, &spec, 300, 5, &[2, 4, 6, 8])
                .unwrap()
                .pass
        );
        let f = LocalFunction::linear(&[0, 1], &[1.0, -0.5]).unwrap();
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 * 0.05).collect();
        let scan = herbst_scan(&m, &f, &grid, d_lsi, suac).unwrap();
        assert_eq!(scan.violations, 0);
        assert!((scan.u0_limit - scan.mean).abs() < 1e-8);
    }
}

#[test]
fn herbst_scan_of_constant_is_flat() {
    let m = measure(3, 0.4, 1.5);
    let scan = herbst_scan(
        &m,
        &LocalFunction::constant(2.0),
        &[0.1, 0.5, 1.0],
        0.5,
        1.0,
    )
    .unwrap();
    for r in &scan.rows {
        assert_eq!(r.u, 2.0);
        assert_eq!(r.du, 0.0);
        assert!(!r.violation);
    }
    assert!(herbst_scan(&m, &LocalFunction::constant(2.0), &[0.0], 0.5, 1.0).is_err());
}

#[test]
fn mgf_derivative_matches_closed_form_at_zero_beta() {
    // For F = a sigma_0 under the fair coin, u(l) = log cosh(a l) / l.
    let m = measure(2, 0.0, 2.0);
    let a = 0.8;
    let f = LocalFunction::linear(&[0], &[a]).unwrap();
    let scan = herbst_scan(&m, &f, &[0.5], 0.25, 0.0).unwrap();
    let l: f64 = 0.5;
    let exact = (a * l * (a * l).tanh() - (a * l).cosh().ln()) / (l * l);
    assert!((scan.rows[0].du - exact).abs() < 1e-9);
}

#[test]
fn uniform_integrability_table() {
    let j = dyson(2.0);
    let rows = uniform_integrability_diag(&[1, 2, 3], &KPolicy::All, 0.3, &j).unwrap();
    for r in &rows {
        if r.k == 0 {
            assert!(r.entropy.abs() < 1e-15);
        }
        assert!(!r.exceeds, "{r:?}");
        assert!(r.entropy >= -1e-15);
    }
    assert_eq!(
        rows.iter().filter(|r| r.n == 3).count(),
        dyson_core::model::k_n(3) + 1
    );
}

#[test]
fn modulus_decreases_and_vanishes() {
    let j = dyson(2.0);
    let ns: Vec<usize> = (0..=15).map(|k| 1usize << k).collect();
    let rows = continuity_modulus(&ns, 1.0, 0.3, &j).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].u_n < w[0].u_n);
        assert!(w[1].modulus <= w[0].modulus);
    }
    assert!(rows.last().unwrap().u_n < 1e-4);
    for r in continuity_modulus(&[1, 5], 1.0, 0.0, &j).unwrap() {
        assert_eq!((r.u_n, r.modulus), (0.0, 0.0));
    }
    assert!(matches!(
        continuity_modulus(&[1], 1.0, 0.3, &dyson(1.4)),
        Err(Error::ConditionIiiDivergent { .. })
    ));
}

#[test]
fn moment_series_bound() {
    for k in 0..=200 {
        let v = k as f64 * 0.02;
        let lhs = moment_series(v);
        let rhs = (6.0 * v * v + 8.0 * v) * exp(v * v);
        assert!(lhs <= rhs * (1.0 + 1e-12), "v={v}: {lhs} > {rhs}");
    }
}
