use dyson_core::math::{cosh, ln};
use dyson_core::model::CouplingFamily;
use dyson_core::transfer::*;

#[test]
fn depth_one_pressure_is_nearest_neighbor_value() {
    let j = CouplingFamily::power_law(2.0).unwrap();
    for k in 1..=10 {
        let beta = 0.1 * k as f64;
        let rows = pressure_table(&[1], beta, &j, 1e-13).unwrap();
        assert!((rows[0].log_lambda - ln(2.0 * cosh(beta))).abs() < 1e-12);
    }
}

#[test]
fn pressure_at_infinite_temperature_is_log_two() {
    let j = CouplingFamily::power_law(1.3).unwrap();
    for row in pressure_table(&[2, 5, 9, 12], 0.0, &j, 1e-12).unwrap() {
        assert_eq!(row.log_lambda, ln(2.0));
    }
}

#[test]
fn pressure_sequence_is_cauchy() {
    let j = CouplingFamily::power_law(2.0).unwrap();
    let depths: Vec<usize> = (4..=18).collect();
    let rows = pressure_table(&depths, 0.3, &j, 1e-13).unwrap();
    let two_step: Vec<f64> = (0..rows.len() - 2)
        .map(|i| (rows[i + 2].log_lambda - rows[i].log_lambda).abs())
        .collect();
    for w in two_step.windows(2) {
        assert!(w[1] < w[0], "{two_step:?}");
    }
    let gaps: Vec<f64> = rows.iter().skip(1).map(|r| r.gap.unwrap()).collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0], "{gaps:?}");
    }
}

#[test]
fn lambda_is_nondecreasing_in_beta() {
    let j = CouplingFamily::power_law(1.5).unwrap();
    for m in [1, 4, 8] {
        let mut prev = 0.0;
        for k in 0..=12 {
            let t = build_truncation(m, 0.1 * k as f64, &j).unwrap();
            let e = principal_eigen(&t, 1e-13, DEFAULT_MAX_ITERATIONS).unwrap();
            assert!(e.lambda >= prev - 1e-12);
            prev = e.lambda;
        }
    }
}

#[test]
fn density_route_matches_power_iteration() {
    let j = CouplingFamily::power_law(2.0).unwrap();
    let route = eigenfunction_density_route(12, 8, 0.3, &j, 12).unwrap();
    eprintln!(
        "distance {:e} residual {:e}",
        route.relative_distance, route.residual
    );
    assert!(route.relative_distance <= 5e-2);
    assert!(route.residual <= 0.1);
    let pairing: f64 = route
        .eigen
        .nu
        .iter()
        .zip(&route.f)
        .map(|(a, b)| a * b)
        .sum();
    assert!((pairing - 1.0).abs() < 1e-12);
}

#[test]
fn density_route_is_constant_at_zero_beta() {
    let j = CouplingFamily::power_law(2.0).unwrap();
    let route = eigenfunction_density_route(6, 4, 0.0, &j, 6).unwrap();
    assert!(route.f.iter().all(|v| (v - 1.0).abs() < 1e-15));
}

#[test]
fn variation_decays_with_depth() {
    let j = CouplingFamily::power_law(2.0).unwrap();
    let t = build_truncation(10, 0.4, &j).unwrap();
    let e = principal_eigen(&t, 1e-12, DEFAULT_MAX_ITERATIONS).unwrap();
    let v = variation(&e.h);
    assert_eq!(v.len(), 11);
    assert_eq!(v[10], 0.0);
    for w in v.windows(2) {
        assert!(w[1] <= w[0]);
    }
}
