//! Derivative-based exponents via renormalized tangent products, and the
//! coincidence check against the metric estimators.

use lyapunov_core::classical::*;
use lyapunov_core::point_exp::{point_exponents, EstimatorParams};
use lyapunov_core::space::*;
use lyapunov_core::systems::*;

fn log_lu() -> f64 {
    ((7.0 + 3.0 * 5f64.sqrt()) / 2.0).ln()
}

#[test]
fn toral_tangent_rates_are_the_eigen_logs() {
    let sys = ToralSystem::new([[2, 3], [3, 5]], MetricKind::Ambient).unwrap();
    for (x, n) in [
        (Point::torus(0.31, 0.47), 8u32),
        (Point::torus(0.9, 0.05), 16),
        (Point::torus(0.123, 0.456), 64),
    ] {
        let ce = jacobian_exponents(&sys, x, n).unwrap();
        assert!((ce.chi_max - log_lu()).abs() < 1e-8, "chi_max {}", ce.chi_max);
        assert!((ce.chi_min + log_lu()).abs() < 1e-8, "chi_min {}", ce.chi_min);
        assert_eq!(ce.n_used, n);
    }
}

#[test]
fn rotation_tangent_rates_vanish() {
    let rot = IrrationalRotation::golden();
    let ce = jacobian_exponents(&rot, Point::circle(0.8), 32).unwrap();
    assert_eq!(ce.chi_max, 0.0);
    assert_eq!(ce.chi_min, 0.0);
}

#[test]
fn north_south_tangent_rate_converges_to_the_sink_derivative() {
    let ns = NorthSouthCircle::new(2.0);
    let ce = jacobian_exponents(&ns, Point::circle(0.8), 512).unwrap();
    assert!((ce.chi_max - ce.chi_min).abs() < 1e-12);
    assert!((ce.chi_max + 2f64.ln()).abs() < 0.01, "chi {}", ce.chi_max);
    // longer orbits get closer
    let long = jacobian_exponents(&ns, Point::circle(0.8), 2048).unwrap();
    assert!((long.chi_max + 2f64.ln()).abs() < (ce.chi_max + 2f64.ln()).abs());
}

#[test]
fn hair_space_has_no_derivative() {
    let x = TorusWithHair::default_system();
    assert!(matches!(
        jacobian_exponents(&x, x.q(), 16),
        Err(lyapunov_core::Error::NotDifferentiable(_))
    ));
}

#[test]
fn metric_and_tangent_exponents_agree_on_the_torus() {
    let sys = ToralSystem::new([[2, 3], [3, 5]], MetricKind::Ambient).unwrap();
    let x = Point::torus(0.31, 0.47);
    let rep = point_exponents(&sys, x, &EstimatorParams::default()).unwrap();
    let ce = jacobian_exponents(&sys, x, 64).unwrap();
    let cmp = compare(rep.sup_plus, rep.inf_plus, &ce, 0.1);
    assert!(cmp.pass, "deltas {} {}", cmp.delta_max, cmp.delta_min);
}

#[test]
fn metric_and_tangent_exponents_agree_on_the_rotation() {
    let rot = IrrationalRotation::golden();
    let rep = point_exponents(&rot, Point::circle(0.9), &EstimatorParams::default()).unwrap();
    let ce = jacobian_exponents(&rot, Point::circle(0.9), 64).unwrap();
    let cmp = compare(rep.sup_plus, rep.inf_plus, &ce, 0.02);
    assert!(cmp.pass);
}

#[test]
fn mismatched_systems_fail_the_comparison() {
    let sys = ToralSystem::new([[2, 3], [3, 5]], MetricKind::Ambient).unwrap();
    let rot = IrrationalRotation::golden();
    let rep = point_exponents(&sys, Point::torus(0.31, 0.47), &EstimatorParams::default())
        .unwrap();
    let ce = jacobian_exponents(&rot, Point::circle(0.9), 64).unwrap();
    let cmp = compare(rep.sup_plus, rep.inf_plus, &ce, 0.1);
    assert!(!cmp.pass, "a toral report must not match rotation tangent rates");
}
