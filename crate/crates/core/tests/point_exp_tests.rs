//! Pointwise distortion estimators: Bowen filtering, sup/inf distortion,
//! normalized log sequences, the full report, and the duality and
//! Lipschitz-bound diagnostics.

use lyapunov_core::point_exp::*;
use lyapunov_core::space::*;
use lyapunov_core::systems::*;

const PI: f64 = std::f64::consts::PI;

fn adapted_cat() -> ToralSystem {
    ToralSystem::new([[2, 3], [3, 5]], MetricKind::EigenAdapted).unwrap()
}

fn log_lu() -> f64 {
    ((7.0 + 3.0 * 5f64.sqrt()) / 2.0).ln()
}

/// Fifth power of the unstable eigenvalue via the integer trace recurrence
/// tr(A^n) = 7 tr(A^(n-1)) - tr(A^(n-2)): tr(A^5) = 15127, so
/// lambda_u^5 = 15127 - lambda_s^5.
fn lambda_u_pow5() -> f64 {
    let ls = (7.0 - 3.0 * 5f64.sqrt()) / 2.0;
    15127.0 - ls.powi(5)
}

#[test]
fn rotation_candidates_all_survive() {
    let rot = IrrationalRotation::golden();
    let x = Point::circle(1.0);
    let cands = sample_near(&rot, x, 1e-2, 128, 2).unwrap();
    for n in [1i64, 5, 10, -10] {
        let kept = bowen_filter(&rot, x, 1e-2, n, &cands);
        assert_eq!(kept.len(), cands.len(), "isometry must keep every candidate");
    }
}

#[test]
fn unstable_probe_survives_until_it_escapes() {
    let sys = adapted_cat();
    let auto = sys.automorphism.clone();
    let delta = 1e-3;
    let x = Point::torus(0.3, 0.4);
    // survives n iff r * lambda_u^n <= delta
    let r = 0.9 * delta * auto.lambda_u.powi(-4);
    let y = Point::torus(0.3 + r * auto.v_u[0], 0.4 + r * auto.v_u[1]);
    assert_eq!(bowen_filter(&sys, x, delta, 4, &[y]).len(), 1);
    assert_eq!(bowen_filter(&sys, x, delta, 5, &[y]).len(), 0);
}

#[test]
fn zero_time_filter_is_a_plain_ball() {
    let sys = adapted_cat();
    let x = Point::torus(0.3, 0.4);
    let cands = sample_near(&sys, x, 1e-2, 64, 9).unwrap();
    let kept = bowen_filter(&sys, x, 1e-2, 0, &cands);
    let expected: Vec<Point> = cands
        .iter()
        .copied()
        .filter(|&y| sys.distance(x, y) <= 1e-2 * (1.0 + 1e-12))
        .collect();
    assert_eq!(kept.len(), expected.len());
}

#[test]
fn rotation_distortion_is_one() {
    let rot = IrrationalRotation::golden();
    let x = Point::circle(2.0);
    let cands = sample_near(&rot, x, 1e-2, 256, 5).unwrap();
    for n in [1i64, 7, -7] {
        let est = distortion(&rot, x, 1e-2, n, &cands).unwrap();
        assert_eq!(est.sup, 1.0);
        assert_eq!(est.inf, 1.0);
        assert!(est.in_ball_count >= 1);
    }
}

#[test]
fn unstable_probe_realizes_the_supremum() {
    let sys = adapted_cat();
    let auto = sys.automorphism.clone();
    let delta = 1e-3;
    let x = Point::torus(0.3, 0.4);
    // just inside the survival threshold r * lambda_u^5 <= delta; the
    // distortion ratio itself does not depend on r
    let r = delta * auto.lambda_u.powi(-5) * (1.0 - 1e-6);
    let y = Point::torus(0.3 + r * auto.v_u[0], 0.4 + r * auto.v_u[1]);
    let est = distortion(&sys, x, delta, 5, &[y]).unwrap();
    let expected = lambda_u_pow5();
    assert!(
        ((est.sup - expected) / expected).abs() < 1e-9,
        "sup {} vs lambda_u^5 {}",
        est.sup,
        expected
    );
    assert!((expected - 15127.0).abs() < 1e-3);
}

#[test]
fn sampled_supremum_attains_the_linear_rate() {
    let sys = adapted_cat();
    let delta = 1e-3;
    let x = Point::torus(0.3, 0.4);
    let cands = sample_near(&sys, x, delta, 512, 5).unwrap();
    let est = distortion(&sys, x, delta, 5, &cands).unwrap();
    let expected = lambda_u_pow5();
    assert!(((est.sup - expected) / expected).abs() < 1e-9);
}

#[test]
fn apex_neighborhood_contracts_at_the_stable_rate() {
    let x = TorusWithHair::default_system();
    let cands = sample_near(&x, x.q(), 0.1, 512, 5).unwrap();
    let est = distortion(&x, x.q(), 0.1, 5, &cands).unwrap();
    let expected = x.base.lambda_s.powi(5);
    assert!((expected - 6.61e-5).abs() < 1e-7);
    assert!(((est.sup - expected) / expected).abs() < 1e-6);
}

#[test]
fn distortion_orders_inf_below_sup() {
    use rand::{Rng, SeedableRng};
    let sys = adapted_cat();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
    for seed in 0..10u64 {
        let x = Point::torus(rng.gen::<f64>(), rng.gen::<f64>());
        let cands = sample_near(&sys, x, 1e-2, 128, seed).unwrap();
        for n in [1i64, 3, -3] {
            let est = distortion(&sys, x, 1e-2, n, &cands).unwrap();
            assert!(est.inf <= est.sup);
            assert!(est.inf > 0.0);
        }
    }
}

#[test]
fn distortion_is_monotone_in_delta() {
    let sys = adapted_cat();
    let x = Point::torus(0.3, 0.4);
    let cands = sample_near(&sys, x, 1e-2, 512, 13).unwrap();
    for n in [2i64, 4, -4] {
        let wide = distortion(&sys, x, 1e-2, n, &cands).unwrap();
        let narrow = distortion(&sys, x, 1e-3, n, &cands).unwrap();
        assert!(narrow.sup <= wide.sup, "sup must shrink with delta");
        assert!(narrow.inf >= wide.inf, "inf must grow with delta");
    }
}

#[test]
fn per_candidate_ratios_respect_operator_norms() {
    let sys = adapted_cat();
    let lu = sys.automorphism.lambda_u;
    let x = Point::torus(0.62, 0.17);
    let cands = sample_near(&sys, x, 1e-3, 256, 23).unwrap();
    for n in [1i64, 3, 5, -5] {
        let est = distortion(&sys, x, 1e-3, n, &cands).unwrap();
        let bound = lu.powi(n.unsigned_abs() as i32);
        assert!(est.sup <= bound * (1.0 + 1e-9));
        assert!(est.inf >= (1.0 / bound) * (1.0 - 1e-9));
    }
}

#[test]
fn rotation_sequence_is_identically_zero() {
    let rot = IrrationalRotation::golden();
    let x = Point::circle(0.4);
    let cands = sample_near(&rot, x, 1e-2, 128, 7).unwrap();
    for forward in [true, false] {
        let rows = exponent_sequence(&rot, x, 1e-2, 8, forward, &cands).unwrap();
        for (n, ls, li) in rows {
            assert_eq!(ls, 0.0, "n = {n}");
            assert_eq!(li, 0.0, "n = {n}");
        }
    }
}

#[test]
fn toral_sequence_is_flat_at_the_eigen_rate() {
    let sys = adapted_cat();
    let x = Point::torus(0.3, 0.4);
    let cands = sample_near(&sys, x, 1e-3, 512, 5).unwrap();
    let rows = exponent_sequence(&sys, x, 1e-3, 8, true, &cands).unwrap();
    for (n, ls, _) in rows {
        assert!((ls - log_lu()).abs() < 1e-9, "n = {n}: {ls}");
    }
}

#[test]
fn apex_sequence_converges_to_the_stable_log() {
    let x = TorusWithHair::default_system();
    let cands = sample_near(&x, x.q(), 1e-2, 512, 5).unwrap();
    let rows = exponent_sequence(&x, x.q(), 1e-2, 10, true, &cands).unwrap();
    let (_, last_sup, _) = *rows.last().unwrap();
    assert!((last_sup + log_lu()).abs() < 1e-9, "got {last_sup}");
}

#[test]
fn rotation_report_vanishes() {
    let rot = IrrationalRotation::golden();
    let rep = point_exponents(&rot, Point::circle(0.9), &EstimatorParams::default()).unwrap();
    for v in [rep.sup_plus, rep.inf_plus, rep.sup_minus, rep.inf_minus] {
        assert!(v.abs() <= 1e-9, "exponent {v} should vanish");
    }
    assert!(rep.converged);
}

#[test]
fn toral_report_recovers_both_eigen_logs() {
    let sys = adapted_cat();
    let rep = point_exponents(&sys, Point::torus(0.3, 0.4), &EstimatorParams::default()).unwrap();
    assert!((rep.sup_plus - log_lu()).abs() < 1e-6);
    assert!((rep.inf_plus + log_lu()).abs() < 1e-6);
    assert!((rep.sup_minus - log_lu()).abs() < 1e-6);
    assert!((rep.inf_minus + log_lu()).abs() < 1e-6);
    assert!(rep.converged);
    for run in &rep.per_delta {
        assert!(run.sup_plus >= run.inf_plus);
    }
}

#[test]
fn apex_report_is_uniformly_contracting_forward() {
    let x = TorusWithHair::default_system();
    let rep = point_exponents(&x, x.q(), &EstimatorParams::default()).unwrap();
    assert!((rep.sup_plus + log_lu()).abs() < 1e-6);
    assert!((rep.inf_plus + log_lu()).abs() < 1e-6);
    assert!(rep.sup_plus < 0.0);
    assert!(rep.converged);
}

#[test]
fn mirrored_identity_rotation() {
    let rot = IrrationalRotation::golden();
    let x = Point::circle(1.7);
    let cands = sample_near(&rot, x, 1e-3, 128, 4).unwrap();
    let r = mirrored_duality_check(&rot, x, 1e-3, 3, &cands).unwrap();
    assert_eq!(r, 0.0);
}

#[test]
fn mirrored_identity_toral() {
    let sys = adapted_cat();
    let x = Point::torus(0.3, 0.4);
    let cands = sample_near(&sys, x, 1e-3, 256, 4).unwrap();
    let r = mirrored_duality_check(&sys, x, 1e-3, 3, &cands).unwrap();
    assert!(r <= 1e-9, "residual {r}");
}

#[test]
fn mirrored_identity_apex() {
    let x = TorusWithHair::default_system();
    let cands = sample_near(&x, x.q(), 1e-3, 256, 4).unwrap();
    let r = mirrored_duality_check(&x, x.q(), 1e-3, 4, &cands).unwrap();
    assert!(r <= 1e-9, "residual {r}");
}

#[test]
fn lipschitz_bound_holds_for_toral_eigen_metric() {
    let sys = adapted_cat();
    let lu = sys.automorphism.lambda_u;
    let worst = lipschitz_bound_check(&sys, Point::torus(0.3, 0.4), 1e-2, 10, lu, 256, 5).unwrap();
    // equality is attained at eigen probes; allow rounding at the 1e-12 level
    assert!(worst <= 1e-12, "worst excess {worst}");
    assert!(worst > -1e-9, "the bound should be tight on eigen probes");
}

#[test]
fn lipschitz_bound_holds_for_rotation() {
    let rot = IrrationalRotation::golden();
    let worst =
        lipschitz_bound_check(&rot, Point::circle(0.5), 1e-2, 10, 1.0 + 1e-9, 128, 5).unwrap();
    assert!(worst <= 0.0);
}

#[test]
fn lipschitz_bound_holds_for_north_south_with_grid_constant() {
    let ns = NorthSouthCircle::new(2.0);
    // grid maximum of |f'|; the grid includes the repelling point where the
    // supremum mu is attained
    let k = (0..1000)
        .map(|i| ns.derivative(-PI + i as f64 * std::f64::consts::TAU / 1000.0))
        .fold(0.0f64, f64::max);
    assert!((k - 2.0).abs() < 1e-12);
    let worst = lipschitz_bound_check(&ns, Point::circle(0.8), 1e-2, 10, k, 256, 5).unwrap();
    assert!(worst <= 1e-12, "worst excess {worst}");
}

#[test]
fn csv_export_has_the_agreed_header() {
    let rot = IrrationalRotation::golden();
    let rep = point_exponents(&rot, Point::circle(0.9), &EstimatorParams::default()).unwrap();
    let csv = rep.csv();
    assert!(csv.starts_with("system,point,delta,n,A_hat,a_hat,logA_over_n,loga_over_n\n"));
    // one row per (delta, n) with n covering both directions
    let rows = csv.lines().count() - 1;
    assert_eq!(rows, rep.per_delta.len() * 2 * 10);
}

#[test]
fn report_serializes_with_agreed_field_names() {
    let rot = IrrationalRotation::golden();
    let rep = point_exponents(&rot, Point::circle(0.9), &EstimatorParams::default()).unwrap();
    let json = serde_json::to_value(&rep).unwrap();
    for key in ["Lambda_plus", "lambda_plus", "Lambda_minus", "lambda_minus"] {
        assert!(json.get(key).is_some(), "missing field {key}");
    }
    let row = &json["per_delta"][0]["forward"][0];
    for key in ["A_hat", "a_hat", "logA_over_n", "loga_over_n"] {
        assert!(row.get(key).is_some(), "missing row field {key}");
    }
}
