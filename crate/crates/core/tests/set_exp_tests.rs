//! Invariant-set exponents: distance-to-set distortion, subadditivity,
//! classification and the empirical basin verifier.

use lyapunov_core::point_exp::EstimatorParams;
use lyapunov_core::set_exp::*;
use lyapunov_core::space::*;
use lyapunov_core::systems::*;

const PI: f64 = std::f64::consts::PI;

fn log_lu() -> f64 {
    ((7.0 + 3.0 * 5f64.sqrt()) / 2.0).ln()
}

fn apex_set(x: &TorusWithHair) -> InvariantSet {
    InvariantSet::finite("apex", vec![x.q()])
}

fn sink_set() -> InvariantSet {
    InvariantSet::finite("sink", vec![Point::circle(PI)])
}

fn source_set() -> InvariantSet {
    InvariantSet::finite("source", vec![Point::circle(0.0)])
}

#[test]
fn dist_to_set_vanishes_on_members() {
    let ns = NorthSouthCircle::new(2.0);
    let k = InvariantSet::finite("pair", vec![Point::circle(0.0), Point::circle(PI)]);
    assert_eq!(dist_to_set(&ns, &k, Point::circle(0.0)), 0.0);
    assert_eq!(dist_to_set(&ns, &k, Point::circle(PI)), 0.0);
}

#[test]
fn dist_to_singleton_is_plain_distance() {
    let ns = NorthSouthCircle::new(2.0);
    let k = sink_set();
    let d = dist_to_set(&ns, &k, Point::circle(PI + 0.3));
    assert!((d - 0.3).abs() < 1e-12);
}

#[test]
fn dist_to_torus_fiber_is_the_height() {
    let x = TorusWithHair::default_system();
    let k = InvariantSet::whole_torus(&x);
    for &t in &[0.0, 0.5, -2.0, 40.0] {
        let d = dist_to_set(&x, &k, Point::hair(t));
        assert!((d - x.epsilon / (t * t + 1.0)).abs() < 1e-15);
        // the infimum is realized by the shadow point on the fiber
        let shadow = x.shadow(Point::hair(t));
        let realized = x.distance(Point::hair(t), Point::torus(shadow.0, shadow.1));
        assert!((realized - d).abs() < 1e-12);
    }
    assert_eq!(dist_to_set(&x, &k, Point::torus(0.3, 0.8)), 0.0);
}

#[test]
fn built_in_sets_are_invariant() {
    let x = TorusWithHair::default_system();
    let ns = NorthSouthCircle::new(2.0);
    assert!(check_invariance(&x, &apex_set(&x), 1e-10));
    assert!(check_invariance(&x, &InvariantSet::whole_torus(&x), 1e-10));
    assert!(check_invariance(&ns, &sink_set(), 1e-10));
    assert!(check_invariance(&ns, &source_set(), 1e-10));
    // a two-point set swapped by a half-turn rotation
    let half = IrrationalRotation::new(PI);
    let pair = InvariantSet::finite("pair", vec![Point::circle(0.0), Point::circle(PI)]);
    assert!(check_invariance(&half, &pair, 1e-10));
}

#[test]
fn set_filter_excludes_the_set_itself() {
    let ns = NorthSouthCircle::new(2.0);
    let k = sink_set();
    let kept = set_bowen_filter(&ns, &k, 0.1, 3, &[Point::circle(PI), Point::circle(PI + 0.05)]);
    assert_eq!(kept.len(), 1);
}

#[test]
fn sink_neighborhood_survives_forever() {
    let ns = NorthSouthCircle::new(2.0);
    let k = sink_set();
    let cands = sample_near_set(&ns, &k, 0.1, 64, 3, 0).unwrap();
    assert!(!cands.is_empty());
    for n in [1i64, 5, 20] {
        let kept = set_bowen_filter(&ns, &k, 0.1, n, &cands);
        assert_eq!(kept.len(), cands.len(), "contraction must keep all candidates");
    }
}

#[test]
fn fiber_survival_follows_the_height_recurrence() {
    let x = TorusWithHair::default_system();
    let k = InvariantSet::whole_torus(&x);
    let delta = 1e-2;
    let lam2 = x.base.lambda_s * x.base.lambda_s;
    // heights double-contract backward along the hair; forward they expand by
    // 1/lambda_s^2, so survival to n = 3 needs h <= delta * lambda_s^6
    let surviving_h = 0.9 * delta * lam2.powi(3);
    let dying_h = 1.1 * delta * lam2.powi(3);
    let t_of = |h: f64| (x.epsilon / h - 1.0).sqrt();
    let survivor = Point::hair(t_of(surviving_h));
    let escaper = Point::hair(t_of(dying_h));
    assert_eq!(set_bowen_filter(&x, &k, delta, 3, &[survivor, escaper]).len(), 1);
    assert_eq!(set_bowen_filter(&x, &k, delta, 2, &[escaper]).len(), 1);
}

#[test]
fn sink_distortion_is_the_fixed_point_derivative() {
    let ns = NorthSouthCircle::new(2.0);
    let k = sink_set();
    let cands = sample_near_set(&ns, &k, 1e-3, 128, 3, 0).unwrap();
    let (sup, inf) = set_distortion(&ns, &k, 1e-3, 1, &cands).unwrap();
    assert!((sup - 0.5).abs() < 1e-4, "sup {sup}");
    assert!((inf - 0.5).abs() < 1e-4, "inf {inf}");
    assert!(inf <= sup);
}

#[test]
fn fiber_distortion_is_the_squared_unstable_rate() {
    let x = TorusWithHair::default_system();
    let k = InvariantSet::whole_torus(&x);
    let cands = sample_near_set(&x, &k, 1e-3, 256, 3, 2).unwrap();
    let (sup, _) = set_distortion(&x, &k, 1e-3, 1, &cands).unwrap();
    let lu2 = (x.base.lambda_u) * (x.base.lambda_u);
    assert!((lu2 - 46.98).abs() < 0.01);
    assert!((sup - lu2).abs() < 0.1, "sup {sup}");
}

#[test]
fn isometry_set_distortion_is_one() {
    let half = IrrationalRotation::new(PI);
    let k = InvariantSet::finite("pair", vec![Point::circle(0.0), Point::circle(PI)]);
    let cands = sample_near_set(&half, &k, 1e-2, 64, 9, 0).unwrap();
    for n in [1i64, 4, -4] {
        let (sup, inf) = set_distortion(&half, &k, 1e-2, n, &cands).unwrap();
        assert_eq!(sup, 1.0);
        assert_eq!(inf, 1.0);
    }
}

#[test]
fn isometry_subadditivity_residual_is_zero() {
    let half = IrrationalRotation::new(PI);
    let k = InvariantSet::finite("pair", vec![Point::circle(0.0), Point::circle(PI)]);
    let cands = sample_near_set(&half, &k, 1e-2, 64, 9, 0).unwrap();
    let r = subadditivity_check(&half, &k, 1e-2, &[(1, 1), (2, 3)], &cands).unwrap();
    assert_eq!(r, 0.0);
}

#[test]
fn sink_subadditivity_residual_is_tiny() {
    let ns = NorthSouthCircle::new(2.0);
    let k = sink_set();
    let cands = sample_near_set(&ns, &k, 1e-2, 256, 3, 5).unwrap();
    let r = subadditivity_check(&ns, &k, 1e-2, &[(2, 3)], &cands).unwrap();
    assert!(r <= 1e-9, "residual {r}");
}

#[test]
fn fiber_subadditivity_residual_is_tiny() {
    let x = TorusWithHair::default_system();
    let k = InvariantSet::whole_torus(&x);
    let cands = sample_near_set(&x, &k, 1e-2, 256, 3, 5).unwrap();
    let r = subadditivity_check(&x, &k, 1e-2, &[(1, 2)], &cands).unwrap();
    assert!(r <= 1e-9, "residual {r}");
}

#[test]
fn apex_set_exponents_match_the_stable_log() {
    let x = TorusWithHair::default_system();
    let rep = set_exponents(&x, &apex_set(&x), &EstimatorParams::default()).unwrap();
    assert!((rep.sup_plus + log_lu()).abs() < 0.02, "Lambda_plus {}", rep.sup_plus);
    assert!(rep.sup_plus < 0.0);
    assert!(rep.converged);
    assert!(rep.subadditivity_residual <= 1e-9);
}

#[test]
fn fiber_set_exponents_match_the_height_recurrence() {
    let x = TorusWithHair::default_system();
    let rep = set_exponents(&x, &InvariantSet::whole_torus(&x), &EstimatorParams::default())
        .unwrap();
    let two_log = 2.0 * log_lu();
    assert!((rep.sup_plus - two_log).abs() < 0.1, "Lambda_plus {}", rep.sup_plus);
    assert!((rep.sup_minus + two_log).abs() < 0.1, "Lambda_minus {}", rep.sup_minus);
    assert!(rep.subadditivity_residual <= 1e-9);
    for run in &rep.per_delta {
        for row in run.forward.iter().chain(run.backward.iter()) {
            assert!(row.inf <= row.sup);
        }
    }
}

#[test]
fn sink_set_exponents_match_the_derivative_log() {
    let ns = NorthSouthCircle::new(2.0);
    let rep = set_exponents(&ns, &sink_set(), &EstimatorParams::default()).unwrap();
    assert!((rep.sup_plus + 2f64.ln()).abs() < 0.02, "Lambda_plus {}", rep.sup_plus);
}

#[test]
fn duality_residuals_stay_small_on_all_built_in_sets() {
    let x = TorusWithHair::default_system();
    let ns = NorthSouthCircle::new(2.0);
    let params = EstimatorParams {
        n_max: 8,
        ..EstimatorParams::default()
    };
    let cases: Vec<(&dyn Dynamics, InvariantSet)> = vec![
        (&x, apex_set(&x)),
        (&x, InvariantSet::whole_torus(&x)),
        (&ns, sink_set()),
        (&ns, source_set()),
    ];
    for (sys, k) in cases {
        let rep = set_exponents(sys, &k, &params).unwrap();
        let run = rep.per_delta.last().unwrap();
        assert!(
            run.duality_residual_sup <= 0.05 && run.duality_residual_inf <= 0.05,
            "{}/{}: residuals {} {}",
            rep.system,
            rep.set,
            run.duality_residual_sup,
            run.duality_residual_inf
        );
    }
}

#[test]
fn apex_is_an_attractor() {
    let x = TorusWithHair::default_system();
    let k = apex_set(&x);
    let rep = set_exponents(&x, &k, &EstimatorParams::default()).unwrap();
    let c = classify(&x, &k, &rep, 0.1, &BasinParams::default()).unwrap();
    assert_eq!(c.label, Label::Attractor);
    assert!(c.basin_fraction >= 0.99);
    // backward orbits expand away from the apex, so the literal
    // "lambda_minus > 0" reading agrees here
    assert!(c.lambda_minus_positive);
}

#[test]
fn torus_fiber_is_a_repeller() {
    let x = TorusWithHair::default_system();
    let k = InvariantSet::whole_torus(&x);
    let rep = set_exponents(&x, &k, &EstimatorParams::default()).unwrap();
    let c = classify(&x, &k, &rep, 0.1, &BasinParams::default()).unwrap();
    assert_eq!(c.label, Label::Repeller);
    assert!(c.basin_fraction >= 0.99);
    // the backward exponents are negative here even though the set is a
    // repeller, so the label cannot come from "lambda_minus > 0"
    assert!(!c.lambda_minus_positive);
}

#[test]
fn circle_source_is_a_repeller() {
    let ns = NorthSouthCircle::new(2.0);
    let k = source_set();
    let rep = set_exponents(&ns, &k, &EstimatorParams::default()).unwrap();
    assert!((rep.sup_minus + 2f64.ln()).abs() < 0.02);
    let c = classify(&ns, &k, &rep, 0.1, &BasinParams::default()).unwrap();
    assert_eq!(c.label, Label::Repeller);
    assert!(c.basin_fraction >= 0.99);
    assert!(!c.lambda_minus_positive);
}

#[test]
fn sink_basin_fills_up() {
    let ns = NorthSouthCircle::new(2.0);
    let f = empirical_basin_check(&ns, &sink_set(), &BasinParams::default(), false).unwrap();
    assert_eq!(f, 1.0);
}

#[test]
fn apex_basin_fills_up() {
    let x = TorusWithHair::default_system();
    let f = empirical_basin_check(&x, &apex_set(&x), &BasinParams::default(), false).unwrap();
    assert_eq!(f, 1.0);
}

#[test]
fn source_repels_forward_probes() {
    let ns = NorthSouthCircle::new(2.0);
    let f = empirical_basin_check(&ns, &source_set(), &BasinParams::default(), false).unwrap();
    assert_eq!(f, 0.0);
}

#[test]
fn set_csv_export_has_the_agreed_header() {
    let ns = NorthSouthCircle::new(2.0);
    let rep = set_exponents(&ns, &sink_set(), &EstimatorParams::default()).unwrap();
    assert!(rep.csv().starts_with("system,set,delta,n,A_hat,a_hat\n"));
}

#[test]
fn classification_serializes_with_agreed_field_names() {
    let ns = NorthSouthCircle::new(2.0);
    let k = sink_set();
    let rep = set_exponents(&ns, &k, &EstimatorParams::default()).unwrap();
    let c = classify(&ns, &k, &rep, 0.1, &BasinParams::default()).unwrap();
    let json = serde_json::to_value(&c).unwrap();
    for key in [
        "label",
        "Lambda_plus",
        "lambda_plus",
        "Lambda_minus",
        "lambda_minus",
        "basin_fraction",
        "margin",
    ] {
        assert!(json.get(key).is_some(), "missing field {key}");
    }
}
