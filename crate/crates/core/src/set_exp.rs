//! Exponents of compact invariant sets: distortion of distance-to-set under
//! iteration, subadditive limits, sup/inf duality, attractor/repeller
//! classification, and an empirical basin verifier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::point_exp::{EstimatorParams, SeqRow, CONVERGENCE_OSC};
use crate::space::{iterate, sample_near, Dynamics, Point};
use crate::systems::TorusWithHair;

/// A compact f-invariant set with an exact distance oracle.
#[derive(Debug, Clone)]
pub struct InvariantSet {
    pub name: String,
    pub kind: SetKind,
}

#[derive(Debug, Clone)]
pub enum SetKind {
    FinitePoints(Vec<Point>),
    /// The torus fiber inside the torus-with-hair space X; the distance from a
    /// hair point to it is exactly the height coordinate.
    WholeTorusInX { epsilon: f64, lambda_s: f64 },
}

impl InvariantSet {
    pub fn finite(name: impl Into<String>, points: Vec<Point>) -> InvariantSet {
        assert!(!points.is_empty());
        InvariantSet {
            name: name.into(),
            kind: SetKind::FinitePoints(points),
        }
    }

    pub fn whole_torus(space: &TorusWithHair) -> InvariantSet {
        InvariantSet {
            name: "whole_torus".into(),
            kind: SetKind::WholeTorusInX {
                epsilon: space.epsilon,
                lambda_s: space.base.lambda_s,
            },
        }
    }
}

/// Exact distance from `x` to the set.
pub fn dist_to_set(system: &dyn Dynamics, set: &InvariantSet, x: Point) -> f64 {
    match &set.kind {
        SetKind::FinitePoints(pts) => pts
            .iter()
            .map(|&p| system.distance(x, p))
            .fold(f64::INFINITY, f64::min),
        SetKind::WholeTorusInX { epsilon, .. } => match x {
            Point::Torus2 { .. } => 0.0,
            Point::Hair { t } => epsilon / (t * t + 1.0),
            Point::Circle { .. } => panic!("circle point in torus-with-hair space"),
        },
    }
}

/// Forward invariance check for finite sets: `f` must permute the points.
pub fn check_invariance(system: &dyn Dynamics, set: &InvariantSet, tol: f64) -> bool {
    match &set.kind {
        SetKind::FinitePoints(pts) => pts.iter().all(|&p| {
            let fp = system.forward(p);
            pts.iter().any(|&q| fp.approx_eq(&q, tol))
        }),
        // Structural: the torus fiber is invariant by construction.
        SetKind::WholeTorusInX { .. } => true,
    }
}

/// Deterministic candidates within `delta` of the set, excluding the set
/// itself. `depth` widens the sampled range toward the set so that forward
/// Bowen survivors exist out to `n = depth` even when distances to the set
/// expand at the squared stable rate.
pub fn sample_near_set(
    system: &dyn Dynamics,
    set: &InvariantSet,
    delta: f64,
    count: usize,
    seed: u64,
    depth: u32,
) -> Result<Vec<Point>> {
    if delta <= 0.0 {
        return Err(Error::InvalidRadius(delta));
    }
    match &set.kind {
        SetKind::FinitePoints(pts) => {
            let per = count.div_ceil(pts.len());
            let mut out = Vec::new();
            for (i, &p) in pts.iter().enumerate() {
                let ys = sample_near(system, p, delta, per, seed.wrapping_add(i as u64))?;
                out.extend(
                    ys.into_iter()
                        .filter(|&y| dist_to_set(system, set, y) > 0.0),
                );
            }
            Ok(out)
        }
        SetKind::WholeTorusInX { epsilon, lambda_s } => {
            // Heights log-uniform over [delta * lambda_s^(2 depth) / 2, delta];
            // the distance oracle never touches the torus shadow, so the very
            // large |t| values this produces stay numerically exact.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h_hi = delta.min(*epsilon * 0.999);
            let h_lo = h_hi * lambda_s.powi(2 * depth as i32) * 0.5;
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let h = h_lo * (h_hi / h_lo).powf(rng.gen::<f64>());
                let t = (epsilon / h - 1.0).max(0.0).sqrt();
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                out.push(Point::Hair { t: sign * t });
            }
            Ok(out)
        }
    }
}

/// Survivors whose orbit stays within `delta` of the set for all `j` between
/// 0 and `n`.
pub fn set_bowen_filter(
    system: &dyn Dynamics,
    set: &InvariantSet,
    delta: f64,
    n: i64,
    candidates: &[Point],
) -> Vec<Point> {
    assert!(delta > 0.0);
    let tol = delta * (1.0 + 1e-12);
    let lo = n.min(0);
    let hi = n.max(0);
    candidates
        .iter()
        .copied()
        .filter(|&y| {
            if dist_to_set(system, set, y) <= 0.0 {
                return false;
            }
            (lo..=hi).all(|j| dist_to_set(system, set, iterate(system, y, j)) <= tol)
        })
        .collect()
}

/// Distance-to-set along a candidate orbit, cached once per run.
///
/// For finite sets, `f` permutes the set, so `dist(f^j y, K)` equals the min
/// over `p` in `K` of `dist(f^j y, f^j p)` and each pair can go through the
/// system's closed-form orbit-pair distance when one exists.
fn orbit_set_distances(
    system: &dyn Dynamics,
    set: &InvariantSet,
    y: Point,
    lo: i64,
    hi: i64,
) -> Vec<f64> {
    match &set.kind {
        SetKind::FinitePoints(pts) => {
            let y_orb = crate::space::orbit(system, y, lo, hi);
            let p_orbs: Vec<_> = pts
                .iter()
                .map(|&p| crate::space::orbit(system, p, lo, hi))
                .collect();
            (lo..=hi)
                .map(|j| {
                    p_orbs
                        .iter()
                        .map(|p_orb| crate::space::orbit_pair_dist(system, &y_orb, p_orb, j))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect()
        }
        SetKind::WholeTorusInX { .. } => {
            let orb = crate::space::orbit(system, y, lo, hi);
            (lo..=hi)
                .map(|j| dist_to_set(system, set, orb.at(j)))
                .collect()
        }
    }
}

/// Max and min of `dist(K, f^n y) / dist(K, y)` over the set-Bowen survivors.
pub fn set_distortion(
    system: &dyn Dynamics,
    set: &InvariantSet,
    delta: f64,
    n: i64,
    candidates: &[Point],
) -> Result<(f64, f64)> {
    assert!(n != 0);
    let tol = delta * (1.0 + 1e-12);
    let lo = n.min(0);
    let hi = n.max(0);
    let zero = (-lo) as usize;
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    let mut count = 0usize;
    for &y in candidates {
        let d = orbit_set_distances(system, set, y, lo, hi);
        if d[zero] <= 0.0 || d.iter().any(|&v| v > tol) {
            continue;
        }
        let r = d[(n - lo) as usize] / d[zero];
        sup = sup.max(r);
        inf = inf.min(r);
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyBowenSample { n });
    }
    Ok((sup, inf))
}

fn set_directional_rows(
    system: &dyn Dynamics,
    set: &InvariantSet,
    delta: f64,
    n_max: u32,
    forward: bool,
    candidates: &[Point],
) -> Result<Vec<SeqRow>> {
    let sign: i64 = if forward { 1 } else { -1 };
    let (lo, hi) = if forward {
        (0, n_max as i64)
    } else {
        (-(n_max as i64), 0)
    };
    let tol = delta * (1.0 + 1e-12);
    let zero = (-lo) as usize;
    let mut alive: Vec<Vec<f64>> = candidates
        .iter()
        .map(|&y| orbit_set_distances(system, set, y, lo, hi))
        .filter(|d| d[zero] > 0.0 && d[zero] <= tol)
        .collect();
    let mut rows = Vec::with_capacity(n_max as usize);
    for step in 1..=n_max as i64 {
        let j = sign * step;
        let idx = (j - lo) as usize;
        alive.retain(|d| d[idx] <= tol);
        if alive.is_empty() {
            return Err(Error::EmptyBowenSample { n: j });
        }
        let mut sup = f64::NEG_INFINITY;
        let mut inf = f64::INFINITY;
        for d in &alive {
            let r = d[idx] / d[zero];
            sup = sup.max(r);
            inf = inf.min(r);
        }
        rows.push(SeqRow {
            n: j,
            sup,
            inf,
            log_sup_over_n: sup.ln() / j as f64,
            log_inf_over_n: inf.ln() / j as f64,
        });
    }
    Ok(rows)
}

/// Max over the tested `(n, k)` pairs of
/// `log A(K, n+k) - log A(K, n) - log A(K, k)`, with the `k`-factor candidate
/// set augmented by the time-`n` images of the `(n+k)`-survivors so the
/// telescoping bound holds per candidate. Nonpositive up to a few ulps.
pub fn subadditivity_check(
    system: &dyn Dynamics,
    set: &InvariantSet,
    delta: f64,
    pairs: &[(u32, u32)],
    candidates: &[Point],
) -> Result<f64> {
    assert!(pairs.iter().all(|&(n, k)| n > 0 && k > 0));
    let n_tot = pairs.iter().map(|&(n, k)| n + k).max().unwrap() as i64;
    let tol = delta * (1.0 + 1e-12);
    let dists: Vec<Vec<f64>> = candidates
        .iter()
        .map(|&y| orbit_set_distances(system, set, y, 0, n_tot))
        .filter(|d| d[0] > 0.0 && d[0] <= tol)
        .collect();
    let survives = |d: &Vec<f64>, m: i64| (0..=m).all(|j| d[j as usize] <= tol);
    let sup_at = |m: i64| -> Option<f64> {
        dists
            .iter()
            .filter(|d| survives(d, m))
            .map(|d| d[m as usize] / d[0])
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    };
    let mut residual = f64::NEG_INFINITY;
    for &(n, k) in pairs {
        let (n, k) = (n as i64, k as i64);
        let a_nk = sup_at(n + k).ok_or(Error::EmptyBowenSample { n: n + k })?;
        let a_n = sup_at(n).ok_or(Error::EmptyBowenSample { n })?;
        // k-factor over S_k together with images f^n(S_{n+k}).
        let mut a_k = sup_at(k).ok_or(Error::EmptyBowenSample { n: k })?;
        for d in dists.iter().filter(|d| survives(d, n + k)) {
            a_k = a_k.max(d[(n + k) as usize] / d[n as usize]);
        }
        residual = residual.max(a_nk.ln() - a_n.ln() - a_k.ln());
    }
    Ok(residual)
}

/// Per-delta and extrapolated exponents of an invariant set.
#[derive(Debug, Clone, Serialize)]
pub struct SetExponentReport {
    pub system: String,
    pub set: String,
    pub per_delta: Vec<SetDeltaRun>,
    #[serde(rename = "Lambda_plus")]
    pub sup_plus: f64,
    #[serde(rename = "lambda_plus")]
    pub inf_plus: f64,
    #[serde(rename = "Lambda_minus")]
    pub sup_minus: f64,
    #[serde(rename = "lambda_minus")]
    pub inf_minus: f64,
    pub converged: bool,
    pub extrapolation_delta: f64,
    /// Max subadditivity defect over all `(n, k)` with `n + k <= min(8, n_max)`.
    pub subadditivity_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SetDeltaRun {
    pub delta: f64,
    pub forward: Vec<SeqRow>,
    pub backward: Vec<SeqRow>,
    #[serde(rename = "Lambda_plus_delta")]
    pub sup_plus: f64,
    #[serde(rename = "lambda_plus_delta")]
    pub inf_plus: f64,
    #[serde(rename = "Lambda_minus_delta")]
    pub sup_minus: f64,
    #[serde(rename = "lambda_minus_delta")]
    pub inf_minus: f64,
    pub converged_forward: bool,
    pub converged_backward: bool,
    pub duality_residual_sup: f64,
    pub duality_residual_inf: f64,
}

fn oscillation(values: &[f64]) -> f64 {
    let tail = &values[values.len().saturating_sub(3)..];
    tail.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

/// Full set-exponent report over the delta ladder.
pub fn set_exponents(
    system: &dyn Dynamics,
    set: &InvariantSet,
    params: &EstimatorParams,
) -> Result<SetExponentReport> {
    assert!(params.n_max >= 4);
    let mut per_delta = Vec::new();
    let mut subadd = f64::NEG_INFINITY;
    let sub_max = params.n_max.min(8);
    let sub_pairs: Vec<(u32, u32)> = (1..sub_max)
        .flat_map(|n| (1..sub_max).map(move |k| (n, k)))
        .filter(|&(n, k)| n + k <= sub_max)
        .collect();
    for (i, &delta) in params.delta_list.iter().enumerate() {
        let seed = params.seed.wrapping_add(i as u64);
        let candidates = sample_near_set(
            system,
            set,
            delta,
            params.candidates,
            seed,
            params.n_max,
        )?;
        let forward = set_directional_rows(system, set, delta, params.n_max, true, &candidates)?;
        let backward = set_directional_rows(system, set, delta, params.n_max, false, &candidates)?;
        subadd = subadd.max(subadditivity_check(
            system,
            set,
            delta,
            &sub_pairs,
            &candidates,
        )?);

        let sup_plus = forward.last().unwrap().log_sup_over_n;
        let inf_plus = forward.last().unwrap().log_inf_over_n;
        let sup_minus = -backward.last().unwrap().log_sup_over_n;
        let inf_minus = -backward.last().unwrap().log_inf_over_n;
        let f_sup: Vec<f64> = forward.iter().map(|r| r.log_sup_over_n).collect();
        let f_inf: Vec<f64> = forward.iter().map(|r| r.log_inf_over_n).collect();
        let b_sup: Vec<f64> = backward.iter().map(|r| r.log_sup_over_n).collect();
        let b_inf: Vec<f64> = backward.iter().map(|r| r.log_inf_over_n).collect();
        per_delta.push(SetDeltaRun {
            delta,
            sup_plus,
            inf_plus,
            sup_minus,
            inf_minus,
            converged_forward: oscillation(&f_sup) < CONVERGENCE_OSC
                && oscillation(&f_inf) < CONVERGENCE_OSC,
            converged_backward: oscillation(&b_sup) < CONVERGENCE_OSC
                && oscillation(&b_inf) < CONVERGENCE_OSC,
            duality_residual_sup: (sup_plus + inf_minus).abs(),
            duality_residual_inf: (inf_plus + sup_minus).abs(),
            forward,
            backward,
        });
    }
    let chosen = per_delta
        .iter()
        .rev()
        .find(|r| r.converged_forward && r.converged_backward)
        .unwrap_or_else(|| per_delta.last().unwrap());
    Ok(SetExponentReport {
        system: system.name(),
        set: set.name.clone(),
        sup_plus: chosen.sup_plus,
        inf_plus: chosen.inf_plus,
        sup_minus: chosen.sup_minus,
        inf_minus: chosen.inf_minus,
        converged: chosen.converged_forward && chosen.converged_backward,
        extrapolation_delta: chosen.delta,
        subadditivity_residual: subadd,
        per_delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    Attractor,
    Repeller,
    Neither,
    Inconclusive,
}

/// Classification of an invariant set with its evidence.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub label: Label,
    #[serde(rename = "Lambda_plus")]
    pub sup_plus: f64,
    #[serde(rename = "lambda_plus")]
    pub inf_plus: f64,
    #[serde(rename = "Lambda_minus")]
    pub sup_minus: f64,
    #[serde(rename = "lambda_minus")]
    pub inf_minus: f64,
    pub basin_fraction: f64,
    pub margin: f64,
    /// The literal published repeller hypothesis `lambda_minus > 0`; reported
    /// alongside the time-reversed criterion actually used (see `label`).
    pub lambda_minus_positive: bool,
}

/// Parameters of the empirical basin verifier.
#[derive(Debug, Clone)]
pub struct BasinParams {
    pub delta_start: f64,
    pub n_steps: u32,
    pub n_probes: usize,
    pub seed: u64,
}

impl Default for BasinParams {
    fn default() -> Self {
        BasinParams {
            delta_start: 0.1,
            n_steps: 64,
            n_probes: 256,
            seed: 7,
        }
    }
}

/// Fraction of probes started within `delta_start` of the set whose distance
/// to the set falls below `delta_start / 100` within `n_steps` (backward
/// iteration when `backward` is set).
pub fn empirical_basin_check(
    system: &dyn Dynamics,
    set: &InvariantSet,
    params: &BasinParams,
    backward: bool,
) -> Result<f64> {
    assert!(params.delta_start > 0.0);
    let target = params.delta_start / 100.0;
    // probes already at the target certify nothing; keep the ones that still
    // have to travel
    let probes: Vec<Point> = sample_near_set(
        system,
        set,
        params.delta_start,
        params.n_probes,
        params.seed,
        0,
    )?
    .into_iter()
    .filter(|&p| dist_to_set(system, set, p) > target)
    .collect();
    let mut converged = 0usize;
    for &p in &probes {
        let mut y = p;
        let mut ok = false;
        for _ in 0..params.n_steps {
            y = if backward {
                system.backward(y)
            } else {
                system.forward(y)
            };
            if dist_to_set(system, set, y) < target {
                ok = true;
                break;
            }
        }
        if ok {
            converged += 1;
        }
    }
    Ok(converged as f64 / probes.len() as f64)
}

/// Attractor/repeller classification from a computed report. The repeller
/// criterion is the attractor criterion applied to the inverse map
/// (`Lambda_minus < -margin`); the basin verifier runs in the matching time
/// direction and its result is attached as independent evidence.
pub fn classify(
    system: &dyn Dynamics,
    set: &InvariantSet,
    report: &SetExponentReport,
    margin: f64,
    basin: &BasinParams,
) -> Result<Classification> {
    assert!(margin > 0.0);
    let label = if !report.converged {
        Label::Inconclusive
    } else if report.sup_plus < -margin {
        Label::Attractor
    } else if report.sup_minus < -margin {
        Label::Repeller
    } else if report.sup_plus > margin && report.sup_minus > margin {
        Label::Neither
    } else {
        Label::Inconclusive
    };
    let basin_fraction = match label {
        Label::Attractor => empirical_basin_check(system, set, basin, false)?,
        Label::Repeller => empirical_basin_check(system, set, basin, true)?,
        _ => empirical_basin_check(system, set, basin, false)?,
    };
    Ok(Classification {
        label,
        sup_plus: report.sup_plus,
        inf_plus: report.inf_plus,
        sup_minus: report.sup_minus,
        inf_minus: report.inf_minus,
        basin_fraction,
        margin,
        lambda_minus_positive: report.inf_minus > 0.0,
    })
}

impl SetExponentReport {
    /// CSV rows, header `system,set,delta,n,A_hat,a_hat`.
    pub fn csv(&self) -> String {
        let mut out = String::from("system,set,delta,n,A_hat,a_hat\n");
        for run in &self.per_delta {
            for row in run.backward.iter().rev().chain(run.forward.iter()) {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    self.system, self.set, run.delta, row.n, row.sup, row.inf
                ));
            }
        }
        out
    }
}
