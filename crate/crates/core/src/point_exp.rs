//! Pointwise exponent estimation: Bowen-ball membership, the distortion
//! sup/inf `A(x, n)` and `a(x, n)`, normalized log-distortion sequences, the
//! per-delta and delta->0 exponent report, and the duality / Lipschitz-bound
//! diagnostics.
//!
//! All estimators reuse one set of cached orbit floats per run, so mirrored
//! identities (`a(x, n) = 1 / A(f^n(x), -n)` on mirrored candidate sets) hold
//! per candidate up to a few ulps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{orbit, orbit_pair_dist, sample_near, Dynamics, OrbitSegment, Point};

/// Oscillation bound on the last three normalized log-distortion values below
/// which a per-delta sequence is flagged as converged.
pub const CONVERGENCE_OSC: f64 = 0.05;

fn delta_tol(delta: f64) -> f64 {
    delta * (1.0 + 1e-12)
}

/// Candidates whose orbit stays within `delta` of `x`'s orbit for every `j`
/// between 0 and `n` inclusive (backward iterates when `n < 0`).
pub fn bowen_filter(
    system: &dyn Dynamics,
    x: Point,
    delta: f64,
    n: i64,
    candidates: &[Point],
) -> Vec<Point> {
    assert!(delta > 0.0);
    let lo = n.min(0);
    let hi = n.max(0);
    let x_orb = orbit(system, x, lo, hi);
    let tol = delta_tol(delta);
    candidates
        .iter()
        .copied()
        .filter(|&y| {
            let y_orb = orbit(system, y, lo, hi);
            (lo..=hi).all(|j| orbit_pair_dist(system, &x_orb, &y_orb, j) <= tol)
        })
        .collect()
}

/// Sampled values of the maximal and minimal distortion over a Bowen ball.
#[derive(Debug, Clone, Serialize)]
pub struct DistortionEstimate {
    /// Estimate of the sup of `dist(f^n x, f^n y) / dist(x, y)`.
    #[serde(rename = "A_hat")]
    pub sup: f64,
    /// Estimate of the inf.
    #[serde(rename = "a_hat")]
    pub inf: f64,
    pub witness_max: Point,
    pub witness_min: Point,
    pub in_ball_count: usize,
}

/// Survivor ratios at time `n`: `(candidate, numerator, denominator)`.
fn survivor_ratios(
    system: &dyn Dynamics,
    x: Point,
    delta: f64,
    n: i64,
    candidates: &[Point],
) -> Vec<(Point, f64, f64)> {
    let lo = n.min(0);
    let hi = n.max(0);
    let x_orb = orbit(system, x, lo, hi);
    let tol = delta_tol(delta);
    candidates
        .iter()
        .filter_map(|&y| {
            let y_orb = orbit(system, y, lo, hi);
            let ok = (lo..=hi).all(|j| orbit_pair_dist(system, &x_orb, &y_orb, j) <= tol);
            if !ok {
                return None;
            }
            let den = system.distance(x, y);
            if den <= 0.0 {
                return None;
            }
            let num = orbit_pair_dist(system, &x_orb, &y_orb, n);
            Some((y, num, den))
        })
        .collect()
}

/// Max and min distortion of `f^n` over the Bowen-ball survivors among
/// `candidates`, with witnesses.
pub fn distortion(
    system: &dyn Dynamics,
    x: Point,
    delta: f64,
    n: i64,
    candidates: &[Point],
) -> Result<DistortionEstimate> {
    assert!(n != 0, "distortion is defined for n != 0");
    let ratios = survivor_ratios(system, x, delta, n, candidates);
    if ratios.is_empty() {
        return Err(Error::EmptyBowenSample { n });
    }
    let mut est = DistortionEstimate {
        sup: f64::NEG_INFINITY,
        inf: f64::INFINITY,
        witness_max: ratios[0].0,
        witness_min: ratios[0].0,
        in_ball_count: ratios.len(),
    };
    for &(y, num, den) in &ratios {
        let r = num / den;
        if r > est.sup {
            est.sup = r;
            est.witness_max = y;
        }
        if r < est.inf {
            est.inf = r;
            est.witness_min = y;
        }
    }
    Ok(est)
}

/// One row of a normalized log-distortion sequence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeqRow {
    pub n: i64,
    #[serde(rename = "A_hat")]
    pub sup: f64,
    #[serde(rename = "a_hat")]
    pub inf: f64,
    #[serde(rename = "logA_over_n")]
    pub log_sup_over_n: f64,
    #[serde(rename = "loga_over_n")]
    pub log_inf_over_n: f64,
}

/// Nested directional run: candidate sets shrink as `|n|` grows (the `n+1`
/// filter is applied to `n`'s survivors), so Bowen-ball monotonicity in `n`
/// holds by construction. `forward = false` produces rows at `n = -1..-n_max`.
pub fn directional_rows(
    system: &dyn Dynamics,
    x: Point,
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
    let x_orb = orbit(system, x, lo, hi);
    let tol = delta_tol(delta);
    // (orbit, denominator) for candidates still inside the ball
    let mut alive: Vec<(OrbitSegment, f64)> = candidates
        .iter()
        .filter_map(|&y| {
            let den = system.distance(x, y);
            if den <= 0.0 || den > tol {
                return None;
            }
            Some((orbit(system, y, lo, hi), den))
        })
        .collect();
    let mut rows = Vec::with_capacity(n_max as usize);
    for step in 1..=n_max as i64 {
        let j = sign * step;
        alive.retain(|(y_orb, _)| orbit_pair_dist(system, &x_orb, y_orb, j) <= tol);
        if alive.is_empty() {
            return Err(Error::EmptyBowenSample { n: j });
        }
        let mut sup = f64::NEG_INFINITY;
        let mut inf = f64::INFINITY;
        for (y_orb, den) in &alive {
            let r = orbit_pair_dist(system, &x_orb, y_orb, j) / den;
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

/// Per-n normalized log distortions with nested candidate sets; `n_list` must
/// be `1..=n_max` ascending or `-1..=-n_max` descending in absolute value.
pub fn exponent_sequence(
    system: &dyn Dynamics,
    x: Point,
    delta: f64,
    n_max: u32,
    forward: bool,
    candidates: &[Point],
) -> Result<Vec<(i64, f64, f64)>> {
    Ok(directional_rows(system, x, delta, n_max, forward, candidates)?
        .into_iter()
        .map(|r| (r.n, r.log_sup_over_n, r.log_inf_over_n))
        .collect())
}

/// Estimator knobs shared by point and set reports.
#[derive(Debug, Clone)]
pub struct EstimatorParams {
    /// Strictly decreasing deltas; the report extrapolates to the smallest
    /// delta whose run converged.
    pub delta_list: Vec<f64>,
    pub n_max: u32,
    pub candidates: usize,
    pub seed: u64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            delta_list: vec![1e-1, 1e-2, 1e-3],
            n_max: 10,
            candidates: 4096,
            seed: 42,
        }
    }
}

/// Per-delta sequences and limits.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaRun {
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
    /// |Lambda_plus_delta + lambda_minus_delta|
    pub duality_residual_sup: f64,
    /// |lambda_plus_delta + Lambda_minus_delta|
    pub duality_residual_inf: f64,
}

/// Full pointwise exponent report.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub system: String,
    pub point: Point,
    pub per_delta: Vec<DeltaRun>,
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
}

fn oscillation(values: &[f64]) -> f64 {
    let tail = &values[values.len().saturating_sub(3)..];
    tail.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

fn run_delta(
    system: &dyn Dynamics,
    x: Point,
    delta: f64,
    n_max: u32,
    count: usize,
    seed: u64,
) -> Result<DeltaRun> {
    let candidates = sample_near(system, x, delta, count, seed)?;
    let forward = directional_rows(system, x, delta, n_max, true, &candidates)?;
    let backward = directional_rows(system, x, delta, n_max, false, &candidates)?;

    let sup_plus = forward.last().unwrap().log_sup_over_n;
    let inf_plus = forward.last().unwrap().log_inf_over_n;
    // Minus exponents carry the sign convention
    // `Lambda_minus = -(1/n) log A(x, n)` for `n -> -inf`.
    let sup_minus = -backward.last().unwrap().log_sup_over_n;
    let inf_minus = -backward.last().unwrap().log_inf_over_n;

    let f_sup: Vec<f64> = forward.iter().map(|r| r.log_sup_over_n).collect();
    let f_inf: Vec<f64> = forward.iter().map(|r| r.log_inf_over_n).collect();
    let b_sup: Vec<f64> = backward.iter().map(|r| r.log_sup_over_n).collect();
    let b_inf: Vec<f64> = backward.iter().map(|r| r.log_inf_over_n).collect();

    Ok(DeltaRun {
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
    })
}

/// Estimate all four exponents at `x` over the delta ladder.
pub fn point_exponents(
    system: &dyn Dynamics,
    x: Point,
    params: &EstimatorParams,
) -> Result<ExponentReport> {
    assert!(params.n_max >= 4, "n_max must be at least 4");
    assert!(
        params.delta_list.windows(2).all(|w| w[0] > w[1]),
        "delta_list must be strictly decreasing"
    );
    let mut per_delta = Vec::with_capacity(params.delta_list.len());
    for (i, &delta) in params.delta_list.iter().enumerate() {
        per_delta.push(run_delta(
            system,
            x,
            delta,
            params.n_max,
            params.candidates,
            params.seed.wrapping_add(i as u64),
        )?);
    }
    // Report the smallest delta whose run converged; fall back to the
    // smallest delta with converged = false.
    let chosen = per_delta
        .iter()
        .rev()
        .find(|r| r.converged_forward && r.converged_backward)
        .unwrap_or_else(|| per_delta.last().unwrap());
    Ok(ExponentReport {
        system: system.name(),
        point: x,
        sup_plus: chosen.sup_plus,
        inf_plus: chosen.inf_plus,
        sup_minus: chosen.sup_minus,
        inf_minus: chosen.inf_minus,
        converged: chosen.converged_forward && chosen.converged_backward,
        extrapolation_delta: chosen.delta,
        per_delta,
    })
}

/// Residual of the mirrored identity `a(x, n) * A(f^n(x), -n) = 1`, computed
/// on mirrored candidate sets sharing the same orbit floats.
pub fn mirrored_duality_check(
    system: &dyn Dynamics,
    x: Point,
    delta: f64,
    n: u32,
    candidates: &[Point],
) -> Result<f64> {
    assert!(n >= 1);
    let ratios = survivor_ratios(system, x, delta, n as i64, candidates);
    if ratios.is_empty() {
        return Err(Error::EmptyBowenSample { n: n as i64 });
    }
    // Forward inf over the survivors.
    let a_hat = ratios
        .iter()
        .map(|&(_, num, den)| num / den)
        .fold(f64::INFINITY, f64::min);
    // Mirrored sup at base f^n(x) with time -n over candidates f^n(C): each
    // ratio is the reciprocal, evaluated from the same distances.
    let mirrored_sup = ratios
        .iter()
        .map(|&(_, num, den)| den / num)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((a_hat * mirrored_sup - 1.0).abs())
}

/// Max over `|n| <= n_max` of `|log A(x, n)| - |n| log K`; nonpositive means
/// the pointwise integrability bound holds at `x` with Lipschitz constant `K`.
pub fn lipschitz_bound_check(
    system: &dyn Dynamics,
    x: Point,
    delta: f64,
    n_max: u32,
    k_lip: f64,
    count: usize,
    seed: u64,
) -> Result<f64> {
    let candidates = sample_near(system, x, delta, count, seed)?;
    let mut worst = f64::NEG_INFINITY;
    for dir in [true, false] {
        for row in directional_rows(system, x, delta, n_max, dir, &candidates)? {
            worst = worst.max(row.sup.ln().abs() - row.n.abs() as f64 * k_lip.ln());
        }
    }
    Ok(worst)
}

/// Short label for CSV rows.
pub fn point_label(p: Point) -> String {
    match p {
        Point::Torus2 { u, v } => format!("torus2({u};{v})"),
        Point::Hair { t } => format!("hair({t})"),
        Point::Circle { theta } => format!("circle({theta})"),
    }
}

impl ExponentReport {
    /// CSV rows, header `system,point,delta,n,A_hat,a_hat,logA_over_n,loga_over_n`.
    pub fn csv(&self) -> String {
        let mut out = String::from("system,point,delta,n,A_hat,a_hat,logA_over_n,loga_over_n\n");
        let label = point_label(self.point);
        for run in &self.per_delta {
            for row in run.backward.iter().rev().chain(run.forward.iter()) {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    self.system,
                    label,
                    run.delta,
                    row.n,
                    row.sup,
                    row.inf,
                    row.log_sup_over_n,
                    row.log_inf_over_n
                ));
            }
        }
        out
    }
}
