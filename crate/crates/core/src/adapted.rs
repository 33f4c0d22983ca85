//! Adapted hyperbolic metrics: the exact eigen-coordinate metric for linear
//! toral systems, a constructive expansivity-time pseudometric with chain
//! metrization for generic systems, and an empirical verifier for the
//! hyperbolic inequality `max{d(fx,fy), d(f⁻¹x,f⁻¹y)} >= min{k d(x,y), eps0}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{displace_to_distance, iterate, Dynamics, Point};
use crate::systems::toral::ToralAutomorphism;

pub const CLOUD_LIMIT: usize = 5000;

/// How an adapted metric is realized.
#[derive(Debug, Clone)]
pub enum AdaptedMetricSpec {
    /// Exact eigen-coordinate metric; only attaches to toral automorphisms.
    EigenExact { k: f64, eps0: f64 },
    /// Finite-cloud approximation via expansivity times and chain metrization.
    ExpansivityChain {
        k: f64,
        eps0: f64,
        expansivity_c: f64,
        horizon: u32,
        cloud_size: usize,
    },
}

/// Eigen-coordinate adapted distance on the torus.
pub fn eigen_adapted_distance(auto: &ToralAutomorphism, p: Point, q: Point) -> f64 {
    auto.eigen_distance(p, q)
}

/// Result of `expansivity_time`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpansivityTime {
    /// Already farther than `c` at time 0.
    Separated,
    /// Largest `n` with `dist(f^j p, f^j q) <= c` for all `|j| <= n`.
    Finite(u32),
    /// The bound held up to the horizon; the pair never separated.
    Infinite,
}

/// Largest `n` in `[0, n_max]` such that the orbits of `p` and `q` stay within
/// `c` of each other for all `|j| <= n`; `Infinite` if they never separate
/// within the horizon. Symmetric in `(p, q)` and non-increasing in `c`.
pub fn expansivity_time(
    system: &dyn Dynamics,
    p: Point,
    q: Point,
    c: f64,
    n_max: u32,
) -> ExpansivityTime {
    assert!(c > 0.0 && n_max >= 1);
    if system.distance(p, q) > c {
        return ExpansivityTime::Separated;
    }
    let (mut pf, mut qf) = (p, q);
    let (mut pb, mut qb) = (p, q);
    for n in 1..=n_max {
        pf = system.forward(pf);
        qf = system.forward(qf);
        pb = system.backward(pb);
        qb = system.backward(qb);
        if system.distance(pf, qf) > c || system.distance(pb, qb) > c {
            return ExpansivityTime::Finite(n - 1);
        }
    }
    ExpansivityTime::Infinite
}

/// Shortest-path (Frink chain) metrization of a symmetric pseudometric `d0` on
/// a finite cloud. The result is at most `d0` entrywise and satisfies the
/// triangle inequality exactly by construction.
pub fn chain_metric(cloud_size: usize, d0: &dyn Fn(usize, usize) -> f64) -> Result<Vec<Vec<f64>>> {
    if cloud_size > CLOUD_LIMIT {
        return Err(Error::CloudTooLarge(cloud_size, CLOUD_LIMIT));
    }
    let mut d: Vec<Vec<f64>> = (0..cloud_size)
        .map(|i| (0..cloud_size).map(|j| if i == j { 0.0 } else { d0(i, j) }).collect())
        .collect();
    // Floyd-Warshall relaxation over the complete graph.
    for k in 0..cloud_size {
        for i in 0..cloud_size {
            let dik = d[i][k];
            for j in 0..cloud_size {
                let via = dik + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    Ok(d)
}

/// The expansivity-time pseudometric `D(p, q) = k^{-time}` backing the chain
/// construction. Pairs that never separate get `D = 0` (an expansiveness
/// failure for distinct points); already-separated pairs get `D = k`.
pub fn expansivity_pseudometric(
    system: &dyn Dynamics,
    p: Point,
    q: Point,
    c: f64,
    k: f64,
    n_max: u32,
) -> f64 {
    match expansivity_time(system, p, q, c, n_max) {
        ExpansivityTime::Separated => k,
        ExpansivityTime::Finite(n) => k.powi(-(n as i32)),
        ExpansivityTime::Infinite => 0.0,
    }
}

/// Empirical check of the hyperbolic inequality for a system's metric.
#[derive(Debug, Clone, Serialize)]
pub struct HyperbolicityReport {
    pub pairs: usize,
    pub violations: usize,
    /// Largest expansion factor that held on every near pair
    /// (min over near pairs of `max{d(fx,fy), d(f⁻¹x,f⁻¹y)} / d(x,y)`).
    pub empirical_k: f64,
    /// Max observed one-step distortion (the constant of Lipschitz-type
    /// distortion bounds).
    #[serde(rename = "lipschitz_K")]
    pub lipschitz_k: f64,
    pub epsilon0: f64,
}

/// Sample `n_pairs` pairs (half far, half near with distinguished-direction
/// probes) and test `max{d(fx,fy), d(f⁻¹x,f⁻¹y)} >= min{k d(x,y), eps0}` on
/// each. `empirical_k` is measured on the near pairs only, where the `k d`
/// branch of the min is active.
pub fn verify_hyperbolic_inequality(
    system: &dyn Dynamics,
    k: f64,
    eps0: f64,
    n_pairs: usize,
    seed: u64,
) -> HyperbolicityReport {
    assert!(n_pairs >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let near_radius = eps0 / (2.0 * k.max(1.0));
    let mut pairs = Vec::with_capacity(n_pairs);
    while pairs.len() < n_pairs {
        let x = system.random_point(&mut rng);
        if pairs.len() < n_pairs / 2 {
            let y = system.random_point(&mut rng);
            if system.distance(x, y) > 0.0 {
                pairs.push((x, y, false));
            }
        } else {
            for y in near_probes(system, x, near_radius, &mut rng) {
                if pairs.len() >= n_pairs {
                    break;
                }
                pairs.push((x, y, true));
            }
        }
    }

    let mut violations = 0usize;
    let mut empirical_k = f64::INFINITY;
    let mut lipschitz_k: f64 = 0.0;
    for &(x, y, near) in &pairs {
        let d = system.distance(x, y);
        let df = one_step_distance(system, x, y, 1);
        let db = one_step_distance(system, x, y, -1);
        let max_side = df.max(db);
        if max_side + 1e-12 < (k * d).min(eps0) {
            violations += 1;
        }
        if near {
            empirical_k = empirical_k.min(max_side / d);
        }
        lipschitz_k = lipschitz_k.max(df / d).max(db / d);
    }
    HyperbolicityReport {
        pairs: pairs.len(),
        violations,
        empirical_k,
        lipschitz_k,
        epsilon0: eps0,
    }
}

fn one_step_distance(system: &dyn Dynamics, x: Point, y: Point, n: i64) -> f64 {
    system.orbit_pair_distance(x, y, n).unwrap_or_else(|| {
        system.distance(iterate(system, x, n), iterate(system, y, n))
    })
}

/// Probe pairs around `x`: one random and all distinguished directions, each at
/// a few log-spaced radii. Radii are floored at 1e-4 so one-step distance
/// ratios keep roughly ten significant digits even without a closed form.
fn near_probes(
    system: &dyn Dynamics,
    x: Point,
    near_radius: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Point> {
    let r_lo = 1e-4f64.min(near_radius / 2.0);
    let mut dirs = system.distinguished_directions(x);
    dirs.push(system.random_direction(x, rng));
    let mut out = Vec::new();
    for dir in dirs {
        for i in 0..3 {
            let r = r_lo * (near_radius / r_lo).powf(i as f64 / 2.0);
            if let Some(y) = displace_to_distance(system, x, dir, r, near_radius) {
                out.push(y);
            }
        }
    }
    out
}

/// Max one-step distortion of `f` and `f⁻¹` over sampled near pairs, seeded by
/// distinguished-direction probes so linear suprema are attained exactly.
pub fn measure_lipschitz(system: &dyn Dynamics, n_points: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k: f64 = 0.0;
    for _ in 0..n_points {
        let x = system.random_point(&mut rng);
        for y in near_probes(system, x, 1e-2, &mut rng) {
            let d = system.distance(x, y);
            if d <= 0.0 {
                continue;
            }
            let df = one_step_distance(system, x, y, 1);
            let db = one_step_distance(system, x, y, -1);
            k = k.max(df / d).max(db / d);
        }
    }
    k
}

/// Convenience: orbit-pair diagnostic used by tests; checks that the orbit of
/// a pair stays within `c` out to `n`.
pub fn stays_within(system: &dyn Dynamics, p: Point, q: Point, c: f64, n: i64) -> bool {
    let lo = n.min(0);
    let hi = n.max(0);
    (lo..=hi).all(|j| system.distance(iterate(system, p, j), iterate(system, q, j)) <= c)
}
