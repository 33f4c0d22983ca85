//! Metric-space and homeomorphism abstractions shared by every built-in system:
//! chart-tagged points, the `Dynamics` trait, orbit computation and the seeded
//! candidate sampler used by the distortion estimators.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate-reduction tolerance used by round-trip and orbit invariants.
pub const REDUCE_TOL: f64 = 1e-12;

/// Random candidate radii are drawn log-uniformly over `[radius * 1e-4, radius]`.
pub const SAMPLE_MIN_FRAC: f64 = 1e-4;

/// Distinguished-direction probes span nine decades below the sampling radius,
/// so a probe survives the Bowen filter out to `n ~ 9 ln(10) / ln(K)` steps.
pub const PROBE_MIN_FRAC: f64 = 1e-9;

/// Number of log-spaced probe radii per distinguished direction.
pub const PROBE_RADII: usize = 8;

/// Reduce a coordinate into `[0, 1)`.
pub fn reduce_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Reduce an angle into `[-pi, pi)`. The symmetric range keeps full relative
/// precision for small angles of either sign, which the circle fixed-point
/// estimators rely on.
pub fn reduce_angle(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let r = theta - two_pi * (theta / two_pi).round();
    if r >= std::f64::consts::PI {
        -std::f64::consts::PI
    } else {
        r
    }
}

/// A point in one of the three supported charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "snake_case")]
pub enum Point {
    /// Flat 2-torus, coordinates reduced into `[0, 1)^2`.
    Torus2 { u: f64, v: f64 },
    /// Point on the attached curve, parametrized by `t` (the dynamics is exact in `t`).
    Hair { t: f64 },
    /// Unit circle, angle reduced into `[-pi, pi)`.
    Circle { theta: f64 },
}

impl Point {
    pub fn torus(u: f64, v: f64) -> Point {
        Point::Torus2 {
            u: reduce_unit(u),
            v: reduce_unit(v),
        }
    }

    pub fn hair(t: f64) -> Point {
        debug_assert!(t.is_finite());
        Point::Hair { t }
    }

    pub fn circle(theta: f64) -> Point {
        Point::Circle {
            theta: reduce_angle(theta),
        }
    }

    /// Per-coordinate closeness, with torus coordinates compared modulo 1.
    pub fn approx_eq(&self, other: &Point, tol: f64) -> bool {
        match (self, other) {
            (Point::Torus2 { u: u1, v: v1 }, Point::Torus2 { u: u2, v: v2 }) => {
                circ_diff(*u1, *u2, 1.0) <= tol && circ_diff(*v1, *v2, 1.0) <= tol
            }
            (Point::Hair { t: t1 }, Point::Hair { t: t2 }) => (t1 - t2).abs() <= tol,
            (Point::Circle { theta: t1 }, Point::Circle { theta: t2 }) => {
                circ_diff(*t1, *t2, std::f64::consts::TAU) <= tol
            }
            _ => false,
        }
    }
}

fn circ_diff(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).abs() % period;
    d.min(period - d)
}

/// A displacement direction inside a chart. Planar directions are unit vectors
/// in the covering plane of the torus; line directions are signs along a
/// one-dimensional chart (circle angle or hair parameter).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    Planar { dx: f64, dy: f64 },
    Line { sign: f64 },
}

/// First or second derivative data for the smooth systems.
#[derive(Debug, Clone, Copy)]
pub enum Jacobian {
    One(f64),
    Two([[f64; 2]; 2]),
}

/// A compact metric space together with a homeomorphism acting on it.
///
/// All methods are pure; implementations are immutable after construction and
/// safe to share across threads.
pub trait Dynamics: Sync + Send {
    fn name(&self) -> String;

    fn forward(&self, p: Point) -> Point;
    fn backward(&self, p: Point) -> Point;

    /// Distance between two points of the space.
    fn distance(&self, p: Point, q: Point) -> f64;

    /// Move `r` away from `x` along `dir` in chart coordinates. The result is
    /// only approximately at metric distance `r`; [`sample_near`] rescales.
    fn displace(&self, x: Point, dir: Direction, r: f64) -> Point;

    /// A uniformly random direction at `x`.
    fn random_direction(&self, x: Point, rng: &mut dyn RngCore) -> Direction;

    /// Directions along which the distortion sup/inf is realized (eigenvectors,
    /// the hair parameter), when the system exposes any.
    fn distinguished_directions(&self, x: Point) -> Vec<Direction>;

    /// A random point of the space, used by pair-sampling diagnostics.
    fn random_point(&self, rng: &mut dyn RngCore) -> Point;

    /// Closed-form Lipschitz constant of one step, when known.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }

    /// Expansivity constant, when known.
    fn expansivity_constant(&self) -> Option<f64> {
        None
    }

    /// Adapted-metric parameters `(k, eps0)` when the metric carried by this
    /// system satisfies the hyperbolic inequality.
    fn adapted_params(&self) -> Option<(f64, f64)> {
        None
    }

    /// Derivative of one forward step at `p`, for the smooth systems.
    fn jacobian(&self, p: Point) -> Option<Jacobian> {
        let _ = p;
        None
    }

    /// Closed-form `distance(f^n x, f^n y)` where the system can provide one.
    ///
    /// Iterating coordinates loses strongly contracted separations to rounding
    /// noise amplified along the expanding direction, so linear systems
    /// propagate the minimized difference vector analytically instead.
    /// `None` means "no closed form here, use the iterated points".
    fn orbit_pair_distance(&self, x: Point, y: Point, n: i64) -> Option<f64> {
        let _ = (x, y, n);
        None
    }
}

/// Distance between `f^j x` and `f^j y`, preferring the system's closed form
/// and falling back to the cached orbit points.
pub fn orbit_pair_dist(
    system: &dyn Dynamics,
    x_orb: &OrbitSegment,
    y_orb: &OrbitSegment,
    j: i64,
) -> f64 {
    system
        .orbit_pair_distance(x_orb.base, y_orb.base, j)
        .unwrap_or_else(|| system.distance(x_orb.at(j), y_orb.at(j)))
}

/// Evaluate `f^n(p)`: forward composition for `n > 0`, backward for `n < 0`.
pub fn iterate(system: &dyn Dynamics, p: Point, n: i64) -> Point {
    let mut q = p;
    if n >= 0 {
        for _ in 0..n {
            q = system.forward(q);
        }
    } else {
        for _ in 0..(-n) {
            q = system.backward(q);
        }
    }
    q
}

/// A cached orbit `f^j(base)` for `j` in `[n_min, n_max]`.
#[derive(Debug, Clone)]
pub struct OrbitSegment {
    pub base: Point,
    pub n_min: i64,
    pub n_max: i64,
    images: Vec<Point>,
}

impl OrbitSegment {
    pub fn at(&self, j: i64) -> Point {
        debug_assert!(j >= self.n_min && j <= self.n_max);
        self.images[(j - self.n_min) as usize]
    }

    pub fn range(&self) -> std::ops::RangeInclusive<i64> {
        self.n_min..=self.n_max
    }
}

/// Compute the orbit segment of `p` over `[n_min, n_max]` (which must bracket 0).
pub fn orbit(system: &dyn Dynamics, p: Point, n_min: i64, n_max: i64) -> OrbitSegment {
    assert!(n_min <= 0 && 0 <= n_max, "orbit range must bracket 0");
    let len = (n_max - n_min + 1) as usize;
    let mut images = vec![p; len];
    let zero = (-n_min) as usize;
    let mut q = p;
    for j in 1..=n_max {
        q = system.forward(q);
        images[zero + j as usize] = q;
    }
    let mut q = p;
    for j in 1..=(-n_min) {
        q = system.backward(q);
        images[zero - j as usize] = q;
    }
    OrbitSegment {
        base: p,
        n_min,
        n_max,
        images,
    }
}

/// Deterministic candidate generator for the sup/inf estimators.
///
/// Returns `count` random points at log-uniform radii plus, for systems with
/// distinguished directions, one probe per direction at each of
/// [`PROBE_RADII`] log-spaced radii. Every returned point `y` satisfies
/// `0 < distance(x, y) <= radius`.
pub fn sample_near(
    system: &dyn Dynamics,
    x: Point,
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Point>> {
    if radius <= 0.0 {
        return Err(Error::InvalidRadius(radius));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count + 4 * PROBE_RADII);
    for _ in 0..count {
        let u: f64 = rng.gen();
        let r = radius * SAMPLE_MIN_FRAC.powf(u);
        let dir = system.random_direction(x, &mut rng);
        if let Some(y) = displace_to_distance(system, x, dir, r, radius) {
            out.push(y);
        }
    }
    for dir in system.distinguished_directions(x) {
        for j in 0..PROBE_RADII {
            let frac = j as f64 / (PROBE_RADII - 1) as f64;
            let r = radius * PROBE_MIN_FRAC.powf(frac);
            if let Some(y) = displace_to_distance(system, x, dir, r, radius) {
                out.push(y);
            }
        }
    }
    Ok(out)
}

/// Displace and rescale until the metric distance matches `target`, never
/// exceeding `cap`. Returns `None` when no distinct point can be produced.
pub fn displace_to_distance(
    system: &dyn Dynamics,
    x: Point,
    dir: Direction,
    target: f64,
    cap: f64,
) -> Option<Point> {
    let mut r = target;
    let mut y = system.displace(x, dir, r);
    for _ in 0..6 {
        let d = system.distance(x, y);
        if d <= 0.0 {
            return None;
        }
        if (d - target).abs() <= 1e-9 * target && d <= cap {
            return Some(y);
        }
        r *= target / d;
        y = system.displace(x, dir, r);
    }
    let mut d = system.distance(x, y);
    if d > cap {
        r *= 0.999 * cap / d;
        y = system.displace(x, dir, r);
        d = system.distance(x, y);
    }
    if d > 0.0 && d <= cap * (1.0 + 1e-12) {
        Some(y)
    } else {
        None
    }
}

/// Flat-torus distance: minimum over the nine lattice translates of the
/// Euclidean distance between representatives. Exact for reduced coordinates.
pub fn torus_distance(u1: f64, v1: f64, u2: f64, v2: f64) -> f64 {
    let (du, dv) = torus_min_diff(u1 - u2, v1 - v2);
    (du * du + dv * dv).sqrt()
}

/// Lattice-minimized difference vector (Euclidean norm) for reduced coordinates.
pub fn torus_min_diff(du: f64, dv: f64) -> (f64, f64) {
    let mut best = (du, dv);
    let mut best_norm = f64::INFINITY;
    for m in -1..=1 {
        for n in -1..=1 {
            let a = du + m as f64;
            let b = dv + n as f64;
            let norm = a * a + b * b;
            if norm < best_norm {
                best_norm = norm;
                best = (a, b);
            }
        }
    }
    best
}

/// Arc-length distance on the unit circle.
pub fn circle_distance(t1: f64, t2: f64) -> f64 {
    circ_diff(t1, t2, std::f64::consts::TAU)
}
