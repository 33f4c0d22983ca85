//! Circle systems: a north-south map (one attracting, one repelling fixed
//! point) and an irrational rotation used as a non-expansive control.

use rand::{Rng, RngCore};

use crate::space::{circle_distance, Direction, Dynamics, Jacobian, Point};

/// Moebius conjugate of `x ↦ mu * x` via `h(theta) = tan(theta / 2)`:
/// theta = 0 is repelling with derivative `mu`, theta = pi attracting with
/// derivative `1 / mu`.
#[derive(Debug, Clone)]
pub struct NorthSouthCircle {
    pub mu: f64,
}

impl NorthSouthCircle {
    pub fn new(mu: f64) -> NorthSouthCircle {
        assert!(mu > 1.0, "multiplier must exceed 1");
        NorthSouthCircle { mu }
    }

    fn map_with(&self, theta: f64, factor: f64) -> Point {
        if theta.abs() == std::f64::consts::PI {
            return Point::Circle { theta };
        }
        let t = (theta / 2.0).tan();
        Point::circle(2.0 * (factor * t).atan())
    }

    /// Closed-form derivative of one forward step.
    pub fn derivative(&self, theta: f64) -> f64 {
        if theta.abs() == std::f64::consts::PI {
            return 1.0 / self.mu;
        }
        let t = (theta / 2.0).tan();
        let t2 = t * t;
        if !t2.is_finite() {
            return 1.0 / self.mu;
        }
        self.mu * (1.0 + t2) / (1.0 + self.mu * self.mu * t2)
    }
}

impl Dynamics for NorthSouthCircle {
    fn name(&self) -> String {
        "north_south".into()
    }

    fn forward(&self, p: Point) -> Point {
        let Point::Circle { theta } = p else {
            panic!("north-south map expects circle points");
        };
        self.map_with(theta, self.mu)
    }

    fn backward(&self, p: Point) -> Point {
        let Point::Circle { theta } = p else {
            panic!("north-south map expects circle points");
        };
        self.map_with(theta, 1.0 / self.mu)
    }

    fn distance(&self, p: Point, q: Point) -> f64 {
        let (Point::Circle { theta: t1 }, Point::Circle { theta: t2 }) = (p, q) else {
            panic!("north-south map expects circle points");
        };
        circle_distance(t1, t2)
    }

    fn displace(&self, x: Point, dir: Direction, r: f64) -> Point {
        let Point::Circle { theta } = x else {
            panic!("north-south map expects circle points");
        };
        let Direction::Line { sign } = dir else {
            panic!("circle displacement must be along the angle");
        };
        Point::circle(theta + sign * r)
    }

    fn random_direction(&self, _x: Point, rng: &mut dyn RngCore) -> Direction {
        Direction::Line {
            sign: if rng.gen::<bool>() { 1.0 } else { -1.0 },
        }
    }

    fn distinguished_directions(&self, _x: Point) -> Vec<Direction> {
        vec![Direction::Line { sign: 1.0 }, Direction::Line { sign: -1.0 }]
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Point {
        Point::circle(rng.gen::<f64>() * std::f64::consts::TAU)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        // sup |f'| is attained at the repelling fixed point.
        Some(self.mu)
    }

    fn jacobian(&self, p: Point) -> Option<Jacobian> {
        let Point::Circle { theta } = p else {
            return None;
        };
        Some(Jacobian::One(self.derivative(theta)))
    }

    /// Exact orbit-pair distances when one endpoint is a fixed point, via the
    /// conjugacy `theta_n = 2 atan(mu^n tan(theta/2))`. The distance to the
    /// attractor uses `pi - 2|atan z| = 2 atan(1/|z|)`, which stays fully
    /// accurate as the orbit crowds against `theta = -pi`.
    fn orbit_pair_distance(&self, x: Point, y: Point, n: i64) -> Option<f64> {
        let (Point::Circle { theta: tx }, Point::Circle { theta: ty }) = (x, y) else {
            return None;
        };
        let pi = std::f64::consts::PI;
        // order so that `b` is the fixed point if either is
        let (a, b) = if tx == 0.0 || tx.abs() == pi {
            (ty, tx)
        } else {
            (tx, ty)
        };
        let z = (a / 2.0).tan() * self.mu.powi(n as i32);
        if b == 0.0 {
            if a.abs() == pi {
                return Some(pi);
            }
            Some(2.0 * z.abs().atan())
        } else if b.abs() == pi {
            if a == 0.0 {
                return Some(pi);
            }
            if a.abs() == pi {
                return Some(0.0);
            }
            Some(2.0 * z.abs().recip().atan())
        } else {
            None
        }
    }
}

/// Rigid rotation by an irrational angle; an isometry, so every distortion
/// ratio is 1 and all exponents vanish.
#[derive(Debug, Clone)]
pub struct IrrationalRotation {
    pub alpha: f64,
}

impl IrrationalRotation {
    pub fn new(alpha: f64) -> IrrationalRotation {
        IrrationalRotation { alpha }
    }

    pub fn golden() -> IrrationalRotation {
        IrrationalRotation::new((5f64.sqrt() - 1.0) * std::f64::consts::PI)
    }
}

impl Dynamics for IrrationalRotation {
    fn name(&self) -> String {
        "rotation".into()
    }

    fn forward(&self, p: Point) -> Point {
        let Point::Circle { theta } = p else {
            panic!("rotation expects circle points");
        };
        Point::circle(theta + self.alpha)
    }

    fn backward(&self, p: Point) -> Point {
        let Point::Circle { theta } = p else {
            panic!("rotation expects circle points");
        };
        Point::circle(theta - self.alpha)
    }

    fn distance(&self, p: Point, q: Point) -> f64 {
        let (Point::Circle { theta: t1 }, Point::Circle { theta: t2 }) = (p, q) else {
            panic!("rotation expects circle points");
        };
        circle_distance(t1, t2)
    }

    fn displace(&self, x: Point, dir: Direction, r: f64) -> Point {
        let Point::Circle { theta } = x else {
            panic!("rotation expects circle points");
        };
        let Direction::Line { sign } = dir else {
            panic!("circle displacement must be along the angle");
        };
        Point::circle(theta + sign * r)
    }

    fn random_direction(&self, _x: Point, rng: &mut dyn RngCore) -> Direction {
        Direction::Line {
            sign: if rng.gen::<bool>() { 1.0 } else { -1.0 },
        }
    }

    fn distinguished_directions(&self, _x: Point) -> Vec<Direction> {
        Vec::new()
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Point {
        Point::circle(rng.gen::<f64>() * std::f64::consts::TAU)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(1.0)
    }

    fn jacobian(&self, _p: Point) -> Option<Jacobian> {
        Some(Jacobian::One(1.0))
    }

    /// Rotations are isometries: every orbit-pair distance equals the initial
    /// distance exactly.
    fn orbit_pair_distance(&self, x: Point, y: Point, _n: i64) -> Option<f64> {
        Some(self.distance(x, y))
    }
}
