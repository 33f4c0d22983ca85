//! The quotient space `X = T^2 ∪ H`: a hyperbolic torus with an attached
//! curve asymptotic to it. The curve carries the stable-manifold dynamics
//! `t ↦ λ t`, so the apex `q` (at `t = 0`) is a fixed point with every
//! nearby point contracted toward it.

use rand::{Rng, RngCore};

use crate::error::Result;
use crate::space::{reduce_unit, torus_distance, torus_min_diff, Direction, Dynamics, Point};
use crate::systems::toral::ToralAutomorphism;

/// Height floor below which hair points are treated as indistinguishable from
/// the torus by the generic sampler.
const H_MIN: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct TorusWithHair {
    pub base: ToralAutomorphism,
    /// Apex height, in (0, 1). The apex is `q = (torus origin, epsilon)`.
    pub epsilon: f64,
    /// Stable eigenvector scaled to x-component 1; the hair embeds as
    /// `t ↦ (frac(t * v_p), epsilon / (t^2 + 1))`.
    pub v_p: [f64; 2],
    pub v_p_norm: f64,
    /// Sampler cap on |t|.
    pub t_max: f64,
}

impl TorusWithHair {
    pub fn new(matrix: [[i64; 2]; 2], epsilon: f64) -> Result<TorusWithHair> {
        assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0,1)");
        let base = ToralAutomorphism::new(matrix)?;
        let v_p = [1.0, base.v_s[1] / base.v_s[0]];
        let v_p_norm = (v_p[0] * v_p[0] + v_p[1] * v_p[1]).sqrt();
        let t_max = (epsilon / H_MIN).sqrt() - 1.0;
        Ok(TorusWithHair {
            base,
            epsilon,
            v_p,
            v_p_norm,
            t_max,
        })
    }

    pub fn default_system() -> TorusWithHair {
        TorusWithHair::new([[2, 3], [3, 5]], 0.5).expect("default matrix is hyperbolic")
    }

    /// The stable fixed point on the hair.
    pub fn q(&self) -> Point {
        Point::Hair { t: 0.0 }
    }

    pub fn height(&self, t: f64) -> f64 {
        self.epsilon / (t * t + 1.0)
    }

    /// Closed-form hair dynamics: `t ↦ λ^n t`.
    pub fn hair_map(&self, t: f64, n: i32) -> f64 {
        t * self.base.lambda_s.powi(n)
    }

    /// Torus shadow of a point of X.
    pub fn shadow(&self, p: Point) -> (f64, f64) {
        match p {
            Point::Torus2 { u, v } => (u, v),
            Point::Hair { t } => (reduce_unit(t * self.v_p[0]), reduce_unit(t * self.v_p[1])),
            Point::Circle { .. } => panic!("circle point in torus-with-hair space"),
        }
    }

}

impl Dynamics for TorusWithHair {
    fn name(&self) -> String {
        "torus_with_hair".into()
    }

    fn forward(&self, p: Point) -> Point {
        match p {
            Point::Torus2 { u, v } => {
                let (u, v) = self.base.apply(u, v);
                Point::Torus2 { u, v }
            }
            Point::Hair { t } => Point::Hair {
                t: t * self.base.lambda_s,
            },
            Point::Circle { .. } => panic!("circle point in torus-with-hair space"),
        }
    }

    fn backward(&self, p: Point) -> Point {
        match p {
            Point::Torus2 { u, v } => {
                let (u, v) = self.base.apply_inverse(u, v);
                Point::Torus2 { u, v }
            }
            Point::Hair { t } => Point::Hair {
                t: t / self.base.lambda_s,
            },
            Point::Circle { .. } => panic!("circle point in torus-with-hair space"),
        }
    }

    /// Product metric on (torus shadow, height). For heights below `epsilon < 1`
    /// this agrees with the quotient metric of R^3 / (Z^2 x {0}) on the
    /// neighborhoods the estimators visit.
    ///
    /// Hair-hair shadows are differenced in the parameter (`dt * v_p` reduced
    /// mod the lattice) rather than between reduced coordinates, which would
    /// lose the difference to rounding once `|t| v_p` is below one ulp of 1.
    fn distance(&self, p: Point, q: Point) -> f64 {
        let ds = match (p, q) {
            (Point::Hair { t: t1 }, Point::Hair { t: t2 }) => {
                let dt = t1 - t2;
                // round-to-nearest reduction is exact for small |dt|
                let a = dt * self.v_p[0];
                let a = a - a.round();
                let b = dt * self.v_p[1];
                let b = b - b.round();
                (a * a + b * b).sqrt()
            }
            _ => {
                let (u1, v1) = self.shadow(p);
                let (u2, v2) = self.shadow(q);
                torus_distance(u1, v1, u2, v2)
            }
        };
        let h1 = match p {
            Point::Hair { t } => self.height(t),
            _ => 0.0,
        };
        let h2 = match q {
            Point::Hair { t } => self.height(t),
            _ => 0.0,
        };
        let dh = h1 - h2;
        (ds * ds + dh * dh).sqrt()
    }

    fn displace(&self, x: Point, dir: Direction, r: f64) -> Point {
        match (x, dir) {
            (Point::Torus2 { u, v }, Direction::Planar { dx, dy }) => {
                Point::torus(u + r * dx, v + r * dy)
            }
            (Point::Hair { t }, Direction::Line { sign }) => {
                let t2 = (t + sign * r / self.v_p_norm).clamp(-self.t_max, self.t_max);
                Point::Hair { t: t2 }
            }
            _ => panic!("direction does not match chart"),
        }
    }

    fn random_direction(&self, x: Point, rng: &mut dyn RngCore) -> Direction {
        match x {
            Point::Torus2 { .. } => {
                let angle: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
                Direction::Planar {
                    dx: angle.cos(),
                    dy: angle.sin(),
                }
            }
            _ => Direction::Line {
                sign: if rng.gen::<bool>() { 1.0 } else { -1.0 },
            },
        }
    }

    fn distinguished_directions(&self, x: Point) -> Vec<Direction> {
        match x {
            Point::Torus2 { .. } => [self.base.v_u, self.base.v_s]
                .iter()
                .flat_map(|v| {
                    [
                        Direction::Planar { dx: v[0], dy: v[1] },
                        Direction::Planar {
                            dx: -v[0],
                            dy: -v[1],
                        },
                    ]
                })
                .collect(),
            _ => vec![Direction::Line { sign: 1.0 }, Direction::Line { sign: -1.0 }],
        }
    }

    /// One step stretches heights by up to `h(lambda_s t)/h(t) -> 1/lambda_s^2`
    /// far out on the hair, which dominates the torus factor `lambda_u`.
    fn lipschitz_hint(&self) -> Option<f64> {
        Some(1.0 / (self.base.lambda_s * self.base.lambda_s))
    }

    /// Hair pairs propagate exactly in the parameter; torus pairs reuse the
    /// linear closed form of the base automorphism (flat metric, height 0).
    fn orbit_pair_distance(&self, x: Point, y: Point, n: i64) -> Option<f64> {
        match (x, y) {
            (Point::Hair { t: t1 }, Point::Hair { t: t2 }) => {
                let f = self.base.lambda_s.powi(n as i32);
                Some(self.distance(Point::Hair { t: t1 * f }, Point::Hair { t: t2 * f }))
            }
            (Point::Torus2 { u: u1, v: v1 }, Point::Torus2 { u: u2, v: v2 }) => {
                let a = &self.base;
                let (du, dv) = torus_min_diff(u1 - u2, v1 - v2);
                let (uj, sj) = a.propagate_diff(du, dv, n);
                let wx = uj * a.v_u[0] + sj * a.v_s[0];
                let wy = uj * a.v_u[1] + sj * a.v_s[1];
                let d = (wx * wx + wy * wy).sqrt();
                (d <= 0.3).then_some(d)
            }
            _ => None,
        }
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Point {
        if rng.gen::<bool>() {
            Point::Torus2 {
                u: rng.gen::<f64>(),
                v: rng.gen::<f64>(),
            }
        } else {
            // log-spread |t| over [1e-3, t_max]
            let lo = 1e-3f64;
            let t = lo * (self.t_max / lo).powf(rng.gen::<f64>());
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            Point::Hair { t: sign * t }
        }
    }
}
