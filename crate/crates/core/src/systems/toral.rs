//! Hyperbolic toral automorphisms with a choice of ambient (flat Euclidean)
//! or eigen-coordinate adapted metric.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::space::{
    reduce_unit, torus_distance, torus_min_diff, Direction, Dynamics, Jacobian, Point,
};

/// A 2x2 integer matrix with determinant 1 and |trace| > 2, acting on the
/// flat 2-torus, together with its eigen-data.
#[derive(Debug, Clone)]
pub struct ToralAutomorphism {
    pub matrix: [[i64; 2]; 2],
    pub inverse: [[i64; 2]; 2],
    /// Unstable eigenvalue, > 1.
    pub lambda_u: f64,
    /// Stable eigenvalue, in (0, 1); `lambda_u * lambda_s = 1`.
    pub lambda_s: f64,
    /// Unit eigenvectors.
    pub v_u: [f64; 2],
    pub v_s: [f64; 2],
    /// Dual basis to `(v_u, v_s)`: eigen coordinates of `w` are
    /// `(w . dual_u, w . dual_s)`.
    pub dual_u: [f64; 2],
    pub dual_s: [f64; 2],
    /// Shortest nonzero lattice vector in the eigen metric.
    pub shortest_lattice: f64,
    /// Adapted-metric cutoff `L / (lambda_u^2 + 2)` with `L` the shortest
    /// eigen lattice vector. With this cutoff the hyperbolic inequality
    /// `max{d(fx,fy), d(f^-1x,f^-1y)} >= min{lambda_u d(x,y), eps0}` holds for
    /// every pair: any would-be violation forces all four image differences
    /// below `lambda_u^2 eps0 < L - eps0`, which rules out lattice wrap, and
    /// in the wrap-free linear regime the max side equals `lambda_u d` exactly.
    pub eps0: f64,
}

impl ToralAutomorphism {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<ToralAutomorphism> {
        let [[a, b], [c, d]] = matrix;
        let det = a * d - b * c;
        let trace = a + d;
        if det != 1 || trace.abs() <= 2 {
            return Err(Error::NotHyperbolic(matrix));
        }
        let tr = trace as f64;
        let disc = (tr * tr - 4.0).sqrt();
        // Roots of x^2 - tr x + 1; keep lambda_u as the one with |.| > 1.
        let r1 = (tr + disc) / 2.0;
        let r2 = (tr - disc) / 2.0;
        let (lambda_u, lambda_s) = if r1.abs() > r2.abs() { (r1, r2) } else { (r2, r1) };

        let eigvec = |lambda: f64| -> [f64; 2] {
            // (A - lambda I) v = 0
            let v = if b != 0 {
                [b as f64, lambda - a as f64]
            } else {
                [lambda - d as f64, c as f64]
            };
            let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
            [v[0] / norm, v[1] / norm]
        };
        let v_u = eigvec(lambda_u);
        let v_s = eigvec(lambda_s);

        let det_v = v_u[0] * v_s[1] - v_s[0] * v_u[1];
        let dual_u = [v_s[1] / det_v, -v_s[0] / det_v];
        let dual_s = [-v_u[1] / det_v, v_u[0] / det_v];

        let mut auto = ToralAutomorphism {
            matrix,
            inverse: [[d, -b], [-c, a]],
            lambda_u,
            lambda_s,
            v_u,
            v_s,
            dual_u,
            dual_s,
            shortest_lattice: 0.0,
            eps0: 0.0,
        };
        auto.shortest_lattice = auto.shortest_lattice_eigen();
        auto.eps0 = auto.shortest_lattice / (lambda_u * lambda_u + 2.0);
        Ok(auto)
    }

    fn shortest_lattice_eigen(&self) -> f64 {
        let mut best = f64::INFINITY;
        for m in -4i64..=4 {
            for n in -4i64..=4 {
                if m == 0 && n == 0 {
                    continue;
                }
                best = best.min(self.eigen_norm(m as f64, n as f64));
            }
        }
        best
    }

    /// Eigen max-norm of a difference vector.
    pub fn eigen_norm(&self, wx: f64, wy: f64) -> f64 {
        let u = wx * self.dual_u[0] + wy * self.dual_u[1];
        let s = wx * self.dual_s[0] + wy * self.dual_s[1];
        u.abs().max(s.abs())
    }

    /// Eigen metric on the torus: eigen norm minimized over lattice translates.
    pub fn eigen_distance(&self, p: Point, q: Point) -> f64 {
        let (Point::Torus2 { u: u1, v: v1 }, Point::Torus2 { u: u2, v: v2 }) = (p, q) else {
            panic!("eigen_distance expects torus points");
        };
        let (du, dv) = self.eigen_min_diff(u1 - u2, v1 - v2);
        self.eigen_norm(du, dv)
    }

    /// Lattice-minimized difference vector for the eigen norm.
    pub fn eigen_min_diff(&self, du: f64, dv: f64) -> (f64, f64) {
        let mut best = (du, dv);
        let mut best_norm = f64::INFINITY;
        // The eigen unit ball is a rotated square; translates up to |m| <= 3
        // are enough to realize the quotient norm for reduced coordinates.
        for m in -3i64..=3 {
            for n in -3i64..=3 {
                let a = du + m as f64;
                let b = dv + n as f64;
                let norm = self.eigen_norm(a, b);
                if norm < best_norm {
                    best_norm = norm;
                    best = (a, b);
                }
            }
        }
        best
    }

    /// Eigen coordinates of a difference vector.
    pub fn eigen_coords(&self, wx: f64, wy: f64) -> (f64, f64) {
        (
            wx * self.dual_u[0] + wy * self.dual_u[1],
            wx * self.dual_s[0] + wy * self.dual_s[1],
        )
    }

    /// Eigen coordinates of `A^n w` for a difference vector `w`.
    ///
    /// An eigen component below 1e-12 of the other is snapped to exactly zero:
    /// coordinate ulps contaminate eigendirection probes at that level, and
    /// the snap replaces the probe by its projection onto the eigenline, which
    /// is itself a point of the space at essentially the same distance.
    pub fn propagate_diff(&self, wx: f64, wy: f64, n: i64) -> (f64, f64) {
        let (mut u0, mut s0) = self.eigen_coords(wx, wy);
        if u0.abs() < 1e-12 * s0.abs() {
            u0 = 0.0;
        } else if s0.abs() < 1e-12 * u0.abs() {
            s0 = 0.0;
        }
        (
            u0 * self.lambda_u.powi(n as i32),
            s0 * self.lambda_s.powi(n as i32),
        )
    }

    pub fn apply(&self, u: f64, v: f64) -> (f64, f64) {
        let [[a, b], [c, d]] = self.matrix;
        (
            reduce_unit(a as f64 * u + b as f64 * v),
            reduce_unit(c as f64 * u + d as f64 * v),
        )
    }

    pub fn apply_inverse(&self, u: f64, v: f64) -> (f64, f64) {
        let [[a, b], [c, d]] = self.inverse;
        (
            reduce_unit(a as f64 * u + b as f64 * v),
            reduce_unit(c as f64 * u + d as f64 * v),
        )
    }
}

/// Which metric the toral system carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Flat Euclidean quotient metric.
    Ambient,
    /// Max of |unstable|, |stable| eigen coordinates; satisfies the hyperbolic
    /// inequality with `k = lambda_u` exactly.
    EigenAdapted,
}

/// A toral automorphism packaged as a dynamical system.
#[derive(Debug, Clone)]
pub struct ToralSystem {
    pub automorphism: ToralAutomorphism,
    pub metric: MetricKind,
}

impl ToralSystem {
    pub fn new(matrix: [[i64; 2]; 2], metric: MetricKind) -> Result<ToralSystem> {
        Ok(ToralSystem {
            automorphism: ToralAutomorphism::new(matrix)?,
            metric,
        })
    }
}

impl Dynamics for ToralSystem {
    fn name(&self) -> String {
        match self.metric {
            MetricKind::Ambient => "toral".into(),
            MetricKind::EigenAdapted => "toral_adapted".into(),
        }
    }

    fn forward(&self, p: Point) -> Point {
        let Point::Torus2 { u, v } = p else {
            panic!("toral system expects torus points, got {p:?}");
        };
        let (u, v) = self.automorphism.apply(u, v);
        Point::Torus2 { u, v }
    }

    fn backward(&self, p: Point) -> Point {
        let Point::Torus2 { u, v } = p else {
            panic!("toral system expects torus points, got {p:?}");
        };
        let (u, v) = self.automorphism.apply_inverse(u, v);
        Point::Torus2 { u, v }
    }

    fn distance(&self, p: Point, q: Point) -> f64 {
        match self.metric {
            MetricKind::Ambient => {
                let (Point::Torus2 { u: u1, v: v1 }, Point::Torus2 { u: u2, v: v2 }) = (p, q)
                else {
                    panic!("toral system expects torus points");
                };
                torus_distance(u1, v1, u2, v2)
            }
            MetricKind::EigenAdapted => self.automorphism.eigen_distance(p, q),
        }
    }

    fn displace(&self, x: Point, dir: Direction, r: f64) -> Point {
        let Point::Torus2 { u, v } = x else {
            panic!("toral system expects torus points");
        };
        let Direction::Planar { dx, dy } = dir else {
            panic!("toral displacement must be planar");
        };
        Point::torus(u + r * dx, v + r * dy)
    }

    fn random_direction(&self, _x: Point, rng: &mut dyn RngCore) -> Direction {
        let angle: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        Direction::Planar {
            dx: angle.cos(),
            dy: angle.sin(),
        }
    }

    fn distinguished_directions(&self, _x: Point) -> Vec<Direction> {
        let a = &self.automorphism;
        [a.v_u, a.v_s]
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
            .collect()
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Point {
        Point::Torus2 {
            u: rng.gen::<f64>(),
            v: rng.gen::<f64>(),
        }
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.automorphism.lambda_u)
    }

    fn expansivity_constant(&self) -> Option<f64> {
        Some(self.automorphism.eps0)
    }

    fn adapted_params(&self) -> Option<(f64, f64)> {
        match self.metric {
            MetricKind::EigenAdapted => {
                Some((self.automorphism.lambda_u, self.automorphism.eps0))
            }
            MetricKind::Ambient => None,
        }
    }

    fn jacobian(&self, _p: Point) -> Option<Jacobian> {
        let [[a, b], [c, d]] = self.automorphism.matrix;
        Some(Jacobian::Two([
            [a as f64, b as f64],
            [c as f64, d as f64],
        ]))
    }

    /// Propagate the minimized difference through the linear map analytically;
    /// exact while the image stays well inside the injectivity radius, `None`
    /// (fall back to iterated points) once lattice wrap could matter.
    fn orbit_pair_distance(&self, x: Point, y: Point, n: i64) -> Option<f64> {
        let (Point::Torus2 { u: u1, v: v1 }, Point::Torus2 { u: u2, v: v2 }) = (x, y) else {
            return None;
        };
        let a = &self.automorphism;
        match self.metric {
            MetricKind::EigenAdapted => {
                let (du, dv) = a.eigen_min_diff(u1 - u2, v1 - v2);
                let (uj, sj) = a.propagate_diff(du, dv, n);
                let d = uj.abs().max(sj.abs());
                (d <= 0.3 * a.shortest_lattice).then_some(d)
            }
            MetricKind::Ambient => {
                let (du, dv) = torus_min_diff(u1 - u2, v1 - v2);
                let (uj, sj) = a.propagate_diff(du, dv, n);
                let wx = uj * a.v_u[0] + sj * a.v_s[0];
                let wy = uj * a.v_u[1] + sj * a.v_s[1];
                let d = (wx * wx + wy * wy).sqrt();
                // shortest Euclidean lattice vector of Z^2 is 1
                (d <= 0.3).then_some(d)
            }
        }
    }
}
