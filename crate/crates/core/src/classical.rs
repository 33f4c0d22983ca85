//! Classical derivative-based Lyapunov exponents for the smooth built-in
//! systems, used to cross-validate the metric exponents.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{Dynamics, Jacobian, Point};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassicalExponents {
    pub chi_max: f64,
    pub chi_min: f64,
    pub n_used: u32,
}

/// Log growth rates of tangent vectors along the orbit of `x`, with the
/// evolved frame re-orthonormalized every step (Gram-Schmidt) and log norms
/// accumulated in double precision.
pub fn jacobian_exponents(system: &dyn Dynamics, x: Point, n: u32) -> Result<ClassicalExponents> {
    assert!(n >= 8, "need at least 8 steps");
    let Some(first) = system.jacobian(x) else {
        return Err(Error::NotDifferentiable(system.name()));
    };
    match first {
        Jacobian::One(_) => {
            let mut p = x;
            let mut acc = 0.0f64;
            for _ in 0..n {
                let Some(Jacobian::One(d)) = system.jacobian(p) else {
                    return Err(Error::NotDifferentiable(system.name()));
                };
                acc += d.abs().ln();
                p = system.forward(p);
            }
            let chi = acc / n as f64;
            Ok(ClassicalExponents {
                chi_max: chi,
                chi_min: chi,
                n_used: n,
            })
        }
        Jacobian::Two(_) => {
            let mut p = x;
            let mut q1 = [1.0f64, 0.0];
            let mut q2 = [0.0f64, 1.0];
            let mut acc1 = 0.0f64;
            let mut acc2 = 0.0f64;
            // warm-up pass: align the frame with the expanding direction
            // before accumulating, so the arbitrary initial frame does not
            // leave an O(1/n) transient in the averages
            for _ in 0..n {
                let Some(Jacobian::Two(m)) = system.jacobian(p) else {
                    return Err(Error::NotDifferentiable(system.name()));
                };
                let mul = |v: [f64; 2]| {
                    [
                        m[0][0] * v[0] + m[0][1] * v[1],
                        m[1][0] * v[0] + m[1][1] * v[1],
                    ]
                };
                let w1 = mul(q1);
                let w2 = mul(q2);
                let r11 = (w1[0] * w1[0] + w1[1] * w1[1]).sqrt();
                q1 = [w1[0] / r11, w1[1] / r11];
                let r12 = q1[0] * w2[0] + q1[1] * w2[1];
                let w2o = [w2[0] - r12 * q1[0], w2[1] - r12 * q1[1]];
                let r22 = (w2o[0] * w2o[0] + w2o[1] * w2o[1]).sqrt();
                q2 = [w2o[0] / r22, w2o[1] / r22];
                p = system.forward(p);
            }
            for _ in 0..n {
                let Some(Jacobian::Two(m)) = system.jacobian(p) else {
                    return Err(Error::NotDifferentiable(system.name()));
                };
                let mul = |v: [f64; 2]| {
                    [
                        m[0][0] * v[0] + m[0][1] * v[1],
                        m[1][0] * v[0] + m[1][1] * v[1],
                    ]
                };
                let w1 = mul(q1);
                let w2 = mul(q2);
                let r11 = (w1[0] * w1[0] + w1[1] * w1[1]).sqrt();
                q1 = [w1[0] / r11, w1[1] / r11];
                let r12 = q1[0] * w2[0] + q1[1] * w2[1];
                let w2o = [w2[0] - r12 * q1[0], w2[1] - r12 * q1[1]];
                let r22 = (w2o[0] * w2o[0] + w2o[1] * w2o[1]).sqrt();
                q2 = [w2o[0] / r22, w2o[1] / r22];
                acc1 += r11.ln();
                acc2 += r22.ln();
                p = system.forward(p);
            }
            let a = acc1 / n as f64;
            let b = acc2 / n as f64;
            Ok(ClassicalExponents {
                chi_max: a.max(b),
                chi_min: a.min(b),
                n_used: n,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Comparison {
    pub pass: bool,
    pub delta_max: f64,
    pub delta_min: f64,
    pub tol: f64,
}

/// Coincidence check between a metric exponent report and the
/// classical exponents computed at the same point.
pub fn compare(
    metric_sup_plus: f64,
    metric_inf_plus: f64,
    classical: &ClassicalExponents,
    tol: f64,
) -> Comparison {
    let delta_max = (metric_sup_plus - classical.chi_max).abs();
    let delta_min = (metric_inf_plus - classical.chi_min).abs();
    Comparison {
        pass: delta_max <= tol && delta_min <= tol,
        delta_max,
        delta_min,
        tol,
    }
}
