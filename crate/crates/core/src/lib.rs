//! Metric-space Lyapunov exponents for homeomorphisms of compact metric
//! spaces: Bowen-ball distortion estimators for pointwise and invariant-set
//! exponents, adapted hyperbolic metrics, attractor/repeller classification,
//! and cross-validation against classical derivative-based exponents.
//!
//! The built-in systems (hyperbolic toral automorphisms, a torus with an
//! attached asymptotic curve, a north-south circle map and an irrational
//! rotation) have closed-form oracles, so every estimate the crate produces
//! can be checked at desk scale.

pub mod adapted;
pub mod classical;
pub mod error;
pub mod point_exp;
pub mod set_exp;
pub mod space;
pub mod systems;

pub use error::{Error, Result};
pub use point_exp::{EstimatorParams, ExponentReport};
pub use set_exp::{Classification, InvariantSet, Label, SetExponentReport};
pub use space::{Dynamics, Point};
