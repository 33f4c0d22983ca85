//! Concrete example systems.

pub mod circle;
pub mod hair;
pub mod toral;

pub use circle::{IrrationalRotation, NorthSouthCircle};
pub use hair::TorusWithHair;
pub use toral::{MetricKind, ToralAutomorphism, ToralSystem};
