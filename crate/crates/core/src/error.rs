use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sampling radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("no candidate survived the Bowen filter at n = {n}")]
    EmptyBowenSample { n: i64 },
    #[error("matrix {0:?} is not a hyperbolic unimodular integer matrix")]
    NotHyperbolic([[i64; 2]; 2]),
    #[error("point cloud of {0} points exceeds the chain-metric limit of {1}")]
    CloudTooLarge(usize, usize),
    #[error("system `{0}` has no computable derivative")]
    NotDifferentiable(String),
    #[error("point {0:?} does not belong to the space of system `{1}`")]
    WrongChart(crate::space::Point, String),
}

pub type Result<T> = std::result::Result<T, Error>;
