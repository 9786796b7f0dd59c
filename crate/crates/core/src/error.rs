use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain violation at `{node}`: {reason}")]
    Domain { node: String, reason: String },

    #[error("derivative of order {requested} requested from a jet of order {order}")]
    OutOfOrder { requested: usize, order: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("indefinite Hessian of rho: {0}")]
    Branch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("neighbourhood is not graphical; admissible radius {admissible_radius}")]
    NonGraphical { admissible_radius: f64 },

    #[error("point lies outside the map's domain: {0}")]
    MapDomain(String),

    #[error("point is the pole of the map")]
    Pole,

    #[error("Hessian of rho is not positive definite at node {node}")]
    Definiteness { node: usize },

    #[error("Newton did not converge: {reason} (residual {residual:e} after {iterations} iterations)")]
    Nonconvergence {
        reason: String,
        residual: f64,
        iterations: usize,
        best: Option<Vec<f64>>,
    },

    #[error("initial guess is outside the convex branch: {0}")]
    BadInitialization(String),

    #[error("linear solve failed: {0}")]
    Linear(String),

    #[error("maximum lies on the boundary of the sample set")]
    BoundaryMax,

    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
