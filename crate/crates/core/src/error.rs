use thiserror::Error;

/// Errors produced by mesh handling, local element construction and solves.
#[derive(Debug, Error)]
pub enum VemError {
    #[error("degenerate element {element}: measure {measure:e}")]
    DegenerateElement { element: usize, measure: f64 },

    #[error("element {element} is not star-shaped with respect to its fan center")]
    NotStarShaped { element: usize },

    #[error("Gram matrix of the degree-{degree} basis is too ill-conditioned (cond ~ {cond:e})")]
    IllConditioned { degree: usize, cond: f64 },

    #[error("rank deficiency in {what}: rank {rank} < {expected}")]
    RankDeficient {
        what: &'static str,
        rank: usize,
        expected: usize,
    },

    #[error("gradient projection onto degree {requested} needs interior moments up to degree {needed}, only {available} available (max degree {max})")]
    ProjectionDegree {
        requested: usize,
        needed: isize,
        available: isize,
        max: isize,
    },

    #[error("serendipity parameter r = {r} outside the admissible range [{lo}, {hi}]")]
    SerendipityRange { r: isize, lo: isize, hi: isize },

    #[error("incompatible Neumann data: relative compatibility residual {residual:e} exceeds {tol:e}")]
    IncompatibleNeumann { residual: f64, tol: f64 },

    #[error("CG did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("matrix is not positive definite (curvature {curvature:e} at iteration {iteration})")]
    NotPositiveDefinite { iteration: usize, curvature: f64 },

    #[error("post-solve residual check failed: relative residual {residual:e} > {limit:e}")]
    ResidualCheck { residual: f64, limit: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("ribbon construction failed: {0}")]
    Ribbon(String),

    #[error("ribbon triangle {0} has an empty clipped region")]
    EmptyClip(usize),

    #[error("assembly fault: {0}")]
    Assembly(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, VemError>;
