use thiserror::Error;

use crate::branch::BranchId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("aspect ratio must satisfy a > 1, got {0}")]
    AspectRatio(f64),

    #[error("invalid torus geometry: {0}")]
    Geometry(String),

    #[error("invalid physical scale: {0}")]
    Scale(String),

    #[error("invalid quadrature configuration: {0}")]
    QuadratureConfig(String),

    /// Evaluation landed exactly on a zero of `C1`, where the primitives
    /// diverge logarithmically and the kernel amplitude is infinite.
    #[error("pole at theta = {theta} (singular angle of the operator)")]
    Pole { theta: f64 },

    #[error("y = {value} lies outside the range of branch {branch}")]
    OutOfRange { branch: BranchId, value: f64 },

    #[error("angle {theta} is outside [0, 2pi]")]
    AngleOutOfRange { theta: f64 },

    #[error("accuracy not reached: estimated error {achieved:e} exceeds requested {requested:e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("integration path [{from}, {to}] crosses the singular angle {pole}")]
    PathCrossesPole { from: f64, to: f64, pole: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid wavefunction: {0}")]
    Wavefunction(String),

    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
