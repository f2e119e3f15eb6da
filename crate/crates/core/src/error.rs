use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (max |m + m^T| entry {max_abs:.3e})")]
    NotSkew { max_abs: f64 },

    #[error("matrix is not a rotation (orthogonality/determinant defect {defect:.3e})")]
    NotOrthogonal { defect: f64 },

    #[error("matrix is too far from the rotation group to repair (defect {defect:.3e})")]
    Degenerate { defect: f64 },

    #[error("inertia components must be positive and finite")]
    SingularInertia,

    #[error("symmetry axis chi must be a unit vector (got norm {norm})")]
    ChiNotUnit { norm: f64 },

    #[error("state variant mismatch: expected {expected}, got {got}")]
    VariantMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("control component {index} of magnitude {magnitude:.3e} lies outside the admissible channels of {system}")]
    ControlOutsideW {
        system: &'static str,
        index: usize,
        magnitude: f64,
    },

    #[error("control law {law} is not admissible for system {system}")]
    InadmissibleLaw {
        law: &'static str,
        system: &'static str,
    },

    #[error("gain k = 1 makes the rotor-to-torque state map lose rank")]
    DegenerateGain,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value produced{}", match step { Some(s) => format!(" at step {s}"), None => String::new() })]
    NonFinite { step: Option<usize> },

    #[error("trajectory is empty or too short for this check")]
    EmptyTrajectory,

    #[error("trajectory is missing diagnostic series '{name}'")]
    MissingDiagnostic { name: String },

    #[error("invalid integrator or check configuration: {message}")]
    InvalidConfig { message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
