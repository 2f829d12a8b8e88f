//! Crate-wide error type.

use crate::planar::Vec2;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of kinematic and design operations.
///
/// Classification errors carry the measured determinants so callers can
/// report which guard fired.
#[derive(Debug, Clone, PartialEq, thiserror::Error, serde::Serialize)]
pub enum Error {
    #[error("pose ({x:.6}, {y:.6}) out of reach: {detail}")]
    OutOfReach { x: f64, y: f64, detail: &'static str },

    #[error("pose ({x:.6}, {y:.6}) incompatible with working mode: {detail}")]
    ModeViolation { x: f64, y: f64, detail: &'static str },

    #[error("no assembly for joints ({rho1:.6}, {rho2:.6}): strut circles do not intersect")]
    NoAssembly { rho1: f64, rho2: f64 },

    #[error("structural singularity at joints ({rho1:.6}, {rho2:.6}): coincident strut centers")]
    StructuralSingularity { rho1: f64, rho2: f64 },

    #[error("pose/joint pair inconsistent: strut-length residual {residual:.3e} exceeds tolerance")]
    InconsistentPose { residual: f64 },

    #[error("serial singularity at ({x:.6}, {y:.6}): |det B| = {det_b:.3e}")]
    SerialSingular { x: f64, y: f64, det_b: f64 },

    #[error("parallel singularity at ({x:.6}, {y:.6}): |det A| = {det_a:.3e}")]
    ParallelSingular { x: f64, y: f64, det_a: f64 },

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("{what} = {value:.6} outside valid range ({lo:.6}, {hi:.6})")]
    DomainOutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("segment evaluation failed at parameter {param:.6} (point ({x:.6}, {y:.6})): {source}")]
    SampleFailure {
        param: f64,
        x: f64,
        y: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("no isotropic configuration found in the requested region")]
    EmptyLocus,

    #[error("workspace infeasible at seed side near ({x:.6}, {y:.6}): {reason}")]
    InfeasibleAtSeed { x: f64, y: f64, reason: String },

    #[error("every candidate orientation was rejected: {detail}")]
    AllOrientationsRejected { detail: String },

    #[error("designs cannot be compared: {detail}")]
    MismatchedScenario { detail: String },

    #[error("invalid parameter {what}: {detail}")]
    InvalidParameter { what: &'static str, detail: String },
}

impl Error {
    pub(crate) fn out_of_reach(p: Vec2, detail: &'static str) -> Self {
        Error::OutOfReach {
            x: p.x,
            y: p.y,
            detail,
        }
    }

    pub(crate) fn mode_violation(p: Vec2, detail: &'static str) -> Self {
        Error::ModeViolation {
            x: p.x,
            y: p.y,
            detail,
        }
    }

    /// True for the guard errors raised at singular or near-singular poses.
    pub fn is_singularity(&self) -> bool {
        matches!(
            self,
            Error::SerialSingular { .. }
                | Error::ParallelSingular { .. }
                | Error::StructuralSingularity { .. }
        )
    }
}
