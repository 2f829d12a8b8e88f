//! Kinetostatic design toolkit for planar 2-DOF parallel kinematic machines.
//!
//! Models two mechanisms built from a pair of equal-length struts riding on
//! actuated prismatic rails: the Biglide (collinear rails) and the planar
//! Orthoglide (orthogonal rails). On top of the closed-form kinematics the
//! crate provides velocity-amplification analysis, singularity
//! classification, Cartesian-workspace occupancy grids, and the square
//! useful-workspace placement/growth procedure used to size each machine
//! for a prescribed workspace side.
//!
//! Grid and scan evaluations run in parallel through [rayon] when the
//! `parallel` feature (on by default) is enabled; without it every
//! operation falls back to an equivalent sequential path.

pub mod error;
pub mod exec;
pub mod kinetostatics;
pub mod mechanisms;
pub mod planar;
pub mod singularity;
pub mod sizing;
pub mod workspace;

pub use error::{Error, Result};
pub use kinetostatics::{Vaf, VafBounds};
pub use mechanisms::{JacobianPair, JointPos, MechanismGeometry, MechanismKind, WorkingMode};
pub use planar::{Mat2, Vec2};
pub use sizing::DesignResult;
pub use workspace::SquareWorkspace;
