//! Toolkit for turning sparse nominal robot end-effector paths into
//! densely discretized trajectories and adjusting them on-line against a
//! stiff contact surface.
//!
//! The pieces:
//!
//! - [`geometry`]: vectors, unit quaternions, and frame calibration from
//!   three taught points.
//! - [`discretize`]: linear, circular, and quadratic-patch curvilinear
//!   discretization, plus Slerp orientation interpolation.
//! - [`fuzzy`]: a Mamdani fuzzy PI force controller with a selection
//!   matrix for hybrid force/motion axis assignment.
//! - [`sim`]: a deterministic spring-contact simulator that runs a
//!   trajectory with and without the force loop.
//! - [`io`]: JSON path specs and run configs, CSV trajectory and trace
//!   files.

pub mod discretize;
pub mod fuzzy;
pub mod geometry;
pub mod io;
pub mod sim;

pub use discretize::{CircleFit, DiscretizeError, NagataCurve, Trajectory};
pub use fuzzy::{FuzzyPi, Gains, RuleBase, SelectionMatrix, Twist, Wrench};
pub use geometry::{FrameTransform, GeometryError, Pose, UnitQuaternion, Vec3};
pub use io::{PathSpec, RunConfig, SpecError};
pub use sim::{SimTrace, SurfaceModel};
