//! Multi-garment grasp planning for clearing a work surface into a basket.
//!
//! Planners choose top-down parallel-jaw grasps that lift several garments at
//! once. The segment-based planner scores grasp candidates with an analytic
//! ellipse-overlap model and picks a minimum set of non-overlapping grasps by
//! solving a probabilistic set cover program; depth-based planners grasp the
//! tallest point or the densest disc; hybrids switch on pile height; and the
//! consolidation planner chains pick-and-place moves to build piles before
//! each basket trip. A seeded raster simulator evaluates them by objects per
//! transport.
//!
//! Modules, bottom-up: [`raster`] grid geometry, [`scene`] world model and
//! simulator, [`predictor`] success probabilities, [`candidates`] candidate
//! generation, [`setcover`] the covering solvers, [`policies`] the planners,
//! [`harness`] episodes, benchmarks and file formats.

pub mod candidates;
pub mod error;
pub mod harness;
pub mod policies;
pub mod predictor;
pub mod raster;
pub mod scene;
pub mod setcover;

pub use error::{HarnessError, RasterError, SceneError, SetCoverError};
pub use predictor::{Grasp, GripperSpec, PredictorConfig, ProbMatrix};
pub use raster::{BitMask, EllipseSpec, GridMeta, Point, ScalarField};
pub use setcover::{GraspPlan, MilpInstance, SolveOutcome, SolveStatus, SolverConfig};

/// Reference resolution (meters per cell) for pixel-denominated constants.
pub const DEFAULT_CELL_SIZE: f64 = 0.002;
