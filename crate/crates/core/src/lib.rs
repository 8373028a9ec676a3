//! Core planning engine for multi-IRS coverage deployment.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It covers the
//! scene description, a deterministic LoS plus single-bounce image-method
//! tracer, the large-scale channel power mathematics, the coverage and cost
//! metrics, an ILP model with its own simplex and branch-and-bound solver, and
//! the sequential-deployment / successive-refinement heuristics.
//!
//! File formats, the command line front end and wall-clock time limits live
//! in the `irsplan` companion crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod channel;
pub mod geometry;
pub mod heuristics;
pub mod metrics;
pub mod milp;
pub mod propagation;
pub mod scene;
pub mod units;

pub use geometry::{Building, Rect, Vec3};
pub use metrics::{
    CostParams, CoverageParams, DeploymentSolution, Feasibility, Instance, Placement,
    SolveStatus,
};
pub use propagation::{ChannelKnowledge, Path, PathSet, TracerConfig};
pub use scene::{CandidateSite, Grid, IrsConfig, Scene, SceneError, SceneSpec, SiteSpec};
