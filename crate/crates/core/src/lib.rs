//! Engine for walking a virtual laborer through a synthetic floor and
//! localizing wireless access points from the collected walk data.
//!
//! The crate is split along the processing pipeline:
//!
//! * [`geometry`] - planar types and displacement-vector algebra.
//! * [`world`] - ground-truth floor, RSS propagation, walker kinematics and
//!   scenario generation.
//! * [`trajectory`] - AP-mark detection, segmentation, step counting,
//!   AP-to-AP trajectories and MCD fusion.
//! * [`positioning`] - relative AP positioning and error scoring.
//! * [`planner`] - coverage pathways, sector gaps, retracing and tracking.
//! * [`floorplan`] - floor-plan inference from walked trajectories.
//! * [`session`] - the interactive objective-driven session loop.
//! * [`eval`] - headless comparison of localization processes.

pub mod error;
pub mod eval;
pub mod floorplan;
pub mod geometry;
pub mod planner;
pub mod positioning;
pub mod session;
pub mod trajectory;
pub mod world;

pub use error::{Error, Result};
