//! Ground-truth world: floor geometry, RSS propagation, walker kinematics
//! and scenario generation. Every random draw goes through a seeded
//! `ChaCha8Rng`, so a seed fixes scenarios, walks and scans bit for bit.

pub mod accel;
pub mod floor;
pub mod rss;
pub mod scenario;
pub mod walker;

pub use accel::synth_accel_trace;
pub use floor::{AccessPoint, EntranceSegment, GroundTruthFloor, Room};
pub use rss::{rss_at, scan, RssModel};
pub use scenario::{generate_random_scenario, GraphParams, Scenario, TrajectoryGraph, SCENARIO_FORMAT};
pub use walker::{step_walker, walk_segment, ImuNoiseModel, StepOutcome, WalkCommand, WalkerState};
