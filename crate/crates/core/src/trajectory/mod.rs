//! From raw walk samples to fused AP-to-AP displacements: AP-mark
//! detection, vector segmentation, step counting, trajectory construction
//! and MCD fusion pools.

pub mod ap2ap;
pub mod mark;
pub mod mcd;
pub mod pool;
pub mod segment;
pub mod steps;
pub mod walklog;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use ap2ap::{build_ap_to_ap, ApToApTrajectory};
pub use mark::{detect_ap_mark, extract_marks, orthogonal_coverage, pass_windows, ApMarkVector, MarkRecord};
pub use mcd::{fuse_csteps, fuse_mcd, mcd_subset_size, CStepConfig, McdFit};
pub use pool::{fusion_converged, prune_pool, FusionPool, PoolKey, PoolMember};
pub use segment::{segment_vectors, segment_walk, SegmentedWalk, VectorSpan};
pub use steps::{count_steps_nasc, count_steps_nasc_with, fit_stride_model, stride_length, NascConfig, StepCount, StrideModel};
pub use walklog::{read_walk_log, write_walk_log};

use crate::error::Result;
use crate::geometry::{ApId, DisplacementVector};

/// One reported step with the scan taken at its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkStep {
    pub t_start: f64,
    pub t_end: f64,
    pub reported: DisplacementVector,
    pub scan: Vec<(ApId, f64)>,
}

/// Direction threshold for marks and segmentation, degrees.
pub const DEFAULT_DIRECTION_THRESHOLD: f64 = 20.0;

/// Everything derived from a walk log.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub marks: Vec<ApMarkVector>,
    pub trajectories: Vec<ApToApTrajectory>,
    pub pools: BTreeMap<PoolKey, FusionPool>,
}

/// Runs the whole pipeline over a walk. Pools are filled in trajectory
/// end-time order. Passes still in progress at the end of the walk produce
/// marks only when `flush` is set.
pub fn derive(steps: &[WalkStep], direction_threshold: f64, flush: bool) -> Result<Derived> {
    let marks = extract_marks(steps, direction_threshold, flush);
    let walk = segment_walk(steps, direction_threshold);
    let trajectories = build_ap_to_ap(&walk, &marks);
    let mut pools: BTreeMap<PoolKey, FusionPool> = BTreeMap::new();
    for t in &trajectories {
        let key = PoolKey { ap_a: t.start_mark.ap_id, ap_b: t.end_mark.ap_id, signature: t.signature() };
        pools.entry(key).or_insert_with(|| FusionPool::new(key)).add(PoolMember {
            offset: t.offset(),
            path_length: t.path_length(),
            t_start: t.t_start,
            t_end: t.t_end,
        })?;
    }
    Ok(Derived { marks, trajectories, pools })
}
