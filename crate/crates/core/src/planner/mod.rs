//! Walking suggestions and tracking: coverage pathways over the unexplored
//! area, sector-gap and retrace suggestions, and anchor-calibrated tracks.

pub mod coverage;
pub mod hamilton;
pub mod sectors;
pub mod track;

pub use coverage::{grid_points, update_coverage, CoveragePlan};
pub use hamilton::shortest_hamilton_path;
pub use sectors::{
    retrace_suggestions, sector_gap_paths, sector_index, GapSuggestion, SectorGapReport, SectorSlot, SectorStatus,
};
pub use track::{dead_reckon, track, TrackPoint, TrackQuery};
