use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ApId, Rect};
use crate::planner::{CoveragePlan, TrackQuery};

/// Which APs a locate objective is about.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum ApScope {
    #[default]
    All,
    Area(Rect),
    Aps(Vec<ApId>),
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveKind {
    /// Collect at least `marks` AP-mark vectors per AP of interest.
    LocateAps {
        #[serde(default)]
        scope: ApScope,
        #[serde(default = "one")]
        marks: usize,
    },
    RefineTrajectories,
    TrackMovement { query: TrackQuery },
    FloorPlan { width: f64, height: f64 },
}

impl ObjectiveKind {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::MalformedCommand(m.to_string()));
        match self {
            ObjectiveKind::LocateAps { marks, scope } => {
                if *marks == 0 {
                    return bad("marks must be >= 1");
                }
                if let ApScope::Area(r) = scope {
                    if !(r.width() > 0.0 && r.height() > 0.0) {
                        return bad("locate area must have positive size");
                    }
                }
                Ok(())
            }
            ObjectiveKind::RefineTrajectories => Ok(()),
            ObjectiveKind::TrackMovement { query } => {
                if query.t_start > query.t_end || query.t_start.is_nan() || query.t_end.is_nan() {
                    return bad("track query start after end");
                }
                Ok(())
            }
            ObjectiveKind::FloorPlan { width, height } => {
                if !(*width > 0.0 && *height > 0.0 && width.is_finite() && height.is_finite()) {
                    return bad("floor plan area must have positive size");
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveStatus {
    Pending,
    Active,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub status: ObjectiveStatus,
    /// Remaining coverage pathway for locate and floor-plan objectives.
    pub plan: Option<CoveragePlan>,
    pub terminated: bool,
}

/// Head active, everything else pending.
pub fn restatus(list: &mut [Objective]) {
    for (i, o) in list.iter_mut().enumerate() {
        o.status = if i == 0 { ObjectiveStatus::Active } else { ObjectiveStatus::Pending };
    }
}
