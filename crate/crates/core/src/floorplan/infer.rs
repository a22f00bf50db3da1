use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::component::{ComponentKind, FloorComponent, Geometry, PlanRuleConfig, Source};
use super::rules::{classify_loop, classify_turn, detect_closed_paths, find_turns, LoopClass};
use crate::error::{Error, Result};
use crate::geometry::Point2;

/// What one inference run changed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InferenceDiff {
    pub added: Vec<u64>,
    pub removed: Vec<u64>,
    /// Unlocked corrections replaced by newly inferred components.
    pub overwritten_corrections: Vec<u64>,
}

fn infer_from(trajectory: &[Point2], config: &PlanRuleConfig) -> Vec<(ComponentKind, Geometry)> {
    let mut t = trajectory.to_vec();
    t.dedup();
    if t.is_empty() {
        return Vec::new();
    }
    let mut out = vec![(ComponentKind::Passage, Geometry::Polyline { points: t.clone(), width: config.passage_width })];
    for (i, j) in detect_closed_paths(&t, config.closure_radius) {
        match classify_loop(&t[i..=j], config) {
            LoopClass::DeadEnd { block } => {
                out.push((ComponentKind::Block, Geometry::Point { at: block, width: config.passage_width }))
            }
            LoopClass::Room { geometry, entrance } => {
                out.push((ComponentKind::Room, geometry));
                out.push((ComponentKind::Entrance, Geometry::Point { at: entrance, width: config.entrance_width }));
            }
        }
    }
    for sub in find_turns(&t, config) {
        if let Some(room) = classify_turn(&sub, config) {
            out.push((ComponentKind::Room, room.geometry));
            for e in room.entrances {
                out.push((ComponentKind::Entrance, Geometry::Point { at: e, width: config.entrance_width }));
            }
        }
    }
    out
}

/// Recomputes the inferred floor plan from all trajectories.
///
/// Every trajectory becomes a Passage; closed paths and long turns add
/// Blocks, Rooms and Entrances. Previously inferred components are
/// replaced wholesale. Locked components are kept as they are, and inferred
/// non-passage components anchored inside a locked one are dropped. An
/// unlocked correction survives unless a new component of the same kind
/// overlaps its bounds. New ids count up from 1, skipping kept ids, so the
/// result depends only on the kept components and the trajectories.
pub fn apply_inference_with_diff(
    components: &[FloorComponent],
    trajectories: &[Vec<Point2>],
    config: &PlanRuleConfig,
) -> Result<(Vec<FloorComponent>, InferenceDiff)> {
    config.validate()?;
    let locked: Vec<&FloorComponent> = components.iter().filter(|c| c.locked).collect();
    let inferred: Vec<(ComponentKind, Geometry)> = trajectories
        .iter()
        .flat_map(|t| infer_from(t, config))
        .filter(|(kind, g)| {
            *kind == ComponentKind::Passage
                || !g.anchor().is_some_and(|a| locked.iter().any(|c| c.geometry.contains(a)))
        })
        .collect();
    let overwritten = |c: &FloorComponent| {
        let Some(b) = c.geometry.bounds() else { return false };
        inferred.iter().any(|(k, g)| *k == c.kind && g.bounds().is_some_and(|r| r.intersects(&b)))
    };
    let mut diff = InferenceDiff::default();
    let mut out: Vec<FloorComponent> = Vec::new();
    for c in components {
        if c.locked {
            out.push(c.clone());
        } else if c.source == Source::Corrected {
            if overwritten(c) {
                diff.overwritten_corrections.push(c.id);
            } else {
                out.push(c.clone());
            }
        }
    }
    let taken: BTreeSet<u64> = out.iter().map(|c| c.id).collect();
    let mut ids = (1u64..).filter(|id| !taken.contains(id));
    for (kind, geometry) in inferred {
        let id = ids.next().expect("unbounded");
        out.push(FloorComponent { id, kind, geometry, locked: false, source: Source::Inferred });
    }
    out.sort_by_key(|c| c.id);
    for c in components {
        if !out.iter().any(|o| o == c) {
            diff.removed.push(c.id);
        }
    }
    for o in &out {
        if !components.iter().any(|c| c == o) {
            diff.added.push(o.id);
        }
    }
    Ok((out, diff))
}

pub fn apply_inference(
    components: &[FloorComponent],
    trajectories: &[Vec<Point2>],
    config: &PlanRuleConfig,
) -> Result<Vec<FloorComponent>> {
    apply_inference_with_diff(components, trajectories, config).map(|(c, _)| c)
}

/// Replaces a component's kind and geometry by hand. A locked component
/// cannot be changed again; there is no unlock.
pub fn correct_component(
    components: &[FloorComponent],
    id: u64,
    kind: ComponentKind,
    geometry: Geometry,
    lock: bool,
) -> Result<Vec<FloorComponent>> {
    let idx = components.iter().position(|c| c.id == id).ok_or(Error::UnknownComponent(id))?;
    if components[idx].locked {
        return Err(Error::ComponentLocked(id));
    }
    let updated = FloorComponent { id, kind, geometry, locked: lock, source: Source::Corrected };
    updated.validate()?;
    let mut out = components.to_vec();
    out[idx] = updated;
    Ok(out)
}
