use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bearing, point_segment_distance, sector_of_bearing, ApId, Point2, Polygon};
use crate::positioning::select_positioning_edges;
use crate::trajectory::{fusion_converged, FusionPool, PoolKey};

pub fn sector_index(from: Point2, to: Point2) -> Result<u8> {
    if from == to {
        return Err(Error::CoincidentPoints);
    }
    Ok(sector_of_bearing(bearing(from, to)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorStatus {
    Missing,
    Collected,
    Converged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSlot {
    pub neighbor: Option<ApId>,
    pub status: SectorStatus,
}

/// Per AP, the nearest neighbour in each of the eight sectors and whether
/// the pair has been walked.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SectorGapReport {
    pub slots: BTreeMap<ApId, [SectorSlot; 8]>,
}

fn pair_status(pools: &[&FusionPool], a: ApId, b: ApId, theta: f64) -> SectorStatus {
    let between: Vec<&&FusionPool> = pools
        .iter()
        .filter(|p| (p.key.ap_a, p.key.ap_b) == (a, b) || (p.key.ap_a, p.key.ap_b) == (b, a))
        .collect();
    if between.is_empty() {
        SectorStatus::Missing
    } else if between.iter().any(|p| fusion_converged(p, theta).unwrap_or(false)) {
        SectorStatus::Converged
    } else {
        SectorStatus::Collected
    }
}

impl SectorGapReport {
    /// Neighbours are taken from the estimated positions, up to
    /// `max_neighbor_distance` when given.
    pub fn compute<'a>(
        positions: &BTreeMap<ApId, Point2>,
        pools: impl IntoIterator<Item = &'a FusionPool>,
        theta: f64,
        max_neighbor_distance: Option<f64>,
    ) -> Self {
        let pools: Vec<&FusionPool> = pools.into_iter().collect();
        let mut slots = BTreeMap::new();
        for (&a, &pa) in positions {
            let mut best: [Option<(f64, ApId)>; 8] = [None; 8];
            for (&b, &pb) in positions {
                let Ok(k) = sector_index(pa, pb) else { continue };
                let d = pa.dist(pb);
                if b == a || max_neighbor_distance.is_some_and(|m| d > m) {
                    continue;
                }
                let slot = &mut best[k as usize];
                if slot.is_none_or(|(bd, bid)| d < bd || (d == bd && b < bid)) {
                    *slot = Some((d, b));
                }
            }
            let row = best.map(|s| match s {
                Some((_, b)) => SectorSlot { neighbor: Some(b), status: pair_status(&pools, a, b, theta) },
                None => SectorSlot { neighbor: None, status: SectorStatus::Missing },
            });
            slots.insert(a, row);
        }
        SectorGapReport { slots }
    }

    /// Folds a newer report in. A slot whose neighbour is unchanged never
    /// moves back to a lower status.
    pub fn merge(&mut self, newer: SectorGapReport) {
        for (ap, row) in newer.slots {
            let entry = self.slots.entry(ap).or_insert(row);
            for (old, new) in entry.iter_mut().zip(row) {
                if old.neighbor == new.neighbor {
                    old.status = old.status.max(new.status);
                } else {
                    *old = new;
                }
            }
        }
    }

    /// Unordered pairs with a missing slot, lower id first.
    pub fn missing_pairs(&self) -> Vec<(ApId, ApId)> {
        let mut out: Vec<(ApId, ApId)> = self
            .slots
            .iter()
            .flat_map(|(&a, row)| {
                row.iter()
                    .filter(|s| s.status == SectorStatus::Missing)
                    .filter_map(move |s| s.neighbor.map(|b| (a.min(b), a.max(b))))
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSuggestion {
    pub ap_a: ApId,
    pub ap_b: ApId,
    pub path: Vec<Point2>,
}

/// Where gap paths may go: avoid obstacles and `mark_radius` disks around
/// every AP other than the two endpoints.
struct Clearance<'a> {
    obstacles: &'a [Polygon],
    others: Vec<Point2>,
    mark_radius: f64,
}

impl Clearance<'_> {
    fn point_ok(&self, p: Point2) -> bool {
        !self.obstacles.iter().any(|o| o.contains_strict(p)) && self.others.iter().all(|c| c.dist(p) >= self.mark_radius)
    }

    fn segment_ok(&self, a: Point2, b: Point2) -> bool {
        !self.obstacles.iter().any(|o| o.intersects_segment(a, b))
            && self.others.iter().all(|&c| point_segment_distance(c, a, b) >= self.mark_radius)
    }
}

#[derive(PartialEq)]
struct Open(f64, (i64, i64));

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// 8-connected A* on a lattice of `step` anchored at `a`, confined to a
/// margin of two mark radii around the box spanned by `a` and `b`.
fn grid_path(a: Point2, b: Point2, step: f64, clear: &Clearance<'_>) -> Option<Vec<Point2>> {
    let to_point = |c: (i64, i64)| Point2::new(a.x + c.0 as f64 * step, a.y + c.1 as f64 * step);
    let goal = (((b.x - a.x) / step).round() as i64, ((b.y - a.y) / step).round() as i64);
    let margin = (2.0 * clear.mark_radius / step).ceil() as i64 + 2;
    let (lo, hi) = ((goal.0.min(0) - margin, goal.1.min(0) - margin), (goal.0.max(0) + margin, goal.1.max(0) + margin));
    let mut g: BTreeMap<(i64, i64), f64> = BTreeMap::from([((0, 0), 0.0)]);
    let mut parent: BTreeMap<(i64, i64), (i64, i64)> = BTreeMap::new();
    let mut heap = BinaryHeap::from([Open(to_point((0, 0)).dist(b), (0, 0))]);
    while let Some(Open(_, c)) = heap.pop() {
        if c == goal && clear.segment_ok(to_point(c), b) {
            let mut path = vec![b];
            let mut cur = c;
            while cur != (0, 0) {
                path.push(to_point(cur));
                cur = parent[&cur];
            }
            path.push(a);
            path.reverse();
            path.dedup();
            return Some(simplify(path, clear));
        }
        let gc = g[&c];
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let n = (c.0 + dx, c.1 + dy);
            if n.0 < lo.0 || n.0 > hi.0 || n.1 < lo.1 || n.1 > hi.1 {
                continue;
            }
            let (pc, pn) = (to_point(c), to_point(n));
            if !clear.point_ok(pn) || !clear.segment_ok(pc, pn) {
                continue;
            }
            let cost = gc + pc.dist(pn);
            if g.get(&n).is_none_or(|&old| cost < old - 1e-12) {
                g.insert(n, cost);
                parent.insert(n, c);
                heap.push(Open(cost + pn.dist(b), n));
            }
        }
    }
    None
}

/// Drops intermediate vertices whose shortcut stays clear.
fn simplify(path: Vec<Point2>, clear: &Clearance<'_>) -> Vec<Point2> {
    let mut out = vec![path[0]];
    let mut i = 0;
    while i + 1 < path.len() {
        let mut j = path.len() - 1;
        while j > i + 1 && !clear.segment_ok(path[i], path[j]) {
            j -= 1;
        }
        out.push(path[j]);
        i = j;
    }
    out
}

/// Paths for every missing sector pair: straight when clear, otherwise a
/// grid search at `grid_step`. Pairs with no clear path are omitted.
pub fn sector_gap_paths(
    positions: &BTreeMap<ApId, Point2>,
    report: &SectorGapReport,
    obstacles: &[Polygon],
    mark_radius: f64,
    grid_step: f64,
) -> Vec<GapSuggestion> {
    report
        .missing_pairs()
        .into_iter()
        .filter_map(|(a, b)| {
            let (pa, pb) = (*positions.get(&a)?, *positions.get(&b)?);
            let clear = Clearance {
                obstacles,
                others: positions.iter().filter(|(id, _)| **id != a && **id != b).map(|(_, p)| *p).collect(),
                mark_radius,
            };
            let path = if clear.segment_ok(pa, pb) { Some(vec![pa, pb]) } else { grid_path(pa, pb, grid_step, &clear) };
            path.map(|path| GapSuggestion { ap_a: a, ap_b: b, path })
        })
        .collect()
}

/// Positioning-selected pools that have not converged, oldest fusion
/// first. A pool fused only once has no convergence evidence and is
/// listed too.
pub fn retrace_suggestions<'a>(pools: impl IntoIterator<Item = &'a FusionPool>, theta: f64) -> Vec<PoolKey> {
    let pools: Vec<&FusionPool> = pools.into_iter().collect();
    let chosen: Vec<(ApId, ApId)> = select_positioning_edges(pools.iter().copied()).iter().map(|e| (e.ap_a, e.ap_b)).collect();
    let mut out: Vec<&FusionPool> = pools
        .into_iter()
        .filter(|p| chosen.contains(&(p.key.ap_a, p.key.ap_b)))
        .filter(|p| !fusion_converged(p, theta).unwrap_or(false))
        .collect();
    out.sort_by(|a, b| a.last_fused.total_cmp(&b.last_fused).then(a.key.cmp(&b.key)));
    out.into_iter().map(|p| p.key).collect()
}
