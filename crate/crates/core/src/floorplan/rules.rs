use serde::{Deserialize, Serialize};

use super::component::{Geometry, PlanRuleConfig};
use crate::geometry::{bearing, convex_hull, heading_diff, point_polyline_distance, polyline_length, Point2};

/// Index ranges `(start, end)`, inclusive, of closed sub-paths.
///
/// Scanning forward, a loop starts at the earliest point the walk later
/// leaves by more than `closure_radius` and comes back to; it ends at the
/// last point within the radius of its start. The next search resumes at
/// that end, so loops never overlap in time.
pub fn detect_closed_paths(trajectory: &[Point2], closure_radius: f64) -> Vec<(usize, usize)> {
    let n = trajectory.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < n {
        let p = trajectory[i];
        let end = (i + 1..n)
            .find(|&k| trajectory[k].dist(p) > closure_radius)
            .and_then(|leave| (leave + 1..n).rev().find(|&k| trajectory[k].dist(p) <= closure_radius));
        match end {
            Some(j) => {
                out.push((i, j));
                i = j;
            }
            None => i += 1,
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LoopClass {
    DeadEnd { block: Point2 },
    Room { geometry: Geometry, entrance: Point2 },
}

/// Largest distance from points of `a` to polyline `b`, sampling each
/// segment of `a` at most `step` apart.
fn directed_hausdorff(a: &[Point2], b: &[Point2], step: f64) -> f64 {
    let mut worst = a.first().map_or(0.0, |&p| point_polyline_distance(p, b));
    for w in a.windows(2) {
        let n = (w[0].dist(w[1]) / step).ceil().max(1.0) as usize;
        for s in 1..=n {
            worst = f64::max(worst, point_polyline_distance(w[0].lerp(w[1], s as f64 / n as f64), b));
        }
    }
    worst
}

fn hausdorff(a: &[Point2], b: &[Point2], step: f64) -> f64 {
    directed_hausdorff(a, b, step).max(directed_hausdorff(b, a, step))
}

/// Splits the loop at its point farthest from the closure point (midpoint
/// of its two ends; ties go to the lexicographically smallest point). If
/// the outbound and return halves are within `overlap_tolerance` of each
/// other the loop was a dead end; otherwise it encloses a room.
pub fn classify_loop(points: &[Point2], config: &PlanRuleConfig) -> LoopClass {
    let (Some(&first), Some(&last)) = (points.first(), points.last()) else {
        return LoopClass::DeadEnd { block: Point2::ORIGIN };
    };
    let closure = first.lerp(last, 0.5);
    let far = points.iter().map(|p| p.dist(closure)).fold(0.0, f64::max);
    let k = (0..points.len())
        .filter(|&i| points[i].dist(closure) >= far - 1e-9)
        .min_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(points[a].y.total_cmp(&points[b].y)))
        .expect("non-empty");
    let outbound = &points[..=k];
    let back = &points[k..];
    let step = config.overlap_tolerance / 8.0;
    if hausdorff(outbound, back, step) <= config.overlap_tolerance + 1e-9 {
        return LoopClass::DeadEnd { block: points[k] };
    }
    let geometry = Geometry::area_from_hull(convex_hull(points));
    let entrance = geometry.boundary_point(closure).unwrap_or(closure);
    LoopClass::Room { geometry, entrance }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRoom {
    pub geometry: Geometry,
    pub entrances: [Point2; 2],
}

fn dedup(points: &[Point2]) -> Vec<Point2> {
    let mut v = points.to_vec();
    v.dedup();
    v
}

/// The broken line a corner would follow: the entry direction (first
/// segment) and exit direction (last segment) extended to where they meet.
/// `None` when the two directions are parallel but not collinear.
fn corner_line(p: &[Point2]) -> Option<Vec<Point2>> {
    let (p0, p1) = (p[0], p[1]);
    let (q0, q1) = (p[p.len() - 2], p[p.len() - 1]);
    let (d0, d1) = (p1 - p0, q1 - q0);
    let cross = d0.cross(d1);
    if cross.abs() <= 1e-12 * d0.norm() * d1.norm() {
        return ((q1 - p0).cross(d0).abs() <= 1e-9 * d0.norm() * (q1 - p0).norm().max(1.0)).then(|| vec![p0, q1]);
    }
    let s = (q1 - p0).cross(d1) / cross;
    Some(vec![p0, p0 + d0 * s, q1])
}

/// Room for a long turn that does not follow a single corner.
///
/// `sub_path` includes its bounding straight segments as first and last
/// segment. The turn becomes a room when its length exceeds
/// `turn_length_threshold` and it deviates from the corner formed by those
/// two segments by more than `polyline_fit_tolerance`.
pub fn classify_turn(sub_path: &[Point2], config: &PlanRuleConfig) -> Option<TurnRoom> {
    let p = dedup(sub_path);
    if p.len() < 3 || polyline_length(&p) <= config.turn_length_threshold {
        return None;
    }
    let deviation = match corner_line(&p) {
        Some(fit) => hausdorff(&p, &fit, config.polyline_fit_tolerance / 8.0),
        None => f64::INFINITY,
    };
    if deviation <= config.polyline_fit_tolerance {
        return None;
    }
    let geometry = Geometry::area_from_hull(convex_hull(&p));
    let ends = [p[0], p[p.len() - 1]];
    let entrances = ends.map(|e| geometry.boundary_point(e).unwrap_or(e));
    Some(TurnRoom { geometry, entrances })
}

/// Turns between consecutive straight segments of a trajectory.
///
/// A straight segment is a run of edges whose headings stay within
/// `straight_heading_tolerance` of the run's first edge and whose length is
/// at least `grid_spacing`. Each returned sub-path starts with the last
/// edge of one straight segment and ends with the first edge of the next.
pub fn find_turns(trajectory: &[Point2], config: &PlanRuleConfig) -> Vec<Vec<Point2>> {
    let p = dedup(trajectory);
    if p.len() < 3 {
        return Vec::new();
    }
    let headings: Vec<f64> = p.windows(2).map(|w| bearing(w[0], w[1])).collect();
    // straight runs as inclusive edge index ranges
    let mut runs = Vec::new();
    let mut start = 0;
    for e in 1..=headings.len() {
        if e == headings.len() || heading_diff(headings[e], headings[start]) > config.straight_heading_tolerance {
            if polyline_length(&p[start..=e]) >= config.grid_spacing {
                runs.push((start, e - 1));
            }
            start = e;
        }
    }
    runs.windows(2).map(|w| p[w[0].1..=w[1].0 + 1].to_vec()).collect()
}
