use serde::{Deserialize, Serialize};

use super::hamilton::shortest_hamilton_path;
use crate::error::{Error, Result};
use crate::geometry::{point_polyline_distance, Point2, Polygon, Rect};

/// Lattice coordinates along one axis: `lo, lo + s, ...`, plus `hi` when the
/// steps do not land on it, so the far edge is always covered.
fn axis(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    let steps = ((hi - lo) / spacing + 1e-9).floor() as usize;
    let mut v: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * spacing).collect();
    if hi - v[v.len() - 1] > 1e-9 * spacing.max(1.0) {
        v.push(hi);
    }
    v
}

/// Lattice over `area` from its lower-left corner. Points inside or on an
/// obstacle are dropped.
pub fn grid_points(area: &Rect, spacing: f64, obstacles: &[Polygon]) -> Result<Vec<Point2>> {
    if !(area.width() > 0.0 && area.height() > 0.0) {
        return Err(Error::DegenerateArea { width: area.width(), height: area.height() });
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid("spacing", "must be > 0"));
    }
    let xs = axis(area.min.x, area.max.x, spacing);
    let ys = axis(area.min.y, area.max.y, spacing);
    Ok(ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| Point2::new(x, y)))
        .filter(|p| !obstacles.iter().any(|o| o.contains(*p)))
        .collect())
}

/// Remaining coverage pathway, possibly split into disconnected pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePlan {
    /// Ordered point paths; together they hold exactly the pending points.
    pub components: Vec<Vec<Point2>>,
    pub spacing: f64,
    pub start: Point2,
    /// Obstacles known so far.
    pub obstacles: Vec<Polygon>,
}

impl CoveragePlan {
    /// Lattice over `area` at `spacing` joined by one shortest Hamilton path
    /// from the lattice point nearest `start`.
    pub fn new(area: &Rect, spacing: f64, obstacles: &[Polygon], start: Point2) -> Result<Self> {
        let points = grid_points(area, spacing, obstacles)?;
        let path = shortest_hamilton_path(&points, start);
        let mut plan = CoveragePlan { components: Vec::new(), spacing, start, obstacles: obstacles.to_vec() };
        plan.components = plan.split_blocked(path);
        Ok(plan)
    }

    pub fn pending_points(&self) -> impl Iterator<Item = &Point2> {
        self.components.iter().flatten()
    }

    pub fn pending_count(&self) -> usize {
        self.components.iter().map(Vec::len).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.components.is_empty()
    }

    fn blocked(&self, a: Point2, b: Point2) -> bool {
        self.obstacles.iter().any(|o| o.intersects_segment(a, b))
    }

    /// Cuts a path wherever an edge crosses a known obstacle.
    fn split_blocked(&self, path: Vec<Point2>) -> Vec<Vec<Point2>> {
        let mut out: Vec<Vec<Point2>> = Vec::new();
        let mut cur: Vec<Point2> = Vec::new();
        for p in path {
            if let Some(&last) = cur.last() {
                if self.blocked(last, p) {
                    out.push(std::mem::take(&mut cur));
                }
            }
            cur.push(p);
        }
        if !cur.is_empty() {
            out.push(cur);
        }
        out
    }

    /// The component whose nearer end is closest to `from`, oriented to
    /// start at that end.
    pub fn next_leg(&self, from: Point2) -> Option<Vec<Point2>> {
        let (idx, reversed, _) = self
            .components
            .iter()
            .enumerate()
            .flat_map(|(i, c)| {
                [(i, false, c[0].dist(from)), (i, true, c[c.len() - 1].dist(from))]
            })
            .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)))?;
        let mut leg = self.components[idx].clone();
        if reversed {
            leg.reverse();
        }
        Some(leg)
    }
}

/// Drops pending points within `radius` of the walked polyline and cuts
/// path edges blocked by newly discovered obstacles.
///
/// Removed points are bridged over inside their component; the bridge is
/// cut too when an obstacle blocks it. Separate components are never
/// reconnected. Points that fall inside a new obstacle are dropped.
pub fn update_coverage(plan: &CoveragePlan, trajectory: &[Point2], radius: f64, new_obstacles: &[Polygon]) -> CoveragePlan {
    let mut next = plan.clone();
    for o in new_obstacles {
        if !next.obstacles.contains(o) {
            next.obstacles.push(o.clone());
        }
    }
    let keep = |p: &Point2| {
        point_polyline_distance(*p, trajectory) > radius && !new_obstacles.iter().any(|o| o.contains(*p))
    };
    let mut components = Vec::new();
    for comp in &plan.components {
        let remaining: Vec<Point2> = comp.iter().copied().filter(keep).collect();
        components.extend(next.split_blocked(remaining));
    }
    next.components = components;
    next
}
