use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{closest_point_on_segment, point_polyline_distance, Point2, Polygon, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Passage,
    Entrance,
    Room,
    /// Marks the closed end of a dead-end passage.
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Inferred,
    Corrected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Geometry {
    Polyline { points: Vec<Point2>, width: f64 },
    /// Convex hull of the covered path, with its bounding rectangle when
    /// the hull is close to rectangular.
    Area { hull: Vec<Point2>, rect: Option<Rect> },
    Point { at: Point2, width: f64 },
}

fn inflate(r: Rect, by: f64) -> Rect {
    Rect::new(r.min - Point2::new(by, by), r.max + Point2::new(by, by))
}

impl Geometry {
    /// Area from a hull, snapped to the bounding rectangle when the hull
    /// fills at least 90% of it.
    pub fn area_from_hull(hull: Vec<Point2>) -> Geometry {
        let rect = Rect::bounding(&hull)
            .filter(|r| r.area() > 0.0 && Polygon::new(hull.clone()).area() >= 0.9 * r.area());
        Geometry::Area { hull, rect }
    }

    pub fn contains(&self, p: Point2) -> bool {
        const EPS: f64 = 1e-9;
        match self {
            Geometry::Polyline { points, width } => point_polyline_distance(p, points) <= width / 2.0 + EPS,
            Geometry::Area { hull, rect } => {
                Polygon::new(hull.clone()).contains(p) || rect.is_some_and(|r| r.contains(p))
            }
            Geometry::Point { at, width } => at.dist(p) <= width / 2.0 + EPS,
        }
    }

    pub fn bounds(&self) -> Option<Rect> {
        match self {
            Geometry::Polyline { points, width } => Rect::bounding(points).map(|r| inflate(r, width / 2.0)),
            Geometry::Area { hull, rect } => rect.or_else(|| Rect::bounding(hull)),
            Geometry::Point { at, width } => Some(inflate(Rect::new(*at, *at), width / 2.0)),
        }
    }

    /// Representative point: polyline midpoint vertex, area centroid of
    /// the hull vertices, or the point itself.
    pub fn anchor(&self) -> Option<Point2> {
        match self {
            Geometry::Polyline { points, .. } => points.get(points.len() / 2).copied(),
            Geometry::Area { hull, .. } if !hull.is_empty() => {
                let s = hull.iter().fold(Point2::ORIGIN, |acc, &p| acc + p);
                Some(s * (1.0 / hull.len() as f64))
            }
            Geometry::Area { .. } => None,
            Geometry::Point { at, .. } => Some(*at),
        }
    }

    /// Closest point on the hull boundary of an area geometry.
    pub fn boundary_point(&self, p: Point2) -> Option<Point2> {
        let Geometry::Area { hull, .. } = self else { return None };
        match hull.as_slice() {
            [] => None,
            [only] => Some(*only),
            _ => Polygon::new(hull.clone())
                .edges()
                .map(|(a, b)| closest_point_on_segment(p, a, b))
                .min_by(|a, b| a.dist(p).total_cmp(&b.dist(p))),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Geometry::Polyline { points, width } => points.iter().all(|p| p.is_finite()) && width.is_finite(),
            Geometry::Area { hull, rect } => {
                hull.iter().all(|p| p.is_finite()) && rect.is_none_or(|r| r.min.is_finite() && r.max.is_finite())
            }
            Geometry::Point { at, width } => at.is_finite() && width.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorComponent {
    pub id: u64,
    pub kind: ComponentKind,
    pub geometry: Geometry,
    pub locked: bool,
    pub source: Source,
}

impl FloorComponent {
    pub fn validate(&self) -> Result<()> {
        if !self.geometry.is_finite() {
            return Err(Error::invalid("geometry", "non-finite coordinate"));
        }
        Ok(())
    }
}

/// Thresholds for floor-plan inference, all in length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanRuleConfig {
    pub closure_radius: f64,
    pub overlap_tolerance: f64,
    pub turn_length_threshold: f64,
    pub polyline_fit_tolerance: f64,
    pub grid_spacing: f64,
    pub passage_width: f64,
    pub entrance_width: f64,
    /// Heading spread allowed inside one straight segment, in degrees.
    pub straight_heading_tolerance: f64,
}

impl Default for PlanRuleConfig {
    fn default() -> Self {
        PlanRuleConfig {
            closure_radius: 1.5,
            overlap_tolerance: 1.0,
            turn_length_threshold: 5.0,
            polyline_fit_tolerance: 1.0,
            grid_spacing: 2.0,
            passage_width: 2.0,
            entrance_width: 1.0,
            straight_heading_tolerance: 20.0,
        }
    }
}

impl PlanRuleConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("closure_radius", self.closure_radius),
            ("overlap_tolerance", self.overlap_tolerance),
            ("turn_length_threshold", self.turn_length_threshold),
            ("polyline_fit_tolerance", self.polyline_fit_tolerance),
            ("grid_spacing", self.grid_spacing),
            ("passage_width", self.passage_width),
            ("entrance_width", self.entrance_width),
            ("straight_heading_tolerance", self.straight_heading_tolerance),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be > 0"));
            }
        }
        Ok(())
    }
}
