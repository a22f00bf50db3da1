//! Planar geometry and the displacement-vector algebra the rest of the
//! engine is built on.
//!
//! Headings are degrees measured counter-clockwise from +x. Lengths are
//! abstract length units; a scenario may attach a unit label.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Access point identifier.
///
/// Integer internally, rendered as a locally administered MAC address in
/// every export (`02:00:00:00:00:2a` for id 42).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ApId(pub u32);

impl fmt::Display for ApId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.0.to_be_bytes();
        write!(
            f,
            "02:00:{:02x}:{:02x}:{:02x}:{:02x}",
            b[0], b[1], b[2], b[3]
        )
    }
}

impl FromStr for ApId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(n) = s.parse::<u32>() {
            return Ok(ApId(n));
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 6 {
            return Err(format!("invalid AP identifier `{s}`"));
        }
        let mut bytes = [0u8; 6];
        for (slot, part) in bytes.iter_mut().zip(&parts) {
            *slot = u8::from_str_radix(part, 16).map_err(|_| format!("invalid AP identifier `{s}`"))?;
        }
        if bytes[0] != 0x02 || bytes[1] != 0x00 {
            return Err(format!("AP identifier `{s}` is outside the engine's address range"));
        }
        Ok(ApId(u32::from_be_bytes([bytes[2], bytes[3], bytes[4], bytes[5]])))
    }
}

impl Serialize for ApId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ApId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A planar point, also used for planar offsets `(dx, dy)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// A planar offset between two points.
pub type Offset = Point2;

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        self + (other - self) * t
    }

    /// Rotates counter-clockwise by `degrees` about the origin.
    pub fn rotated(self, degrees: f64) -> Point2 {
        let (s, c) = degrees.to_radians().sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// Normalizes a heading into `[0, 360)`.
pub fn normalize_heading(degrees: f64) -> f64 {
    let h = degrees.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// Smallest absolute angular separation between two headings, in `[0, 180]`.
pub fn heading_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

/// Bearing from `from` to `to` in degrees, `[0, 360)`.
pub fn bearing(from: Point2, to: Point2) -> f64 {
    let d = to - from;
    normalize_heading(d.y.atan2(d.x).to_degrees())
}

/// Sector of a bearing: eight 45-degree sectors, sector 0 centered on +x.
/// Sector `k` covers bearings `(45k - 22.5, 45k + 22.5]`.
pub fn sector_of_bearing(bearing: f64) -> u8 {
    let k = ((normalize_heading(bearing) - 22.5) / 45.0).ceil() as i64;
    k.rem_euclid(8) as u8
}

/// A planar step of the walker: heading plus length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementVector {
    heading: f64,
    length: f64,
}

impl DisplacementVector {
    /// Builds a vector, normalizing the heading. Negative lengths flip the
    /// heading so that the stored length is never negative.
    pub fn new(heading: f64, length: f64) -> Self {
        if length < 0.0 {
            DisplacementVector {
                heading: normalize_heading(heading + 180.0),
                length: -length,
            }
        } else {
            DisplacementVector {
                heading: normalize_heading(heading),
                length,
            }
        }
    }

    /// Heading of a zero-length offset is 0.
    pub fn from_offset(offset: Offset) -> Self {
        let length = offset.norm();
        if length == 0.0 {
            return DisplacementVector { heading: 0.0, length: 0.0 };
        }
        DisplacementVector::new(offset.y.atan2(offset.x).to_degrees(), length)
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn to_offset(&self) -> Offset {
        let (s, c) = self.heading.to_radians().sin_cos();
        Point2::new(self.length * c, self.length * s)
    }
}

/// Component-wise sum of the vectors' planar offsets.
pub fn sum_displacements(vectors: &[DisplacementVector]) -> Offset {
    vectors
        .iter()
        .fold(Point2::ORIGIN, |acc, v| acc + v.to_offset())
}

/// Fused displacement between two APs: `position(ap_b) - position(ap_a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementEdge {
    pub ap_a: ApId,
    pub ap_b: ApId,
    pub displacement: Offset,
    pub source_count: usize,
}

impl DisplacementEdge {
    pub fn new(ap_a: ApId, ap_b: ApId, displacement: Offset) -> Self {
        DisplacementEdge { ap_a, ap_b, displacement, source_count: 1 }
    }

    /// Same edge seen from the other end.
    pub fn reversed(&self) -> Self {
        DisplacementEdge {
            ap_a: self.ap_b,
            ap_b: self.ap_a,
            displacement: -self.displacement,
            source_count: self.source_count,
        }
    }
}

/// Sum of consecutive Euclidean distances.
pub fn polyline_length(points: &[Point2]) -> f64 {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Self {
        Rect {
            min: Point2::new(min.x.min(max.x), min.y.min(max.y)),
            max: Point2::new(min.x.max(max.x), min.y.max(max.y)),
        }
    }

    pub fn from_size(width: f64, height: f64) -> Self {
        Rect::new(Point2::ORIGIN, Point2::new(width, height))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    pub fn clamp(&self, p: Point2) -> Point2 {
        Point2::new(p.x.clamp(self.min.x, self.max.x), p.y.clamp(self.min.y, self.max.y))
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(vec![
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ])
    }

    pub fn bounding(points: &[Point2]) -> Option<Rect> {
        let first = *points.first()?;
        let (mut lo, mut hi) = (first, first);
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        Some(Rect { min: lo, max: hi })
    }
}

/// Simple polygon given by its vertices in order (closing edge implied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Point2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point2>) -> Self {
        Polygon { vertices }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Even-odd containment. Points on the boundary count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        if self.vertices.len() < 3 {
            return false;
        }
        if self.edges().any(|(a, b)| point_segment_distance(p, a, b) < 1e-12) {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Strict interior test: inside and not on the boundary.
    pub fn contains_strict(&self, p: Point2) -> bool {
        self.contains(p) && self.edges().all(|(a, b)| point_segment_distance(p, a, b) > 1e-9)
    }

    pub fn area(&self) -> f64 {
        self.edges().map(|(a, b)| a.cross(b)).sum::<f64>().abs() / 2.0
    }

    pub fn bounding_rect(&self) -> Option<Rect> {
        Rect::bounding(&self.vertices)
    }

    /// True when the segment touches the polygon's interior or crosses its
    /// boundary.
    pub fn intersects_segment(&self, a: Point2, b: Point2) -> bool {
        if self.contains_strict(a) || self.contains_strict(b) {
            return true;
        }
        // split the segment at every boundary contact; it enters the
        // interior iff some piece has its midpoint strictly inside
        let d = b - a;
        let len2 = d.dot(d);
        if len2 == 0.0 {
            return false;
        }
        let mut ts = vec![0.0, 1.0];
        for (p, q) in self.edges() {
            let e = q - p;
            let denom = d.cross(e);
            if denom.abs() > 1e-15 {
                let t = (p - a).cross(e) / denom;
                let u = (p - a).cross(d) / denom;
                if (-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
                    ts.push(t.clamp(0.0, 1.0));
                }
            } else {
                // parallel: collinear overlap contributes the edge endpoints
                for v in [p, q] {
                    if (v - a).cross(d).abs() < 1e-12 {
                        ts.push(((v - a).dot(d) / len2).clamp(0.0, 1.0));
                    }
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.windows(2)
            .filter(|w| w[1] - w[0] > 1e-12)
            .any(|w| self.contains_strict(a.lerp(b, (w[0] + w[1]) / 2.0)))
    }
}

/// Euclidean distance from `p` to segment `[a, b]`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    p.dist(closest_point_on_segment(p, a, b))
}

pub fn closest_point_on_segment(p: Point2, a: Point2, b: Point2) -> Point2 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Distance from `p` to the polyline. A single-point polyline degenerates
/// to point distance; an empty one is infinitely far.
pub fn point_polyline_distance(p: Point2, polyline: &[Point2]) -> f64 {
    match polyline {
        [] => f64::INFINITY,
        [only] => p.dist(*only),
        _ => polyline
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
        (b - a).cross(c - a)
    }
    fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
        p.x >= a.x.min(b.x) - 1e-12
            && p.x <= a.x.max(b.x) + 1e-12
            && p.y >= a.y.min(b.y) - 1e-12
            && p.y <= a.y.max(b.y) + 1e-12
    }
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Convex hull by monotone chain, counter-clockwise, no collinear points.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if (b - a).cross(p - a) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}
