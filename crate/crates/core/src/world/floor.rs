use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ApId, Point2, Polygon, Rect};

/// A doorway in a room wall, given as a segment lying on the wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntranceSegment {
    pub a: Point2,
    pub b: Point2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub rect: Rect,
    #[serde(default)]
    pub entrances: Vec<EntranceSegment>,
}

impl Room {
    /// Wall segments of the room with the entrance gaps cut out.
    pub fn walls(&self) -> Vec<(Point2, Point2)> {
        let poly = self.rect.to_polygon();
        let mut out = Vec::new();
        for (a, b) in poly.edges() {
            let len = a.dist(b);
            if len == 0.0 {
                continue;
            }
            let dir = (b - a) * (1.0 / len);
            // entrance intervals projected onto this wall
            let mut gaps: Vec<(f64, f64)> = self
                .entrances
                .iter()
                .filter(|e| {
                    crate::geometry::point_segment_distance(e.a, a, b) < 1e-9
                        && crate::geometry::point_segment_distance(e.b, a, b) < 1e-9
                })
                .map(|e| {
                    let s = (e.a - a).dot(dir);
                    let t = (e.b - a).dot(dir);
                    (s.min(t).max(0.0), s.max(t).min(len))
                })
                .collect();
            gaps.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut cursor = 0.0;
            for (s, t) in gaps {
                if s > cursor {
                    out.push((a + dir * cursor, a + dir * s));
                }
                cursor = cursor.max(t);
            }
            if cursor < len {
                out.push((a + dir * cursor, b));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessPoint {
    pub id: ApId,
    pub position: Point2,
}

/// Ground-truth synthetic floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFloor {
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub rooms: Vec<Room>,
    #[serde(default)]
    pub obstacles: Vec<Polygon>,
    pub aps: Vec<AccessPoint>,
}

impl GroundTruthFloor {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::DegenerateArea { width, height });
        }
        Ok(GroundTruthFloor {
            width,
            height,
            rooms: Vec::new(),
            obstacles: Vec::new(),
            aps: Vec::new(),
        })
    }

    pub fn bounds(&self) -> Rect {
        Rect::from_size(self.width, self.height)
    }

    pub fn ap(&self, id: ApId) -> Result<&AccessPoint> {
        self.aps.iter().find(|a| a.id == id).ok_or(Error::UnknownAp(id))
    }

    pub fn ap_position(&self, id: ApId) -> Result<Point2> {
        self.ap(id).map(|a| a.position)
    }

    /// Checks the bounds invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::DegenerateArea { width: self.width, height: self.height });
        }
        let bounds = self.bounds();
        for ap in &self.aps {
            if !ap.position.is_finite() || !bounds.contains(ap.position) {
                return Err(Error::invalid("aps", format!("{} lies outside the floor", ap.id)));
            }
        }
        for room in &self.rooms {
            if !bounds.contains_rect(&room.rect) {
                return Err(Error::invalid("rooms", "room outside the floor"));
            }
        }
        for ob in &self.obstacles {
            if ob.vertices.iter().any(|v| !bounds.contains(*v)) {
                return Err(Error::invalid("obstacles", "obstacle outside the floor"));
            }
        }
        let mut ids: Vec<ApId> = self.aps.iter().map(|a| a.id).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("aps", "duplicate AP id"));
        }
        Ok(())
    }

    pub fn is_free(&self, p: Point2) -> bool {
        self.bounds().contains(p) && !self.obstacles.iter().any(|o| o.contains_strict(p))
    }

    /// All segments that block movement: obstacle edges, room walls and the
    /// floor boundary.
    pub fn barriers(&self) -> Vec<(Point2, Point2)> {
        let mut out: Vec<(Point2, Point2)> = self.bounds().to_polygon().edges().collect();
        for ob in &self.obstacles {
            out.extend(ob.edges());
        }
        for room in &self.rooms {
            out.extend(room.walls());
        }
        out
    }

    /// Moves from `from` toward `to`, stopping just short of the first
    /// barrier crossed. Returns the reached point and whether the move was
    /// clipped.
    pub fn clip_move(&self, from: Point2, to: Point2) -> (Point2, bool) {
        const BACKOFF: f64 = 1e-6;
        let d = to - from;
        let len = d.norm();
        if len == 0.0 {
            return (from, false);
        }
        let mut t_hit = f64::INFINITY;
        for (a, b) in self.barriers() {
            if let Some(t) = ray_segment_hit(from, d, a, b) {
                // leaving a barrier we are standing on is allowed
                if t * len > BACKOFF && t < t_hit {
                    t_hit = t;
                }
            }
        }
        if t_hit <= 1.0 {
            let t = (t_hit - BACKOFF / len).max(0.0);
            (from + d * t, true)
        } else {
            (to, false)
        }
    }
}

/// Parameter `t` in `[0, 1]` at which `from + t * d` meets segment `[a, b]`.
fn ray_segment_hit(from: Point2, d: Point2, a: Point2, b: Point2) -> Option<f64> {
    let e = b - a;
    let denom = d.cross(e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let t = (a - from).cross(e) / denom;
    let u = (a - from).cross(d) / denom;
    if (0.0..=1.0).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
        Some(t)
    } else {
        None
    }
}
