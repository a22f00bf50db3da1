use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ApId, Point2, Rect};
use crate::trajectory::{ApMarkVector, WalkStep};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackQuery {
    pub t_start: f64,
    pub t_end: f64,
    pub area: Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub t: f64,
    pub position: Point2,
    /// Whether this point was snapped onto a known AP.
    pub anchored: bool,
}

/// Dead-reckoned positions: `start` at the first step's start time, then
/// one point per step end.
pub fn dead_reckon(steps: &[WalkStep], start: Point2) -> Vec<TrackPoint> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    let mut p = start;
    out.push(TrackPoint { t: steps.first().map_or(0.0, |s| s.t_start), position: p, anchored: false });
    for s in steps {
        p += s.reported.to_offset();
        out.push(TrackPoint { t: s.t_end, position: p, anchored: false });
    }
    out
}

/// Calibrated walk.
///
/// Every mark of an AP in `known` pins its mark point to that AP's
/// position. The correction is spread linearly by dead-reckoned path length
/// between consecutive anchors; it is zero at the walk start and stays
/// constant after the last anchor. The result is clipped to the query's
/// time range and area.
pub fn track(
    query: &TrackQuery,
    steps: &[WalkStep],
    marks: &[ApMarkVector],
    known: &BTreeMap<ApId, Point2>,
    start: Point2,
) -> Result<Vec<TrackPoint>> {
    if !(query.t_start <= query.t_end) {
        return Err(Error::invalid("time_range", "start after end"));
    }
    let mut pts = dead_reckon(steps, start);
    let cumulative: Vec<f64> = pts
        .iter()
        .scan((0.0, None::<Point2>), |(acc, prev), p| {
            if let Some(q) = *prev {
                *acc += q.dist(p.position);
            }
            *prev = Some(p.position);
            Some(*acc)
        })
        .collect();
    let mut anchors: BTreeMap<usize, Point2> = BTreeMap::new();
    for m in marks {
        let Some(&ap) = known.get(&m.ap_id) else { continue };
        let t = m.timestamp();
        if let Some(k) = pts.iter().position(|p| (p.t - t).abs() < 1e-9) {
            anchors.insert(k, ap);
        }
    }
    let corrections: Vec<(usize, Point2)> =
        std::iter::once((0, Point2::ORIGIN)).chain(anchors.iter().map(|(&k, &ap)| (k, ap - pts[k].position))).collect();
    for w in corrections.windows(2) {
        let ((k0, c0), (k1, c1)) = (w[0], w[1]);
        let span = cumulative[k1] - cumulative[k0];
        for k in k0 + 1..k1 {
            let f = if span > 0.0 { (cumulative[k] - cumulative[k0]) / span } else { 1.0 };
            pts[k].position += c0.lerp(c1, f);
        }
    }
    let &(last_k, last_c) = corrections.last().expect("contains the start");
    for p in pts.iter_mut().skip(last_k + 1) {
        p.position += last_c;
    }
    for (&k, &ap) in &anchors {
        pts[k].position = ap;
        pts[k].anchored = true;
    }
    let out: Vec<TrackPoint> = pts
        .into_iter()
        .filter(|p| p.t >= query.t_start && p.t <= query.t_end && query.area.contains(p.position))
        .collect();
    if out.is_empty() {
        return Err(Error::Empty("track range"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DisplacementVector;
    use crate::trajectory::MarkRecord;

    fn steps_along(points: &[Point2]) -> Vec<WalkStep> {
        points
            .windows(2)
            .enumerate()
            .map(|(i, w)| WalkStep {
                t_start: i as f64,
                t_end: i as f64 + 1.0,
                reported: DisplacementVector::from_offset(w[1] - w[0]),
                scan: vec![],
            })
            .collect()
    }

    fn mark(ap: u32, t: f64) -> ApMarkVector {
        ApMarkVector {
            ap_id: ApId(ap),
            records: vec![MarkRecord { timestamp: t, heading: 0.0, ap_id: ApId(ap), rss: -30.0, nearby: vec![] }],
            mark_point_index: 0,
        }
    }

    fn everywhere() -> TrackQuery {
        TrackQuery { t_start: f64::NEG_INFINITY, t_end: f64::INFINITY, area: Rect::new(Point2::new(-1e9, -1e9), Point2::new(1e9, 1e9)) }
    }

    #[test]
    fn no_known_aps_is_dead_reckoning() {
        let steps = steps_along(&[Point2::ORIGIN, Point2::new(3.0, 0.0), Point2::new(3.0, 4.0)]);
        let t = track(&everywhere(), &steps, &[mark(1, 1.0)], &BTreeMap::new(), Point2::ORIGIN).unwrap();
        let dr = dead_reckon(&steps, Point2::ORIGIN);
        assert_eq!(t, dr);
    }

    #[test]
    fn single_anchor_redistribution() {
        let pts = [Point2::ORIGIN, Point2::new(5.25, 0.15), Point2::new(10.5, 0.3)];
        let steps = steps_along(&pts);
        let known = BTreeMap::from([(ApId(7), Point2::new(10.0, 0.0))]);
        let t = track(&everywhere(), &steps, &[mark(7, 2.0)], &known, Point2::ORIGIN).unwrap();
        assert_eq!(t[2].position, Point2::new(10.0, 0.0));
        assert!(t[2].anchored);
        let dr = dead_reckon(&steps, Point2::ORIGIN);
        let shift = t[1].position - dr[1].position;
        assert!((shift - Point2::new(-0.25, -0.15)).norm() < 1e-12);
        assert_eq!(t[0].position, Point2::ORIGIN);
    }

    #[test]
    fn constant_after_last_anchor() {
        let pts = [Point2::ORIGIN, Point2::new(1.0, 0.0), Point2::new(2.0, 0.0), Point2::new(3.0, 0.0)];
        let known = BTreeMap::from([(ApId(1), Point2::new(1.0, 1.0))]);
        let t = track(&everywhere(), &steps_along(&pts), &[mark(1, 1.0)], &known, Point2::ORIGIN).unwrap();
        assert!((t[3].position - Point2::new(3.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn query_clips() {
        let pts: Vec<Point2> = (0..10).map(|i| Point2::new(i as f64, 0.0)).collect();
        let q = TrackQuery { t_start: 2.0, t_end: 8.0, area: Rect::new(Point2::new(0.0, -1.0), Point2::new(5.0, 1.0)) };
        let t = track(&q, &steps_along(&pts), &[], &BTreeMap::new(), Point2::ORIGIN).unwrap();
        assert_eq!(t.iter().map(|p| p.t).collect::<Vec<_>>(), vec![2.0, 3.0, 4.0, 5.0]);
        let empty = TrackQuery { t_start: 50.0, t_end: 60.0, ..q };
        assert!(matches!(track(&empty, &steps_along(&pts), &[], &BTreeMap::new(), Point2::ORIGIN), Err(Error::Empty(_))));
    }
}
