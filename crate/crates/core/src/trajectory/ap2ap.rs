use serde::{Deserialize, Serialize};

use super::mark::ApMarkVector;
use super::segment::SegmentedWalk;
use crate::geometry::{sum_displacements, DisplacementVector, Offset};

/// The walk between two consecutive AP-marks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApToApTrajectory {
    pub start_mark: ApMarkVector,
    pub end_mark: ApMarkVector,
    pub vectors: Vec<DisplacementVector>,
    pub t_start: f64,
    pub t_end: f64,
}

impl ApToApTrajectory {
    pub fn offset(&self) -> Offset {
        sum_displacements(&self.vectors)
    }

    pub fn path_length(&self) -> f64 {
        self.vectors.iter().map(|v| v.length()).sum()
    }

    pub fn signature(&self) -> u8 {
        self.start_mark.signature()
    }
}

/// One trajectory per pair of consecutive marks. Pairs whose marks belong
/// to the same AP are skipped.
pub fn build_ap_to_ap(walk: &SegmentedWalk, marks: &[ApMarkVector]) -> Vec<ApToApTrajectory> {
    marks
        .windows(2)
        .filter(|w| w[0].ap_id != w[1].ap_id)
        .map(|w| {
            let (t0, t1) = (w[0].timestamp(), w[1].timestamp());
            ApToApTrajectory {
                start_mark: w[0].clone(),
                end_mark: w[1].clone(),
                vectors: walk.clip(t0, t1),
                t_start: t0,
                t_end: t1,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ApId, Point2};
    use crate::trajectory::mark::extract_marks;
    use crate::trajectory::segment::segment_walk;
    use crate::trajectory::WalkStep;
    use crate::world::RssModel;

    /// Noiseless unit steps along a polyline past APs; returns the steps.
    fn walk_through(waypoints: &[Point2], aps: &[(ApId, Point2)]) -> Vec<WalkStep> {
        let model = RssModel { coverage_radius: 3.0, ..RssModel::default() };
        let mut steps = Vec::new();
        let mut t = 0.0;
        for seg in waypoints.windows(2) {
            let n = seg[0].dist(seg[1]).round() as usize;
            let dir = DisplacementVector::from_offset(seg[1] - seg[0]);
            for i in 1..=n {
                let p = seg[0].lerp(seg[1], i as f64 / n as f64);
                let scan = aps
                    .iter()
                    .filter(|(_, a)| a.dist(p) <= model.coverage_radius)
                    .map(|(id, a)| (*id, model.mean_rss(a.dist(p))))
                    .collect();
                steps.push(WalkStep {
                    t_start: t,
                    t_end: t + 1.0,
                    reported: DisplacementVector::new(dir.heading(), 1.0),
                    scan,
                });
                t += 1.0;
            }
        }
        steps
    }

    #[test]
    fn two_marks_one_trajectory() {
        let aps = [(ApId(1), Point2::new(5.0, 1.0)), (ApId(2), Point2::new(15.0, 1.0))];
        let steps = walk_through(&[Point2::new(0.0, 0.0), Point2::new(20.0, 0.0)], &aps);
        let marks = extract_marks(&steps, 20.0, true);
        assert_eq!(marks.len(), 2);
        let walk = segment_walk(&steps, 20.0);
        let trajs = build_ap_to_ap(&walk, &marks);
        assert_eq!(trajs.len(), 1);
        assert_eq!((trajs[0].start_mark.ap_id, trajs[0].end_mark.ap_id), (ApId(1), ApId(2)));
        assert!((trajs[0].offset() - Point2::new(10.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn intermediate_mark_splits() {
        let aps = [
            (ApId(1), Point2::new(5.0, 1.0)),
            (ApId(3), Point2::new(10.0, 1.0)),
            (ApId(2), Point2::new(15.0, 1.0)),
        ];
        let steps = walk_through(&[Point2::new(0.0, 0.0), Point2::new(20.0, 0.0)], &aps);
        let marks = extract_marks(&steps, 20.0, true);
        let trajs = build_ap_to_ap(&segment_walk(&steps, 20.0), &marks);
        let pairs: Vec<_> = trajs.iter().map(|t| (t.start_mark.ap_id, t.end_mark.ap_id)).collect();
        assert_eq!(pairs, vec![(ApId(1), ApId(3)), (ApId(3), ApId(2))]);
    }

    #[test]
    fn two_walks_same_signature() {
        let aps = [(ApId(1), Point2::new(5.0, 1.0)), (ApId(2), Point2::new(16.0, 8.0))];
        let direct = walk_through(&[Point2::new(0.0, 0.0), Point2::new(10.0, 0.0), Point2::new(15.0, 5.0), Point2::new(15.0, 12.0)], &aps);
        let detour = walk_through(&[Point2::new(0.0, 0.0), Point2::new(10.0, 0.0), Point2::new(10.0, 8.0), Point2::new(20.0, 8.0)], &aps);
        let mut sigs = Vec::new();
        for steps in [direct, detour] {
            let trajs = build_ap_to_ap(&segment_walk(&steps, 20.0), &extract_marks(&steps, 20.0, true));
            assert_eq!(trajs.len(), 1);
            sigs.push((trajs[0].start_mark.ap_id, trajs[0].end_mark.ap_id, trajs[0].signature()));
        }
        assert_eq!(sigs[0], sigs[1]);
    }
}
