use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::WalkStep;
use crate::geometry::{heading_diff, DisplacementVector, Offset, Point2};

/// Steps and time covered by one segmented vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSpan {
    pub steps: Range<usize>,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SegmentedWalk {
    pub vectors: Vec<DisplacementVector>,
    pub spans: Vec<VectorSpan>,
    pub steps: Vec<WalkStep>,
}

impl SegmentedWalk {
    pub fn total_offset(&self) -> Offset {
        self.vectors.iter().fold(Point2::ORIGIN, |acc, v| acc + v.to_offset())
    }
}

fn group_sum(steps: &[WalkStep]) -> DisplacementVector {
    DisplacementVector::from_offset(steps.iter().fold(Point2::ORIGIN, |acc, s| acc + s.reported.to_offset()))
}

/// Greedy left-to-right grouping of timed steps. A new vector starts when a
/// step deviates more than `threshold` degrees from the first step of the
/// current vector.
pub fn segment_walk(steps: &[WalkStep], threshold: f64) -> SegmentedWalk {
    let mut walk = SegmentedWalk { steps: steps.to_vec(), ..Default::default() };
    let mut start = 0;
    for i in 1..=steps.len() {
        let split = i == steps.len()
            || heading_diff(steps[i].reported.heading(), steps[start].reported.heading()) > threshold;
        if split && i > start {
            walk.vectors.push(group_sum(&steps[start..i]));
            walk.spans.push(VectorSpan {
                steps: start..i,
                t_start: steps[start].t_start,
                t_end: steps[i - 1].t_end,
            });
            start = i;
        }
    }
    walk
}

/// Segments bare reported steps, taking one time unit per step.
pub fn segment_vectors(steps: &[DisplacementVector], threshold: f64) -> SegmentedWalk {
    let timed: Vec<WalkStep> = steps
        .iter()
        .enumerate()
        .map(|(i, &v)| WalkStep { t_start: i as f64, t_end: (i + 1) as f64, reported: v, scan: Vec::new() })
        .collect();
    segment_walk(&timed, threshold)
}

impl SegmentedWalk {
    /// The walk restricted to `[t0, t1]`: vectors keep their segmentation,
    /// partially covered ones shrink to their steps inside the window.
    pub fn clip(&self, t0: f64, t1: f64) -> Vec<DisplacementVector> {
        const EPS: f64 = 1e-9;
        self.spans
            .iter()
            .filter_map(|span| {
                let inside: Vec<WalkStep> = self.steps[span.steps.clone()]
                    .iter()
                    .filter(|s| s.t_start >= t0 - EPS && s.t_end <= t1 + EPS)
                    .cloned()
                    .collect();
                (!inside.is_empty()).then(|| group_sum(&inside))
            })
            .collect()
    }
}
