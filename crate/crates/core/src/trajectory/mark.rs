use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::WalkStep;
use crate::error::{Error, Result};
use crate::geometry::{heading_diff, normalize_heading, ApId};

/// One scan sample as seen from a single AP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkRecord {
    pub timestamp: f64,
    pub heading: f64,
    pub ap_id: ApId,
    pub rss: f64,
    /// Other APs heard in the same scan; never contains `ap_id`.
    pub nearby: Vec<(ApId, f64)>,
}

/// Record sequence around the strongest-RSS point of one pass by an AP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApMarkVector {
    pub ap_id: ApId,
    pub records: Vec<MarkRecord>,
    pub mark_point_index: usize,
}

impl ApMarkVector {
    pub fn mark_point(&self) -> &MarkRecord {
        &self.records[self.mark_point_index]
    }

    pub fn timestamp(&self) -> f64 {
        self.mark_point().timestamp
    }

    pub fn heading(&self) -> f64 {
        self.mark_point().heading
    }

    /// Walking direction at the mark quantized to 45-degree bins, `0..8`.
    pub fn signature(&self) -> u8 {
        ((normalize_heading(self.heading()) / 45.0).round() as i64).rem_euclid(8) as u8
    }
}

/// Finds the AP-mark vector in one pass window.
///
/// The strongest record (first one on ties) is the mark point. The pass is
/// accepted only if the records directly before and after it turn by at
/// most `direction_threshold`; the returned records are the maximal
/// contiguous span around the mark point whose headings stay within the
/// threshold of the mark-point heading.
pub fn detect_ap_mark(window: &[MarkRecord], direction_threshold: f64) -> Result<Option<ApMarkVector>> {
    if window.is_empty() {
        return Err(Error::Empty("mark window"));
    }
    let peak = window
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.rss > window[best].rss { i } else { best });
    let h = window[peak].heading;
    let neighbors = [peak.checked_sub(1), Some(peak + 1).filter(|&i| i < window.len())];
    if neighbors
        .iter()
        .flatten()
        .any(|&i| heading_diff(window[i].heading, h) > direction_threshold)
    {
        return Ok(None);
    }
    let mut lo = peak;
    while lo > 0 && heading_diff(window[lo - 1].heading, h) <= direction_threshold {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < window.len() && heading_diff(window[hi + 1].heading, h) <= direction_threshold {
        hi += 1;
    }
    Ok(Some(ApMarkVector {
        ap_id: window[peak].ap_id,
        records: window[lo..=hi].to_vec(),
        mark_point_index: peak - lo,
    }))
}

/// Splits a walk into per-AP pass windows: maximal runs of consecutive
/// steps whose scans hear the AP. A window still open at the end of the
/// walk is returned only when `include_open` is set.
pub fn pass_windows(steps: &[WalkStep], include_open: bool) -> Vec<Vec<MarkRecord>> {
    let mut open: BTreeMap<ApId, Vec<MarkRecord>> = BTreeMap::new();
    let mut closed: Vec<Vec<MarkRecord>> = Vec::new();
    for step in steps {
        let heard: BTreeMap<ApId, f64> = step.scan.iter().copied().collect();
        let ended: Vec<ApId> = open.keys().filter(|id| !heard.contains_key(id)).copied().collect();
        for id in ended {
            closed.push(open.remove(&id).expect("present"));
        }
        for (&id, &rss) in &heard {
            open.entry(id).or_default().push(MarkRecord {
                timestamp: step.t_end,
                heading: step.reported.heading(),
                ap_id: id,
                rss,
                nearby: step.scan.iter().filter(|(other, _)| *other != id).copied().collect(),
            });
        }
    }
    if include_open {
        closed.extend(open.into_values());
    }
    closed.sort_by(|a, b| a[0].timestamp.total_cmp(&b[0].timestamp).then(a[0].ap_id.cmp(&b[0].ap_id)));
    closed
}

/// All AP-marks of a walk, ordered by mark-point timestamp.
pub fn extract_marks(steps: &[WalkStep], direction_threshold: f64, include_open: bool) -> Vec<ApMarkVector> {
    let mut marks: Vec<ApMarkVector> = pass_windows(steps, include_open)
        .iter()
        .filter_map(|w| detect_ap_mark(w, direction_threshold).ok().flatten())
        .collect();
    marks.sort_by(|a, b| a.timestamp().total_cmp(&b.timestamp()).then(a.ap_id.cmp(&b.ap_id)));
    marks
}

/// Per AP: whether two of its marks were walked in roughly orthogonal
/// directions (90 +/- 22.5 degrees apart). Reported, never enforced.
pub fn orthogonal_coverage(marks: &[ApMarkVector]) -> BTreeMap<ApId, bool> {
    let mut by_ap: BTreeMap<ApId, Vec<f64>> = BTreeMap::new();
    for m in marks {
        by_ap.entry(m.ap_id).or_default().push(m.heading());
    }
    by_ap
        .into_iter()
        .map(|(id, hs)| {
            let ortho = hs
                .iter()
                .enumerate()
                .any(|(i, a)| hs[i + 1..].iter().any(|b| (heading_diff(*a, *b) - 90.0).abs() <= 22.5));
            (id, ortho)
        })
        .collect()
}
