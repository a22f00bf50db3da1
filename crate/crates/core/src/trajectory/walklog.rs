//! Walk-log CSV.
//!
//! Columns, in order, with a header row:
//!
//! ```text
//! timestamp,reported_heading_deg,reported_step_len,scan
//! 3.5,90,0.5,02:00:00:00:00:01:-41.2;02:00:00:00:00:07:-63
//! ```
//!
//! `timestamp` is the time at the end of the step. `scan` holds the APs
//! heard there as `ap_id:rss` pairs separated by `;` (empty when none).
//! On import a step starts at the previous row's timestamp; the first step
//! starts `reported_step_len` earlier, at unit walking speed.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::WalkStep;
use crate::error::{Error, Result};
use crate::geometry::{ApId, DisplacementVector};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    timestamp: f64,
    reported_heading_deg: f64,
    reported_step_len: f64,
    scan: String,
}

fn format_scan(scan: &[(ApId, f64)]) -> String {
    scan.iter().map(|(id, rss)| format!("{id}:{rss}")).collect::<Vec<_>>().join(";")
}

fn parse_scan(s: &str) -> Result<Vec<(ApId, f64)>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let (id, rss) = pair.rsplit_once(':').ok_or_else(|| Error::Corrupt(format!("bad scan entry {pair:?}")))?;
            let id: ApId = id.trim().parse().map_err(Error::Corrupt)?;
            let rss: f64 = rss.trim().parse().map_err(|_| Error::Corrupt(format!("bad rss in {pair:?}")))?;
            Ok((id, rss))
        })
        .collect()
}

pub fn write_walk_log<W: Write>(steps: &[WalkStep], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in steps {
        w.serialize(Row {
            timestamp: s.t_end,
            reported_heading_deg: s.reported.heading(),
            reported_step_len: s.reported.length(),
            scan: format_scan(&s.scan),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_walk_log<R: Read>(input: R) -> Result<Vec<WalkStep>> {
    let mut r = csv::Reader::from_reader(input);
    let mut steps: Vec<WalkStep> = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        let t_start = steps.last().map(|s| s.t_end).unwrap_or(row.timestamp - row.reported_step_len);
        if row.timestamp < t_start {
            return Err(Error::Corrupt(format!("timestamp {} goes backwards", row.timestamp)));
        }
        steps.push(WalkStep {
            t_start,
            t_end: row.timestamp,
            reported: DisplacementVector::new(row.reported_heading_deg, row.reported_step_len),
            scan: parse_scan(&row.scan)?,
        });
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let steps = vec![
            WalkStep { t_start: 0.0, t_end: 0.5, reported: DisplacementVector::new(90.0, 0.5), scan: vec![] },
            WalkStep {
                t_start: 0.5,
                t_end: 1.0,
                reported: DisplacementVector::new(93.25, 0.5),
                scan: vec![(ApId(1), -41.2), (ApId(7), -63.0)],
            },
        ];
        let mut buf = Vec::new();
        write_walk_log(&steps, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("timestamp,reported_heading_deg,reported_step_len,scan\n"));
        assert!(text.contains("02:00:00:00:00:01:-41.2;02:00:00:00:00:07:-63"));
        assert_eq!(read_walk_log(buf.as_slice()).unwrap(), steps);
    }

    #[test]
    fn bad_scan_rejected() {
        let text = "timestamp,reported_heading_deg,reported_step_len,scan\n1,0,1,garbage\n";
        assert!(read_walk_log(text.as_bytes()).is_err());
    }
}
