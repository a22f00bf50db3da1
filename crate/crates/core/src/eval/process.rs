use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::approach::{Approach, ApproachConfig};
use crate::error::{Error, Result};
use crate::geometry::{bearing, sector_of_bearing, ApId, DisplacementVector, Offset, Point2};
use crate::planner::shortest_hamilton_path;
use crate::positioning::{align_to_truth, position_aps, select_positioning_edges, PositioningConfig};
use crate::trajectory::{FusionPool, PoolKey, PoolMember};
use crate::world::Scenario;

pub const DEFAULT_CHECKPOINT_EVERY: f64 = 250.0;

/// One measured AP-to-AP trajectory, complete at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub t: f64,
    pub from: ApId,
    pub to: ApId,
    pub offset: Offset,
    /// Time spent walking it.
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub t: f64,
    pub avg_error: f64,
}

/// `0, every, 2 * every, ...` up to and including `horizon`.
pub fn checkpoints(horizon: f64, every: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if !(every > 0.0) || !(horizon > 0.0) {
        return out;
    }
    let n = (horizon / every + 1e-9).floor() as usize;
    out.extend((1..=n).map(|k| k as f64 * every));
    if horizon - out[out.len() - 1] > 1e-9 {
        out.push(horizon);
    }
    out
}

/// Uniform choice among the current AP's neighbors.
pub fn random_walk_policy<R: Rng + ?Sized>(
    adjacency: &BTreeMap<ApId, Vec<ApId>>,
    current: ApId,
    rng: &mut R,
) -> Result<ApId> {
    let next = adjacency.get(&current).ok_or(Error::UnknownAp(current))?;
    match next.as_slice() {
        [] => Err(Error::Empty("incident edges")),
        [only] => Ok(*only),
        many => Ok(many[rng.random_range(0..many.len())]),
    }
}

fn truth(scenario: &Scenario) -> BTreeMap<ApId, Point2> {
    scenario.floor.aps.iter().map(|a| (a.id, a.position)).collect()
}

/// APs in Hamilton-path order from the one nearest the lower-left corner.
fn hamilton_order(positions: &BTreeMap<ApId, Point2>, corner: Point2) -> Vec<ApId> {
    let by_point: Vec<(Point2, ApId)> = positions.iter().map(|(&id, &p)| (p, id)).collect();
    let pts: Vec<Point2> = by_point.iter().map(|(p, _)| *p).collect();
    shortest_hamilton_path(&pts, corner)
        .into_iter()
        .map(|p| by_point.iter().find(|(q, _)| *q == p).expect("path holds input points").1)
        .collect()
}

struct Recorder<'a, R> {
    positions: &'a BTreeMap<ApId, Point2>,
    noise: crate::world::ImuNoiseModel,
    rng: &'a mut R,
    out: Vec<Measurement>,
}

impl<R: Rng> Recorder<'_, R> {
    fn length(&self, a: ApId, b: ApId) -> f64 {
        self.positions[&a].dist(self.positions[&b])
    }

    fn record(&mut self, t: f64, from: ApId, to: ApId, duration: f64) {
        let truth = DisplacementVector::from_offset(self.positions[&to] - self.positions[&from]);
        let offset = self.noise.perturb(truth, self.rng).to_offset();
        self.out.push(Measurement { t, from, to, offset, duration });
    }
}

/// CHI and fingerprinting: visit the APs along the Hamilton path; every leg
/// is measured, and on arrival each untraversed incident edge is walked out
/// and back in sector order. CHI measures both directions at one time unit
/// per length; fingerprinting measures the outbound walk only, at `c` per
/// length, and returns unmeasured.
fn laborer_events<R: Rng>(scenario: &Scenario, cfg: &ApproachConfig, horizon: f64, rng: &mut R) -> Vec<Measurement> {
    let positions = truth(scenario);
    let adjacency = scenario.trajectory_graph.adjacency();
    let c = cfg.time_per_length();
    let measure_return = matches!(cfg.approach, Approach::Chi);
    let order = hamilton_order(&positions, scenario.floor.bounds().min);
    let mut rec = Recorder { positions: &positions, noise: cfg.measurement_noise(), rng, out: Vec::new() };
    let mut done: BTreeSet<(ApId, ApId)> = BTreeSet::new();
    let mut t = 0.0;
    let mut prev: Option<ApId> = None;
    for &a in &order {
        if t > horizon {
            break;
        }
        if let Some(p) = prev {
            let d = c * rec.length(p, a);
            t += d;
            rec.record(t, p, a, d);
        }
        let mut incident: Vec<ApId> = adjacency.get(&a).cloned().unwrap_or_default();
        incident.sort_by_key(|b| (sector_of_bearing(bearing(positions[&a], positions[b])), *b));
        for b in incident {
            if !done.insert((a.min(b), a.max(b))) {
                continue;
            }
            let len = rec.length(a, b);
            t += c * len;
            rec.record(t, a, b, c * len);
            t += len;
            if measure_return {
                rec.record(t, b, a, len);
            }
        }
        prev = Some(a);
    }
    rec.out
}

/// Crowdsourcing: `crowds` walkers, each from a uniformly random AP, take
/// uniformly random incident edges until the horizon, measuring every
/// traversal. Walkers move in parallel, so events merge by time.
fn crowd_events<R: Rng>(scenario: &Scenario, cfg: &ApproachConfig, crowds: usize, horizon: f64, rng: &mut R) -> Result<Vec<Measurement>> {
    let positions = truth(scenario);
    let adjacency = scenario.trajectory_graph.adjacency();
    if adjacency.is_empty() {
        return Err(Error::Empty("trajectory graph"));
    }
    let starts: Vec<ApId> = adjacency.keys().copied().collect();
    let mut rec = Recorder { positions: &positions, noise: cfg.measurement_noise(), rng, out: Vec::new() };
    for _ in 0..crowds {
        let mut cur = starts[rec.rng.random_range(0..starts.len())];
        let mut t = 0.0;
        while t < horizon {
            let next = random_walk_policy(&adjacency, cur, rec.rng)?;
            let len = rec.length(cur, next);
            t += len;
            rec.record(t, cur, next, len);
            cur = next;
        }
    }
    let mut out = rec.out;
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(out)
}

/// Every measurement the approach collects up to `horizon` (the last one
/// may end after it).
pub fn collection_events(scenario: &Scenario, cfg: &ApproachConfig, horizon: f64, seed: u64) -> Result<Vec<Measurement>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match cfg.approach {
        Approach::Chi | Approach::Fingerprinting { .. } => {
            rng.set_stream(1);
            Ok(laborer_events(scenario, cfg, horizon, &mut rng))
        }
        Approach::Crowdsourcing { crowds } => {
            rng.set_stream(2);
            crowd_events(scenario, cfg, crowds, horizon, &mut rng)
        }
    }
}

/// Positions the APs from the fused pools (unreached APs stay at the
/// origin) and scores the aligned mean error.
fn constellation_error(pools: &BTreeMap<PoolKey, FusionPool>, truth: &BTreeMap<ApId, Point2>) -> Result<f64> {
    let edges = select_positioning_edges(pools.values());
    let mut est: BTreeMap<ApId, Point2> = truth.keys().map(|&id| (id, Point2::ORIGIN)).collect();
    if !edges.is_empty() {
        est.extend(position_aps(&edges, &PositioningConfig::default())?.positions);
    }
    Ok(align_to_truth(&est, truth)?.1)
}

/// Error-over-time curve. At every checkpoint all measurements finished by
/// then are fused per unordered AP pair, the APs are positioned and the
/// result is scored against ground truth.
pub fn run_process(
    scenario: &Scenario,
    cfg: &ApproachConfig,
    horizon: f64,
    checkpoint_every: f64,
    seed: u64,
) -> Result<Vec<ErrorSample>> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon", "must be a finite time >= 0"));
    }
    if !(checkpoint_every > 0.0) {
        return Err(Error::invalid("checkpoint_every", "must be > 0"));
    }
    cfg.approach.validate()?;
    let events = collection_events(scenario, cfg, horizon, seed)?;
    let truth = truth(scenario);
    let mut pools: BTreeMap<PoolKey, FusionPool> = BTreeMap::new();
    let mut next = 0;
    let mut out = Vec::new();
    let mut last: Option<f64> = None;
    for t in checkpoints(horizon, checkpoint_every) {
        let before = next;
        while next < events.len() && events[next].t <= t {
            let m = &events[next];
            let (a, b, offset) = if m.from < m.to { (m.from, m.to, m.offset) } else { (m.to, m.from, -m.offset) };
            let key = PoolKey { ap_a: a, ap_b: b, signature: 0 };
            pools.entry(key).or_insert_with(|| FusionPool::new(key)).add(PoolMember {
                offset,
                path_length: m.offset.norm(),
                t_start: m.t - m.duration,
                t_end: m.t,
            })?;
            next += 1;
        }
        let err = match last {
            Some(e) if before == next => e,
            _ => constellation_error(&pools, &truth)?,
        };
        last = Some(err);
        out.push(ErrorSample { t, avg_error: err });
    }
    Ok(out)
}
