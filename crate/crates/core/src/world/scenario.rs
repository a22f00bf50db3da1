//! Scenario generation and the scenario file format.
//!
//! A scenario file is a single JSON object:
//!
//! ```json
//! {
//!   "format": "chi-walk.scenario/1",
//!   "name": "grid100",
//!   "unit": "length units",
//!   "seed": 7,
//!   "start": { "x": 0.0, "y": 0.0 },
//!   "floor": { "width": 100.0, "height": 100.0, "rooms": [], "obstacles": [],
//!              "aps": [ { "id": "02:00:00:00:00:00", "position": { "x": 1.0, "y": 2.0 } } ] },
//!   "rss": { "tx_power": -30.0, "path_loss_exponent": 3.0, "reference_distance": 1.0,
//!            "coverage_radius": 10.0, "noise_sigma": 0.0 },
//!   "imu": { "heading_error_bound": 30.0, "length_error_fraction": 0.1 },
//!   "trajectory_graph": [ ["02:00:00:00:00:00", "02:00:00:00:00:01"] ]
//! }
//! ```
//!
//! Rooms are `{ "rect": { "min": .., "max": .. }, "entrances": [ { "a": .., "b": .. } ] }`,
//! obstacles are `{ "vertices": [ .. ] }`. Unknown fields are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::floor::{AccessPoint, EntranceSegment, GroundTruthFloor, Room};
use super::rss::RssModel;
use super::walker::ImuNoiseModel;
use crate::error::{Error, Result};
use crate::geometry::{bearing, sector_of_bearing, ApId, DisplacementEdge, Point2, Rect};

pub const SCENARIO_FORMAT: &str = "chi-walk.scenario/1";

/// Undirected AP-to-AP trajectory graph; edges stored with `a < b`, sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrajectoryGraph {
    edges: Vec<(ApId, ApId)>,
}

impl TrajectoryGraph {
    pub fn from_edges(edges: impl IntoIterator<Item = (ApId, ApId)>) -> Self {
        let set: BTreeSet<(ApId, ApId)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        TrajectoryGraph { edges: set.into_iter().collect() }
    }

    pub fn edges(&self) -> &[(ApId, ApId)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, a: ApId, b: ApId) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search(&key).is_ok()
    }

    /// Neighbor lists, each sorted by id.
    pub fn adjacency(&self) -> BTreeMap<ApId, Vec<ApId>> {
        let mut adj: BTreeMap<ApId, Vec<ApId>> = BTreeMap::new();
        for &(a, b) in &self.edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        for v in adj.values_mut() {
            v.sort();
        }
        adj
    }

    pub fn degree(&self, ap: ApId) -> usize {
        self.edges.iter().filter(|(a, b)| *a == ap || *b == ap).count()
    }

    /// Ground-truth displacement of every edge.
    pub fn true_edges(&self, floor: &GroundTruthFloor) -> Result<Vec<DisplacementEdge>> {
        self.edges
            .iter()
            .map(|&(a, b)| Ok(DisplacementEdge::new(a, b, floor.ap_position(b)? - floor.ap_position(a)?)))
            .collect()
    }

    /// Number of connected components over the given vertex set.
    pub fn component_count(&self, vertices: &[ApId]) -> usize {
        let adj = self.adjacency();
        let mut seen = BTreeSet::new();
        let mut count = 0;
        for &v in vertices {
            if !seen.insert(v) {
                continue;
            }
            count += 1;
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                for &w in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        count
    }
}

/// Parameters of the random AP deployment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub n_aps: usize,
    pub width: f64,
    pub height: f64,
    /// Probability of linking an AP to its nearest neighbor in a sector.
    pub sector_edge_prob: f64,
    /// Only APs within this distance count as sector neighbors; `None`
    /// means every other AP does.
    pub neighbor_radius: Option<f64>,
}

impl GraphParams {
    /// 100 APs over a 100 x 100 square, sector probability 0.5.
    pub fn grid100() -> Self {
        GraphParams {
            n_aps: 100,
            width: 100.0,
            height: 100.0,
            sector_edge_prob: 0.5,
            neighbor_radius: Some(GRID100_NEIGHBOR_RADIUS),
        }
    }
}

/// Neighbor radius of the `grid100` builtin: 1.5 coverage radii.
pub const GRID100_NEIGHBOR_RADIUS: f64 = 15.0;

/// Deploys APs uniformly and builds the trajectory graph.
///
/// For every AP and each of its eight sectors that holds a neighbor, an
/// edge to the nearest neighbor in that sector is added with probability
/// `sector_edge_prob`. Afterwards each still-isolated AP is linked to its
/// global nearest neighbor, so no vertex is isolated.
pub fn generate_random_scenario(params: &GraphParams, seed: u64) -> Result<(GroundTruthFloor, TrajectoryGraph)> {
    if params.n_aps < 2 {
        return Err(Error::invalid("n_aps", "need at least two APs"));
    }
    if !(0.0..=1.0).contains(&params.sector_edge_prob) {
        return Err(Error::invalid("sector_edge_prob", "must be a probability"));
    }
    let mut floor = GroundTruthFloor::new(params.width, params.height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..params.n_aps {
        let p = Point2::new(rng.random_range(0.0..=params.width), rng.random_range(0.0..=params.height));
        floor.aps.push(AccessPoint { id: ApId(i as u32), position: p });
    }
    let pos: Vec<Point2> = floor.aps.iter().map(|a| a.position).collect();
    let n = pos.len();
    let radius = params.neighbor_radius.unwrap_or(f64::INFINITY);

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..n {
        let mut nearest: [Option<(f64, usize)>; 8] = [None; 8];
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = pos[i].dist(pos[j]);
            if d == 0.0 || d > radius {
                continue;
            }
            let s = sector_of_bearing(bearing(pos[i], pos[j])) as usize;
            if nearest[s].is_none_or(|(best, _)| d < best) {
                nearest[s] = Some((d, j));
            }
        }
        for (_, j) in nearest.iter().flatten() {
            // one draw per occupied sector, in sector order
            if rng.random::<f64>() < params.sector_edge_prob {
                edges.insert((i.min(*j), i.max(*j)));
            }
        }
    }

    let mut degree = vec![0usize; n];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    for i in 0..n {
        if degree[i] > 0 {
            continue;
        }
        let j = (0..n)
            .filter(|&j| j != i)
            .min_by(|&a, &b| pos[i].dist(pos[a]).total_cmp(&pos[i].dist(pos[b])))
            .expect("n >= 2");
        edges.insert((i.min(j), i.max(j)));
        degree[i] += 1;
        degree[j] += 1;
    }

    let graph = TrajectoryGraph::from_edges(edges.into_iter().map(|(a, b)| (ApId(a as u32), ApId(b as u32))));
    Ok((floor, graph))
}

/// Complete scenario: floor, propagation and noise models, seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format: String,
    pub name: String,
    #[serde(default = "default_unit")]
    pub unit: String,
    pub seed: u64,
    pub start: Point2,
    pub floor: GroundTruthFloor,
    pub rss: RssModel,
    pub imu: ImuNoiseModel,
    #[serde(default)]
    pub trajectory_graph: TrajectoryGraph,
}

fn default_unit() -> String {
    "length units".to_string()
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.format != SCENARIO_FORMAT {
            return Err(Error::VersionMismatch {
                found: self.format.clone(),
                expected: SCENARIO_FORMAT.to_string(),
            });
        }
        self.floor.validate()?;
        self.rss.validate()?;
        self.imu.validate()?;
        if !self.floor.is_free(self.start) {
            return Err(Error::invalid("start", "start position is not free space"));
        }
        for &(a, b) in self.trajectory_graph.edges() {
            self.floor.ap(a)?;
            self.floor.ap(b)?;
        }
        Ok(())
    }

    /// The random 100-AP square with the default models. The walker starts
    /// at the lower-left corner.
    pub fn grid100(seed: u64) -> Result<Self> {
        Self::random(&GraphParams::grid100(), seed, "grid100")
    }

    pub fn random(params: &GraphParams, seed: u64, name: &str) -> Result<Self> {
        let (floor, graph) = generate_random_scenario(params, seed)?;
        Ok(Scenario {
            format: SCENARIO_FORMAT.to_string(),
            name: name.to_string(),
            unit: default_unit(),
            seed,
            start: Point2::ORIGIN,
            floor,
            rss: RssModel::default(),
            imu: ImuNoiseModel::default(),
            trajectory_graph: graph,
        })
    }

    /// A 60 x 40 office: a central east-west corridor with four rooms on
    /// each side, 17 APs, units in meters.
    pub fn office17(seed: u64) -> Result<Self> {
        let mut floor = GroundTruthFloor::new(60.0, 40.0)?;
        let corridor_lo = 17.0;
        let corridor_hi = 23.0;
        for k in 0..4 {
            let x0 = 2.0 + 14.0 * k as f64;
            let x1 = x0 + 12.0;
            let door = x0 + 5.0;
            floor.rooms.push(Room {
                rect: Rect::new(Point2::new(x0, 2.0), Point2::new(x1, corridor_lo)),
                entrances: vec![EntranceSegment {
                    a: Point2::new(door, corridor_lo),
                    b: Point2::new(door + 2.0, corridor_lo),
                }],
            });
            floor.rooms.push(Room {
                rect: Rect::new(Point2::new(x0, corridor_hi), Point2::new(x1, 38.0)),
                entrances: vec![EntranceSegment {
                    a: Point2::new(door, corridor_hi),
                    b: Point2::new(door + 2.0, corridor_hi),
                }],
            });
        }
        let mut positions = Vec::new();
        // corridor APs
        for k in 0..9 {
            positions.push(Point2::new(3.0 + 6.75 * k as f64, 20.0));
        }
        // one AP in each room
        for k in 0..4 {
            let cx = 8.0 + 14.0 * k as f64;
            positions.push(Point2::new(cx, 9.0));
            positions.push(Point2::new(cx, 31.0));
        }
        for (i, p) in positions.into_iter().enumerate() {
            floor.aps.push(AccessPoint { id: ApId(i as u32), position: p });
        }
        // trajectories exist along the corridor and from each room AP to
        // the nearest corridor AP through its door
        let mut edges = Vec::new();
        for k in 0..8u32 {
            edges.push((ApId(k), ApId(k + 1)));
        }
        for (i, ap) in floor.aps.iter().enumerate().skip(9) {
            let nearest = floor.aps[..9]
                .iter()
                .min_by(|a, b| a.position.dist(ap.position).total_cmp(&b.position.dist(ap.position)))
                .expect("corridor APs");
            edges.push((ApId(i as u32), nearest.id));
        }
        Ok(Scenario {
            format: SCENARIO_FORMAT.to_string(),
            name: "office17".to_string(),
            unit: "meters".to_string(),
            seed,
            start: Point2::new(1.0, 20.0),
            floor,
            rss: RssModel { noise_sigma: 1.0, ..RssModel::default() },
            imu: ImuNoiseModel::new(5.0, 0.05)?,
            trajectory_graph: TrajectoryGraph::from_edges(edges),
        })
    }

    /// Resolves `builtin:<name>` or a file path.
    pub fn resolve(spec: &str, seed: u64) -> Result<Self> {
        match spec.strip_prefix("builtin:") {
            Some("grid100") => Self::grid100(seed),
            Some("office17") => Self::office17(seed),
            Some(other) => Err(Error::invalid("scenario", format!("unknown builtin `{other}`"))),
            None => Self::load(spec),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<ApId> {
        (0..n as u32).map(ApId).collect()
    }

    #[test]
    fn grid100_protocol() {
        let (floor, graph) = generate_random_scenario(&GraphParams::grid100(), 11).unwrap();
        assert_eq!(floor.aps.len(), 100);
        for ap in &floor.aps {
            assert!((0.0..=100.0).contains(&ap.position.x) && (0.0..=100.0).contains(&ap.position.y));
        }
        for id in ids(100) {
            assert!(graph.degree(id) >= 1, "{id} isolated");
        }
    }

    #[test]
    fn unbounded_neighbors_no_isolated_vertex() {
        let params = GraphParams { neighbor_radius: None, ..GraphParams::grid100() };
        for seed in 0..5 {
            let (_, graph) = generate_random_scenario(&params, seed).unwrap();
            assert!(ids(100).iter().all(|&id| graph.degree(id) >= 1));
        }
    }

    fn sector_nearest(floor: &GroundTruthFloor) -> BTreeSet<(ApId, ApId)> {
        let mut out = BTreeSet::new();
        for a in &floor.aps {
            let mut best: BTreeMap<u8, (f64, ApId)> = BTreeMap::new();
            for b in &floor.aps {
                if a.id == b.id {
                    continue;
                }
                let s = sector_of_bearing(bearing(a.position, b.position));
                let d = a.position.dist(b.position);
                if best.get(&s).is_none_or(|(bd, _)| d < *bd) {
                    best.insert(s, (d, b.id));
                }
            }
            for (_, (_, b)) in best {
                out.insert((a.id.min(b), a.id.max(b)));
            }
        }
        out
    }

    #[test]
    fn prob_one_links_every_sector() {
        let params = GraphParams { n_aps: 30, sector_edge_prob: 1.0, neighbor_radius: None, ..GraphParams::grid100() };
        let (floor, graph) = generate_random_scenario(&params, 3).unwrap();
        let expected = sector_nearest(&floor);
        let got: BTreeSet<_> = graph.edges().iter().copied().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn prob_zero_gives_repair_edges_only() {
        let params = GraphParams { n_aps: 30, sector_edge_prob: 0.0, ..GraphParams::grid100() };
        let (floor, graph) = generate_random_scenario(&params, 5).unwrap();
        // replay the repair rule independently
        let mut expected = BTreeSet::new();
        let mut deg: BTreeMap<ApId, usize> = BTreeMap::new();
        for a in &floor.aps {
            if deg.get(&a.id).copied().unwrap_or(0) > 0 {
                continue;
            }
            let nn = floor
                .aps
                .iter()
                .filter(|b| b.id != a.id)
                .min_by(|x, y| x.position.dist(a.position).total_cmp(&y.position.dist(a.position)))
                .unwrap();
            expected.insert((a.id.min(nn.id), a.id.max(nn.id)));
            *deg.entry(a.id).or_default() += 1;
            *deg.entry(nn.id).or_default() += 1;
        }
        let got: BTreeSet<_> = graph.edges().iter().copied().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn same_seed_same_scenario() {
        let a = Scenario::grid100(9).unwrap();
        let b = Scenario::grid100(9).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_ne!(a, Scenario::grid100(10).unwrap());
    }

    #[test]
    fn degenerate_area_rejected() {
        let params = GraphParams { width: 0.0, ..GraphParams::grid100() };
        assert!(matches!(generate_random_scenario(&params, 1), Err(Error::DegenerateArea { .. })));
        let params = GraphParams { n_aps: 1, ..GraphParams::grid100() };
        assert!(generate_random_scenario(&params, 1).is_err());
    }

    #[test]
    fn json_round_trip_is_stable() {
        for sc in [Scenario::grid100(4).unwrap(), Scenario::office17(1).unwrap()] {
            let json = sc.to_json().unwrap();
            let back = Scenario::from_json(&json).unwrap();
            assert_eq!(back, sc);
            assert_eq!(back.to_json().unwrap(), json);
        }
    }

    #[test]
    fn unknown_fields_and_versions_rejected() {
        let sc = Scenario::grid100(1).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&sc.to_json().unwrap()).unwrap();
        v["format"] = "chi-walk.scenario/9".into();
        assert!(matches!(Scenario::from_json(&v.to_string()), Err(Error::VersionMismatch { .. })));
        v["format"] = SCENARIO_FORMAT.into();
        v["extra"] = 1.into();
        assert!(Scenario::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn office17_is_valid() {
        let sc = Scenario::office17(0).unwrap();
        sc.validate().unwrap();
        assert_eq!(sc.floor.aps.len(), 17);
        assert_eq!(sc.trajectory_graph.component_count(&ids(17)), 1);
    }
}
