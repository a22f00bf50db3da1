//! Relative AP positioning from fused displacement edges, and the rigid
//! alignment used to score a constellation against ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ApId, DisplacementEdge, Point2};
use crate::trajectory::FusionPool;

/// One edge per unordered AP pair: the pool with the shortest mean member
/// path. Ties go to the smaller start-mark signature, then to the pool
/// oriented from the lower id.
pub fn select_positioning_edges<'a>(pools: impl IntoIterator<Item = &'a FusionPool>) -> Vec<DisplacementEdge> {
    let mut best: BTreeMap<(ApId, ApId), &FusionPool> = BTreeMap::new();
    for pool in pools {
        if pool.fused.is_none() || pool.key.ap_a == pool.key.ap_b {
            continue;
        }
        let pair = (pool.key.ap_a.min(pool.key.ap_b), pool.key.ap_a.max(pool.key.ap_b));
        let rank = |p: &FusionPool| (p.mean_path_length(), p.key.signature, p.key.ap_a > p.key.ap_b);
        best.entry(pair)
            .and_modify(|cur| {
                let (a, b) = (rank(pool), rank(cur));
                if a.0 < b.0 || (a.0 == b.0 && (a.1, a.2) < (b.1, b.2)) {
                    *cur = pool;
                }
            })
            .or_insert(pool);
    }
    best.values()
        .map(|p| DisplacementEdge {
            ap_a: p.key.ap_a,
            ap_b: p.key.ap_b,
            displacement: p.fused.expect("filtered"),
            source_count: p.members.len(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositioningConfig {
    pub max_iterations: usize,
    /// Stop once no AP moves farther than this in an iteration.
    pub tolerance: f64,
}

impl Default for PositioningConfig {
    fn default() -> Self {
        PositioningConfig { max_iterations: 100, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApConstellation {
    pub positions: BTreeMap<ApId, Point2>,
    pub iteration: usize,
    /// Connected components, each anchored at its lowest id. More than one
    /// means the relative map is split.
    pub components: Vec<Vec<ApId>>,
}

impl ApConstellation {
    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }

    /// Writes `ap_id,x,y` rows in id order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ap_id", "x", "y"])?;
        for (id, p) in &self.positions {
            w.write_record([id.to_string(), p.x.to_string(), p.y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Anchored neighbour-averaging relaxation.
///
/// Every free AP's basic move is toward the average of
/// `neighbour - displacement` over its edges. Successive moves are combined
/// as conjugate directions, which solves the displacement least-squares
/// system in at most one iteration per free AP and lowers the squared
/// residual at every iteration.
pub struct Relaxation {
    ids: Vec<ApId>,
    /// Per AP: `(neighbour index, displacement from this AP to it)`.
    adjacency: Vec<Vec<(usize, Point2)>>,
    anchors: Vec<bool>,
    components: Vec<Vec<ApId>>,
    positions: Vec<Point2>,
    residual: Vec<Point2>,
    averaging: Vec<Point2>,
    direction: Vec<Point2>,
    rho: f64,
    iteration: usize,
}

fn inner(a: &[Point2], b: &[Point2]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u.dot(*v)).sum()
}

impl Relaxation {
    pub fn new(edges: &[DisplacementEdge]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Empty("edge set"));
        }
        let ids: Vec<ApId> = edges.iter().flat_map(|e| [e.ap_a, e.ap_b]).collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<ApId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut adjacency = vec![Vec::new(); ids.len()];
        for e in edges {
            if !e.displacement.is_finite() {
                return Err(Error::invalid("edges", "non-finite displacement"));
            }
            if e.ap_a == e.ap_b {
                continue;
            }
            let (a, b) = (index[&e.ap_a], index[&e.ap_b]);
            adjacency[a].push((b, e.displacement));
            adjacency[b].push((a, -e.displacement));
        }
        let mut anchors = vec![false; ids.len()];
        let mut seen = vec![false; ids.len()];
        let mut components = Vec::new();
        for start in 0..ids.len() {
            if seen[start] {
                continue;
            }
            // ids are sorted, so the first unseen index is the component's lowest id
            anchors[start] = true;
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(i) = stack.pop() {
                comp.push(ids[i]);
                for &(j, _) in &adjacency[i] {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            comp.sort();
            components.push(comp);
        }
        let n = ids.len();
        let mut r = Relaxation {
            ids,
            adjacency,
            anchors,
            components,
            positions: vec![Point2::ORIGIN; n],
            residual: vec![Point2::ORIGIN; n],
            averaging: vec![Point2::ORIGIN; n],
            direction: vec![Point2::ORIGIN; n],
            rho: 0.0,
            iteration: 0,
        };
        for i in 0..n {
            if !r.anchors[i] {
                r.residual[i] = r.adjacency[i].iter().fold(Point2::ORIGIN, |acc, &(j, d)| acc + r.positions[j] - d - r.positions[i]);
                r.averaging[i] = r.residual[i] * (1.0 / r.adjacency[i].len() as f64);
            }
        }
        r.direction = r.averaging.clone();
        r.rho = inner(&r.residual, &r.averaging);
        Ok(r)
    }

    /// Laplacian of `v` with anchors held at zero.
    fn apply_laplacian(&self, v: &[Point2]) -> Vec<Point2> {
        (0..v.len())
            .map(|i| {
                if self.anchors[i] {
                    return Point2::ORIGIN;
                }
                self.adjacency[i].iter().fold(Point2::ORIGIN, |acc, &(j, _)| acc + v[i] - v[j])
            })
            .collect()
    }

    /// One iteration. Returns the largest AP move.
    pub fn step(&mut self) -> f64 {
        self.iteration += 1;
        if self.rho <= 0.0 {
            return 0.0;
        }
        let q = self.apply_laplacian(&self.direction);
        let curvature = inner(&self.direction, &q);
        if !(curvature > 0.0) {
            return 0.0;
        }
        let alpha = self.rho / curvature;
        let mut max_move: f64 = 0.0;
        for i in 0..self.positions.len() {
            let mv = self.direction[i] * alpha;
            max_move = max_move.max(mv.norm());
            self.positions[i] += mv;
            self.residual[i] = self.residual[i] - q[i] * alpha;
            if !self.anchors[i] {
                self.averaging[i] = self.residual[i] * (1.0 / self.adjacency[i].len() as f64);
            }
        }
        let rho = inner(&self.residual, &self.averaging);
        let beta = rho / self.rho;
        self.rho = rho;
        for i in 0..self.direction.len() {
            self.direction[i] = self.averaging[i] + self.direction[i] * beta;
        }
        max_move
    }

    /// Sum over edges of `|p_b - p_a - d|^2`.
    pub fn residual(&self) -> f64 {
        let mut total = 0.0;
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &(j, d) in adj {
                if i < j {
                    let r = self.positions[j] - self.positions[i] - d;
                    total += r.dot(r);
                }
            }
        }
        total
    }

    pub fn constellation(&self) -> ApConstellation {
        ApConstellation {
            positions: self.ids.iter().copied().zip(self.positions.iter().copied()).collect(),
            iteration: self.iteration,
            components: self.components.clone(),
        }
    }
}

pub fn position_aps(edges: &[DisplacementEdge], cfg: &PositioningConfig) -> Result<ApConstellation> {
    let mut r = Relaxation::new(edges)?;
    for _ in 0..cfg.max_iterations {
        if r.step() < cfg.tolerance {
            break;
        }
    }
    Ok(r.constellation())
}

/// `p -> R(rotation) * mirror(p) + translation`, mirror flipping y when
/// `reflected`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidAlignment {
    pub rotation: f64,
    pub translation: Point2,
    pub reflected: bool,
}

impl RigidAlignment {
    pub fn apply(&self, p: Point2) -> Point2 {
        let q = if self.reflected { Point2::new(p.x, -p.y) } else { p };
        q.rotated(self.rotation) + self.translation
    }
}

fn weighted_procrustes(est: &[Point2], truth: &[Point2], w: &[f64], reflected: bool) -> RigidAlignment {
    let total: f64 = w.iter().sum();
    let mirror = |p: Point2| if reflected { Point2::new(p.x, -p.y) } else { p };
    let ce = est.iter().zip(w).fold(Point2::ORIGIN, |a, (&p, &wi)| a + mirror(p) * wi) * (1.0 / total);
    let ct = truth.iter().zip(w).fold(Point2::ORIGIN, |a, (&p, &wi)| a + p * wi) * (1.0 / total);
    let (mut s_dot, mut s_cross) = (0.0, 0.0);
    for ((&e, &t), &wi) in est.iter().zip(truth).zip(w) {
        let (u, v) = (mirror(e) - ce, t - ct);
        s_dot += wi * u.dot(v);
        s_cross += wi * u.cross(v);
    }
    let rotation = s_cross.atan2(s_dot).to_degrees();
    RigidAlignment { rotation, translation: ct - ce.rotated(rotation), reflected }
}

fn mean_error(al: &RigidAlignment, est: &[Point2], truth: &[Point2]) -> f64 {
    est.iter().zip(truth).map(|(&e, &t)| al.apply(e).dist(t)).sum::<f64>() / est.len() as f64
}

/// Least-squares fit, then reweighted refinement toward the transform
/// minimizing the mean distance itself. Never worse than the least-squares
/// fit.
fn fit_rigid(est: &[Point2], truth: &[Point2], reflected: bool) -> (RigidAlignment, f64) {
    const ROUNDS: usize = 500;
    let mut al = weighted_procrustes(est, truth, &vec![1.0; est.len()], reflected);
    let mut err = mean_error(&al, est, truth);
    let scale = truth.iter().map(|p| p.norm()).fold(1.0, f64::max);
    for _ in 0..ROUNDS {
        let w: Vec<f64> = est.iter().zip(truth).map(|(&e, &t)| 1.0 / al.apply(e).dist(t).max(1e-12 * scale)).collect();
        let next = weighted_procrustes(est, truth, &w, reflected);
        let next_err = mean_error(&next, est, truth);
        if !(next_err < err) {
            break;
        }
        let gain = err - next_err;
        al = next;
        err = next_err;
        if gain <= 1e-15 * scale {
            break;
        }
    }
    (al, err)
}

/// Rigid fit of `est` onto `truth` minimizing the mean per-AP distance,
/// trying the mirrored estimate as well. Returns the alignment and that
/// mean distance.
pub fn align_to_truth(est: &BTreeMap<ApId, Point2>, truth: &BTreeMap<ApId, Point2>) -> Result<(RigidAlignment, f64)> {
    if est.len() < 2 {
        return Err(Error::invalid("constellation", "need at least two APs"));
    }
    if let Some(id) = est.keys().find(|id| !truth.contains_key(id)).or(truth.keys().find(|id| !est.contains_key(id))) {
        return Err(Error::UnknownAp(*id));
    }
    let e: Vec<Point2> = est.values().copied().collect();
    let t: Vec<Point2> = truth.values().copied().collect();
    let direct = fit_rigid(&e, &t, false);
    let mirrored = fit_rigid(&e, &t, true);
    Ok(if mirrored.1 < direct.1 { mirrored } else { direct })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{PoolKey, PoolMember};
    use crate::world::Scenario;
    use proptest::prelude::*;

    fn truth_edges(truth: &BTreeMap<ApId, Point2>, pairs: &[(u32, u32)]) -> Vec<DisplacementEdge> {
        pairs
            .iter()
            .map(|&(a, b)| DisplacementEdge::new(ApId(a), ApId(b), truth[&ApId(b)] - truth[&ApId(a)]))
            .collect()
    }

    fn pool(a: u32, b: u32, sig: u8, len: f64, off: Point2) -> FusionPool {
        let mut p = FusionPool::new(PoolKey { ap_a: ApId(a), ap_b: ApId(b), signature: sig });
        p.add(PoolMember { offset: off, path_length: len, t_start: 0.0, t_end: 1.0 }).unwrap();
        p
    }

    #[test]
    fn shortest_pool_wins() {
        let pools = [pool(1, 2, 0, 12.0, Point2::new(1.0, 0.0)), pool(2, 1, 3, 9.0, Point2::new(-2.0, 0.0))];
        let e = select_positioning_edges(&pools);
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].ap_a, e[0].displacement), (ApId(2), Point2::new(-2.0, 0.0)));
    }

    #[test]
    fn tie_goes_to_lower_signature() {
        let pools = [pool(1, 2, 5, 9.0, Point2::new(1.0, 0.0)), pool(1, 2, 2, 9.0, Point2::new(2.0, 0.0))];
        let e = select_positioning_edges(&pools);
        assert_eq!(e[0].displacement, Point2::new(2.0, 0.0));
    }

    #[test]
    fn triangle_exact() {
        let truth: BTreeMap<ApId, Point2> =
            [(ApId(1), Point2::new(0.0, 0.0)), (ApId(2), Point2::new(10.0, 0.0)), (ApId(3), Point2::new(0.0, 10.0))].into();
        let edges = truth_edges(&truth, &[(1, 2), (2, 3), (3, 1)]);
        let c = position_aps(&edges, &PositioningConfig::default()).unwrap();
        let (_, err) = align_to_truth(&c.positions, &truth).unwrap();
        assert!(err < 1e-6);
    }

    #[test]
    fn single_edge_exact() {
        let edges = [DisplacementEdge::new(ApId(4), ApId(9), Point2::new(5.0, 0.0))];
        let c = position_aps(&edges, &PositioningConfig::default()).unwrap();
        assert_eq!(c.positions[&ApId(9)] - c.positions[&ApId(4)], Point2::new(5.0, 0.0));
    }

    #[test]
    fn empty_edges_error() {
        assert!(position_aps(&[], &PositioningConfig::default()).is_err());
    }

    #[test]
    fn disconnected_components_flagged() {
        let edges = [
            DisplacementEdge::new(ApId(1), ApId(2), Point2::new(1.0, 0.0)),
            DisplacementEdge::new(ApId(3), ApId(4), Point2::new(0.0, 1.0)),
        ];
        let c = position_aps(&edges, &PositioningConfig::default()).unwrap();
        assert_eq!(c.components.len(), 2);
        assert_eq!(c.positions[&ApId(3)], Point2::ORIGIN);
        assert!((c.positions[&ApId(4)] - Point2::new(0.0, 1.0)).norm() < 1e-9);
    }

    fn grid100_truth() -> (BTreeMap<ApId, Point2>, Vec<DisplacementEdge>) {
        let s = Scenario::grid100(7).unwrap();
        let truth: BTreeMap<ApId, Point2> = s.floor.aps.iter().map(|a| (a.id, a.position)).collect();
        let edges = s
            .trajectory_graph
            .edges()
            .iter()
            .map(|&(a, b)| DisplacementEdge::new(a, b, truth[&b] - truth[&a]))
            .collect();
        (truth, edges)
    }

    #[test]
    fn grid100_noiseless_recovers_each_component() {
        let (truth, edges) = grid100_truth();
        let cfg = PositioningConfig { max_iterations: 2000, ..Default::default() };
        let c = position_aps(&edges, &cfg).unwrap();
        for comp in &c.components {
            if comp.len() < 2 {
                continue;
            }
            let est: BTreeMap<_, _> = comp.iter().map(|id| (*id, c.positions[id])).collect();
            let tr: BTreeMap<_, _> = comp.iter().map(|id| (*id, truth[id])).collect();
            let (al, err) = align_to_truth(&est, &tr).unwrap();
            assert!(err < 1e-3, "component of {} error {err}", comp.len());
            assert!(!al.reflected);
        }
    }

    #[test]
    fn grid100_converges_within_default_budget() {
        let (truth, edges) = grid100_truth();
        let c = position_aps(&edges, &PositioningConfig::default()).unwrap();
        let biggest = c.components.iter().max_by_key(|c| c.len()).unwrap();
        let est: BTreeMap<_, _> = biggest.iter().map(|id| (*id, c.positions[id])).collect();
        let tr: BTreeMap<_, _> = biggest.iter().map(|id| (*id, truth[id])).collect();
        assert!(align_to_truth(&est, &tr).unwrap().1 < 1e-3);
    }

    #[test]
    fn residual_never_increases() {
        let (truth, mut edges) = grid100_truth();
        // perturb so the system is inconsistent
        for (i, e) in edges.iter_mut().enumerate() {
            e.displacement = e.displacement + Point2::new((i % 7) as f64 * 0.3 - 0.9, (i % 5) as f64 * 0.2 - 0.4);
        }
        let _ = truth;
        let mut r = Relaxation::new(&edges).unwrap();
        let mut prev = r.residual();
        for _ in 0..200 {
            r.step();
            let cur = r.residual();
            assert!(cur <= prev * (1.0 + 1e-12) + 1e-12, "{cur} > {prev}");
            prev = cur;
        }
    }

    #[test]
    fn alignment_examples() {
        let truth: BTreeMap<ApId, Point2> = (0..6).map(|i| (ApId(i), Point2::new(i as f64 * 3.0, (i * i) as f64))).collect();
        let (_, e0) = align_to_truth(&truth, &truth).unwrap();
        assert!(e0 < 1e-12);
        let moved: BTreeMap<_, _> = truth.iter().map(|(k, p)| (*k, p.rotated(90.0) + Point2::new(5.0, 5.0))).collect();
        assert!(align_to_truth(&moved, &truth).unwrap().1 < 1e-9);
        let mut bumped = truth.clone();
        bumped.get_mut(&ApId(3)).unwrap().x += 3.0;
        assert!((align_to_truth(&bumped, &truth).unwrap().1 - 3.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn mismatched_ids_rejected() {
        let a: BTreeMap<_, _> = [(ApId(1), Point2::ORIGIN), (ApId(2), Point2::ORIGIN)].into();
        let b: BTreeMap<_, _> = [(ApId(1), Point2::ORIGIN), (ApId(3), Point2::ORIGIN)].into();
        assert!(align_to_truth(&a, &b).is_err());
    }

    #[test]
    fn csv_export() {
        let c = position_aps(&[DisplacementEdge::new(ApId(1), ApId(2), Point2::new(2.5, 0.0))], &PositioningConfig::default()).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "ap_id,x,y\n02:00:00:00:00:01,0,0\n02:00:00:00:00:02,2.5,0\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn alignment_error_rigid_invariant(
            pts in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 3..12),
            noise in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12),
            rot in 0.0f64..360.0, tx in -30.0f64..30.0, ty in -30.0f64..30.0,
        ) {
            let truth: BTreeMap<ApId, Point2> = pts.iter().enumerate().map(|(i, &(x, y))| (ApId(i as u32), Point2::new(x, y))).collect();
            let est: BTreeMap<ApId, Point2> = truth.iter().map(|(k, p)| (*k, *p + Point2::new(noise[k.0 as usize].0, noise[k.0 as usize].1))).collect();
            let moved: BTreeMap<ApId, Point2> = est.iter().map(|(k, p)| (*k, p.rotated(rot) + Point2::new(tx, ty))).collect();
            let a = align_to_truth(&est, &truth).unwrap().1;
            let b = align_to_truth(&moved, &truth).unwrap().1;
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn edge_order_does_not_matter(seed in 0u64..50) {
            let (truth, edges) = grid100_truth();
            let mut noisy: Vec<DisplacementEdge> = edges.iter().enumerate().map(|(i, e)| {
                let k = (i as u64 * 2654435761 + seed) % 97;
                DisplacementEdge { displacement: e.displacement + Point2::new(k as f64 / 97.0 - 0.5, 0.2), ..*e }
            }).collect();
            let cfg = PositioningConfig { max_iterations: 1000, tolerance: 1e-12 };
            let base = position_aps(&noisy, &cfg).unwrap();
            noisy.reverse();
            let other = position_aps(&noisy, &cfg).unwrap();
            let (_, e1) = align_to_truth(&base.positions, &truth.iter().filter(|(k, _)| base.positions.contains_key(k)).map(|(k, v)| (*k, *v)).collect()).unwrap();
            let (_, e2) = align_to_truth(&other.positions, &truth.iter().filter(|(k, _)| other.positions.contains_key(k)).map(|(k, v)| (*k, *v)).collect()).unwrap();
            prop_assert!((e1 - e2).abs() < 1e-6, "{} vs {}", e1, e2);
        }
    }
}
