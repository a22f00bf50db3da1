use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::objective::{restatus, ApScope, Objective, ObjectiveKind, ObjectiveStatus};
use crate::error::{Error, Result};
use crate::floorplan::{apply_inference, correct_component, ComponentKind, FloorComponent, Geometry, PlanRuleConfig};
use crate::geometry::{bearing, ApId, Point2, Rect};
use crate::planner::{
    dead_reckon, retrace_suggestions, sector_gap_paths, track, update_coverage, CoveragePlan, GapSuggestion,
    SectorGapReport, TrackPoint,
};
use crate::positioning::{position_aps, select_positioning_edges, ApConstellation, PositioningConfig};
use crate::trajectory::{derive, ApMarkVector, FusionPool, PoolKey, WalkStep, DEFAULT_DIRECTION_THRESHOLD};
use crate::world::{walk_segment, Scenario, WalkCommand, WalkerState};

pub const SESSION_FORMAT: &str = "chiwalk-session/1";

/// Longest single walk command accepted.
pub const MAX_WALK_DISTANCE: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    /// Lattice spacing and removal radius of locate pathways.
    pub coverage_spacing: f64,
    /// Lattice spacing and removal radius of floor-plan pathways.
    pub floor_spacing: f64,
    /// Scan spacing along a walk command.
    pub sample_spacing: f64,
    pub direction_threshold: f64,
    /// Fusion convergence threshold for retrace suggestions.
    pub theta: f64,
    pub plan: PlanRuleConfig,
    pub positioning: PositioningConfig,
}

impl SessionConfig {
    pub fn for_scenario(scenario: &Scenario) -> Self {
        SessionConfig {
            coverage_spacing: scenario.rss.coverage_radius,
            floor_spacing: 2.0,
            sample_spacing: 0.5,
            direction_threshold: DEFAULT_DIRECTION_THRESHOLD,
            theta: 1.0,
            plan: PlanRuleConfig::default(),
            positioning: PositioningConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("coverage_spacing", self.coverage_spacing),
            ("floor_spacing", self.floor_spacing),
            ("sample_spacing", self.sample_spacing),
            ("direction_threshold", self.direction_threshold),
            ("theta", self.theta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be > 0"));
            }
        }
        self.plan.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    /// Straight walk along a heading in degrees.
    Walk { heading: f64, distance: f64 },
    /// Straight walk toward a point given in the dead-reckoning frame.
    WalkTo { target: Point2 },
    /// Ends the active objective.
    Terminate,
    Correct { id: u64, kind: ComponentKind, geometry: Geometry, lock: bool },
    Lock { id: u64 },
    SetObjectives { objectives: Vec<ObjectiveKind> },
    Close,
}

impl Command {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::MalformedCommand(m.to_string()));
        match self {
            Command::Walk { heading, distance } => {
                if !heading.is_finite() || !distance.is_finite() || *distance < 0.0 || *distance > MAX_WALK_DISTANCE {
                    return bad("walk needs a finite heading and a distance in [0, 10000]");
                }
            }
            Command::WalkTo { target } if !target.is_finite() => return bad("walk target must be finite"),
            Command::Correct { geometry, id, kind, lock } => {
                FloorComponent { id: *id, kind: *kind, geometry: geometry.clone(), locked: *lock, source: crate::floorplan::Source::Corrected }
                    .validate()
                    .map_err(|e| Error::MalformedCommand(e.to_string()))?;
            }
            Command::SetObjectives { objectives } => {
                for o in objectives {
                    o.validate()?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// What one command changed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateDelta {
    pub seq: u64,
    pub steps_added: usize,
    pub new_marks: Vec<ApMarkVector>,
    pub removed_objectives: Vec<ObjectiveKind>,
    pub positioned: bool,
    pub floor_plan_changed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub seq: u64,
    /// Walker clock after the command.
    pub clock: f64,
    pub command: Command,
    pub delta: StateDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Suggestion {
    Idle,
    Pathway { points: Vec<Point2> },
    Retrace { pools: Vec<PoolKey>, gaps: Vec<GapSuggestion> },
    Track { points: Vec<TrackPoint> },
}

mod pool_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(pools: &BTreeMap<PoolKey, FusionPool>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(pools.values())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<PoolKey, FusionPool>, D::Error> {
        let v: Vec<FusionPool> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|p| (p.key, p)).collect())
    }
}

/// Complete, event-sourced state of one interactive session. The event
/// log replays from the scenario, seed and config to an identical state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionState {
    pub format: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub config: SessionConfig,
    pub closed: bool,
    pub walker: WalkerState,
    pub steps: Vec<WalkStep>,
    /// Ground-truth positions after each step, for inspection only.
    pub true_path: Vec<Point2>,
    pub marks: Vec<ApMarkVector>,
    #[serde(with = "pool_list")]
    pub pools: BTreeMap<PoolKey, FusionPool>,
    pub constellation: Option<ApConstellation>,
    pub floor_components: Vec<FloorComponent>,
    pub objectives: Vec<Objective>,
    pub log: Vec<EventRecord>,
}

impl SessionState {
    pub fn new(scenario: Scenario, seed: u64, config: SessionConfig) -> Result<Self> {
        scenario.validate()?;
        config.validate()?;
        Ok(SessionState {
            format: SESSION_FORMAT.to_string(),
            walker: WalkerState::at(scenario.start),
            true_path: vec![scenario.start],
            scenario,
            seed,
            config,
            closed: false,
            steps: Vec::new(),
            marks: Vec::new(),
            pools: BTreeMap::new(),
            constellation: None,
            floor_components: Vec::new(),
            objectives: Vec::new(),
            log: Vec::new(),
        })
    }

    pub fn with_defaults(scenario: Scenario, seed: u64) -> Result<Self> {
        let config = SessionConfig::for_scenario(&scenario);
        Self::new(scenario, seed, config)
    }

    /// Number of commands applied so far.
    pub fn seq(&self) -> u64 {
        self.log.len() as u64
    }

    /// Dead-reckoned track in the walker's own frame, starting at the
    /// scenario start.
    pub fn dr_track(&self) -> Vec<TrackPoint> {
        dead_reckon(&self.steps, self.scenario.start)
    }

    pub fn dr_position(&self) -> Point2 {
        self.dr_track().last().map_or(self.scenario.start, |p| p.position)
    }

    /// Positioned APs shifted into the dead-reckoning frame: the
    /// constellation is translated so that, on average, each AP sits where
    /// the walk marked it.
    pub fn constellation_dr(&self) -> BTreeMap<ApId, Point2> {
        let Some(c) = &self.constellation else { return BTreeMap::new() };
        let dr = self.dr_track();
        let mut shift = Point2::ORIGIN;
        let mut n = 0usize;
        for m in &self.marks {
            let Some(&est) = c.positions.get(&m.ap_id) else { continue };
            if let Some(p) = dr.iter().find(|p| (p.t - m.timestamp()).abs() < 1e-9) {
                shift += p.position - est;
                n += 1;
            }
        }
        let shift = if n > 0 { shift * (1.0 / n as f64) } else { Point2::ORIGIN };
        c.positions.iter().map(|(&id, &p)| (id, p + shift)).collect()
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.seq());
        rng
    }

    fn new_plan(&self, kind: &ObjectiveKind) -> Result<Option<CoveragePlan>> {
        let start = self.dr_position();
        match kind {
            ObjectiveKind::LocateAps { scope, .. } => {
                let area = match scope {
                    ApScope::Area(r) => *r,
                    _ => self.scenario.floor.bounds(),
                };
                Ok(Some(CoveragePlan::new(&area, self.config.coverage_spacing, &[], start)?))
            }
            ObjectiveKind::FloorPlan { width, height } => {
                let area = Rect::new(self.scenario.floor.bounds().min, self.scenario.floor.bounds().min + Point2::new(*width, *height));
                Ok(Some(CoveragePlan::new(&area, self.config.floor_spacing, &[], start)?))
            }
            _ => Ok(None),
        }
    }

    fn wants_floor_plan(&self) -> bool {
        self.objectives.iter().any(|o| matches!(o.kind, ObjectiveKind::FloorPlan { .. }))
    }

    fn rederive(&mut self, flush: bool) -> Result<Vec<ApMarkVector>> {
        let d = derive(&self.steps, self.config.direction_threshold, flush)?;
        let new_marks: Vec<ApMarkVector> = d
            .marks
            .iter()
            .filter(|m| !self.marks.iter().any(|o| o.ap_id == m.ap_id && o.timestamp() == m.timestamp()))
            .cloned()
            .collect();
        self.marks = d.marks;
        self.pools = d.pools;
        Ok(new_marks)
    }

    fn reposition(&mut self) -> Result<bool> {
        let edges = select_positioning_edges(self.pools.values());
        let next = if edges.is_empty() { None } else { Some(position_aps(&edges, &self.config.positioning)?) };
        let changed = next != self.constellation;
        self.constellation = next;
        Ok(changed)
    }

    fn infer_floor_plan(&mut self) -> Result<bool> {
        let track: Vec<Point2> = self.dr_track().into_iter().map(|p| p.position).collect();
        let next = apply_inference(&self.floor_components, &[track], &self.config.plan)?;
        let changed = next != self.floor_components;
        self.floor_components = next;
        Ok(changed)
    }

    fn objective_complete(&self, o: &Objective) -> bool {
        if o.terminated {
            return true;
        }
        match &o.kind {
            ObjectiveKind::LocateAps { scope, marks } => {
                let covered = o.plan.as_ref().is_some_and(|p| p.is_complete());
                let marked = match scope {
                    ApScope::Aps(ids) if !ids.is_empty() => {
                        ids.iter().all(|id| self.marks.iter().filter(|m| m.ap_id == *id).count() >= *marks)
                    }
                    _ => false,
                };
                covered || marked
            }
            ObjectiveKind::RefineTrajectories => {
                !self.pools.is_empty() && retrace_suggestions(self.pools.values(), self.config.theta).is_empty()
            }
            ObjectiveKind::FloorPlan { .. } => o.plan.as_ref().is_some_and(|p| p.is_complete()),
            ObjectiveKind::TrackMovement { .. } => false,
        }
    }

    /// Removes completed objectives and returns them. Completing a locate
    /// objective triggers positioning.
    pub fn check_completion(&mut self) -> Result<Vec<ObjectiveKind>> {
        let (done, keep): (Vec<Objective>, Vec<Objective>) =
            std::mem::take(&mut self.objectives).into_iter().partition(|o| self.objective_complete(o));
        self.objectives = keep;
        restatus(&mut self.objectives);
        if done.iter().any(|o| matches!(o.kind, ObjectiveKind::LocateAps { .. })) {
            self.reposition()?;
        }
        Ok(done
            .into_iter()
            .map(|mut o| {
                o.status = ObjectiveStatus::Complete;
                o.kind
            })
            .collect())
    }

    /// Replaces the objective list. Objectives already present keep their
    /// progress; an identical list changes nothing.
    pub fn set_objectives(&mut self, kinds: Vec<ObjectiveKind>) -> Result<()> {
        let current: Vec<&ObjectiveKind> = self.objectives.iter().map(|o| &o.kind).collect();
        if current.len() == kinds.len() && current.iter().zip(&kinds).all(|(a, b)| *a == b) {
            return Ok(());
        }
        let mut old = std::mem::take(&mut self.objectives);
        let mut next = Vec::with_capacity(kinds.len());
        for kind in kinds {
            match old.iter().position(|o| o.kind == kind) {
                Some(i) => next.push(old.remove(i)),
                None => {
                    let plan = self.new_plan(&kind)?;
                    next.push(Objective { kind, status: ObjectiveStatus::Pending, plan, terminated: false });
                }
            }
        }
        restatus(&mut next);
        self.objectives = next;
        Ok(())
    }

    /// `target` is the pathway point a walk-to was aiming at; if a barrier
    /// stops the walk short, that point is dropped as unreachable.
    fn walk(&mut self, heading: f64, distance: f64, target: Option<Point2>, delta: &mut StateDelta) -> Result<()> {
        let mut rng = self.rng();
        let outcomes = walk_segment(
            &self.scenario.floor,
            &self.scenario.rss,
            &self.walker,
            WalkCommand { heading, distance },
            &self.scenario.imu,
            self.config.sample_spacing,
            &mut rng,
        );
        let before = self.dr_position();
        let mut walked = vec![before];
        let mut pos = before;
        let clipped = outcomes.last().is_some_and(|o| o.clipped);
        for o in outcomes {
            let t_start = self.walker.clock;
            self.walker = o.state;
            pos += o.reported.to_offset();
            walked.push(pos);
            self.true_path.push(o.state.true_position);
            self.steps.push(WalkStep { t_start, t_end: o.state.clock, reported: o.reported, scan: o.scan });
            delta.steps_added += 1;
        }
        delta.new_marks = self.rederive(false)?;
        for o in &mut self.objectives {
            if let Some(plan) = &o.plan {
                let mut next = update_coverage(plan, &walked, plan.spacing, &[]);
                if let (true, Some(t)) = (clipped, target) {
                    next = update_coverage(&next, &[t], 1e-6, &[]);
                }
                o.plan = Some(next);
            }
        }
        delta.positioned = self.reposition()?;
        if self.wants_floor_plan() {
            delta.floor_plan_changed = self.infer_floor_plan()?;
        }
        Ok(())
    }

    /// Applies one command and appends it to the event log. A rejected
    /// command leaves the state untouched.
    pub fn tick(&mut self, command: Command) -> Result<StateDelta> {
        if self.closed {
            return Err(Error::SessionClosed);
        }
        command.validate()?;
        let mut next = self.clone();
        let delta = next.apply(&command)?;
        next.log.push(EventRecord { seq: delta.seq, clock: next.walker.clock, command, delta: delta.clone() });
        *self = next;
        Ok(delta)
    }

    fn apply(&mut self, command: &Command) -> Result<StateDelta> {
        let mut delta = StateDelta { seq: self.seq(), ..Default::default() };
        match command {
            Command::Walk { heading, distance } => self.walk(*heading, *distance, None, &mut delta)?,
            Command::WalkTo { target } => {
                let from = self.dr_position();
                let (h, d) = if from == *target { (0.0, 0.0) } else { (bearing(from, *target), from.dist(*target)) };
                if d > MAX_WALK_DISTANCE {
                    return Err(Error::MalformedCommand("walk target too far".into()));
                }
                self.walk(h, d, Some(*target), &mut delta)?;
            }
            Command::Terminate => {
                if let Some(head) = self.objectives.first_mut() {
                    head.terminated = true;
                }
                delta.new_marks = self.rederive(true)?;
                delta.positioned = self.reposition()?;
            }
            Command::Correct { id, kind, geometry, lock } => {
                self.floor_components = correct_component(&self.floor_components, *id, *kind, geometry.clone(), *lock)?;
                delta.floor_plan_changed = true;
            }
            Command::Lock { id } => {
                let c = self.floor_components.iter().find(|c| c.id == *id).ok_or(Error::UnknownComponent(*id))?;
                let (kind, geometry) = (c.kind, c.geometry.clone());
                self.floor_components = correct_component(&self.floor_components, *id, kind, geometry, true)?;
                delta.floor_plan_changed = true;
            }
            Command::SetObjectives { objectives } => {
                self.set_objectives(objectives.clone())?;
                if self.wants_floor_plan() {
                    delta.floor_plan_changed = self.infer_floor_plan()?;
                }
            }
            Command::Close => {
                self.closed = true;
            }
        }
        delta.removed_objectives = self.check_completion()?;
        if delta.removed_objectives.iter().any(|k| matches!(k, ObjectiveKind::LocateAps { .. })) {
            delta.positioned = true;
        }
        Ok(delta)
    }

    /// Suggestion for the active objective.
    pub fn suggestions(&self) -> Suggestion {
        let Some(head) = self.objectives.first() else { return Suggestion::Idle };
        match &head.kind {
            ObjectiveKind::LocateAps { .. } | ObjectiveKind::FloorPlan { .. } => {
                let points = head.plan.as_ref().and_then(|p| p.next_leg(self.dr_position())).unwrap_or_default();
                Suggestion::Pathway { points }
            }
            ObjectiveKind::RefineTrajectories => {
                let pools = retrace_suggestions(self.pools.values(), self.config.theta);
                let positions = self.constellation_dr();
                let report = SectorGapReport::compute(
                    &positions,
                    self.pools.values(),
                    self.config.theta,
                    Some(2.0 * self.scenario.rss.coverage_radius),
                );
                let gaps = sector_gap_paths(&positions, &report, &[], self.scenario.rss.coverage_radius, self.config.floor_spacing);
                Suggestion::Retrace { pools, gaps }
            }
            ObjectiveKind::TrackMovement { query } => {
                let points = track(query, &self.steps, &self.marks, &self.constellation_dr(), self.scenario.start).unwrap_or_default();
                Suggestion::Track { points }
            }
        }
    }

    /// Deterministic JSON: struct fields in declaration order, maps sorted.
    pub fn to_canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn commands(&self) -> Vec<Command> {
        self.log.iter().map(|e| e.command.clone()).collect()
    }

    /// Re-applies commands to a fresh session.
    pub fn replay(scenario: Scenario, seed: u64, config: SessionConfig, commands: &[Command]) -> Result<Self> {
        let mut s = SessionState::new(scenario, seed, config)?;
        for c in commands {
            s.tick(c.clone())?;
        }
        Ok(s)
    }

    /// Replays this session's own log and checks the result is
    /// byte-identical.
    pub fn verify_replay(&self) -> Result<()> {
        let again = SessionState::replay(self.scenario.clone(), self.seed, self.config, &self.commands())?;
        if again.to_canonical_json()? != self.to_canonical_json()? {
            return Err(Error::Corrupt("event log does not replay to the saved state".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::TrackQuery;
    use rand::Rng;

    fn session() -> SessionState {
        SessionState::with_defaults(Scenario::office17(3).unwrap(), 11).unwrap()
    }

    fn random_script(seed: u64, n: usize) -> Vec<Command> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = vec![Command::SetObjectives {
            objectives: vec![ObjectiveKind::LocateAps { scope: ApScope::All, marks: 1 }, ObjectiveKind::RefineTrajectories],
        }];
        for _ in 0..n {
            out.push(match rng.random_range(0..10) {
                0 => Command::Terminate,
                1 => Command::SetObjectives { objectives: vec![ObjectiveKind::FloorPlan { width: 60.0, height: 40.0 }] },
                _ => Command::Walk { heading: rng.random_range(0.0..360.0), distance: rng.random_range(0.0..15.0) },
            });
        }
        out
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn objective_list_invariants(seed in 0u64..1000, n in 1usize..25) {
            let mut s = session();
            for c in random_script(seed, n) {
                let _ = s.tick(c);
                for (i, o) in s.objectives.iter().enumerate() {
                    let want = if i == 0 { ObjectiveStatus::Active } else { ObjectiveStatus::Pending };
                    proptest::prop_assert_eq!(o.status, want);
                }
            }
        }
    }

    #[test]
    fn replay_is_byte_identical() {
        let mut s = session();
        for c in random_script(5, 25) {
            s.tick(c).unwrap();
        }
        assert_eq!(s.seq(), 26);
        s.verify_replay().unwrap();
        let again = SessionState::replay(s.scenario.clone(), s.seed, s.config, &s.commands()).unwrap();
        assert_eq!(again.to_canonical_json().unwrap(), s.to_canonical_json().unwrap());
    }

    #[test]
    fn seed_changes_the_walk() {
        let script = random_script(1, 10);
        let a = SessionState::replay(Scenario::office17(3).unwrap(), 1, session().config, &script).unwrap();
        let b = SessionState::replay(Scenario::office17(3).unwrap(), 2, session().config, &script).unwrap();
        assert_ne!(a.steps, b.steps);
    }

    #[test]
    fn closed_session_rejects_and_does_not_log() {
        let mut s = session();
        s.tick(Command::Walk { heading: 0.0, distance: 3.0 }).unwrap();
        assert!(matches!(s.tick(Command::Walk { heading: 0.0, distance: -1.0 }), Err(Error::MalformedCommand(_))));
        assert_eq!(s.seq(), 1);
        s.tick(Command::Close).unwrap();
        let before = s.clone();
        assert!(matches!(s.tick(Command::Walk { heading: 0.0, distance: 1.0 }), Err(Error::SessionClosed)));
        assert_eq!(s, before);
    }

    #[test]
    fn terminate_removes_the_head() {
        let mut s = session();
        s.tick(Command::SetObjectives {
            objectives: vec![ObjectiveKind::LocateAps { scope: ApScope::All, marks: 1 }, ObjectiveKind::RefineTrajectories],
        })
        .unwrap();
        assert_eq!(s.objectives[0].status, ObjectiveStatus::Active);
        let d = s.tick(Command::Terminate).unwrap();
        assert!(matches!(d.removed_objectives[..], [ObjectiveKind::LocateAps { .. }]));
        assert_eq!(s.objectives.len(), 1);
        assert_eq!(s.objectives[0].status, ObjectiveStatus::Active);
    }

    #[test]
    fn reorder_switches_suggestion_kind() {
        let locate = ObjectiveKind::LocateAps { scope: ApScope::All, marks: 1 };
        let track_q = ObjectiveKind::TrackMovement {
            query: TrackQuery { t_start: 0.0, t_end: 1e9, area: Rect::from_size(60.0, 40.0) },
        };
        let mut s = session();
        s.tick(Command::SetObjectives { objectives: vec![locate.clone(), track_q.clone()] }).unwrap();
        s.tick(Command::Walk { heading: 90.0, distance: 18.0 }).unwrap();
        let plan_before = s.objectives[0].plan.clone();
        assert!(matches!(s.suggestions(), Suggestion::Pathway { .. }));
        s.tick(Command::SetObjectives { objectives: vec![track_q, locate] }).unwrap();
        assert!(matches!(s.suggestions(), Suggestion::Track { .. }));
        // progress survives the reorder
        assert_eq!(s.objectives[1].plan, plan_before);
    }

    #[test]
    fn identical_objective_list_is_noop() {
        let mut s = session();
        let list = vec![ObjectiveKind::RefineTrajectories];
        s.tick(Command::SetObjectives { objectives: list.clone() }).unwrap();
        let objectives = s.objectives.clone();
        s.tick(Command::SetObjectives { objectives: list }).unwrap();
        assert_eq!(s.objectives, objectives);
    }

    #[test]
    fn following_pathways_completes_locate() {
        let mut sc = Scenario::office17(3).unwrap();
        sc.imu = crate::world::ImuNoiseModel::NOISELESS;
        let mut s = SessionState::with_defaults(sc, 2).unwrap();
        s.tick(Command::SetObjectives { objectives: vec![ObjectiveKind::LocateAps { scope: ApScope::All, marks: 1 }] }).unwrap();
        let mut guard = 0;
        while !s.objectives.is_empty() {
            let Suggestion::Pathway { points } = s.suggestions() else { panic!("expected pathway") };
            s.tick(Command::WalkTo { target: points[0] }).unwrap();
            guard += 1;
            assert!(guard < 500, "coverage never finished");
        }
        assert!(!s.marks.is_empty());
        assert!(s.log.last().unwrap().delta.positioned || s.constellation.is_some());
    }

    #[test]
    fn lock_survives_later_inference() {
        let mut s = session();
        s.tick(Command::SetObjectives { objectives: vec![ObjectiveKind::FloorPlan { width: 60.0, height: 40.0 }] }).unwrap();
        s.tick(Command::Walk { heading: 90.0, distance: 18.0 }).unwrap();
        s.tick(Command::Walk { heading: 0.0, distance: 30.0 }).unwrap();
        assert!(!s.floor_components.is_empty());
        let id = s.floor_components[0].id;
        s.tick(Command::Lock { id }).unwrap();
        let locked = s.floor_components.iter().find(|c| c.id == id).unwrap().clone();
        assert!(locked.locked);
        for h in [90.0, 180.0, 270.0] {
            s.tick(Command::Walk { heading: h, distance: 8.0 }).unwrap();
        }
        assert!(s.floor_components.contains(&locked));
        assert!(matches!(
            s.tick(Command::Correct { id, kind: ComponentKind::Block, geometry: locked.geometry.clone(), lock: false }),
            Err(Error::ComponentLocked(_))
        ));
        assert!(matches!(s.tick(Command::Lock { id: 9999 }), Err(Error::UnknownComponent(9999))));
    }
}
