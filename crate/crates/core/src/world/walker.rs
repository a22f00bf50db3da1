use rand::Rng;
use serde::{Deserialize, Serialize};

use super::floor::GroundTruthFloor;
use super::rss::{scan, RssModel};
use crate::error::{Error, Result};
use crate::geometry::{normalize_heading, ApId, DisplacementVector, Point2};

/// Bounded uniform measurement error of the walker's inertial sensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuNoiseModel {
    /// Reported heading lies in `[true - bound, true + bound]`, degrees.
    pub heading_error_bound: f64,
    /// Reported length lies in `[(1 - f) * true, (1 + f) * true]`.
    pub length_error_fraction: f64,
}

impl ImuNoiseModel {
    pub const NOISELESS: ImuNoiseModel = ImuNoiseModel {
        heading_error_bound: 0.0,
        length_error_fraction: 0.0,
    };

    pub fn new(heading_error_bound: f64, length_error_fraction: f64) -> Result<Self> {
        let m = ImuNoiseModel {
            heading_error_bound,
            length_error_fraction,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.heading_error_bound >= 0.0) {
            return Err(Error::invalid("heading_error_bound", "must be >= 0"));
        }
        if !(self.length_error_fraction >= 0.0 && self.length_error_fraction < 1.0) {
            return Err(Error::invalid("length_error_fraction", "must be in [0, 1)"));
        }
        Ok(())
    }

    /// Same model with both bounds multiplied by `p`.
    pub fn scaled(&self, p: f64) -> Self {
        ImuNoiseModel {
            heading_error_bound: self.heading_error_bound * p,
            length_error_fraction: self.length_error_fraction * p,
        }
    }

    /// Draws `(heading error in degrees, length factor)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let h = if self.heading_error_bound > 0.0 {
            rng.random_range(-self.heading_error_bound..=self.heading_error_bound)
        } else {
            0.0
        };
        let f = if self.length_error_fraction > 0.0 {
            rng.random_range(1.0 - self.length_error_fraction..=1.0 + self.length_error_fraction)
        } else {
            1.0
        };
        (h, f)
    }

    /// Perturbs a true displacement.
    pub fn perturb<R: Rng + ?Sized>(&self, truth: DisplacementVector, rng: &mut R) -> DisplacementVector {
        let (dh, f) = self.draw(rng);
        DisplacementVector::new(truth.heading() + dh, truth.length() * f)
    }
}

impl Default for ImuNoiseModel {
    fn default() -> Self {
        ImuNoiseModel {
            heading_error_bound: 30.0,
            length_error_fraction: 0.10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkerState {
    pub true_position: Point2,
    pub true_heading: f64,
    pub clock: f64,
    /// Length units per time unit.
    pub speed: f64,
}

impl WalkerState {
    pub fn at(position: Point2) -> Self {
        WalkerState {
            true_position: position,
            true_heading: 0.0,
            clock: 0.0,
            speed: 1.0,
        }
    }
}

/// A commanded straight move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkCommand {
    pub heading: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub state: WalkerState,
    pub reported: DisplacementVector,
    pub scan: Vec<(ApId, f64)>,
    pub clipped: bool,
}

fn advance<R: Rng + ?Sized>(
    floor: &GroundTruthFloor,
    rss: &RssModel,
    state: &WalkerState,
    heading: f64,
    distance: f64,
    heading_error: f64,
    length_factor: f64,
    rng: &mut R,
) -> StepOutcome {
    let heading = normalize_heading(heading);
    let target = state.true_position + DisplacementVector::new(heading, distance).to_offset();
    let (reached, clipped) = floor.clip_move(state.true_position, target);
    let moved = state.true_position.dist(reached);
    let next = WalkerState {
        true_position: reached,
        true_heading: heading,
        clock: state.clock + moved / state.speed,
        speed: state.speed,
    };
    StepOutcome {
        reported: DisplacementVector::new(heading + heading_error, moved * length_factor),
        scan: scan(floor, reached, rss, rng),
        state: next,
        clipped,
    }
}

/// Moves the walker once. The true state follows the command exactly
/// (clipped at barriers); the reported vector carries the IMU error.
pub fn step_walker<R: Rng + ?Sized>(
    floor: &GroundTruthFloor,
    rss: &RssModel,
    state: &WalkerState,
    command: WalkCommand,
    noise: &ImuNoiseModel,
    rng: &mut R,
) -> StepOutcome {
    let (dh, f) = noise.draw(rng);
    advance(floor, rss, state, command.heading, command.distance.max(0.0), dh, f, rng)
}

/// Walks a command in sub-steps of at most `sample_spacing`, scanning after
/// each one. One IMU error draw applies to the whole command, so a straight
/// commanded segment is reported as straight. Stops early once clipped.
pub fn walk_segment<R: Rng + ?Sized>(
    floor: &GroundTruthFloor,
    rss: &RssModel,
    state: &WalkerState,
    command: WalkCommand,
    noise: &ImuNoiseModel,
    sample_spacing: f64,
    rng: &mut R,
) -> Vec<StepOutcome> {
    let (dh, f) = noise.draw(rng);
    let total = command.distance.max(0.0);
    let spacing = if sample_spacing > 0.0 { sample_spacing } else { total.max(1.0) };
    let n = ((total / spacing).ceil() as usize).max(1);
    let mut out = Vec::with_capacity(n);
    let mut cur = *state;
    for i in 0..n {
        let step = if i + 1 == n { total - spacing * (n - 1) as f64 } else { spacing };
        let o = advance(floor, rss, &cur, command.heading, step, dh, f, rng);
        cur = o.state;
        let clipped = o.clipped;
        out.push(o);
        if clipped {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{heading_diff, Rect};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn open_floor() -> GroundTruthFloor {
        GroundTruthFloor::new(100.0, 100.0).unwrap()
    }

    #[test]
    fn noiseless_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = WalkerState::at(Point2::new(10.0, 10.0));
        let o = step_walker(
            &open_floor(),
            &RssModel::default(),
            &s,
            WalkCommand { heading: 0.0, distance: 5.0 },
            &ImuNoiseModel::NOISELESS,
            &mut rng,
        );
        assert_eq!(o.reported, DisplacementVector::new(0.0, 5.0));
        assert_eq!(o.state.clock, 5.0);
        assert!(o.state.true_position.dist(Point2::new(15.0, 10.0)) < 1e-12);
        assert!(!o.clipped);
    }

    /// Monte-Carlo check of the reported-error bounds.
    #[test]
    fn reported_error_within_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let floor = open_floor();
        let noise = ImuNoiseModel::new(30.0, 0.10).unwrap();
        let s = WalkerState::at(Point2::new(50.0, 50.0));
        let (mut min_h, mut max_h) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..10_000 {
            let heading = (i % 360) as f64;
            let o = step_walker(&floor, &RssModel::default(), &s, WalkCommand { heading, distance: 4.0 }, &noise, &mut rng);
            let err = heading_diff(o.reported.heading(), heading);
            assert!(err <= 30.0 + 1e-9);
            assert!(o.reported.length() >= 0.9 * 4.0 - 1e-9 && o.reported.length() <= 1.1 * 4.0 + 1e-9);
            let signed = (o.reported.heading() - heading + 540.0).rem_euclid(360.0) - 180.0;
            min_h = min_h.min(signed);
            max_h = max_h.max(signed);
        }
        // the draws should actually explore the interval
        assert!(min_h < -29.0 && max_h > 29.0);
    }

    #[test]
    fn walking_into_obstacle_clips() {
        let mut floor = open_floor();
        floor.obstacles.push(Rect::new(Point2::new(20.0, 0.0), Point2::new(22.0, 100.0)).to_polygon());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let o = step_walker(
            &floor,
            &RssModel::default(),
            &WalkerState::at(Point2::new(10.0, 50.0)),
            WalkCommand { heading: 0.0, distance: 30.0 },
            &ImuNoiseModel::NOISELESS,
            &mut rng,
        );
        assert!(o.clipped);
        assert!(o.state.true_position.x < 20.0 && o.state.true_position.x > 19.99);
        assert!(floor.is_free(o.state.true_position));
        assert!((o.state.clock - o.state.true_position.dist(Point2::new(10.0, 50.0))).abs() < 1e-9);
    }

    #[test]
    fn segment_shares_one_error_draw() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let steps = walk_segment(
            &open_floor(),
            &RssModel::default(),
            &WalkerState::at(Point2::new(10.0, 10.0)),
            WalkCommand { heading: 45.0, distance: 7.5 },
            &ImuNoiseModel::default(),
            1.0,
            &mut rng,
        );
        assert_eq!(steps.len(), 8);
        let h = steps[0].reported.heading();
        assert!(steps.iter().all(|s| s.reported.heading() == h));
        assert!((steps.last().unwrap().state.clock - 7.5).abs() < 1e-9);
    }
}
