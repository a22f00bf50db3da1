use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::floor::GroundTruthFloor;
use crate::error::{Error, Result};
use crate::geometry::{ApId, Point2};

/// Log-distance path loss with Gaussian shadowing noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssModel {
    /// Received power at the reference distance, dBm.
    pub tx_power: f64,
    pub path_loss_exponent: f64,
    pub reference_distance: f64,
    pub coverage_radius: f64,
    /// Standard deviation of the additive noise, dB.
    pub noise_sigma: f64,
}

impl Default for RssModel {
    fn default() -> Self {
        RssModel {
            tx_power: -30.0,
            path_loss_exponent: 3.0,
            reference_distance: 1.0,
            coverage_radius: 10.0,
            noise_sigma: 0.0,
        }
    }
}

impl RssModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.coverage_radius > 0.0) {
            return Err(Error::invalid("coverage_radius", "must be > 0"));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(Error::invalid("path_loss_exponent", "must be > 0"));
        }
        if !(self.reference_distance > 0.0) {
            return Err(Error::invalid("reference_distance", "must be > 0"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::invalid("noise_sigma", "must be >= 0"));
        }
        Ok(())
    }

    /// Noiseless received power at distance `d`, ignoring coverage. Strictly
    /// decreasing; distances are floored at a millionth of the reference
    /// distance so the AP position itself stays finite.
    pub fn mean_rss(&self, d: f64) -> f64 {
        let ratio = d.max(1e-6 * self.reference_distance) / self.reference_distance;
        self.tx_power - 10.0 * self.path_loss_exponent * ratio.log10()
    }

    /// Received power at distance `d`, `None` beyond the coverage radius.
    pub fn sample<R: Rng + ?Sized>(&self, d: f64, rng: &mut R) -> Option<f64> {
        if d > self.coverage_radius {
            return None;
        }
        let mut rss = self.mean_rss(d);
        if self.noise_sigma > 0.0 {
            // sigma validated > 0 here
            rss += Normal::new(0.0, self.noise_sigma).expect("valid sigma").sample(rng);
        }
        Some(rss)
    }
}

/// RSS of `ap` observed at `p`.
pub fn rss_at<R: Rng + ?Sized>(
    floor: &GroundTruthFloor,
    ap: ApId,
    p: Point2,
    model: &RssModel,
    rng: &mut R,
) -> Result<Option<f64>> {
    let pos = floor.ap_position(ap)?;
    Ok(model.sample(pos.dist(p), rng))
}

/// All in-range APs at `p`, in AP id order.
pub fn scan<R: Rng + ?Sized>(
    floor: &GroundTruthFloor,
    p: Point2,
    model: &RssModel,
    rng: &mut R,
) -> Vec<(ApId, f64)> {
    let mut aps: Vec<_> = floor.aps.iter().collect();
    aps.sort_by_key(|a| a.id);
    aps.into_iter()
        .filter_map(|a| model.sample(a.position.dist(p), rng).map(|r| (a.id, r)))
        .collect()
}
