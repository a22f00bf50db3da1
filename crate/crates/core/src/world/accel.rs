use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Standard gravity, m/s^2.
pub const GRAVITY: f64 = 9.81;

/// Peak vertical acceleration swing of a walking step, m/s^2.
pub const STEP_AMPLITUDE: f64 = 2.0;

/// Accelerometer-magnitude trace of steady walking: gravity plus a sinusoid
/// at the step frequency plus Gaussian noise. Sample `i` is taken at
/// `t = i / sample_rate`; the trace holds `floor(duration * sample_rate)`
/// samples.
pub fn synth_accel_trace(
    step_frequency: f64,
    duration: f64,
    sample_rate: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(sample_rate > 2.0 * step_frequency) {
        return Err(Error::Aliasing { sample_rate, step_frequency });
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::invalid("noise_sigma", "must be >= 0"));
    }
    let n = (duration.max(0.0) * sample_rate + 1e-9).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::invalid("noise_sigma", e.to_string()))?;
    Ok((0..n)
        .map(|i| {
            let t = i as f64 / sample_rate;
            let v = GRAVITY + STEP_AMPLITUDE * (std::f64::consts::TAU * step_frequency * t).sin();
            if noise_sigma > 0.0 {
                v + noise.sample(&mut rng)
            } else {
                v
            }
        })
        .collect())
}
