use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cadence band and walking threshold for NASC step counting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NascConfig {
    pub min_frequency: f64,
    pub max_frequency: f64,
    /// Minimum normalized auto-correlation for a window to count as walking.
    pub walking_threshold: f64,
}

impl Default for NascConfig {
    fn default() -> Self {
        NascConfig { min_frequency: 0.8, max_frequency: 3.0, walking_threshold: 0.7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepCount {
    pub steps: u64,
    /// Zero when no walking was detected.
    pub step_frequency: f64,
}

/// Normalized auto-correlation between `a[m..m+tau]` and `a[m+tau..m+2tau]`.
fn nasc(a: &[f64], m: usize, tau: usize) -> f64 {
    let x = &a[m..m + tau];
    let y = &a[m + tau..m + 2 * tau];
    let n = tau as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (u, v) in x.iter().zip(y) {
        sxy += (u - mx) * (v - my);
        sxx += (u - mx) * (u - mx);
        syy += (v - my) * (v - my);
    }
    let denom = (sxx * syy).sqrt();
    if denom <= 1e-12 * n {
        return 0.0;
    }
    sxy / denom
}

pub fn count_steps_nasc(trace: &[f64], sample_rate: f64) -> Result<StepCount> {
    count_steps_nasc_with(trace, sample_rate, &NascConfig::default())
}

/// Counts steps with normalized auto-correlation over sliding windows.
///
/// Each window of two slowest-cadence periods picks the lag in the cadence
/// band with the best correlation, preferring the shortest lag that comes
/// close to the best so that multiples of the step period are not chosen.
pub fn count_steps_nasc_with(trace: &[f64], sample_rate: f64, cfg: &NascConfig) -> Result<StepCount> {
    if !(sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate", "must be > 0"));
    }
    let tau_min = ((sample_rate / cfg.max_frequency).floor() as usize).max(2);
    let tau_max = (sample_rate / cfg.min_frequency).ceil() as usize;
    let needed = 2 * tau_max;
    if trace.len() < needed {
        return Err(Error::TraceTooShort { len: trace.len(), needed });
    }
    let hop = (tau_max / 2).max(1);
    let starts: Vec<usize> = (0..=trace.len() - needed).step_by(hop).collect();
    let mut walking = 0usize;
    let mut periods = Vec::new();
    for &m in &starts {
        let chi: Vec<f64> = (tau_min..=tau_max).map(|tau| nasc(trace, m, tau)).collect();
        let best = chi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if best <= cfg.walking_threshold {
            continue;
        }
        walking += 1;
        let idx = (0..chi.len())
            .find(|&i| {
                let left = i == 0 || chi[i] >= chi[i - 1];
                let right = i + 1 == chi.len() || chi[i] >= chi[i + 1];
                left && right && chi[i] >= 0.95 * best
            })
            .expect("the global maximum qualifies");
        let mut tau = (tau_min + idx) as f64;
        if idx > 0 && idx + 1 < chi.len() {
            let (l, c, r) = (chi[idx - 1], chi[idx], chi[idx + 1]);
            let denom = l - 2.0 * c + r;
            if denom < 0.0 {
                tau += 0.5 * (l - r) / denom;
            }
        }
        periods.push(tau);
    }
    if walking == 0 {
        return Ok(StepCount { steps: 0, step_frequency: 0.0 });
    }
    periods.sort_by(f64::total_cmp);
    let tau = periods[periods.len() / 2];
    let frequency = sample_rate / tau;
    let duration = trace.len() as f64 / sample_rate * walking as f64 / starts.len() as f64;
    Ok(StepCount { steps: (duration * frequency).round() as u64, step_frequency: frequency })
}

/// Linear cadence-to-stride relationship.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrideModel {
    pub slope: f64,
    pub intercept: f64,
    pub min_frequency: f64,
    pub max_frequency: f64,
}

impl StrideModel {
    pub fn new(slope: f64, intercept: f64) -> Result<Self> {
        let m = StrideModel { slope, intercept, min_frequency: 0.8, max_frequency: 3.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_frequency > 0.0 && self.min_frequency < self.max_frequency) {
            return Err(Error::invalid("stride frequency range", "need 0 < min < max"));
        }
        let lo = self.slope * self.min_frequency + self.intercept;
        let hi = self.slope * self.max_frequency + self.intercept;
        if !(lo > 0.0 && hi > 0.0) {
            return Err(Error::invalid("stride model", "stride must be positive over the range"));
        }
        Ok(())
    }
}

pub fn stride_length(step_frequency: f64, model: &StrideModel) -> Result<f64> {
    if !(step_frequency >= model.min_frequency && step_frequency <= model.max_frequency) {
        return Err(Error::FrequencyOutOfRange(step_frequency));
    }
    Ok(model.slope * step_frequency + model.intercept)
}

/// Ordinary least-squares fit of stride against frequency.
pub fn fit_stride_model(samples: &[(f64, f64)]) -> Result<StrideModel> {
    if samples.len() < 2 {
        return Err(Error::invalid("samples", "need at least two (frequency, stride) pairs"));
    }
    let n = samples.len() as f64;
    let mf = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let ms = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sff: f64 = samples.iter().map(|s| (s.0 - mf).powi(2)).sum();
    if sff <= 0.0 {
        return Err(Error::invalid("samples", "frequencies must not all be equal"));
    }
    let sfs: f64 = samples.iter().map(|s| (s.0 - mf) * (s.1 - ms)).sum();
    let slope = sfs / sff;
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| (l.min(s.0), h.max(s.0)));
    let model = StrideModel { slope, intercept: ms - slope * mf, min_frequency: lo.max(f64::MIN_POSITIVE), max_frequency: hi };
    model.validate()?;
    Ok(model)
}
