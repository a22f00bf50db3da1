use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::ImuNoiseModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Approach {
    Chi,
    /// Measurement error scaled by `p`, `c` time units per measured length.
    Fingerprinting { p: f64, c: f64 },
    Crowdsourcing { crowds: usize },
}

impl Approach {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Approach::Chi => Ok(()),
            Approach::Fingerprinting { p, c } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::invalid("p", "must be in (0, 1)"));
                }
                if !(c > 1.0 && c.is_finite()) {
                    return Err(Error::invalid("c", "must be > 1"));
                }
                Ok(())
            }
            Approach::Crowdsourcing { crowds } if crowds == 0 => Err(Error::invalid("crowds", "must be >= 1")),
            Approach::Crowdsourcing { .. } => Ok(()),
        }
    }
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            Ok(n / d)
        }
        None => s.parse().map_err(|_| format!("bad number `{s}`")),
    }
}

fn fmt_fraction(p: f64) -> String {
    let inv = 1.0 / p;
    if (inv - inv.round()).abs() < 1e-9 {
        format!("1/{}", inv.round())
    } else {
        format!("{p}")
    }
}

/// `chi`, `fp:p,c` (p may be a fraction such as `1/5`) or `crowd:k`.
impl FromStr for Approach {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let a = if s.eq_ignore_ascii_case("chi") {
            Approach::Chi
        } else if let Some(rest) = s.strip_prefix("fp:") {
            let (p, c) = rest.split_once(',').ok_or_else(|| format!("expected fp:p,c, got `{s}`"))?;
            Approach::Fingerprinting { p: parse_number(p)?, c: parse_number(c)? }
        } else if let Some(k) = s.strip_prefix("crowd:") {
            Approach::Crowdsourcing { crowds: k.trim().parse().map_err(|_| format!("bad crowd count `{k}`"))? }
        } else {
            return Err(format!("unknown approach `{s}`"));
        };
        a.validate().map_err(|e| e.to_string())?;
        Ok(a)
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Approach::Chi => write!(f, "chi"),
            Approach::Fingerprinting { p, c } => write!(f, "fp:{},{}", fmt_fraction(p), c),
            Approach::Crowdsourcing { crowds } => write!(f, "crowd:{crowds}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproachConfig {
    pub approach: Approach,
    /// Base walking noise; fingerprinting scales it by `p`.
    pub noise: ImuNoiseModel,
}

impl ApproachConfig {
    pub fn new(approach: Approach, noise: ImuNoiseModel) -> Result<Self> {
        approach.validate()?;
        noise.validate()?;
        Ok(ApproachConfig { approach, noise })
    }

    pub fn measurement_noise(&self) -> ImuNoiseModel {
        match self.approach {
            Approach::Fingerprinting { p, .. } => self.noise.scaled(p),
            _ => self.noise,
        }
    }

    /// Time units per measured length.
    pub fn time_per_length(&self) -> f64 {
        match self.approach {
            Approach::Fingerprinting { c, .. } => c,
            _ => 1.0,
        }
    }
}

/// Per-time-unit laborer expense, per-device expense and device count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub e_l: f64,
    pub e_d: f64,
    pub b: f64,
}

impl CostParams {
    pub fn new(e_l: f64, e_d: f64, b: f64) -> Result<Self> {
        let c = CostParams { e_l, e_d, b };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("e_l", self.e_l), ("e_d", self.e_d), ("b", self.b)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be >= 0"));
            }
        }
        Ok(())
    }

    /// One laborer with one device at (0.1, 36); fingerprinting devices
    /// cost 36/p; crowdsourcing costs nothing.
    pub fn for_approach(approach: &Approach) -> Self {
        match *approach {
            Approach::Chi => CostParams { e_l: 0.1, e_d: 36.0, b: 1.0 },
            Approach::Fingerprinting { p, .. } => CostParams { e_l: 0.1, e_d: 36.0 / p, b: 1.0 },
            Approach::Crowdsourcing { crowds } => CostParams { e_l: 0.0, e_d: 0.0, b: crowds as f64 },
        }
    }
}

/// `E = t * e_l + b * e_d`.
pub fn expense(t: f64, params: &CostParams) -> f64 {
    t * params.e_l + params.b * params.e_d
}
