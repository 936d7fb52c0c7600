//! Nonnegative i.i.d. potentials: distributions, sampling, distribution
//! function, cumulant-generating function and condition classification.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Domain, LatticePoint};

/// Single-site law of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec {
    /// `P[V = 1] = p`, `P[V = 0] = 1 - p`.
    Bernoulli { p: f64 },
    Uniform01,
    PointMass { v: f64 },
}

impl DistributionSpec {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "bernoulli parameter must lie in (0, 1), got {p}"
            )));
        }
        Ok(DistributionSpec::Bernoulli { p })
    }

    pub fn point_mass(v: f64) -> Result<Self> {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "point mass must be finite and nonnegative, got {v}"
            )));
        }
        Ok(DistributionSpec::PointMass { v })
    }

    /// Maps a uniform variate in `[0, 1)` to a potential value.
    fn quantile(&self, u: f64) -> f64 {
        match *self {
            DistributionSpec::Bernoulli { p } => {
                if u < p {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionSpec::Uniform01 => u,
            DistributionSpec::PointMass { v } => v,
        }
    }

    /// Largest value the distribution can produce.
    pub fn sup(&self) -> f64 {
        match *self {
            DistributionSpec::Bernoulli { .. } | DistributionSpec::Uniform01 => 1.0,
            DistributionSpec::PointMass { v } => v,
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::ParseSpec(s.to_string()))?
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::ParseSpec(s.to_string()))
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("bernoulli", a) => DistributionSpec::bernoulli(num(a)?),
            ("uniform01", None) => Ok(DistributionSpec::Uniform01),
            ("pointmass", a) => DistributionSpec::point_mass(num(a)?),
            _ => Err(Error::ParseSpec(s.to_string())),
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::Bernoulli { p } => write!(f, "bernoulli:{p}"),
            DistributionSpec::Uniform01 => write!(f, "uniform01"),
            DistributionSpec::PointMass { v } => write!(f, "pointmass:{v}"),
        }
    }
}

/// Behavior of the distribution function near zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum ConditionTag {
    /// `0 < F(0) < 1`.
    AtomAtZero { f0: f64 },
    /// `F(t) = c t^eta (1 + o(1))` as `t -> 0`.
    PowerLaw { c: f64, eta: f64 },
}

/// Where a field's values came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSource {
    Sampled {
        spec: DistributionSpec,
        seed: u64,
        trial: u64,
    },
    Explicit,
}

/// Nonnegative potential values on a domain, in stored site order.
#[derive(Debug, Clone)]
pub struct PotentialField {
    domain: Arc<Domain>,
    values: Vec<f64>,
    source: FieldSource,
}

impl PotentialField {
    /// Wraps explicit values; every value must be finite and nonnegative.
    pub fn from_values(domain: Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::LengthMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(Error::NegativePotential { index, value });
        }
        Ok(PotentialField {
            domain,
            values,
            source: FieldSource::Explicit,
        })
    }

    pub fn zero(domain: Arc<Domain>) -> Self {
        let values = vec![0.0; domain.len()];
        PotentialField {
            domain,
            values,
            source: FieldSource::Explicit,
        }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> FieldSource {
        self.source
    }

    pub fn spec(&self) -> Option<DistributionSpec> {
        match self.source {
            FieldSource::Sampled { spec, .. } => Some(spec),
            FieldSource::Explicit => None,
        }
    }

    pub fn value_at(&self, p: &LatticePoint) -> Option<f64> {
        self.domain.index_of(p).map(|i| self.values[i])
    }

    /// Values on `sub`, looked up by coordinates. `sub` must be contained in
    /// this field's domain.
    pub fn restrict(&self, sub: &Arc<Domain>) -> Result<PotentialField> {
        let values = sub
            .points()
            .iter()
            .map(|p| self.value_at(p).ok_or(Error::NotSubdomain))
            .collect::<Result<Vec<_>>>()?;
        Ok(PotentialField {
            domain: Arc::clone(sub),
            values,
            source: self.source,
        })
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform variate in `[0, 1)` keyed on `(seed, trial, coordinates)`.
pub fn site_uniform(seed: u64, trial: u64, coords: &[i64]) -> f64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN_GAMMA));
    h = mix64(h ^ trial.wrapping_mul(GOLDEN_GAMMA).wrapping_add(0x632b_e59b_d9b4_e019));
    for &c in coords {
        h = mix64(h.wrapping_add(GOLDEN_GAMMA) ^ (c as u64));
    }
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Samples i.i.d. values on `dom`. Each site's value depends only on
/// `(seed, trial, coordinates of the site)`.
pub fn sample_potential(
    spec: DistributionSpec,
    dom: &Arc<Domain>,
    seed: u64,
    trial: u64,
) -> PotentialField {
    let values = dom
        .points()
        .iter()
        .map(|p| spec.quantile(site_uniform(seed, trial, p.coords())))
        .collect();
    PotentialField {
        domain: Arc::clone(dom),
        values,
        source: FieldSource::Sampled { spec, seed, trial },
    }
}

/// `F(t) = P[V(0) <= t]`.
pub fn cdf(spec: DistributionSpec, t: f64) -> f64 {
    match spec {
        DistributionSpec::Bernoulli { p } => {
            if t < 0.0 {
                0.0
            } else if t < 1.0 {
                1.0 - p
            } else {
                1.0
            }
        }
        DistributionSpec::Uniform01 => t.clamp(0.0, 1.0),
        DistributionSpec::PointMass { v } => {
            if t < v {
                0.0
            } else {
                1.0
            }
        }
    }
}

/// `H(t) = ln E[exp(-t V(0))]` for `t > 0`.
pub fn cgf(spec: DistributionSpec, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("cgf needs t > 0, got {t}")));
    }
    Ok(match spec {
        DistributionSpec::Bernoulli { p } => {
            (1.0 - p).ln() + (p / (1.0 - p) * (-t).exp()).ln_1p()
        }
        DistributionSpec::Uniform01 => {
            if t < 1e-6 {
                // ln((1 - e^{-t}) / t) = -t/2 + t^2/24 - t^4/2880 + ...
                -0.5 * t + t * t / 24.0
            } else {
                (-(-t).exp_m1()).ln() - t.ln()
            }
        }
        DistributionSpec::PointMass { v } => -t * v,
    })
}

pub fn classify(spec: DistributionSpec) -> Result<ConditionTag> {
    match spec {
        DistributionSpec::Bernoulli { p } => Ok(ConditionTag::AtomAtZero { f0: 1.0 - p }),
        DistributionSpec::Uniform01 => Ok(ConditionTag::PowerLaw { c: 1.0, eta: 1.0 }),
        DistributionSpec::PointMass { .. } => Err(Error::Unclassifiable),
    }
}
