//! Parameter abstraction: physical tuning parameters <-> the unit cube.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Whether a parameter takes real values or whole numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    #[default]
    Continuous,
    Integer,
}

/// Physical descriptor of one tunable parameter.
///
/// The search cube maps `prior_min → 0` and `prior_max → 1`; priors default
/// to the physical bounds and may only shrink them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub physical_min: f64,
    pub physical_max: f64,
    pub prior_min: f64,
    pub prior_max: f64,
    #[serde(default)]
    pub kind: ParamKind,
}

impl ParamSpec {
    pub fn new(name: impl Into<String>, min: f64, max: f64, kind: ParamKind) -> Result<Self> {
        let name = name.into();
        if !(min < max) {
            return Err(Error::InvalidParameter(format!(
                "{name}: empty range [{min}, {max}]"
            )));
        }
        Ok(Self {
            name,
            physical_min: min,
            physical_max: max,
            prior_min: min,
            prior_max: max,
            kind,
        })
    }

    pub fn continuous(name: impl Into<String>, min: f64, max: f64) -> Result<Self> {
        Self::new(name, min, max, ParamKind::Continuous)
    }

    pub fn integer(name: impl Into<String>, min: f64, max: f64) -> Result<Self> {
        Self::new(name, min, max, ParamKind::Integer)
    }

    /// Restricts the search range to `[lo, hi]` inside the physical range.
    pub fn with_prior(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(self.physical_min <= lo && lo < hi && hi <= self.physical_max) {
            return Err(Error::InvalidParameter(format!(
                "{}: prior [{lo}, {hi}] not inside [{}, {}]",
                self.name, self.physical_min, self.physical_max
            )));
        }
        self.prior_min = lo;
        self.prior_max = hi;
        Ok(self)
    }

    pub fn in_physical_range(&self, v: f64) -> bool {
        v >= self.physical_min && v <= self.physical_max
    }

    /// Affine map of a physical value inside the prior range onto `[0, 1]`.
    pub fn normalize(&self, physical: f64) -> Result<f64> {
        if !(physical >= self.prior_min && physical <= self.prior_max) {
            return Err(Error::OutOfBounds {
                name: self.name.clone(),
                value: physical,
                min: self.prior_min,
                max: self.prior_max,
            });
        }
        Ok(((physical - self.prior_min) / (self.prior_max - self.prior_min)).clamp(0.0, 1.0))
    }

    /// Inverse of [`normalize`](Self::normalize).
    pub fn denormalize(&self, unit: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&unit) {
            return Err(Error::OutOfBounds {
                name: self.name.clone(),
                value: unit,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok((self.prior_min + unit * (self.prior_max - self.prior_min))
            .clamp(self.prior_min, self.prior_max))
    }

    /// Physical value actually applied for a cube coordinate: integers are
    /// rounded and kept inside the prior range.
    pub fn decode(&self, unit: f64) -> Result<f64> {
        let v = self.denormalize(unit)?;
        Ok(match self.kind {
            ParamKind::Continuous => v,
            ParamKind::Integer => v
                .round()
                .clamp(self.prior_min.ceil(), self.prior_max.floor()),
        })
    }
}

/// A point of the normalized search cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TuningVector(Vec<f64>);

impl TuningVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfBounds {
                name: "tuning vector component".into(),
                value: *v,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(Self(values))
    }

    /// Clamps every component into the cube.
    pub fn projected(values: Vec<f64>) -> Self {
        Self(
            values
                .into_iter()
                .map(|v| if v.is_nan() { 0.5 } else { v.clamp(0.0, 1.0) })
                .collect(),
        )
    }

    pub fn center(dim: usize) -> Self {
        Self(vec![0.5; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &TuningVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Ordered list of parameter descriptors forming one search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    specs: Vec<ParamSpec>,
}

impl ParamSpace {
    pub fn new(specs: Vec<ParamSpec>) -> Self {
        Self { specs }
    }

    pub fn dim(&self) -> usize {
        self.specs.len()
    }

    pub fn specs(&self) -> &[ParamSpec] {
        &self.specs
    }

    pub fn spec(&self, name: &str) -> Option<&ParamSpec> {
        self.specs.iter().find(|s| s.name == name)
    }

    /// Replaces the prior range of the named parameter.
    pub fn set_prior(&mut self, name: &str, lo: f64, hi: f64) -> Result<()> {
        let spec = self
            .specs
            .iter_mut()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown parameter `{name}`")))?;
        *spec = spec.clone().with_prior(lo, hi)?;
        Ok(())
    }

    pub fn decode(&self, x: &TuningVector) -> Result<Vec<f64>> {
        self.check_dim(x.dim())?;
        self.specs
            .iter()
            .zip(x.as_slice())
            .map(|(s, &u)| s.decode(u))
            .collect()
    }

    pub fn encode(&self, physical: &[f64]) -> Result<TuningVector> {
        self.check_dim(physical.len())?;
        let values = self
            .specs
            .iter()
            .zip(physical)
            .map(|(s, &v)| s.normalize(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(TuningVector(values))
    }

    /// Like [`encode`](Self::encode) but clamps values that fall outside the
    /// prior range instead of failing (used for warm starts).
    pub fn encode_clamped(&self, physical: &[f64]) -> Result<TuningVector> {
        self.check_dim(physical.len())?;
        Ok(TuningVector(
            self.specs
                .iter()
                .zip(physical)
                .map(|(s, &v)| ((v - s.prior_min) / (s.prior_max - s.prior_min)).clamp(0.0, 1.0))
                .collect(),
        ))
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "parameter space has {} dimensions, got {d}",
                self.dim()
            )));
        }
        Ok(())
    }
}
