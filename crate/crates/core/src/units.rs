//! Speed units accepted at configuration boundaries.
//!
//! Everything inside the crate is SI. Miles per hour only enter through
//! [`Speed`] values read from files or typed on the command line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Exact international mile per hour in meters per second.
pub const MPS_PER_MPH: f64 = 0.44704;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedUnit {
    Mph,
    Mps,
}

/// A speed tagged with its unit, as written in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Speed<S> {
    pub value: S,
    pub unit: SpeedUnit,
}

impl<S: Scalar> Speed<S> {
    pub fn mph(value: S) -> Self {
        Self { value, unit: SpeedUnit::Mph }
    }

    pub fn mps(value: S) -> Self {
        Self { value, unit: SpeedUnit::Mps }
    }

    pub fn to_mps(self) -> S {
        match self.unit {
            SpeedUnit::Mph => self.value * S::lit(MPS_PER_MPH),
            SpeedUnit::Mps => self.value,
        }
    }
}

pub fn mph<S: Scalar>(value: S) -> S {
    Speed::mph(value).to_mps()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse speed {0:?}: expected a number followed by `mph` or `mps`")]
pub struct ParseSpeedError(String);

impl<S: Scalar + FromStr> FromStr for Speed<S> {
    type Err = ParseSpeedError;

    /// Parses `55mph`, `24.5872mps` or `24.5872 mps`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (num, unit) = if let Some(n) = t.strip_suffix("mph") {
            (n, SpeedUnit::Mph)
        } else if let Some(n) = t.strip_suffix("mps") {
            (n, SpeedUnit::Mps)
        } else {
            return Err(ParseSpeedError(s.to_owned()));
        };
        let value = num
            .trim()
            .parse::<S>()
            .map_err(|_| ParseSpeedError(s.to_owned()))?;
        Ok(Self { value, unit })
    }
}

impl<S: fmt::Display> fmt::Display for Speed<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = match self.unit {
            SpeedUnit::Mph => "mph",
            SpeedUnit::Mps => "mps",
        };
        write!(f, "{}{}", self.value, unit)
    }
}
