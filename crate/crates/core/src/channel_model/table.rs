use serde::{Deserialize, Serialize};

use super::{ChannelError, Direction, Placement};
use crate::scalar::Scalar;
use crate::units::mph;

/// One calibrated range measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeEntry<S> {
    pub placement: Placement,
    pub direction: Direction,
    /// Per-vehicle speed of the symmetric approach, m/s.
    pub speed_mps: S,
    pub max_range_m: S,
}

/// Maximum communication range indexed by placement, direction and speed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RangeTable<S> {
    entries: Vec<RangeEntry<S>>,
}

impl<'de, S> Deserialize<'de> for RangeTable<S>
where
    S: Scalar + Deserialize<'de>,
{
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let entries = Vec::<RangeEntry<S>>::deserialize(d)?;
        Self::new(entries).map_err(serde::de::Error::custom)
    }
}

/// Rooftop range used by the shipped calibration for both directions.
pub const ROOFTOP_RANGE_M: f64 = 1000.0;
/// Rooftop backward range of the asymmetric preset.
pub const ROOFTOP_ASYMMETRIC_BACKWARD_M: f64 = 1020.0;

/// Inside-vehicle measurements: (mph, forward m, backward m).
const INSIDE_POINTS: [(f64, f64, f64); 2] = [(55.0, 466.0, 327.0), (70.0, 401.0, 400.0)];

impl<S: Scalar> RangeTable<S> {
    pub fn new(entries: Vec<RangeEntry<S>>) -> Result<Self, ChannelError> {
        if entries.is_empty() {
            return Err(ChannelError::InvalidTable("table has no entries".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            if !(e.speed_mps.is_finite() && e.speed_mps > S::zero()) {
                return Err(ChannelError::InvalidTable(format!(
                    "entry {i}: speed_mps must be finite and > 0 (got {})",
                    e.speed_mps
                )));
            }
            if !(e.max_range_m.is_finite() && e.max_range_m >= S::zero()) {
                return Err(ChannelError::InvalidTable(format!(
                    "entry {i}: max_range_m must be finite and >= 0 (got {})",
                    e.max_range_m
                )));
            }
            if let Some(j) = entries[..i].iter().position(|o| {
                o.placement == e.placement && o.direction == e.direction && o.speed_mps == e.speed_mps
            }) {
                return Err(ChannelError::InvalidTable(format!(
                    "entries {j} and {i} share key ({:?}, {:?}, {} m/s)",
                    e.placement, e.direction, e.speed_mps
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Field calibration: inside-vehicle 466/401 m forward and 327/400 m
    /// backward at 55/70 mph, rooftop 1000 m both ways.
    pub fn reference_default() -> Self {
        Self::reference_with_rooftop(S::lit(ROOFTOP_RANGE_M), S::lit(ROOFTOP_RANGE_M))
    }

    /// Same as [`RangeTable::reference_default`] with the rooftop backward range
    /// slightly above forward.
    pub fn reference_asymmetric() -> Self {
        Self::reference_with_rooftop(S::lit(ROOFTOP_RANGE_M), S::lit(ROOFTOP_ASYMMETRIC_BACKWARD_M))
    }

    fn reference_with_rooftop(forward: S, backward: S) -> Self {
        let mut entries = Vec::with_capacity(8);
        for (speed_mph, inside_fwd, inside_bwd) in INSIDE_POINTS {
            let speed = mph(S::lit(speed_mph));
            let mut push = |placement, direction, range| {
                entries.push(RangeEntry {
                    placement,
                    direction,
                    speed_mps: speed,
                    max_range_m: range,
                })
            };
            push(Placement::InsideVehicle, Direction::Forward, S::lit(inside_fwd));
            push(Placement::InsideVehicle, Direction::Backward, S::lit(inside_bwd));
            push(Placement::Rooftop, Direction::Forward, forward);
            push(Placement::Rooftop, Direction::Backward, backward);
        }
        Self::new(entries).expect("built-in calibration is valid")
    }

    pub fn entries(&self) -> &[RangeEntry<S>] {
        &self.entries
    }

    /// Names the first measured inside-vehicle point this table does not
    /// reproduce exactly, if any.
    pub fn missing_reference_point(&self) -> Option<String> {
        for (speed_mph, fwd, bwd) in INSIDE_POINTS {
            let speed = mph(S::lit(speed_mph));
            for (direction, range) in [(Direction::Forward, fwd), (Direction::Backward, bwd)] {
                let found = self.entries.iter().any(|e| {
                    e.placement == Placement::InsideVehicle
                        && e.direction == direction
                        && e.speed_mps == speed
                        && e.max_range_m == S::lit(range)
                });
                if !found {
                    return Some(format!("InsideVehicle {direction:?} {speed_mph} mph = {range} m"));
                }
            }
        }
        None
    }

    /// Calibrated points for one curve, sorted by speed.
    pub fn curve(&self, placement: Placement, direction: Direction) -> Vec<(S, S)> {
        let mut pts: Vec<(S, S)> = self
            .entries
            .iter()
            .filter(|e| e.placement == placement && e.direction == direction)
            .map(|e| (e.speed_mps, e.max_range_m))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("validated finite"));
        pts
    }

    pub fn speed_interval(&self, placement: Placement, direction: Direction) -> Option<(S, S)> {
        let c = self.curve(placement, direction);
        Some((c.first()?.0, c.last()?.0))
    }

    /// Linear interpolation on speed; exact at table speeds, no extrapolation.
    pub fn lookup(&self, placement: Placement, direction: Direction, speed: S) -> Result<S, ChannelError> {
        let curve = self.curve(placement, direction);
        let (lo, hi) = match (curve.first(), curve.last()) {
            (Some(lo), Some(hi)) => (lo.0, hi.0),
            _ => return Err(ChannelError::NoCalibration { placement, direction }),
        };
        if !(speed >= lo && speed <= hi) {
            return Err(ChannelError::Extrapolation {
                placement,
                direction,
                speed: speed.to_f64_lossy(),
                min: lo.to_f64_lossy(),
                max: hi.to_f64_lossy(),
            });
        }
        if let Some(&(_, r)) = curve.iter().find(|(s, _)| *s == speed) {
            return Ok(r);
        }
        let upper = curve.partition_point(|(s, _)| *s < speed);
        let (s0, r0) = curve[upper - 1];
        let (s1, r1) = curve[upper];
        let frac = (speed - s0) / (s1 - s0);
        Ok(r0 + (r1 - r0) * frac)
    }

    pub fn max_for(&self, placement: Placement) -> Option<S> {
        self.entries
            .iter()
            .filter(|e| e.placement == placement)
            .map(|e| e.max_range_m)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: S| a.max(r))))
    }

    pub fn min_range(&self) -> S {
        self.entries
            .iter()
            .map(|e| e.max_range_m)
            .fold(S::infinity(), |a, r| a.min(r))
    }

    /// Every range multiplied by `factor` (must be finite and >= 0).
    pub fn scaled(&self, factor: S) -> Result<Self, ChannelError> {
        Self::new(
            self.entries
                .iter()
                .map(|e| RangeEntry {
                    max_range_m: e.max_range_m * factor,
                    ..*e
                })
                .collect(),
        )
    }
}
