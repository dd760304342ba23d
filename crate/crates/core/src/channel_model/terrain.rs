use serde::Serialize;

use super::ChannelError;
use crate::scalar::Scalar;

/// Default antenna height above the road for a roof-mounted OBU, m.
pub const ROOFTOP_ANTENNA_HEIGHT_M: f64 = 1.5;
/// Default antenna height for an OBU inside the cabin, m.
pub const INSIDE_ANTENNA_HEIGHT_M: f64 = 1.1;

/// Piecewise-linear road elevation along the travel axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerrainProfile<S> {
    /// `(position_m, elevation_m)` pairs, positions strictly increasing.
    samples: Vec<(S, S)>,
    #[serde(rename = "antenna_height_m")]
    antenna_height: S,
}

impl<S: Scalar> TerrainProfile<S> {
    pub fn new(samples: Vec<(S, S)>, antenna_height: S) -> Result<Self, ChannelError> {
        if samples.len() < 2 {
            return Err(ChannelError::InvalidTerrain(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        for (i, (p, e)) in samples.iter().enumerate() {
            if !p.is_finite() || !e.is_finite() {
                return Err(ChannelError::InvalidTerrain(format!("sample {i} is not finite")));
            }
            if i > 0 && !(samples[i - 1].0 < *p) {
                return Err(ChannelError::InvalidTerrain(format!(
                    "positions must be strictly increasing (sample {i} at {p})"
                )));
            }
        }
        if !(antenna_height.is_finite() && antenna_height >= S::zero()) {
            return Err(ChannelError::InvalidTerrain(format!(
                "antenna_height_m must be finite and >= 0 (got {antenna_height})"
            )));
        }
        Ok(Self { samples, antenna_height })
    }

    pub fn flat(start: S, end: S, elevation: S, antenna_height: S) -> Result<Self, ChannelError> {
        Self::new(vec![(start, elevation), (end, elevation)], antenna_height)
    }

    pub fn samples(&self) -> &[(S, S)] {
        &self.samples
    }

    pub fn antenna_height(&self) -> S {
        self.antenna_height
    }

    pub fn with_antenna_height(&self, antenna_height: S) -> Result<Self, ChannelError> {
        Self::new(self.samples.clone(), antenna_height)
    }

    pub fn span(&self) -> (S, S) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    pub fn contains(&self, pos: S) -> bool {
        let (lo, hi) = self.span();
        pos >= lo && pos <= hi
    }

    fn check(&self, pos: S) -> Result<(), ChannelError> {
        if self.contains(pos) {
            Ok(())
        } else {
            let (lo, hi) = self.span();
            Err(ChannelError::OutOfProfile {
                position: pos.to_f64_lossy(),
                start: lo.to_f64_lossy(),
                end: hi.to_f64_lossy(),
            })
        }
    }

    /// Road elevation at `pos` by linear interpolation.
    pub fn elevation(&self, pos: S) -> Result<S, ChannelError> {
        self.check(pos)?;
        let i = self.samples.partition_point(|(p, _)| *p < pos);
        if i < self.samples.len() && self.samples[i].0 == pos {
            return Ok(self.samples[i].1);
        }
        let (p0, e0) = self.samples[i - 1];
        let (p1, e1) = self.samples[i];
        Ok(e0 + (e1 - e0) * ((pos - p0) / (p1 - p0)))
    }

    /// Whether the straight path between the two antennas clears the road
    /// surface at every interior sample point.
    ///
    /// Terrain is linear between samples and so is the radio path, so
    /// clearance can only be lost at a sample vertex.
    pub fn line_of_sight(&self, pos_a: S, pos_b: S) -> Result<bool, ChannelError> {
        self.check(pos_a)?;
        self.check(pos_b)?;
        // Orient the segment so the result is bit-identical for (a, b) and (b, a).
        let (lo, hi) = if pos_a <= pos_b { (pos_a, pos_b) } else { (pos_b, pos_a) };
        if lo == hi {
            return Ok(true);
        }
        let h_lo = self.elevation(lo)? + self.antenna_height;
        let h_hi = self.elevation(hi)? + self.antenna_height;
        let first = self.samples.partition_point(|(p, _)| *p <= lo);
        for &(p, e) in self.samples[first..].iter().take_while(|(p, _)| *p < hi) {
            let ray = h_lo + (h_hi - h_lo) * ((p - lo) / (hi - lo));
            if ray <= e {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crest() -> TerrainProfile<f64> {
        TerrainProfile::new(vec![(0.0, 0.0), (500.0, 10.0), (1000.0, 0.0)], 1.5).unwrap()
    }

    #[test]
    fn flat_never_blocks() {
        let t = TerrainProfile::flat(-100.0, 100.0, 3.0, 0.0).unwrap();
        assert!(t.line_of_sight(-100.0, 100.0).unwrap());
        assert!(t.line_of_sight(5.0, -7.5).unwrap());
    }

    #[test]
    fn crest_above_both_antennas_blocks() {
        assert!(!crest().line_of_sight(100.0, 900.0).unwrap());
        assert!(!crest().line_of_sight(900.0, 100.0).unwrap());
        // Both on the same slope: the ray rides above the straight road.
        assert!(crest().line_of_sight(100.0, 400.0).unwrap());
    }

    #[test]
    fn out_of_profile_is_an_error() {
        assert!(matches!(
            crest().line_of_sight(-1.0, 10.0),
            Err(ChannelError::OutOfProfile { .. })
        ));
        assert!(crest().elevation(1000.5).is_err());
    }

    #[test]
    fn interpolates_elevation() {
        assert_eq!(crest().elevation(250.0).unwrap(), 5.0);
        assert_eq!(crest().elevation(500.0).unwrap(), 10.0);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(TerrainProfile::new(vec![(0.0, 0.0)], 1.0).is_err());
        assert!(TerrainProfile::new(vec![(0.0, 0.0), (0.0, 1.0)], 1.0).is_err());
        assert!(TerrainProfile::new(vec![(0.0, 0.0), (1.0, 1.0)], -1.0).is_err());
    }
}
