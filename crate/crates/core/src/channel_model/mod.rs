//! Empirical DSRC V2V channel.
//!
//! The range of a link is looked up in a calibration table indexed by OBU
//! placement, transmit direction and approach speed. Terrain, when present,
//! adds a geometric line-of-sight gate, and a [`DeliveryModel`] turns
//! distance into a delivery probability.

mod table;
mod terrain;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

pub use table::{RangeEntry, RangeTable, ROOFTOP_ASYMMETRIC_BACKWARD_M, ROOFTOP_RANGE_M};
pub use terrain::{TerrainProfile, INSIDE_ANTENNA_HEIGHT_M, ROOFTOP_ANTENNA_HEIGHT_M};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error(
        "no silent extrapolation: speed {speed} m/s is outside the calibrated interval [{min}, {max}] for {placement:?}/{direction:?}"
    )]
    Extrapolation {
        placement: Placement,
        direction: Direction,
        speed: f64,
        min: f64,
        max: f64,
    },
    #[error("calibration table has no entries for {placement:?}/{direction:?}")]
    NoCalibration {
        placement: Placement,
        direction: Direction,
    },
    #[error("position {position} m lies outside the terrain profile [{start}, {end}]")]
    OutOfProfile { position: f64, start: f64, end: f64 },
    #[error("RangeTable invariant violated: {0}")]
    InvalidTable(String),
    #[error("TerrainProfile invariant violated: {0}")]
    InvalidTerrain(String),
    #[error("ChannelModel invariant violated: {0}")]
    InvalidDelivery(String),
    #[error("hop positions must be ordered along the road away from the sender")]
    UnorderedHops,
    #[error("distance must be >= 0 (got {0})")]
    NegativeDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    InsideVehicle,
    Rooftop,
}

impl Placement {
    pub fn default_antenna_height<S: Scalar>(self) -> S {
        match self {
            Placement::InsideVehicle => S::lit(INSIDE_ANTENNA_HEIGHT_M),
            Placement::Rooftop => S::lit(ROOFTOP_ANTENNA_HEIGHT_M),
        }
    }
}

/// Transmit direction relative to the transmitting vehicle's heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// Travel direction on the 1-D road axis (eastbound is +x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heading {
    Eastbound,
    Westbound,
}

impl Heading {
    pub fn sign<S: Scalar>(self) -> S {
        match self {
            Heading::Eastbound => S::one(),
            Heading::Westbound => -S::one(),
        }
    }

    /// Direction of a transmission from a vehicle at `from` with this heading
    /// towards a receiver at `to`. Co-located receivers count as forward.
    pub fn direction_to<S: Scalar>(self, from: S, to: S) -> Direction {
        if (to - from) * self.sign::<S>() >= S::zero() {
            Direction::Forward
        } else {
            Direction::Backward
        }
    }
}

/// A vehicle taking part in a relay chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainNode<S> {
    pub position: S,
    pub heading: Heading,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DeliveryModel<S> {
    /// Disk model: delivered iff distance <= range.
    #[default]
    Deterministic,
    /// Probability ramps linearly from 1 at `range - edge_width` to 0 at `range`.
    LinearEdge { edge_width: S },
}

impl<S: Scalar> DeliveryModel<S> {
    pub fn is_probabilistic(&self) -> bool {
        matches!(self, Self::LinearEdge { edge_width } if *edge_width > S::zero())
    }

    /// Delivery probability at `distance` for a link of range `range`.
    /// A zero-range link never delivers.
    pub fn probability(&self, range: S, distance: S) -> S {
        if range <= S::zero() || distance > range {
            return S::zero();
        }
        match *self {
            Self::Deterministic => S::one(),
            Self::LinearEdge { edge_width } => {
                if distance <= range - edge_width {
                    S::one()
                } else {
                    (range - distance) / edge_width
                }
            }
        }
    }
}

/// Calibration table plus optional terrain and delivery model. Immutable
/// once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelModel<S> {
    table: RangeTable<S>,
    terrain: Option<TerrainProfile<S>>,
    delivery: DeliveryModel<S>,
}

impl<S: Scalar> ChannelModel<S> {
    pub fn new(
        table: RangeTable<S>,
        terrain: Option<TerrainProfile<S>>,
        delivery: DeliveryModel<S>,
    ) -> Result<Self, ChannelError> {
        if let DeliveryModel::LinearEdge { edge_width } = delivery {
            if !(edge_width.is_finite() && edge_width >= S::zero()) {
                return Err(ChannelError::InvalidDelivery(format!(
                    "edge_width must be >= 0 (got {edge_width})"
                )));
            }
            if edge_width > table.min_range() {
                return Err(ChannelError::InvalidDelivery(format!(
                    "edge_width {edge_width} exceeds the smallest table range {}",
                    table.min_range()
                )));
            }
        }
        Ok(Self {
            table,
            terrain,
            delivery,
        })
    }

    /// Shipped calibration, no terrain, disk delivery.
    pub fn reference_default() -> Self {
        Self::new(RangeTable::reference_default(), None, DeliveryModel::Deterministic)
            .expect("default channel is valid")
    }

    pub fn table(&self) -> &RangeTable<S> {
        &self.table
    }

    pub fn terrain(&self) -> Option<&TerrainProfile<S>> {
        self.terrain.as_ref()
    }

    pub fn delivery(&self) -> &DeliveryModel<S> {
        &self.delivery
    }

    pub fn with_terrain(&self, terrain: Option<TerrainProfile<S>>) -> Self {
        Self {
            terrain,
            ..self.clone()
        }
    }

    /// Same channel with every table range scaled by `factor`.
    pub fn scaled(&self, factor: S) -> Result<Self, ChannelError> {
        Self::new(self.table.scaled(factor)?, self.terrain.clone(), self.delivery)
    }

    pub fn max_range(&self, placement: Placement, direction: Direction, speed: S) -> Result<S, ChannelError> {
        self.table.lookup(placement, direction, speed)
    }

    /// Line of sight between two road positions; always clear without terrain.
    pub fn line_of_sight(&self, pos_a: S, pos_b: S) -> Result<bool, ChannelError> {
        match &self.terrain {
            Some(t) => t.line_of_sight(pos_a, pos_b),
            None => Ok(true),
        }
    }

    pub fn delivery_probability(
        &self,
        placement: Placement,
        direction: Direction,
        speed: S,
        distance: S,
        los: bool,
    ) -> Result<S, ChannelError> {
        if !(distance >= S::zero()) {
            return Err(ChannelError::NegativeDistance(distance.to_f64_lossy()));
        }
        let range = self.max_range(placement, direction, speed)?;
        if !los {
            return Ok(S::zero());
        }
        Ok(self.delivery.probability(range, distance))
    }

    /// Farthest end-to-end separation reachable from `sender` through the
    /// ordered `relays`.
    ///
    /// Each hop must be within the single-hop range for its transmit
    /// direction and have line of sight. The chain stops at the first relay
    /// it cannot reach; the receiver is then placed as far beyond the last
    /// reached node as one more hop allows.
    pub fn effective_multihop_range(
        &self,
        sender: ChainNode<S>,
        relays: &[ChainNode<S>],
        placement: Placement,
        speed: S,
    ) -> Result<S, ChannelError> {
        // Chain runs from the sender towards the relays, or ahead of the
        // sender when there are none.
        let chain_sign = match relays.first() {
            Some(r) if r.position < sender.position => -S::one(),
            Some(_) => S::one(),
            None => sender.heading.sign(),
        };
        let mut prev = sender.position;
        for relay in relays {
            if (relay.position - prev) * chain_sign < S::zero() {
                return Err(ChannelError::UnorderedHops);
            }
            prev = relay.position;
        }
        let mut last = sender;
        for relay in relays {
            let step = (relay.position - last.position) * chain_sign;
            let direction = last.heading.direction_to(last.position, relay.position);
            let range = self.max_range(placement, direction, speed)?;
            if step > range || !self.line_of_sight(last.position, relay.position)? {
                break;
            }
            last = *relay;
        }
        let towards = if chain_sign > S::zero() {
            last.position + S::one()
        } else {
            last.position - S::one()
        };
        let direction = last.heading.direction_to(last.position, towards);
        let range = self.max_range(placement, direction, speed)?;
        let final_hop = self.farthest_visible(last.position, chain_sign, range)?;
        Ok((last.position - sender.position).abs() + final_hop)
    }

    /// Farthest distance `d <= range` in direction `sign` from `from` with line
    /// of sight, scanned at 0.1 m resolution when terrain is present.
    fn farthest_visible(&self, from: S, sign: S, range: S) -> Result<S, ChannelError> {
        let Some(terrain) = &self.terrain else {
            return Ok(range);
        };
        let (lo, hi) = terrain.span();
        let limit = if sign > S::zero() { hi - from } else { from - lo };
        let reach = range.min(limit.max(S::zero()));
        if terrain.line_of_sight(from, from + sign * reach)? {
            return Ok(reach);
        }
        let resolution = S::lit(0.1);
        let steps = (reach / resolution).floor().to_u64().unwrap_or(0);
        for k in (0..=steps).rev() {
            let d = S::from_u64(k).expect("step count fits scalar") * resolution;
            if terrain.line_of_sight(from, from + sign * d)? {
                return Ok(d);
            }
        }
        Ok(S::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mph;

    fn v55() -> f64 {
        mph(55.0)
    }

    fn v70() -> f64 {
        mph(70.0)
    }

    #[test]
    fn inside_calibration_points() {
        let m = ChannelModel::<f64>::reference_default();
        let p = Placement::InsideVehicle;
        assert_eq!(m.max_range(p, Direction::Forward, v55()).unwrap(), 466.0);
        assert_eq!(m.max_range(p, Direction::Forward, v70()).unwrap(), 401.0);
        assert_eq!(m.max_range(p, Direction::Backward, v55()).unwrap(), 327.0);
        assert_eq!(m.max_range(p, Direction::Backward, v70()).unwrap(), 400.0);
        assert_eq!(m.max_range(Placement::Rooftop, Direction::Forward, v55()).unwrap(), 1000.0);
        assert_eq!(m.max_range(Placement::Rooftop, Direction::Backward, v55()).unwrap(), 1000.0);
    }

    #[test]
    fn midpoint_interpolation() {
        let m = ChannelModel::<f64>::reference_default();
        let r = m
            .max_range(Placement::InsideVehicle, Direction::Forward, 27.94)
            .unwrap();
        assert!((r - 433.5).abs() < 1e-9, "{r}");
    }

    #[test]
    fn refuses_to_extrapolate() {
        let m = ChannelModel::<f64>::reference_default();
        for speed in [v55() - 1e-9, v70() + 1e-9, 0.0, 100.0] {
            assert!(matches!(
                m.max_range(Placement::Rooftop, Direction::Forward, speed),
                Err(ChannelError::Extrapolation { .. })
            ));
        }
    }

    #[test]
    fn delivery_examples() {
        let m = ChannelModel::<f64>::reference_default();
        let p = |d: f64| {
            m.delivery_probability(Placement::InsideVehicle, Direction::Forward, v55(), d, true)
                .unwrap()
        };
        assert_eq!(p(0.0), 1.0);
        assert_eq!(p(466.0), 1.0);
        assert_eq!(p(467.0), 0.0);
        assert_eq!(
            m.delivery_probability(Placement::InsideVehicle, Direction::Forward, v55(), 10.0, false)
                .unwrap(),
            0.0
        );
        assert!(m
            .delivery_probability(Placement::InsideVehicle, Direction::Forward, v55(), -1.0, true)
            .is_err());

        let edge = DeliveryModel::LinearEdge { edge_width: 100.0 };
        assert_eq!(edge.probability(1000.0, 950.0), 0.5);
        assert_eq!(edge.probability(1000.0, 900.0), 1.0);
        assert_eq!(edge.probability(1000.0, 1000.0), 0.0);
        assert_eq!(DeliveryModel::Deterministic.probability(0.0, 0.0), 0.0);
    }

    #[test]
    fn edge_width_bounded_by_smallest_range() {
        let t = RangeTable::<f64>::reference_default();
        assert!(ChannelModel::new(t.clone(), None, DeliveryModel::LinearEdge { edge_width: 327.0 }).is_ok());
        assert!(ChannelModel::new(t.clone(), None, DeliveryModel::LinearEdge { edge_width: 328.0 }).is_err());
        assert!(ChannelModel::new(t, None, DeliveryModel::LinearEdge { edge_width: -1.0 }).is_err());
    }

    #[test]
    fn heading_directions() {
        assert_eq!(Heading::Eastbound.direction_to(0.0, 10.0), Direction::Forward);
        assert_eq!(Heading::Eastbound.direction_to(0.0, -10.0), Direction::Backward);
        assert_eq!(Heading::Westbound.direction_to(0.0, -10.0), Direction::Forward);
        assert_eq!(Heading::Westbound.direction_to(0.0, 10.0), Direction::Backward);
    }

    #[test]
    fn multihop_without_relays_is_single_hop() {
        let m = ChannelModel::<f64>::reference_default();
        let host = ChainNode { position: 0.0, heading: Heading::Eastbound };
        let r = m
            .effective_multihop_range(host, &[], Placement::InsideVehicle, v55())
            .unwrap();
        assert_eq!(r, 466.0);
    }

    #[test]
    fn midway_truck_relay_bridges_600m_both_ways() {
        let m = ChannelModel::<f64>::reference_default();
        let p = Placement::InsideVehicle;
        let host = ChainNode { position: 0.0, heading: Heading::Eastbound };
        let truck = ChainNode { position: 300.0, heading: Heading::Eastbound };
        let oncoming = ChainNode { position: 600.0, heading: Heading::Westbound };
        // host -> truck forward (300 <= 466), truck -> beyond forward (466)
        let east = m.effective_multihop_range(host, &[truck], p, v55()).unwrap();
        assert_eq!(east, 300.0 + 466.0);
        assert!(east >= 600.0);
        // oncoming -> truck forward (300 <= 466), truck -> host backward (327)
        let west = m.effective_multihop_range(oncoming, &[truck], p, v55()).unwrap();
        assert_eq!(west, 300.0 + 327.0);
        assert!(west >= 600.0);
        assert!(600.0 > m.max_range(p, Direction::Forward, v55()).unwrap());
    }

    #[test]
    fn unreachable_relay_breaks_chain() {
        let m = ChannelModel::<f64>::reference_default();
        let host = ChainNode { position: 0.0, heading: Heading::Eastbound };
        let far = ChainNode { position: 500.0, heading: Heading::Eastbound };
        let r = m
            .effective_multihop_range(host, &[far], Placement::InsideVehicle, v55())
            .unwrap();
        assert_eq!(r, 466.0);
        let near = ChainNode { position: 100.0, heading: Heading::Eastbound };
        let r = m
            .effective_multihop_range(host, &[near, far, ChainNode { position: 1200.0, ..far }], Placement::InsideVehicle, v55())
            .unwrap();
        // second hop 400 <= 466 reaches, third 700 does not
        assert_eq!(r, 500.0 + 466.0);
        assert!(matches!(
            m.effective_multihop_range(host, &[far, near], Placement::InsideVehicle, v55()),
            Err(ChannelError::UnorderedHops)
        ));
    }

    #[test]
    fn multihop_respects_terrain() {
        let crest = TerrainProfile::new(vec![(0.0, 0.0), (200.0, 20.0), (400.0, 0.0), (3000.0, 0.0)], 1.5).unwrap();
        let m = ChannelModel::reference_default().with_terrain(Some(crest));
        let host = ChainNode { position: 0.0, heading: Heading::Eastbound };
        let r = m
            .effective_multihop_range(host, &[], Placement::Rooftop, v55())
            .unwrap();
        // The ray grazes the 20 m crest once the receiver is ~207.8 m out.
        assert!(r > 207.0 && r < 208.0, "{r}");
    }
}
