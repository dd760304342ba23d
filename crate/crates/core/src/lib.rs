//! Feasibility analysis for a DSRC safe-pass advisory on two-lane highways.
//!
//! * [`pass_model`]: closed-form minimum maneuver time and V2V range.
//! * [`channel_model`]: calibrated range table, terrain line of sight and
//!   delivery models.
//! * [`sim_engine`]: discrete-time encounter replay with beacon exchange and
//!   the advisory state machine.
//!
//! Every model is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel_model;
pub mod pass_model;
pub mod scalar;
pub mod sim_engine;
pub mod units;

pub use channel_model::{ChannelError, Direction, Heading, Placement};
pub use pass_model::{BindingConstraint, DomainError, ScenarioError};
pub use scalar::Scalar;
pub use sim_engine::{AdvisoryEvent, DoNotPassReason, SimError, VehicleId};

pub type PassScenario = pass_model::PassScenario<f64>;
pub type ManeuverBounds = pass_model::ManeuverBounds<f64>;
pub type AdvisoryVerdict = pass_model::AdvisoryVerdict<f64>;
pub type RangeEntry = channel_model::RangeEntry<f64>;
pub type RangeTable = channel_model::RangeTable<f64>;
pub type TerrainProfile = channel_model::TerrainProfile<f64>;
pub type DeliveryModel = channel_model::DeliveryModel<f64>;
pub type ChannelModel = channel_model::ChannelModel<f64>;
pub type ChainNode = channel_model::ChainNode<f64>;
pub type EncounterConfig = sim_engine::EncounterConfig<f64>;
pub type EncounterState = sim_engine::EncounterState<f64>;
pub type EncounterReport = sim_engine::EncounterReport<f64>;
pub type BeaconRecord = sim_engine::BeaconRecord<f64>;
pub type AdvisoryState = sim_engine::AdvisoryState<f64>;
pub type Simulation = sim_engine::Simulation<f64>;
pub type Speed = units::Speed<f64>;

pub type PassScenario32 = pass_model::PassScenario<f32>;
pub type ChannelModel32 = channel_model::ChannelModel<f32>;
pub type EncounterConfig32 = sim_engine::EncounterConfig<f32>;
