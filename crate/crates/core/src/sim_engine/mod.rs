//! Discrete-time replay of a two-lane overtaking encounter.
//!
//! The host car drives east behind a truck; the oncoming car drives west in
//! the other lane. Both ends beacon every `beacon_interval` through the
//! [`ChannelModel`], and the host's advisory machine decides whether a pass
//! is safe at first contact. Positions are exact constant-speed kinematics
//! evaluated at `t = n·time_step`, so results do not depend on accumulated
//! rounding.

mod advisory;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel_model::{ChannelError, ChannelModel, Direction, Heading, Placement};
use crate::pass_model::{AdvisoryVerdict, PassScenario, ScenarioError};
use crate::scalar::Scalar;

pub use advisory::{
    advisory_transition, evaluate_contact, terminal_verdict, AdvisoryEvent, AdvisoryState, DoNotPassReason,
};

/// Default beacon period, s (10 Hz safety messages).
pub const DEFAULT_BEACON_INTERVAL_S: f64 = 0.1;
pub const DEFAULT_TIME_STEP_S: f64 = 0.01;
pub const DEFAULT_DURATION_LIMIT_S: f64 = 600.0;
/// Consecutive missed beacon ticks that count as a lost link.
pub const DEFAULT_LINK_LOSS_THRESHOLD: u32 = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("EncounterConfig invariant violated: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("vehicles still in contact after the {limit} s duration limit")]
    DurationLimitExceeded { limit: f64 },
    #[error("altitude case requires a terrain profile in the channel model")]
    MissingTerrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleId {
    Host,
    Truck,
    Oncoming,
}

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VehicleId::Host => "host",
            VehicleId::Truck => "truck",
            VehicleId::Oncoming => "oncoming",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncounterConfig<S> {
    pub scenario: PassScenario<S>,
    pub channel: ChannelModel<S>,
    /// OBU placement shared by all three vehicles.
    pub placement: Placement,
    /// Host-to-oncoming distance at t = 0, m.
    pub initial_separation: S,
    pub beacon_interval: S,
    pub time_step: S,
    pub duration_limit: S,
    /// Only consumed when the delivery model is probabilistic.
    pub rng_seed: u64,
    /// Lets the truck forward beacons the direct link fails to deliver.
    pub relay_enabled: bool,
    pub link_loss_threshold: u32,
}

impl<S: Scalar> EncounterConfig<S> {
    /// Defaults for everything but the scenario, channel and placement. The
    /// initial separation starts 500 m outside the largest calibrated range.
    pub fn new(scenario: PassScenario<S>, channel: ChannelModel<S>, placement: Placement) -> Self {
        let reach = channel.table().max_for(placement).unwrap_or_else(S::zero);
        Self {
            scenario,
            channel,
            placement,
            initial_separation: reach + S::lit(500.0),
            beacon_interval: S::lit(DEFAULT_BEACON_INTERVAL_S),
            time_step: S::lit(DEFAULT_TIME_STEP_S),
            duration_limit: S::lit(DEFAULT_DURATION_LIMIT_S),
            rng_seed: 0,
            relay_enabled: false,
            link_loss_threshold: DEFAULT_LINK_LOSS_THRESHOLD,
        }
    }

    /// Speed used to index the calibration table: the per-vehicle speed of
    /// the equivalent symmetric approach.
    pub fn table_speed(&self) -> S {
        self.scenario.closing_speed() / S::lit(2.0)
    }

    /// Host front bumper to truck front bumper.
    pub fn truck_offset(&self) -> S {
        self.scenario.headway + self.scenario.truck_length
    }

    /// Number of time steps per beacon interval.
    pub fn steps_per_beacon(&self) -> Result<u64, SimError> {
        if !(self.time_step.is_finite() && self.time_step > S::zero()) {
            return Err(SimError::InvalidConfig(format!(
                "time_step must be > 0 (got {})",
                self.time_step
            )));
        }
        if !(self.beacon_interval.is_finite() && self.beacon_interval >= self.time_step) {
            return Err(SimError::InvalidConfig(format!(
                "beacon_interval {} must be >= time_step {}",
                self.beacon_interval, self.time_step
            )));
        }
        let ratio = self.beacon_interval / self.time_step;
        let k = ratio.round();
        if (ratio - k).abs() > S::grid_tolerance() * k {
            return Err(SimError::InvalidConfig(format!(
                "beacon_interval {} is not an integer multiple of time_step {}",
                self.beacon_interval, self.time_step
            )));
        }
        k.to_u64()
            .ok_or_else(|| SimError::InvalidConfig("beacon_interval / time_step overflows".into()))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.scenario.validate()?;
        self.steps_per_beacon()?;
        if !(self.initial_separation.is_finite() && self.initial_separation > S::zero()) {
            return Err(SimError::InvalidConfig(format!(
                "initial_separation must be > 0 (got {})",
                self.initial_separation
            )));
        }
        if !(self.duration_limit.is_finite() && self.duration_limit > S::zero()) {
            return Err(SimError::InvalidConfig(format!(
                "duration_limit must be > 0 (got {})",
                self.duration_limit
            )));
        }
        if self.link_loss_threshold == 0 {
            return Err(SimError::InvalidConfig("link_loss_threshold must be >= 1".into()));
        }
        Ok(())
    }
}

/// Vehicle positions and advisory at one instant. Positions are front
/// bumpers on the shared road axis, eastbound positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EncounterState<S> {
    pub step: u64,
    pub t: S,
    pub host_pos: S,
    pub truck_pos: S,
    pub oncoming_pos: S,
    pub host_speed: S,
    pub oncoming_speed: S,
    pub advisory: AdvisoryState<S>,
}

impl<S: Scalar> EncounterState<S> {
    fn at_step(step: u64, config: &EncounterConfig<S>, advisory: AdvisoryState<S>) -> Self {
        let t = S::from_u64(step).expect("step count fits scalar") * config.time_step;
        let v1 = config.scenario.v1;
        let v2 = config.scenario.v2;
        Self {
            step,
            t,
            host_pos: v1 * t,
            truck_pos: config.truck_offset() + v1 * t,
            oncoming_pos: config.initial_separation - v2 * t,
            host_speed: v1,
            oncoming_speed: v2,
            advisory,
        }
    }

    /// Host-to-oncoming distance.
    pub fn separation(&self) -> S {
        (self.oncoming_pos - self.host_pos).abs()
    }

    /// The oncoming car is still ahead of the host.
    pub fn approaching(&self) -> bool {
        self.oncoming_pos > self.host_pos
    }

    fn position(&self, id: VehicleId) -> S {
        match id {
            VehicleId::Host => self.host_pos,
            VehicleId::Truck => self.truck_pos,
            VehicleId::Oncoming => self.oncoming_pos,
        }
    }
}

fn heading(id: VehicleId) -> Heading {
    match id {
        VehicleId::Host | VehicleId::Truck => Heading::Eastbound,
        VehicleId::Oncoming => Heading::Westbound,
    }
}

/// One end-to-end beacon between host and oncoming car.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeaconRecord<S> {
    pub t: S,
    pub sender: VehicleId,
    pub receiver: VehicleId,
    pub distance: S,
    /// Direct-path line of sight.
    pub los: bool,
    pub delivered: bool,
    pub via_relay: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncounterReport<S> {
    pub first_contact_distance: Option<S>,
    pub first_contact_t: Option<S>,
    pub connectivity_duration: S,
    pub total_beacons_sent: u64,
    pub total_beacons_delivered: u64,
    pub advisory_trace: Vec<(S, AdvisoryState<S>)>,
    pub final_advisory: AdvisoryState<S>,
    pub verdict: AdvisoryVerdict<S>,
    /// Beacon-tick intervals `[start, end]` during which the vehicles were in
    /// range but terrain blocked the direct path.
    pub los_blocked_intervals: Vec<(S, S)>,
    pub blocked_ticks: u64,
    pub simulated_duration: S,
    pub beacons: Vec<BeaconRecord<S>>,
}

/// A running encounter.
#[derive(Debug, Clone)]
pub struct Simulation<S> {
    config: EncounterConfig<S>,
    steps_per_beacon: u64,
    range_forward: S,
    range_backward: S,
    rng: ChaCha8Rng,
    state: EncounterState<S>,
    missed_ticks: u32,
    contact_distance: Option<S>,
    connected_ticks: u64,
    report: EncounterReport<S>,
}

impl<S: Scalar> Simulation<S> {
    /// Validates the configuration and processes the beacon tick at t = 0.
    pub fn new(config: EncounterConfig<S>) -> Result<Self, SimError> {
        config.validate()?;
        let steps_per_beacon = config.steps_per_beacon()?;
        let speed = config.table_speed();
        let range_forward = config.channel.max_range(config.placement, Direction::Forward, speed)?;
        let range_backward = config.channel.max_range(config.placement, Direction::Backward, speed)?;
        let relay_reach = if config.relay_enabled {
            config.truck_offset()
        } else {
            S::zero()
        };
        if range_forward > S::zero() && !(config.initial_separation > range_forward + relay_reach) {
            return Err(SimError::InvalidConfig(format!(
                "initial_separation {} must exceed the reachable range {} to capture first contact",
                config.initial_separation,
                range_forward + relay_reach
            )));
        }
        let state = EncounterState::at_step(0, &config, AdvisoryState::Idle);
        let report = EncounterReport {
            first_contact_distance: None,
            first_contact_t: None,
            connectivity_duration: S::zero(),
            total_beacons_sent: 0,
            total_beacons_delivered: 0,
            advisory_trace: vec![(S::zero(), AdvisoryState::Idle)],
            final_advisory: AdvisoryState::Idle,
            verdict: AdvisoryVerdict::Unknown { cause: String::new() },
            los_blocked_intervals: Vec::new(),
            blocked_ticks: 0,
            simulated_duration: S::zero(),
            beacons: Vec::new(),
        };
        let mut sim = Self {
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            config,
            steps_per_beacon,
            range_forward,
            range_backward,
            state,
            missed_ticks: 0,
            contact_distance: None,
            connected_ticks: 0,
            report,
        };
        sim.beacon_tick()?;
        Ok(sim)
    }

    pub fn config(&self) -> &EncounterConfig<S> {
        &self.config
    }

    pub fn state(&self) -> &EncounterState<S> {
        &self.state
    }

    pub fn beacons(&self) -> &[BeaconRecord<S>] {
        &self.report.beacons
    }

    /// Advances one time step and runs the beacon exchange when the new
    /// instant is a beacon tick.
    pub fn step(&mut self) -> Result<&EncounterState<S>, SimError> {
        self.state = EncounterState::at_step(self.state.step + 1, &self.config, self.state.advisory);
        if self.state.step.is_multiple_of(self.steps_per_beacon) {
            self.beacon_tick()?;
        }
        Ok(&self.state)
    }

    /// The vehicles have crossed and separated past every calibrated range.
    pub fn finished(&self) -> bool {
        !self.state.approaching() && self.state.separation() > self.range_forward.max(self.range_backward)
    }

    pub fn run(mut self) -> Result<EncounterReport<S>, SimError> {
        while !self.finished() {
            if self.state.t >= self.config.duration_limit {
                return Err(SimError::DurationLimitExceeded {
                    limit: self.config.duration_limit.to_f64_lossy(),
                });
            }
            self.step()?;
        }
        Ok(self.into_report())
    }

    fn into_report(mut self) -> EncounterReport<S> {
        let r = &mut self.report;
        r.connectivity_duration = S::from_u64(self.connected_ticks).expect("tick count fits scalar")
            * self.config.beacon_interval;
        r.final_advisory = self.state.advisory;
        r.verdict = terminal_verdict(&self.state.advisory, self.contact_distance, &self.config.scenario);
        r.simulated_duration = self.state.t;
        self.report
    }

    fn range_for(&self, direction: Direction) -> S {
        match direction {
            Direction::Forward => self.range_forward,
            Direction::Backward => self.range_backward,
        }
    }

    fn draw(&mut self, p: S) -> bool {
        if p >= S::one() {
            true
        } else if p <= S::zero() {
            false
        } else {
            self.rng.gen::<f64>() < p.to_f64_lossy()
        }
    }

    /// Attempts one hop; returns (direct line of sight, delivered).
    fn hop(&mut self, from: VehicleId, to: VehicleId) -> Result<(bool, bool), SimError> {
        let a = self.state.position(from);
        let b = self.state.position(to);
        let direction = heading(from).direction_to(a, b);
        let los = self.config.channel.line_of_sight(a, b)?;
        let p = if los {
            self.config
                .channel
                .delivery()
                .probability(self.range_for(direction), (b - a).abs())
        } else {
            S::zero()
        };
        Ok((los, self.draw(p)))
    }

    fn send(&mut self, sender: VehicleId, receiver: VehicleId) -> Result<BeaconRecord<S>, SimError> {
        let (los, direct) = self.hop(sender, receiver)?;
        let mut via_relay = false;
        if !direct && self.config.relay_enabled {
            let (_, first) = self.hop(sender, VehicleId::Truck)?;
            if first {
                let (_, second) = self.hop(VehicleId::Truck, receiver)?;
                via_relay = second;
            }
        }
        Ok(BeaconRecord {
            t: self.state.t,
            sender,
            receiver,
            distance: self.state.separation(),
            los,
            delivered: direct || via_relay,
            via_relay,
        })
    }

    fn beacon_tick(&mut self) -> Result<(), SimError> {
        let t = self.state.t;
        let outbound = self.send(VehicleId::Host, VehicleId::Oncoming)?;
        let inbound = self.send(VehicleId::Oncoming, VehicleId::Host)?;
        let any = outbound.delivered || inbound.delivered;
        // In range on the direct path, but terrain is in the way.
        let range = self.range_for(Heading::Eastbound.direction_to(self.state.host_pos, self.state.oncoming_pos));
        let blocked = !outbound.los && range > S::zero() && self.state.separation() <= range;

        let r = &mut self.report;
        r.total_beacons_sent += 2;
        r.total_beacons_delivered += u64::from(outbound.delivered) + u64::from(inbound.delivered);
        if any {
            self.connected_ticks += 1;
            if r.first_contact_distance.is_none() {
                r.first_contact_distance = Some(outbound.distance);
                r.first_contact_t = Some(t);
            }
        }

        if blocked {
            r.blocked_ticks += 1;
            let gap = self.config.beacon_interval;
            match r.los_blocked_intervals.last_mut() {
                Some((_, end)) if t - *end <= gap * S::lit(1.5) => *end = t,
                _ => r.los_blocked_intervals.push((t, t)),
            }
        }

        r.beacons.push(outbound);
        r.beacons.push(inbound);

        if self.state.approaching() {
            self.feed_advisory(&inbound, any);
        }
        Ok(())
    }

    fn feed_advisory(&mut self, inbound: &BeaconRecord<S>, any_delivered: bool) {
        let scenario = self.config.scenario;
        let mut current = self.state.advisory;
        let mut entered = Vec::new();
        match current {
            AdvisoryState::Idle | AdvisoryState::OncomingDetected { .. } => {
                if current == AdvisoryState::Idle {
                    let next = advisory_transition(current, AdvisoryEvent::Beacon(inbound), &scenario);
                    if next != current {
                        entered.push(next);
                        current = next;
                    }
                }
                // Decide on the same beacon that announced the oncoming car.
                if matches!(current, AdvisoryState::OncomingDetected { .. }) {
                    let next = advisory_transition(current, AdvisoryEvent::Beacon(inbound), &scenario);
                    if next != current {
                        self.contact_distance = Some(inbound.distance);
                        entered.push(next);
                        current = next;
                    }
                }
            }
            AdvisoryState::SafeToPass => {
                if any_delivered {
                    self.missed_ticks = 0;
                } else {
                    self.missed_ticks += 1;
                    if self.missed_ticks >= self.config.link_loss_threshold {
                        current = advisory_transition(current, AdvisoryEvent::LinkTimeout, &scenario);
                        entered.push(current);
                    }
                }
            }
            AdvisoryState::DoNotPass(_) => {}
        }
        self.report
            .advisory_trace
            .extend(entered.into_iter().map(|s| (inbound.t, s)));
        self.state.advisory = current;
    }
}

/// Runs an encounter to completion.
pub fn run_encounter<S: Scalar>(config: EncounterConfig<S>) -> Result<EncounterReport<S>, SimError> {
    Simulation::new(config)?.run()
}

/// Runs an encounter over a terrain profile; LOS-blocked ticks do not count
/// towards connectivity.
pub fn run_altitude_case<S: Scalar>(config: EncounterConfig<S>) -> Result<EncounterReport<S>, SimError> {
    if config.channel.terrain().is_none() {
        return Err(SimError::MissingTerrain);
    }
    run_encounter(config)
}
