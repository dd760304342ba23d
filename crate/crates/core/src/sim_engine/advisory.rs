//! Safe-pass advisory state machine.
//!
//! ```text
//! Idle ──beacon──▶ OncomingDetected ──▶ SafeToPass ──link lost──▶ DoNotPass(LinkLost)
//!                                   └─▶ DoNotPass(RangeDeficit | TimeDeficit)
//! ```
//!
//! `DoNotPass` is absorbing.

use serde::{Deserialize, Serialize};

use super::{BeaconRecord, VehicleId};
use crate::pass_model::{self, AdvisoryVerdict, BindingConstraint, PassScenario};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DoNotPassReason {
    RangeDeficit,
    TimeDeficit,
    LinkLost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AdvisoryState<S> {
    Idle,
    OncomingDetected { first_contact_t: S },
    SafeToPass,
    DoNotPass(DoNotPassReason),
}

impl<S: Scalar> AdvisoryState<S> {
    pub fn label(&self) -> String {
        match self {
            Self::Idle => "Idle".into(),
            Self::OncomingDetected { .. } => "OncomingDetected".into(),
            Self::SafeToPass => "SafeToPass".into(),
            Self::DoNotPass(r) => format!("DoNotPass({r:?})"),
        }
    }

    /// Whether the machine may move from `self` to `next`.
    pub fn can_transition_to(&self, next: &Self) -> bool {
        use AdvisoryState::*;
        matches!(
            (self, next),
            (Idle, OncomingDetected { .. })
                | (OncomingDetected { .. }, SafeToPass)
                | (OncomingDetected { .. }, DoNotPass(DoNotPassReason::RangeDeficit | DoNotPassReason::TimeDeficit))
                | (SafeToPass, DoNotPass(DoNotPassReason::LinkLost))
        )
    }
}

/// Input to the advisory machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdvisoryEvent<'a, S> {
    Beacon(&'a BeaconRecord<S>),
    /// Expected beacons from the oncoming car missed for the configured
    /// number of consecutive ticks.
    LinkTimeout,
}

/// Checks both maneuver constraints at a contact distance.
///
/// The range must strictly exceed the minimum communication range; the time
/// left before the vehicles meet, `distance / (v1 + v2)`, must be at least the
/// minimum pass time. `Err` when the scenario is outside the model's domain.
pub fn evaluate_contact<S: Scalar>(
    distance: S,
    s: &PassScenario<S>,
) -> Result<AdvisoryState<S>, pass_model::DomainError> {
    let bounds = pass_model::maneuver_bounds(s)?;
    let state = if !(distance > bounds.min_range) {
        AdvisoryState::DoNotPass(DoNotPassReason::RangeDeficit)
    } else if distance / s.closing_speed() < bounds.min_time {
        AdvisoryState::DoNotPass(DoNotPassReason::TimeDeficit)
    } else {
        AdvisoryState::SafeToPass
    };
    Ok(state)
}

pub fn advisory_transition<S: Scalar>(
    current: AdvisoryState<S>,
    event: AdvisoryEvent<'_, S>,
    s: &PassScenario<S>,
) -> AdvisoryState<S> {
    match (current, event) {
        (AdvisoryState::Idle, AdvisoryEvent::Beacon(b)) if from_oncoming(b) => {
            AdvisoryState::OncomingDetected { first_contact_t: b.t }
        }
        (AdvisoryState::OncomingDetected { .. }, AdvisoryEvent::Beacon(b)) if from_oncoming(b) => {
            // A scenario outside the closed form's domain leaves the decision open.
            evaluate_contact(b.distance, s).unwrap_or(current)
        }
        (AdvisoryState::SafeToPass, AdvisoryEvent::LinkTimeout) => {
            AdvisoryState::DoNotPass(DoNotPassReason::LinkLost)
        }
        _ => current,
    }
}

fn from_oncoming<S>(b: &BeaconRecord<S>) -> bool {
    b.delivered && b.sender == VehicleId::Oncoming && b.receiver == VehicleId::Host
}

/// Maps the terminal advisory state onto a verdict. `contact_distance` is the
/// distance at which the decision was taken.
pub fn terminal_verdict<S: Scalar>(
    state: &AdvisoryState<S>,
    contact_distance: Option<S>,
    s: &PassScenario<S>,
) -> AdvisoryVerdict<S> {
    let bounds = match pass_model::maneuver_bounds(s) {
        Ok(b) => b,
        Err(e) => return AdvisoryVerdict::Unknown { cause: e.to_string() },
    };
    let d = contact_distance.unwrap_or_else(S::zero);
    match state {
        AdvisoryState::Idle => AdvisoryVerdict::Unknown {
            cause: "no beacon received from the oncoming vehicle before it passed".into(),
        },
        AdvisoryState::OncomingDetected { .. } => AdvisoryVerdict::Unknown {
            cause: "oncoming vehicle detected but no decision was reached".into(),
        },
        AdvisoryState::SafeToPass => AdvisoryVerdict::SafePassFeasible {
            margin: d - bounds.min_range,
        },
        AdvisoryState::DoNotPass(DoNotPassReason::RangeDeficit) => AdvisoryVerdict::Infeasible {
            binding: BindingConstraint::Range {
                deficit: bounds.min_range - d,
            },
        },
        AdvisoryState::DoNotPass(DoNotPassReason::TimeDeficit) => AdvisoryVerdict::Infeasible {
            binding: BindingConstraint::Time {
                deficit: bounds.min_time - d / s.closing_speed(),
            },
        },
        AdvisoryState::DoNotPass(DoNotPassReason::LinkLost) => AdvisoryVerdict::Infeasible {
            binding: BindingConstraint::LinkLost,
        },
    }
}
