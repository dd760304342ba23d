//! Closed-form constraints of the safe-pass maneuver on a two-lane road.
//!
//! A host car follows a truck at speed `v1` while an oncoming car approaches
//! in the opposite lane. Passing needs the host to gain a relative
//! displacement of `2·headway + car_length + truck_length` on the truck; the
//! driver first reacts for `reaction_time` and then accelerates at
//! `max_accel`. From that:
//!
//! ```text
//! min_time  = sqrt(2·(2·h + l_c + l_t − r_t·v1) / a_max)
//! min_range = (2·h + l_c + l_t) + d_2 + 2·v1·min_time
//! ```
//!
//! and an advisory is feasible only when the available V2V range strictly
//! exceeds `min_range`.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("PassScenario invariant violated: `{field}` must be {requirement} (got {value})")]
    InvalidField {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// The reaction-time travel already covers the gap that has to be cleared,
/// so the maneuver-time equation has no real solution.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error(
    "scenario outside model validity: 2*headway + car_length + truck_length - reaction_time*v1 = {residual_gap} m is not positive"
)]
pub struct DomainError {
    pub residual_gap: f64,
}

/// Kinematic inputs of one passing maneuver. All quantities SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassScenario<S> {
    /// Host car and truck speed, m/s.
    pub v1: S,
    /// Oncoming car speed, m/s.
    pub v2: S,
    /// Space gap between host car and truck, m.
    pub headway: S,
    /// Driver reaction time, s.
    pub reaction_time: S,
    pub car_length: S,
    pub truck_length: S,
    /// Minimum post-pass safety distance, m.
    pub safety_margin: S,
    /// Maximum acceleration at the scenario speed, m/s².
    pub max_accel: S,
}

impl<S: Scalar> PassScenario<S> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        v1: S,
        v2: S,
        headway: S,
        reaction_time: S,
        car_length: S,
        truck_length: S,
        safety_margin: S,
        max_accel: S,
    ) -> Result<Self, ScenarioError> {
        let s = Self {
            v1,
            v2,
            headway,
            reaction_time,
            car_length,
            truck_length,
            safety_margin,
            max_accel,
        };
        s.validate()?;
        Ok(s)
    }

    /// The 55 mph two-lane highway example: 5 m car, 20 m truck, 24.6 m
    /// headway, 1 s reaction, 0.67 m/s², 40 m safety distance.
    pub fn reference_55mph() -> Self {
        let v = crate::units::mph(S::lit(55.0));
        Self {
            v1: v,
            v2: v,
            headway: S::lit(24.6),
            reaction_time: S::lit(1.0),
            car_length: S::lit(5.0),
            truck_length: S::lit(20.0),
            safety_margin: S::lit(40.0),
            max_accel: S::lit(0.67),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let positive = [
            ("v1", self.v1),
            ("v2", self.v2),
            ("reaction_time", self.reaction_time),
            ("car_length", self.car_length),
            ("truck_length", self.truck_length),
            ("max_accel", self.max_accel),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > S::zero()) {
                return Err(ScenarioError::InvalidField {
                    field,
                    requirement: "finite and > 0",
                    value: value.to_f64_lossy(),
                });
            }
        }
        for (field, value) in [("headway", self.headway), ("safety_margin", self.safety_margin)] {
            if !(value.is_finite() && value >= S::zero()) {
                return Err(ScenarioError::InvalidField {
                    field,
                    requirement: "finite and >= 0",
                    value: value.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// `2·headway + car_length + truck_length`: relative displacement the
    /// host must gain on the truck.
    pub fn clearance_length(&self) -> S {
        S::lit(2.0) * self.headway + self.car_length + self.truck_length
    }

    /// Clearance length minus the distance covered during the reaction time.
    pub fn residual_gap(&self) -> S {
        self.clearance_length() - self.reaction_time * self.v1
    }

    pub fn closing_speed(&self) -> S {
        self.v1 + self.v2
    }
}

/// Lower bounds on maneuver time and communication range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManeuverBounds<S> {
    pub min_time: S,
    pub min_range: S,
}

/// Which constraint decided an infeasible verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum BindingConstraint<S> {
    /// Available range does not strictly exceed the minimum range; deficit in m.
    Range { deficit: S },
    /// Time to the oncoming car is shorter than the maneuver time; deficit in s.
    Time { deficit: S },
    /// Beacons from the oncoming car stopped arriving after clearance.
    LinkLost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum AdvisoryVerdict<S> {
    SafePassFeasible { margin: S },
    Infeasible { binding: BindingConstraint<S> },
    Unknown { cause: String },
}

impl<S> AdvisoryVerdict<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::SafePassFeasible { .. })
    }

    /// Short label used in reports and CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            Self::SafePassFeasible { .. } => "SafePassFeasible",
            Self::Infeasible { binding: BindingConstraint::Range { .. } } => "Infeasible(RangeDeficit)",
            Self::Infeasible { binding: BindingConstraint::Time { .. } } => "Infeasible(TimeDeficit)",
            Self::Infeasible { binding: BindingConstraint::LinkLost } => "Infeasible(LinkLost)",
            Self::Unknown { .. } => "Unknown",
        }
    }
}

/// Minimum time for the host to complete the pass.
pub fn min_pass_time<S: Scalar>(s: &PassScenario<S>) -> Result<S, DomainError> {
    let gap = s.residual_gap();
    // Exact comparison: zero is a valid (degenerate) gap, anything below is not.
    if gap < S::zero() || gap.is_nan() {
        return Err(DomainError {
            residual_gap: gap.to_f64_lossy(),
        });
    }
    Ok((S::lit(2.0) * gap / s.max_accel).sqrt())
}

/// Minimum V2V range needed to warn the host in time.
pub fn min_comm_range<S: Scalar>(s: &PassScenario<S>) -> Result<S, DomainError> {
    let t = min_pass_time(s)?;
    Ok(s.clearance_length() + s.safety_margin + S::lit(2.0) * s.v1 * t)
}

pub fn maneuver_bounds<S: Scalar>(s: &PassScenario<S>) -> Result<ManeuverBounds<S>, DomainError> {
    let min_time = min_pass_time(s)?;
    Ok(ManeuverBounds {
        min_time,
        min_range: s.clearance_length() + s.safety_margin + S::lit(2.0) * s.v1 * min_time,
    })
}

/// Range-budget check: feasible iff `min_comm_range < available_range`.
pub fn feasibility<S: Scalar>(s: &PassScenario<S>, available_range: S) -> AdvisoryVerdict<S> {
    match min_comm_range(s) {
        Err(e) => AdvisoryVerdict::Unknown { cause: e.to_string() },
        Ok(required) if required < available_range => AdvisoryVerdict::SafePassFeasible {
            margin: available_range - required,
        },
        Ok(required) => AdvisoryVerdict::Infeasible {
            binding: BindingConstraint::Range {
                deficit: required - available_range,
            },
        },
    }
}
