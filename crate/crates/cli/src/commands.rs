//! Subcommand implementations. Each returns its report; printing and exit
//! codes are handled by the binary.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use passfeas_core::pass_model::{feasibility, maneuver_bounds};
use passfeas_core::sim_engine::{run_altitude_case, run_encounter};
use passfeas_core::units::mph;
use passfeas_core::{
    AdvisoryVerdict, BeaconRecord, BindingConstraint, Direction, EncounterReport, Placement, RangeTable, Speed,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::files::{data_dir, load_calibration, Overrides, Setup};

pub const BEACON_CSV_HEADER: &str = "t_s,sender,receiver,distance_m,los,delivered,via_relay";
pub const SWEEP_CSV_HEADER: &str = "param,min_time_s,min_range_m,verdict,connectivity_s";

fn verdict_detail(v: &AdvisoryVerdict) -> String {
    match v {
        AdvisoryVerdict::SafePassFeasible { margin } => format!("SafePassFeasible (margin {margin:.2} m)"),
        AdvisoryVerdict::Infeasible { binding } => match binding {
            BindingConstraint::Range { deficit } => format!("Infeasible(RangeDeficit) (deficit {deficit:.2} m)"),
            BindingConstraint::Time { deficit } => format!("Infeasible(TimeDeficit) (deficit {deficit:.2} s)"),
            BindingConstraint::LinkLost => "Infeasible(LinkLost)".into(),
        },
        AdvisoryVerdict::Unknown { cause } => format!("Unknown ({cause})"),
    }
}

fn placement_name(p: Placement) -> &'static str {
    match p {
        Placement::InsideVehicle => "inside_vehicle",
        Placement::Rooftop => "rooftop",
    }
}

// ---------------------------------------------------------------- bounds

#[derive(Debug, Clone, Serialize)]
pub struct PlacementLine {
    pub placement: Placement,
    pub available_range_m: Option<f64>,
    pub verdict: AdvisoryVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub min_pass_time_s: f64,
    pub min_comm_range_m: f64,
    pub placements: Vec<PlacementLine>,
}

/// Maneuver bounds plus a feasibility line per placement, using the forward
/// range at the scenario's table speed.
pub fn bounds(setup: &Setup) -> Result<BoundsReport, CliError> {
    let s = setup.scenario();
    let b = maneuver_bounds(s).map_err(|e| CliError::Domain(e.to_string()))?;
    let speed = setup.config.table_speed();
    let placements = [Placement::InsideVehicle, Placement::Rooftop]
        .into_iter()
        .map(|placement| match setup.config.channel.max_range(placement, Direction::Forward, speed) {
            Ok(r) => PlacementLine {
                placement,
                available_range_m: Some(r),
                verdict: feasibility(s, r),
            },
            Err(e) => PlacementLine {
                placement,
                available_range_m: None,
                verdict: AdvisoryVerdict::Unknown { cause: e.to_string() },
            },
        })
        .collect();
    Ok(BoundsReport {
        min_pass_time_s: b.min_time,
        min_comm_range_m: b.min_range,
        placements,
    })
}

impl BoundsReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "min_pass_time   {:.2} s", self.min_pass_time_s);
        let _ = writeln!(out, "min_comm_range  {:.2} m", self.min_comm_range_m);
        for line in &self.placements {
            let avail = line
                .available_range_m
                .map_or_else(|| "n/a".to_owned(), |r| format!("{r:.2} m"));
            let _ = writeln!(
                out,
                "{:<15} available {:>10}  {}",
                placement_name(line.placement),
                avail,
                verdict_detail(&line.verdict)
            );
        }
        out
    }
}

// ---------------------------------------------------------------- run

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub placement: Placement,
    pub final_advisory: String,
    pub verdict: AdvisoryVerdict,
    pub first_contact_distance_m: Option<f64>,
    pub first_contact_t_s: Option<f64>,
    pub connectivity_s: f64,
    pub beacons_sent: u64,
    pub beacons_delivered: u64,
    pub los_blocked_intervals: Vec<(f64, f64)>,
    pub simulated_s: f64,
    pub advisory_trace: Vec<(f64, String)>,
}

impl RunSummary {
    pub fn new(setup: &Setup, r: &EncounterReport) -> Self {
        Self {
            placement: setup.config.placement,
            final_advisory: r.final_advisory.label(),
            verdict: r.verdict.clone(),
            first_contact_distance_m: r.first_contact_distance,
            first_contact_t_s: r.first_contact_t,
            connectivity_s: r.connectivity_duration,
            beacons_sent: r.total_beacons_sent,
            beacons_delivered: r.total_beacons_delivered,
            los_blocked_intervals: r.los_blocked_intervals.clone(),
            simulated_s: r.simulated_duration,
            advisory_trace: r.advisory_trace.iter().map(|(t, s)| (*t, s.label())).collect(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_owned(), |x| format!("{x:.2}"));
        let _ = writeln!(out, "placement          {}", placement_name(self.placement));
        let _ = writeln!(out, "advisory           {}", self.final_advisory);
        let _ = writeln!(out, "verdict            {}", verdict_detail(&self.verdict));
        let _ = writeln!(out, "first_contact_m    {}", opt(self.first_contact_distance_m));
        let _ = writeln!(out, "first_contact_t_s  {}", opt(self.first_contact_t_s));
        let _ = writeln!(out, "connectivity_s     {:.2}", self.connectivity_s);
        let _ = writeln!(out, "beacons            {}/{} delivered", self.beacons_delivered, self.beacons_sent);
        for (a, b) in &self.los_blocked_intervals {
            let _ = writeln!(out, "los_blocked_s      {a:.2}..{b:.2}");
        }
        out
    }
}

pub fn simulate(setup: &Setup) -> Result<EncounterReport, CliError> {
    let report = if setup.config.channel.terrain().is_some() {
        run_altitude_case(setup.config.clone())?
    } else {
        run_encounter(setup.config.clone())?
    };
    Ok(report)
}

pub fn beacon_csv(beacons: &[BeaconRecord]) -> String {
    let mut out = String::with_capacity(64 * (beacons.len() + 1));
    out.push_str(BEACON_CSV_HEADER);
    out.push('\n');
    for b in beacons {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            b.t, b.sender, b.receiver, b.distance, b.los, b.delivered, b.via_relay
        );
    }
    out
}

/// Writes through a sibling temporary file so a failure never leaves a
/// partial output behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

pub fn run(setup: &Setup, csv: Option<&Path>) -> Result<RunSummary, CliError> {
    let report = simulate(setup)?;
    if let Some(path) = csv {
        write_atomic(path, &beacon_csv(&report.beacons))?;
    }
    Ok(RunSummary::new(setup, &report))
}

// ---------------------------------------------------------------- sweep

/// Scenario fields that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    V1,
    V2,
    Headway,
    ReactionTime,
    CarLength,
    TruckLength,
    SafetyMargin,
    MaxAccel,
    InitialSeparation,
    BeaconInterval,
    TimeStep,
    DurationLimit,
}

impl SweepParam {
    pub const ALL: [(&'static str, SweepParam); 12] = [
        ("pass_scenario.v1", SweepParam::V1),
        ("pass_scenario.v2", SweepParam::V2),
        ("pass_scenario.headway", SweepParam::Headway),
        ("pass_scenario.reaction_time", SweepParam::ReactionTime),
        ("pass_scenario.car_length", SweepParam::CarLength),
        ("pass_scenario.truck_length", SweepParam::TruckLength),
        ("pass_scenario.safety_margin", SweepParam::SafetyMargin),
        ("pass_scenario.max_accel", SweepParam::MaxAccel),
        ("sim.initial_separation", SweepParam::InitialSeparation),
        ("sim.beacon_interval", SweepParam::BeaconInterval),
        ("sim.time_step", SweepParam::TimeStep),
        ("sim.duration_limit", SweepParam::DurationLimit),
    ];

    pub fn parse(path: &str) -> Result<Self, CliError> {
        Self::ALL
            .iter()
            .find(|(name, _)| *name == path)
            .map(|(_, p)| *p)
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|(n, _)| *n).collect();
                CliError::Validation(format!(
                    "unknown sweep parameter `{path}` (expected one of {})",
                    known.join(", ")
                ))
            })
    }

    pub fn is_speed(self) -> bool {
        matches!(self, SweepParam::V1 | SweepParam::V2)
    }

    /// Parses one value; speeds must carry `mph` or `mps`, the rest are SI numbers.
    pub fn parse_value(self, token: &str) -> Result<f64, CliError> {
        if self.is_speed() {
            token
                .parse::<Speed>()
                .map(Speed::to_mps)
                .map_err(|e| CliError::Validation(e.to_string()))
        } else {
            token
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("cannot parse sweep value {token:?} as a number")))
        }
    }

    fn apply(self, setup: &Setup, value: f64) -> Result<Setup, CliError> {
        let mut next = setup.clone();
        let f = &mut next.file;
        match self {
            SweepParam::V1 => f.pass_scenario.v1 = Speed::mps(value),
            SweepParam::V2 => f.pass_scenario.v2 = Speed::mps(value),
            SweepParam::Headway => f.pass_scenario.headway = value,
            SweepParam::ReactionTime => f.pass_scenario.reaction_time = value,
            SweepParam::CarLength => f.pass_scenario.car_length = value,
            SweepParam::TruckLength => f.pass_scenario.truck_length = value,
            SweepParam::SafetyMargin => f.pass_scenario.safety_margin = value,
            SweepParam::MaxAccel => f.pass_scenario.max_accel = value,
            SweepParam::InitialSeparation => f.sim.initial_separation = Some(value),
            SweepParam::BeaconInterval => f.sim.beacon_interval = value,
            SweepParam::TimeStep => f.sim.time_step = value,
            SweepParam::DurationLimit => f.sim.duration_limit = value,
        }
        next.rebuild()
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    /// SI values in sweep order.
    pub values: Vec<f64>,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn new(param: &str, values: Vec<f64>, output: Option<PathBuf>) -> Result<Self, CliError> {
        let param = SweepParam::parse(param)?;
        if values.is_empty() {
            return Err(CliError::Validation("a sweep needs at least one value".into()));
        }
        Ok(Self { param, values, output })
    }

    /// `--values a,b,c`
    pub fn from_list(param: &str, list: &str, output: Option<PathBuf>) -> Result<Self, CliError> {
        let p = SweepParam::parse(param)?;
        let values = list
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| p.parse_value(t))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(param, values, output)
    }

    /// `--range start:stop:step`, stop inclusive.
    pub fn from_range(param: &str, range: &str, output: Option<PathBuf>) -> Result<Self, CliError> {
        let p = SweepParam::parse(param)?;
        let parts: Vec<_> = range.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(CliError::Validation(format!("range {range:?} is not start:stop:step")));
        };
        let (start, stop, step) = (p.parse_value(start)?, p.parse_value(stop)?, p.parse_value(step)?);
        if !(step > 0.0) || !(stop >= start) {
            return Err(CliError::Validation(format!(
                "range {range:?} needs step > 0 and stop >= start"
            )));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        let values = (0..=n).map(|i| start + i as f64 * step).collect();
        Self::new(param, values, output)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub min_time_s: Option<f64>,
    pub min_range_m: Option<f64>,
    pub verdict: String,
    pub connectivity_s: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.param,
            opt(r.min_time_s),
            opt(r.min_range_m),
            r.verdict,
            r.connectivity_s
        );
    }
    out
}

/// Evaluates every sweep point; rows come back in sweep order. All points are
/// validated before any simulation runs.
pub fn sweep(setup: &Setup, spec: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    let points = spec
        .values
        .iter()
        .map(|&v| spec.param.apply(setup, v).map(|s| (v, s)))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = points
        .par_iter()
        .map(|(value, point)| {
            let bounds = maneuver_bounds(point.scenario()).ok();
            let report = simulate(point)?;
            Ok(SweepRow {
                param: *value,
                min_time_s: bounds.map(|b| b.min_time),
                min_range_m: bounds.map(|b| b.min_range),
                verdict: report.verdict.label().to_owned(),
                connectivity_s: report.connectivity_duration,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if let Some(path) = &spec.output {
        write_atomic(path, &sweep_csv(&rows))?;
    }
    Ok(rows)
}

// ---------------------------------------------------------------- repro

#[derive(Debug, Clone, Serialize)]
pub struct ReproRow {
    pub check: String,
    pub value: String,
    pub expected: String,
    pub tolerance: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproReport {
    pub rows: Vec<ReproRow>,
    pub all_pass: bool,
}

impl ReproReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<48} {:>18} {:>18} {:>10}  result", "check", "value", "expected", "tol");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<48} {:>18} {:>18} {:>10}  {}",
                r.check,
                r.value,
                r.expected,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        out
    }

    pub fn failures(&self) -> Vec<&str> {
        self.rows.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect()
    }
}

pub const REPRO_TIME_S: (f64, f64) = (12.16, 0.05);
pub const REPRO_RANGE_M: (f64, f64) = (712.4, 2.0);
pub const ROOFTOP_SYMMETRY_TOL: f64 = 0.05;

fn numeric(check: &str, value: f64, expected: f64, tol: f64) -> ReproRow {
    ReproRow {
        check: check.into(),
        value: format!("{value:.2}"),
        expected: format!("{expected:.2}"),
        tolerance: format!("{tol}"),
        pass: (value - expected).abs() <= tol,
    }
}

fn failed(check: &str, why: String) -> ReproRow {
    ReproRow {
        check: check.into(),
        value: why,
        expected: "-".into(),
        tolerance: "-".into(),
        pass: false,
    }
}

/// Reproduces the worked bounds, calibration points and placement verdicts
/// from the shipped presets.
pub fn repro() -> ReproReport {
    let dir = data_dir();
    let mut rows = Vec::new();

    let scenario = Setup::load(&dir.join("reference_55mph.json"), &Overrides::default());
    match &scenario {
        Ok(setup) => match maneuver_bounds(setup.scenario()) {
            Ok(b) => {
                rows.push(numeric("bounds: min_pass_time @ 55 mph [s]", b.min_time, REPRO_TIME_S.0, REPRO_TIME_S.1));
                rows.push(numeric("bounds: min_comm_range @ 55 mph [m]", b.min_range, REPRO_RANGE_M.0, REPRO_RANGE_M.1));
            }
            Err(e) => rows.push(failed("bounds @ 55 mph", e.to_string())),
        },
        Err(e) => rows.push(failed("scenario file reference_55mph.json", e.to_string())),
    }

    let table = load_calibration(&dir.join("calibration.json"));
    let table: Option<RangeTable> = match table {
        Ok(t) => Some(t),
        Err(e) => {
            rows.push(failed("calibration file calibration.json", e.to_string()));
            None
        }
    };

    if let Some(table) = &table {
        let points = [
            (Direction::Forward, 55.0, 466.0),
            (Direction::Forward, 70.0, 401.0),
            (Direction::Backward, 55.0, 327.0),
            (Direction::Backward, 70.0, 400.0),
        ];
        for (direction, speed_mph, expected) in points {
            let name = format!("range: inside_vehicle {direction:?} @ {speed_mph} mph [m]");
            match table.lookup(Placement::InsideVehicle, direction, mph(speed_mph)) {
                Ok(r) => rows.push(numeric(&name, r, expected, 0.0)),
                Err(e) => rows.push(failed(&name, e.to_string())),
            }
        }
        for speed_mph in [55.0, 70.0] {
            let name = format!("range: rooftop fwd~bwd @ {speed_mph} mph [rel]");
            let f = table.lookup(Placement::Rooftop, Direction::Forward, mph(speed_mph));
            let b = table.lookup(Placement::Rooftop, Direction::Backward, mph(speed_mph));
            match (f, b) {
                (Ok(f), Ok(b)) => {
                    let rel = (f - b).abs() / f.max(b);
                    rows.push(ReproRow {
                        check: name,
                        value: format!("{rel:.4}"),
                        expected: "<= 0.05".into(),
                        tolerance: format!("{ROOFTOP_SYMMETRY_TOL}"),
                        pass: rel <= ROOFTOP_SYMMETRY_TOL,
                    });
                }
                (Err(e), _) | (_, Err(e)) => rows.push(failed(&name, e.to_string())),
            }
        }
    }

    if let (Ok(setup), Some(table)) = (&scenario, &table) {
        let speed = setup.config.table_speed();
        for (placement, want_feasible) in [(Placement::InsideVehicle, false), (Placement::Rooftop, true)] {
            let name = format!("verdict: {} forward range @ 55 mph", placement_name(placement));
            let expected = if want_feasible { "SafePassFeasible" } else { "Infeasible(RangeDeficit)" };
            match table.lookup(placement, Direction::Forward, speed) {
                Ok(r) => {
                    let v = feasibility(setup.scenario(), r);
                    rows.push(ReproRow {
                        check: name,
                        value: v.label().into(),
                        expected: expected.into(),
                        tolerance: "exact".into(),
                        pass: v.label() == expected,
                    });
                }
                Err(e) => rows.push(failed(&name, e.to_string())),
            }
        }
    }

    let all_pass = rows.iter().all(|r| r.pass);
    ReproReport { rows, all_pass }
}
