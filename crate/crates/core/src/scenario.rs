//! Scenario files: parsing, validation, serialization, and the built-in
//! presets.
//!
//! A scenario is a TOML document with one table per concern and one
//! `[axis.<name>]` table of surface gains per axis. See `docs/scenario.md`
//! for the full schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controller::{PacConfig, SlidingGains};
use crate::error::{Error, Result};
use crate::plant::{Axis, DisturbanceSpec, InnerLoopMode, InnerLoopSpec, ProximitySpec, WindSpec};
use crate::trajectory::{Intercept, Shape, TrajectorySpec};

/// Which controllers a run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerSelection {
    Pac,
    Pid,
    #[default]
    Both,
}

impl ControllerSelection {
    pub fn includes_pac(self) -> bool {
        matches!(self, Self::Pac | Self::Both)
    }

    pub fn includes_pid(self) -> bool {
        matches!(self, Self::Pid | Self::Both)
    }
}

impl std::str::FromStr for ControllerSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pac" => Ok(Self::Pac),
            "pid" => Ok(Self::Pid),
            "both" => Ok(Self::Both),
            other => Err(Error::InvalidConfig(format!(
                "unknown controller `{other}` (expected pac, pid or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    /// Drop the intercept leg from the RMSE.
    pub skip_intercept_in_rmse: bool,
}

/// A validated closed-loop experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub trajectory: TrajectorySpec,
    pub disturbance: DisturbanceSpec,
    pub controller: ControllerSelection,
    /// Surface gains for x, y, z.
    pub gains: [SlidingGains; 3],
    pub pac: PacConfig,
    pub inner_loop: InnerLoopSpec,
    /// Initial position; defaults to the reference at `t = 0`.
    pub start: [f64; 3],
    pub dt: f64,
    pub duration: f64,
    /// Reserved: nothing in the simulation is stochastic.
    pub seed: u64,
    pub output: OutputSpec,
}

impl Scenario {
    /// Number of control steps, `duration / dt`.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::InvalidConfig(
                "scenario name must not be empty".into(),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt={} must be positive",
                self.dt
            )));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "duration={} must be positive",
                self.duration
            )));
        }
        let n = (self.duration / self.dt).round();
        if n < 1.0 || (n * self.dt - self.duration).abs() > 1e-9 * self.duration.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "duration={} is not a whole number of dt={} steps",
                self.duration, self.dt
            )));
        }
        for (axis, gains) in Axis::ALL.iter().zip(&self.gains) {
            gains.validate().map_err(|e| match e {
                Error::InvalidGains(msg) => {
                    Error::InvalidGains(format!("axis {}: {msg}", axis.name()))
                }
                other => other,
            })?;
        }
        if !self.start.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("start position must be finite".into()));
        }
        self.pac.validate()?;
        self.inner_loop.validate()?;
        self.disturbance.validate()?;
        self.trajectory.validate()?;
        if (self.trajectory.duration - self.duration).abs() > 0.0 {
            return Err(Error::InvalidConfig(
                "trajectory duration must match scenario duration".into(),
            ));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        let raw = RawScenario::from(self);
        toml::to_string(&raw).expect("scenario serializes to TOML")
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let scenario = raw.into_scenario()?;
    scenario.validate()?;
    Ok(scenario)
}

/// Loads a scenario from a file, or from a preset when `path` names one and
/// no such file exists.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    if !path.exists() {
        if let Some(name) = path.to_str() {
            if let Some(preset) = preset(name) {
                return Ok(preset);
            }
        }
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
}

// --- raw document ------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    controller: ControllerSelection,
    dt: f64,
    duration: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<[f64; 3]>,
    trajectory: RawTrajectory,
    #[serde(default)]
    disturbance: RawDisturbance,
    #[serde(default)]
    inner_loop: RawInnerLoop,
    #[serde(default)]
    pac: PacConfig,
    axis: RawAxes,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawShape {
    Circle {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
        period: [f64; 2],
        #[serde(default)]
        altitude: f64,
    },
    Eight {
        #[serde(default)]
        center: [f64; 2],
        amplitude: [f64; 2],
        period: [f64; 2],
        #[serde(default)]
        altitude: f64,
    },
    SquareAlt {
        #[serde(default)]
        position: [f64; 2],
        amplitude: f64,
        period: f64,
        offset: f64,
    },
    Hold {
        point: [f64; 3],
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawTrajectory {
    Circle {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
        period: [f64; 2],
        #[serde(default)]
        altitude: f64,
    },
    Eight {
        #[serde(default)]
        center: [f64; 2],
        amplitude: [f64; 2],
        period: [f64; 2],
        #[serde(default)]
        altitude: f64,
    },
    SquareAlt {
        #[serde(default)]
        position: [f64; 2],
        amplitude: f64,
        period: f64,
        offset: f64,
    },
    Hold {
        point: [f64; 3],
    },
    LineIntercept {
        start: [f64; 3],
        lead: f64,
        follow: RawShape,
    },
}

impl From<RawShape> for Shape {
    fn from(raw: RawShape) -> Self {
        match raw {
            RawShape::Circle {
                center,
                radius,
                period,
                altitude,
            } => Shape::Circle {
                center,
                radius,
                period,
                altitude,
            },
            RawShape::Eight {
                center,
                amplitude,
                period,
                altitude,
            } => Shape::Eight {
                center,
                amplitude,
                period,
                altitude,
            },
            RawShape::SquareAlt {
                position,
                amplitude,
                period,
                offset,
            } => Shape::SquareAlt {
                position,
                amplitude,
                period,
                offset,
            },
            RawShape::Hold { point } => Shape::Hold { point },
        }
    }
}

impl From<&Shape> for RawShape {
    fn from(shape: &Shape) -> Self {
        match *shape {
            Shape::Circle {
                center,
                radius,
                period,
                altitude,
            } => RawShape::Circle {
                center,
                radius,
                period,
                altitude,
            },
            Shape::Eight {
                center,
                amplitude,
                period,
                altitude,
            } => RawShape::Eight {
                center,
                amplitude,
                period,
                altitude,
            },
            Shape::SquareAlt {
                position,
                amplitude,
                period,
                offset,
            } => RawShape::SquareAlt {
                position,
                amplitude,
                period,
                offset,
            },
            Shape::Hold { point } => RawShape::Hold { point },
        }
    }
}

impl RawTrajectory {
    fn into_spec(self, duration: f64) -> TrajectorySpec {
        let (shape, intercept) = match self {
            RawTrajectory::Circle {
                center,
                radius,
                period,
                altitude,
            } => (
                RawShape::Circle {
                    center,
                    radius,
                    period,
                    altitude,
                },
                None,
            ),
            RawTrajectory::Eight {
                center,
                amplitude,
                period,
                altitude,
            } => (
                RawShape::Eight {
                    center,
                    amplitude,
                    period,
                    altitude,
                },
                None,
            ),
            RawTrajectory::SquareAlt {
                position,
                amplitude,
                period,
                offset,
            } => (
                RawShape::SquareAlt {
                    position,
                    amplitude,
                    period,
                    offset,
                },
                None,
            ),
            RawTrajectory::Hold { point } => (RawShape::Hold { point }, None),
            RawTrajectory::LineIntercept {
                start,
                lead,
                follow,
            } => (follow, Some(Intercept { start, lead })),
        };
        TrajectorySpec {
            shape: shape.into(),
            intercept,
            duration,
        }
    }

    fn from_spec(spec: &TrajectorySpec) -> Self {
        let shape = RawShape::from(&spec.shape);
        if let Some(Intercept { start, lead }) = spec.intercept {
            return RawTrajectory::LineIntercept {
                start,
                lead,
                follow: shape,
            };
        }
        match shape {
            RawShape::Circle {
                center,
                radius,
                period,
                altitude,
            } => RawTrajectory::Circle {
                center,
                radius,
                period,
                altitude,
            },
            RawShape::Eight {
                center,
                amplitude,
                period,
                altitude,
            } => RawTrajectory::Eight {
                center,
                amplitude,
                period,
                altitude,
            },
            RawShape::SquareAlt {
                position,
                amplitude,
                period,
                offset,
            } => RawTrajectory::SquareAlt {
                position,
                amplitude,
                period,
                offset,
            },
            RawShape::Hold { point } => RawTrajectory::Hold { point },
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawDisturbance {
    #[default]
    None,
    Wind {
        mean: f64,
        #[serde(default)]
        amplitude: f64,
        #[serde(default)]
        frequency: f64,
        axes: Vec<Axis>,
    },
    Proximity {
        z_floor: f64,
        z_ceil: f64,
        #[serde(default = "default_proximity_gain")]
        gain_ground: f64,
        #[serde(default = "default_proximity_gain")]
        gain_ceil: f64,
        #[serde(default = "default_proximity_length")]
        length: f64,
    },
}

fn default_proximity_gain() -> f64 {
    ProximitySpec::default().gain_ground
}

fn default_proximity_length() -> f64 {
    ProximitySpec::default().length
}

impl From<RawDisturbance> for DisturbanceSpec {
    fn from(raw: RawDisturbance) -> Self {
        match raw {
            RawDisturbance::None => DisturbanceSpec::None,
            RawDisturbance::Wind {
                mean,
                amplitude,
                frequency,
                axes,
            } => DisturbanceSpec::Wind(WindSpec {
                mean,
                amplitude,
                frequency,
                axes,
            }),
            RawDisturbance::Proximity {
                z_floor,
                z_ceil,
                gain_ground,
                gain_ceil,
                length,
            } => DisturbanceSpec::Proximity(ProximitySpec {
                z_floor,
                z_ceil,
                gain_ground,
                gain_ceil,
                length,
            }),
        }
    }
}

impl From<&DisturbanceSpec> for RawDisturbance {
    fn from(spec: &DisturbanceSpec) -> Self {
        match spec {
            DisturbanceSpec::None => RawDisturbance::None,
            DisturbanceSpec::Wind(w) => RawDisturbance::Wind {
                mean: w.mean,
                amplitude: w.amplitude,
                frequency: w.frequency,
                axes: w.axes.clone(),
            },
            DisturbanceSpec::Proximity(p) => RawDisturbance::Proximity {
                z_floor: p.z_floor,
                z_ceil: p.z_ceil,
                gain_ground: p.gain_ground,
                gain_ceil: p.gain_ceil,
                length: p.length,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInnerLoop {
    #[serde(default = "default_inner_mode")]
    mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default = "default_clip")]
    clip: f64,
}

fn default_inner_mode() -> String {
    "perfect".into()
}

fn default_clip() -> f64 {
    InnerLoopSpec::default().clip
}

impl Default for RawInnerLoop {
    fn default() -> Self {
        Self {
            mode: default_inner_mode(),
            tau: None,
            clip: default_clip(),
        }
    }
}

impl RawInnerLoop {
    fn into_spec(self) -> Result<InnerLoopSpec> {
        let mode = match (self.mode.as_str(), self.tau) {
            ("perfect", None) => InnerLoopMode::Perfect,
            ("perfect", Some(_)) => {
                return Err(Error::InvalidConfig(
                    "inner_loop.tau is only valid with mode = \"first_order_lag\"".into(),
                ))
            }
            ("first_order_lag", Some(tau)) => InnerLoopMode::FirstOrderLag { tau },
            ("first_order_lag", None) => {
                return Err(Error::InvalidConfig(
                    "inner_loop.tau is required with mode = \"first_order_lag\"".into(),
                ))
            }
            (other, _) => {
                return Err(Error::InvalidConfig(format!(
                    "unknown inner_loop.mode `{other}` (expected perfect or first_order_lag)"
                )))
            }
        };
        Ok(InnerLoopSpec {
            mode,
            clip: self.clip,
        })
    }

    fn from_spec(spec: &InnerLoopSpec) -> Self {
        match spec.mode {
            InnerLoopMode::Perfect => Self {
                mode: "perfect".into(),
                tau: None,
                clip: spec.clip,
            },
            InnerLoopMode::FirstOrderLag { tau } => Self {
                mode: "first_order_lag".into(),
                tau: Some(tau),
                clip: spec.clip,
            },
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGains {
    k1: Option<f64>,
    k2: Option<f64>,
    k3: Option<f64>,
    a_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxes {
    x: Option<RawGains>,
    y: Option<RawGains>,
    z: Option<RawGains>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dir: Option<PathBuf>,
    #[serde(default)]
    skip_intercept_in_rmse: bool,
}

fn axis_gains(axis: Axis, raw: Option<RawGains>) -> Result<SlidingGains> {
    let name = axis.name();
    let raw = raw.ok_or_else(|| Error::InvalidConfig(format!("missing [axis.{name}] table")))?;
    let field = |v: Option<f64>, key: &str| {
        v.ok_or_else(|| Error::InvalidConfig(format!("axis {name}: missing {key}")))
    };
    Ok(SlidingGains {
        k1: field(raw.k1, "k1")?,
        k2: field(raw.k2, "k2")?,
        k3: field(raw.k3, "k3")?,
        a_m: field(raw.a_m, "a_m")?,
    })
}

impl RawScenario {
    fn into_scenario(self) -> Result<Scenario> {
        let gains = [
            axis_gains(Axis::X, self.axis.x)?,
            axis_gains(Axis::Y, self.axis.y)?,
            axis_gains(Axis::Z, self.axis.z)?,
        ];
        let trajectory = self.trajectory.into_spec(self.duration);
        trajectory.validate()?;
        let start = match self.start {
            Some(s) => s,
            None => trajectory.reference_unchecked(0.0),
        };
        Ok(Scenario {
            name: self.name,
            trajectory,
            disturbance: self.disturbance.into(),
            controller: self.controller,
            gains,
            pac: self.pac,
            inner_loop: self.inner_loop.into_spec()?,
            start,
            dt: self.dt,
            duration: self.duration,
            seed: self.seed,
            output: OutputSpec {
                dir: self.output.dir,
                skip_intercept_in_rmse: self.output.skip_intercept_in_rmse,
            },
        })
    }
}

impl From<&Scenario> for RawScenario {
    fn from(s: &Scenario) -> Self {
        let gains = |g: &SlidingGains| RawGains {
            k1: Some(g.k1),
            k2: Some(g.k2),
            k3: Some(g.k3),
            a_m: Some(g.a_m),
        };
        RawScenario {
            name: s.name.clone(),
            controller: s.controller,
            dt: s.dt,
            duration: s.duration,
            seed: s.seed,
            start: Some(s.start),
            trajectory: RawTrajectory::from_spec(&s.trajectory),
            disturbance: (&s.disturbance).into(),
            inner_loop: RawInnerLoop::from_spec(&s.inner_loop),
            pac: s.pac,
            axis: RawAxes {
                x: Some(gains(&s.gains[0])),
                y: Some(gains(&s.gains[1])),
                z: Some(gains(&s.gains[2])),
            },
            output: RawOutput {
                dir: s.output.dir.clone(),
                skip_intercept_in_rmse: s.output.skip_intercept_in_rmse,
            },
        }
    }
}

// --- presets -------------------------------------------------------------------

/// Simulation gains, identical on every axis.
pub const SIM_GAINS: SlidingGains = SlidingGains {
    k1: 0.4,
    k2: 0.001,
    k3: 0.001,
    a_m: 1.0,
};

/// Flight gains for the horizontal axes.
pub const EXP_GAINS_XY: SlidingGains = SlidingGains {
    k1: 1.0,
    k2: 0.001,
    k3: 0.0,
    a_m: 0.8,
};

/// Flight gains for altitude.
pub const EXP_GAINS_Z: SlidingGains = SlidingGains {
    k1: 0.35,
    k2: 0.01,
    k3: 0.65,
    a_m: 0.8,
};

pub const PRESET_NAMES: [&str; 8] = [
    "sim_circle_low_wind",
    "sim_circle_med_wind",
    "sim_circle_high_wind",
    "exp_circle",
    "exp_eight",
    "exp_circle_wind",
    "exp_eight_wind",
    "exp_altitude_proximity",
];

const EXP_ALTITUDE: f64 = 1.0;
const EXP_LEAD: f64 = 10.0;

fn base(name: &str, trajectory: TrajectorySpec, gains: [SlidingGains; 3]) -> Scenario {
    let duration = trajectory.duration;
    let start = trajectory.reference_unchecked(0.0);
    Scenario {
        name: name.to_string(),
        trajectory,
        disturbance: DisturbanceSpec::None,
        controller: ControllerSelection::Both,
        gains,
        pac: PacConfig::default(),
        inner_loop: InnerLoopSpec::default(),
        start,
        dt: 0.01,
        duration,
        seed: 0,
        output: OutputSpec::default(),
    }
}

fn sim_circle(name: &str, wind_mean: f64) -> Scenario {
    let trajectory = TrajectorySpec::new(
        Shape::Circle {
            center: [0.0, 0.0],
            radius: 6.0,
            period: [120.0, 120.0],
            altitude: 0.0,
        },
        240.0,
    );
    let mut s = base(name, trajectory, [SIM_GAINS; 3]);
    s.disturbance = DisturbanceSpec::Wind(WindSpec {
        mean: wind_mean,
        amplitude: 0.05,
        frequency: 1.0,
        axes: vec![Axis::X, Axis::Y],
    });
    s
}

fn exp_circle_trajectory() -> TrajectorySpec {
    TrajectorySpec::new(
        Shape::Circle {
            center: [0.0, 0.0],
            radius: 1.5,
            period: [10.0, 10.0],
            altitude: EXP_ALTITUDE,
        },
        60.0,
    )
    .with_intercept([0.0, 0.0, EXP_ALTITUDE], EXP_LEAD)
}

fn exp_eight_trajectory() -> TrajectorySpec {
    TrajectorySpec::new(
        Shape::eight([0.0, 0.0], [1.5, 0.75], [20.0, 10.0], EXP_ALTITUDE),
        70.0,
    )
    .with_intercept([0.0, 0.0, EXP_ALTITUDE], EXP_LEAD)
}

/// Synthetic fan: steady push along -x with a slow gust.
fn fan() -> DisturbanceSpec {
    DisturbanceSpec::Wind(WindSpec {
        mean: -0.2,
        amplitude: 0.1,
        frequency: 0.2,
        axes: vec![Axis::X],
    })
}

/// Looks up a built-in scenario by name.
pub fn preset(name: &str) -> Option<Scenario> {
    let exp_gains = [EXP_GAINS_XY, EXP_GAINS_XY, EXP_GAINS_Z];
    let scenario = match name {
        "sim_circle_low_wind" => sim_circle(name, -0.1),
        "sim_circle_med_wind" => sim_circle(name, -0.2),
        "sim_circle_high_wind" => sim_circle(name, -0.5),
        "exp_circle" => base(name, exp_circle_trajectory(), exp_gains),
        "exp_eight" => base(name, exp_eight_trajectory(), exp_gains),
        "exp_circle_wind" => {
            let mut s = base(name, exp_circle_trajectory(), exp_gains);
            s.disturbance = fan();
            s
        }
        "exp_eight_wind" => {
            let mut s = base(name, exp_eight_trajectory(), exp_gains);
            s.disturbance = fan();
            s
        }
        "exp_altitude_proximity" => {
            let trajectory = TrajectorySpec::new(
                Shape::SquareAlt {
                    position: [0.0, 0.0],
                    amplitude: 0.6,
                    period: 21.0,
                    offset: 0.55,
                },
                63.0,
            );
            let mut s = base(name, trajectory, exp_gains);
            s.start = [0.0, 0.0, 0.25];
            s.disturbance = DisturbanceSpec::Proximity(ProximitySpec {
                z_floor: 0.0,
                z_ceil: 1.0,
                gain_ground: 0.05,
                gain_ceil: 0.05,
                length: 0.1,
            });
            s
        }
        _ => return None,
    };
    Some(scenario)
}

pub fn presets() -> Vec<Scenario> {
    PRESET_NAMES.iter().filter_map(|n| preset(n)).collect()
}
