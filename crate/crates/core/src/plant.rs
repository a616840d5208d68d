//! First-order translational plant `ṗ = v_cmd + v_dist` with an optional
//! lagged inner velocity loop and additive disturbance velocities.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Sinusoidal gust on top of a constant wind, `A + B sin(2π ω t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindSpec {
    /// Constant part `A_d` (m/s).
    pub mean: f64,
    /// Gust amplitude `B_d` (m/s).
    pub amplitude: f64,
    /// Gust frequency `ω_d`, used as `sin(2π ω_d t)`.
    pub frequency: f64,
    pub axes: Vec<Axis>,
}

/// Synthetic near-surface disturbance on the vertical axis. Both terms push
/// upward: extra lift near the floor, suction toward the ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximitySpec {
    pub z_floor: f64,
    pub z_ceil: f64,
    pub gain_ground: f64,
    pub gain_ceil: f64,
    /// Decay length of both terms (m).
    pub length: f64,
}

impl Default for ProximitySpec {
    fn default() -> Self {
        Self {
            z_floor: 0.0,
            z_ceil: 1.0,
            gain_ground: 0.05,
            gain_ceil: 0.05,
            length: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum DisturbanceSpec {
    #[default]
    None,
    Wind(WindSpec),
    Proximity(ProximitySpec),
}

impl DisturbanceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DisturbanceSpec::None => Ok(()),
            DisturbanceSpec::Wind(w) => {
                if ![w.mean, w.amplitude, w.frequency]
                    .iter()
                    .all(|v| v.is_finite())
                {
                    return Err(Error::InvalidConfig(
                        "wind parameters must be finite".into(),
                    ));
                }
                Ok(())
            }
            DisturbanceSpec::Proximity(p) => {
                let values = [p.z_floor, p.z_ceil, p.gain_ground, p.gain_ceil, p.length];
                if !values.iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidConfig(
                        "proximity parameters must be finite".into(),
                    ));
                }
                if !(p.length > 0.0) {
                    return Err(Error::InvalidConfig(
                        "proximity length must be positive".into(),
                    ));
                }
                if !(p.z_floor < p.z_ceil) {
                    return Err(Error::InvalidConfig(
                        "proximity z_floor must be below z_ceil".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Disturbance velocity at time `t` and position `position`.
    pub fn velocity(&self, t: f64, position: [f64; 3]) -> [f64; 3] {
        let mut v = [0.0; 3];
        match self {
            DisturbanceSpec::None => {}
            DisturbanceSpec::Wind(w) => {
                let speed = wind_velocity(w, t);
                for axis in &w.axes {
                    v[axis.index()] = speed;
                }
            }
            DisturbanceSpec::Proximity(p) => v[2] = proximity_velocity(p, position[2]),
        }
        v
    }

    /// Displacement contributed over `[t, t + dt]`. Wind is integrated in
    /// closed form; the position-dependent proximity term is held over the
    /// step.
    pub fn displacement(&self, t: f64, dt: f64, position: [f64; 3]) -> [f64; 3] {
        match self {
            DisturbanceSpec::Wind(w) => {
                let d = wind_displacement(w, t, dt);
                let mut out = [0.0; 3];
                for axis in &w.axes {
                    out[axis.index()] = d;
                }
                out
            }
            _ => self.velocity(t, position).map(|v| v * dt),
        }
    }
}

pub fn wind_velocity(spec: &WindSpec, t: f64) -> f64 {
    spec.mean + spec.amplitude * (TAU * spec.frequency * t).sin()
}

/// `∫_t^{t+dt} (A + B sin(2π ω τ)) dτ`.
pub fn wind_displacement(spec: &WindSpec, t: f64, dt: f64) -> f64 {
    let w = TAU * spec.frequency;
    let gust = if w == 0.0 {
        0.0
    } else {
        -spec.amplitude / w * ((w * (t + dt)).cos() - (w * t).cos())
    };
    spec.mean * dt + gust
}

pub fn proximity_velocity(spec: &ProximitySpec, z: f64) -> f64 {
    spec.gain_ground * (-(z - spec.z_floor) / spec.length).exp()
        + spec.gain_ceil * (-(spec.z_ceil - z) / spec.length).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InnerLoopMode {
    #[default]
    Perfect,
    FirstOrderLag {
        /// Time constant (s).
        tau: f64,
    },
}

/// Inner velocity loop: actuator clip followed by perfect or lagged tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerLoopSpec {
    pub mode: InnerLoopMode,
    /// Per-axis actuator bound (m/s).
    pub clip: f64,
}

impl Default for InnerLoopSpec {
    fn default() -> Self {
        Self {
            mode: InnerLoopMode::Perfect,
            clip: 1.0,
        }
    }
}

impl InnerLoopSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip > 0.0) {
            return Err(Error::InvalidConfig(
                "inner_loop.clip must be positive".into(),
            ));
        }
        if let InnerLoopMode::FirstOrderLag { tau } = self.mode {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::InvalidConfig(
                    "inner_loop.tau must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub position: [f64; 3],
    /// Velocity actually delivered by the inner loop.
    pub applied: [f64; 3],
    pub t: f64,
}

impl PlantState {
    pub fn at(position: [f64; 3]) -> Self {
        Self {
            position,
            applied: [0.0; 3],
            t: 0.0,
        }
    }
}

/// Advances the plant by one step. A non-finite command is rejected and the
/// state is left untouched.
pub fn plant_step(
    state: &PlantState,
    command: [f64; 3],
    disturbance: &DisturbanceSpec,
    inner: &InnerLoopSpec,
    dt: f64,
) -> Result<PlantState> {
    if command.iter().any(|c| !c.is_finite()) {
        return Err(Error::Fault(format!(
            "non-finite velocity command {command:?}"
        )));
    }
    let mut next = *state;
    let drift = disturbance.displacement(state.t, dt, state.position);
    for i in 0..3 {
        let target = command[i].clamp(-inner.clip, inner.clip);
        next.applied[i] = match inner.mode {
            InnerLoopMode::Perfect => target,
            InnerLoopMode::FirstOrderLag { tau } => {
                state.applied[i] + (target - state.applied[i]) * (1.0 - (-dt / tau).exp())
            }
        };
        next.position[i] += next.applied[i] * dt + drift[i];
    }
    next.t += dt;
    Ok(next)
}

/// Owned plant with its disturbance and inner loop.
#[derive(Debug, Clone)]
pub struct Plant {
    pub state: PlantState,
    pub disturbance: DisturbanceSpec,
    pub inner: InnerLoopSpec,
    pub dt: f64,
}

impl Plant {
    pub fn new(
        start: [f64; 3],
        disturbance: DisturbanceSpec,
        inner: InnerLoopSpec,
        dt: f64,
    ) -> Self {
        Self {
            state: PlantState::at(start),
            disturbance,
            inner,
            dt,
        }
    }

    pub fn step(&mut self, command: [f64; 3]) -> Result<()> {
        self.state = plant_step(
            &self.state,
            command,
            &self.disturbance,
            &self.inner,
            self.dt,
        )?;
        Ok(())
    }
}
