//! Reference trajectories: planar circle and eight (Lissajous), altitude
//! square wave, hold, and an optional straight-line intercept leg in front
//! of any of them.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `(x_c + A cos(2πt/T_x), y_c + A sin(2πt/T_y))` at a fixed altitude.
    Circle {
        center: [f64; 2],
        radius: f64,
        period: [f64; 2],
        altitude: f64,
    },
    /// Circle equations with separate amplitudes per axis.
    Eight {
        center: [f64; 2],
        amplitude: [f64; 2],
        period: [f64; 2],
        altitude: f64,
    },
    /// Altitude alternating between `offset ± amplitude/2`, high first.
    SquareAlt {
        position: [f64; 2],
        amplitude: f64,
        period: f64,
        offset: f64,
    },
    Hold {
        point: [f64; 3],
    },
}

impl Shape {
    /// Two-period figure eight: x at `T`, y at `T/2`.
    pub fn eight(center: [f64; 2], amplitude: [f64; 2], period: [f64; 2], altitude: f64) -> Self {
        Shape::Eight {
            center,
            amplitude,
            period,
            altitude,
        }
    }

    fn at(&self, t: f64) -> [f64; 3] {
        match *self {
            Shape::Circle {
                center,
                radius,
                period,
                altitude,
            } => [
                center[0] + radius * (TAU * t / period[0]).cos(),
                center[1] + radius * (TAU * t / period[1]).sin(),
                altitude,
            ],
            Shape::Eight {
                center,
                amplitude,
                period,
                altitude,
            } => [
                center[0] + amplitude[0] * (TAU * t / period[0]).cos(),
                center[1] + amplitude[1] * (TAU * t / period[1]).sin(),
                altitude,
            ],
            Shape::SquareAlt {
                position,
                amplitude,
                period,
                offset,
            } => {
                let phase = t.rem_euclid(period);
                let z = if phase < period / 2.0 {
                    offset + amplitude / 2.0
                } else {
                    offset - amplitude / 2.0
                };
                [position[0], position[1], z]
            }
            Shape::Hold { point } => point,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Circle { radius, period, .. } => {
                radius.is_finite() && period.iter().all(|p| *p > 0.0 && p.is_finite())
            }
            Shape::Eight {
                amplitude, period, ..
            } => {
                amplitude.iter().all(|a| a.is_finite())
                    && period.iter().all(|p| *p > 0.0 && p.is_finite())
            }
            Shape::SquareAlt {
                amplitude,
                period,
                offset,
                ..
            } => amplitude.is_finite() && offset.is_finite() && *period > 0.0 && period.is_finite(),
            Shape::Hold { point } => point.iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "trajectory periods must be positive and all values finite".into(),
            ))
        }
    }
}

/// Straight-line approach from `start` to the shape's starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intercept {
    pub start: [f64; 3],
    /// Duration of the approach leg (s).
    pub lead: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub shape: Shape,
    pub intercept: Option<Intercept>,
    pub duration: f64,
}

impl TrajectorySpec {
    pub fn new(shape: Shape, duration: f64) -> Self {
        Self {
            shape,
            intercept: None,
            duration,
        }
    }

    pub fn with_intercept(mut self, start: [f64; 3], lead: f64) -> Self {
        self.intercept = Some(Intercept { start, lead });
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidConfig(
                "trajectory duration must be positive".into(),
            ));
        }
        if let Some(i) = &self.intercept {
            if !(i.lead > 0.0 && i.lead.is_finite()) || !i.start.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidConfig(
                    "intercept lead must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Time at which the main shape starts (end of the intercept leg).
    pub fn shape_start(&self) -> f64 {
        self.intercept.map_or(0.0, |i| i.lead)
    }

    /// Reference position at `t`.
    pub fn reference(&self, t: f64) -> Result<[f64; 3]> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(Error::OutOfRange {
                t,
                duration: self.duration,
            });
        }
        Ok(self.reference_unchecked(t))
    }

    pub(crate) fn reference_unchecked(&self, t: f64) -> [f64; 3] {
        match self.intercept {
            Some(Intercept { start, lead }) if t < lead => {
                let end = self.shape.at(0.0);
                let s = t / lead;
                [0, 1, 2].map(|i| start[i] + (end[i] - start[i]) * s)
            }
            Some(Intercept { lead, .. }) => self.shape.at(t - lead),
            None => self.shape.at(t),
        }
    }
}
