//! Saturated PID velocity controller with the same discretization as the
//! evolving controller's sliding surface.

use crate::controller::{saturate, sliding_surface, ErrorTracker, SlidingGains};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PidController {
    gains: SlidingGains,
    tracker: ErrorTracker,
    dt: f64,
}

impl PidController {
    pub fn new(gains: SlidingGains, dt: f64) -> Result<Self> {
        gains.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt={dt} must be positive")));
        }
        Ok(Self {
            gains,
            tracker: ErrorTracker::new(None),
            dt,
        })
    }

    pub fn gains(&self) -> &SlidingGains {
        &self.gains
    }

    pub fn tracker(&self) -> &ErrorTracker {
        &self.tracker
    }

    pub fn step(&mut self, reference: f64, measured: f64) -> f64 {
        let error = reference - measured;
        let (integral, derivative) = self.tracker.update(error, self.dt);
        saturate(
            sliding_surface(error, integral, derivative, &self.gains),
            self.gains.a_m,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pid(k1: f64, k2: f64, k3: f64, a_m: f64) -> PidController {
        PidController::new(SlidingGains::new(k1, k2, k3, a_m).unwrap(), 0.01).unwrap()
    }

    #[test]
    fn zero_error_history_gives_zero() {
        let mut p = pid(0.4, 0.001, 0.001, 1.0);
        for _ in 0..100 {
            assert_eq!(p.step(2.0, 2.0), 0.0);
        }
    }

    #[test]
    fn first_step_has_no_derivative_kick() {
        let mut p = pid(0.4, 0.001, 0.001, 1.0);
        assert_eq!(p.step(1.0, 0.0), 0.4 + 0.001 * 0.01);
        // Second step: ė = (0.9 - 1.0) / 0.01.
        let u = p.step(1.0, 0.1);
        let expected = 0.4 * 0.9 + 0.001 * (0.01 + 0.009) + 0.001 * (-10.0);
        assert!((u - expected).abs() < 1e-15);
    }

    #[test]
    fn large_error_saturates() {
        let mut p = pid(0.4, 0.001, 0.001, 1.0);
        assert_eq!(p.step(50.0, 0.0), 1.0);
        let mut p = pid(0.4, 0.001, 0.001, 0.8);
        assert_eq!(p.step(-50.0, 0.0), -0.8);
    }
}
