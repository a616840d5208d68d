//! PID-structured sliding surface, its saturation, and the Hurwitz gate on
//! the surface gains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gains of the sliding surface `s = k1*e + k2*∫e + k3*ė` plus the
/// saturation bound applied to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlidingGains {
    /// Proportional gain (dimensionless).
    pub k1: f64,
    /// Integral gain (1/s).
    pub k2: f64,
    /// Derivative gain (s).
    pub k3: f64,
    /// Saturation bound on the surface output (m/s).
    pub a_m: f64,
}

impl SlidingGains {
    /// Builds a gain set, rejecting anything that would not give Hurwitz
    /// error dynamics or a positive saturation bound.
    pub fn new(k1: f64, k2: f64, k3: f64, a_m: f64) -> Result<Self> {
        let gains = Self { k1, k2, k3, a_m };
        gains.validate()?;
        Ok(gains)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.k1, self.k2, self.k3, self.a_m];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGains("gains must be finite".into()));
        }
        if !is_hurwitz(self) {
            return Err(Error::InvalidGains(format!(
                "k1={}, k2={}, k3={} violate the Hurwitz condition k1 > 0, k2 > 0, k3 >= 0",
                self.k1, self.k2, self.k3
            )));
        }
        if self.a_m <= 0.0 {
            return Err(Error::InvalidGains(format!(
                "saturation bound a_m={} must be positive",
                self.a_m
            )));
        }
        Ok(())
    }
}

/// `k1*e + k2*∫e + k3*ė`.
#[inline]
pub fn sliding_surface(error: f64, integral: f64, derivative: f64, gains: &SlidingGains) -> f64 {
    gains.k1 * error + gains.k2 * integral + gains.k3 * derivative
}

/// Symmetric clip to `[-a_m, a_m]`, passing values inside the band through
/// untouched.
#[inline]
pub fn saturate(value: f64, a_m: f64) -> f64 {
    if value.abs() <= a_m {
        value
    } else {
        a_m.copysign(value)
    }
}

/// Sign test for the error-dynamics matrix
/// `[[0, 1], [-k2/(1+k3), -k1/(1+k3)]]`.
pub fn is_hurwitz(gains: &SlidingGains) -> bool {
    gains.k1 > 0.0 && gains.k2 > 0.0 && gains.k3 >= 0.0
}

/// Eigenvalues of the closed-loop error matrix as `(re, im)` pairs.
///
/// Returns `None` when `1 + k3 == 0`, where the matrix is undefined.
pub fn error_dynamics_eigenvalues(gains: &SlidingGains) -> Option<[(f64, f64); 2]> {
    let denom = 1.0 + gains.k3;
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    // Characteristic polynomial: s^2 + (k1/d) s + k2/d.
    let b = gains.k1 / denom;
    let c = gains.k2 / denom;
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // Avoid cancellation for the smaller-magnitude root.
        let q = -0.5 * (b + b.signum() * root);
        if q == 0.0 {
            // b == 0 and c == 0: double root at zero.
            return Some([(0.0, 0.0), (0.0, 0.0)]);
        }
        let r1 = q;
        let r2 = c / q;
        Some([(r1, 0.0), (r2, 0.0)])
    } else {
        let im = (-disc).sqrt() / 2.0;
        Some([(-b / 2.0, im), (-b / 2.0, -im)])
    }
}

/// Eigenvalue route to the same stability verdict as [`is_hurwitz`]:
/// both real parts strictly negative.
///
/// `k3 < 0` lies outside the surface's gain domain and is rejected before
/// the eigenvalue test; for `-1 < k3 < 0` the matrix itself can still be
/// stable.
pub fn is_hurwitz_by_eigenvalues(gains: &SlidingGains) -> bool {
    if gains.k3 < 0.0 {
        return false;
    }
    match error_dynamics_eigenvalues(gains) {
        Some(eigs) => eigs.iter().all(|(re, _)| *re < 0.0),
        None => false,
    }
}
