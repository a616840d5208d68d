//! Evolving neuro-fuzzy sliding-mode velocity control for multirotor
//! trajectory tracking, with a first-order plant simulator, reference
//! trajectories, a PID baseline and tracking metrics.
//!
//! The controller for one axis lives in [`controller::AxisController`].
//! [`harness`] closes the loop against [`plant`] for a [`scenario::Scenario`]
//! and produces traces and reports.

pub mod baseline;
pub mod controller;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod plant;
pub mod scenario;
pub mod trajectory;

pub use error::{Error, Result};
