//! Per-axis evolving sliding-mode controller.
//!
//! The command is `sat(s) - v_up`, where `s` is a PID-structured sliding
//! surface and `v_up` is the output of a hyperplane neuro-fuzzy network that
//! learns the equivalent control online. The network starts from one zero
//! rule, grows when its estimated bias rises, prunes its least significant
//! rule when the estimated variance rises, and adapts only the winning
//! rule's hyperplane each step.

pub mod network;
pub mod stats;
pub mod surface;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use network::{
    adapt_winner, defuzzify, firing_strengths, hyperplane_distance, is_positive_definite,
    least_significant_rule, membership, memberships, rule_significance, winning_rule, AdaptOutcome,
    ExtendedInput, GainStep, HyperplaneRule,
};
pub use stats::{growth_factor, prune_factor, NetworkStats, RunningStats, VarianceForm};
pub use surface::{
    error_dynamics_eigenvalues, is_hurwitz, is_hurwitz_by_eigenvalues, saturate, sliding_surface,
    SlidingGains,
};

/// Which signal the network's unity-firing prediction is compared against
/// when estimating bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsTarget {
    /// Measured position.
    #[default]
    Measured,
    /// Reference position.
    Reference,
    /// Tracking error `reference - measured`.
    Error,
}

/// Tunables of the evolving network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacConfig {
    /// Membership sharpness.
    pub alpha: f64,
    /// Initial gain matrix scale `P₀`.
    pub initial_gain: f64,
    pub max_rules: usize,
    /// Steps after a grow or prune during which both checks are suppressed.
    pub grace_steps: u64,
    /// Samples required before the first structural check.
    pub warmup: u64,
    pub variance_form: VarianceForm,
    pub stats_target: StatsTarget,
    pub gain_step: GainStep,
    pub weight_eps: f64,
    pub distance_eps: f64,
    /// Optional symmetric clamp on the error integral. Off by default.
    pub integral_limit: Option<f64>,
}

impl Default for PacConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            initial_gain: 100.0,
            max_rules: 20,
            grace_steps: 20,
            warmup: 20,
            variance_form: VarianceForm::ComponentSquare,
            stats_target: StatsTarget::Measured,
            gain_step: GainStep::Exact,
            weight_eps: network::DEFAULT_WEIGHT_EPS,
            distance_eps: network::DEFAULT_DISTANCE_EPS,
            integral_limit: None,
        }
    }
}

impl PacConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("pac.alpha must be positive");
        }
        if !(self.initial_gain > 0.0 && self.initial_gain.is_finite()) {
            return bad("pac.initial_gain must be positive");
        }
        if self.max_rules == 0 {
            return bad("pac.max_rules must be at least 1");
        }
        if !(self.weight_eps > 0.0 && self.distance_eps > 0.0) {
            return bad("pac division guards must be positive");
        }
        if let Some(limit) = self.integral_limit {
            if !(limit > 0.0) {
                return bad("pac.integral_limit must be positive when set");
            }
        }
        Ok(())
    }
}

/// Rectangular error integral and backward-difference derivative, shared by
/// the evolving controller and the PID baseline.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorTracker {
    integral: f64,
    prev_error: Option<f64>,
    limit: Option<f64>,
}

impl ErrorTracker {
    pub fn new(limit: Option<f64>) -> Self {
        Self {
            integral: 0.0,
            prev_error: None,
            limit,
        }
    }

    /// Folds in the current error and returns `(∫e, ė)`. The derivative is
    /// zero on the first sample.
    pub fn update(&mut self, error: f64, dt: f64) -> (f64, f64) {
        self.integral += error * dt;
        if let Some(limit) = self.limit {
            self.integral = self.integral.clamp(-limit, limit);
        }
        let derivative = match self.prev_error {
            Some(prev) => (error - prev) / dt,
            None => 0.0,
        };
        self.prev_error = Some(error);
        (self.integral, derivative)
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn prev_error(&self) -> Option<f64> {
        self.prev_error
    }
}

/// Structural change applied during a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuralEvent {
    Grow,
    Prune,
}

/// Everything a step produced, for tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    /// Command `v_us - v_up` (m/s).
    pub command: f64,
    pub surface: f64,
    /// Saturated surface `v_us`.
    pub v_us: f64,
    /// Network output `v_up`.
    pub v_up: f64,
    pub rules: usize,
    pub bias_sq: f64,
    pub variance: f64,
    pub event: Option<StructuralEvent>,
    pub winner: usize,
    pub gain_reset: bool,
}

impl StepOutput {
    fn idle(rules: usize) -> Self {
        Self {
            command: 0.0,
            surface: 0.0,
            v_us: 0.0,
            v_up: 0.0,
            rules,
            bias_sq: 0.0,
            variance: 0.0,
            event: None,
            winner: 0,
            gain_reset: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub steps: u64,
    pub grow_events: u64,
    pub prune_events: u64,
    pub gain_resets: u64,
}

/// Evolving controller for one translational axis.
#[derive(Debug, Clone)]
pub struct AxisController {
    gains: SlidingGains,
    config: PacConfig,
    dt: f64,
    rules: Vec<HyperplaneRule>,
    stats: NetworkStats,
    tracker: ErrorTracker,
    steps_since_event: Option<u64>,
    diagnostics: Diagnostics,
    fault: Option<String>,
}

impl AxisController {
    pub fn new(gains: SlidingGains, config: PacConfig, dt: f64) -> Result<Self> {
        gains.validate()?;
        config.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt={dt} must be positive")));
        }
        Ok(Self {
            gains,
            config,
            dt,
            rules: vec![HyperplaneRule::zero(config.initial_gain)],
            stats: NetworkStats::new(),
            tracker: ErrorTracker::new(config.integral_limit),
            steps_since_event: None,
            diagnostics: Diagnostics::default(),
            fault: None,
        })
    }

    pub fn gains(&self) -> &SlidingGains {
        &self.gains
    }

    pub fn config(&self) -> &PacConfig {
        &self.config
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn rules(&self) -> &[HyperplaneRule] {
        &self.rules
    }

    pub fn stats(&self) -> &NetworkStats {
        &self.stats
    }

    pub fn tracker(&self) -> &ErrorTracker {
        &self.tracker
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    pub fn fault(&self) -> Option<&str> {
        self.fault.as_deref()
    }

    /// Runs one control period and returns the velocity command.
    pub fn step(&mut self, reference: f64, measured: f64) -> f64 {
        self.step_detailed(reference, measured).command
    }

    /// One control period:
    /// error bookkeeping, inference, surface, command, statistics,
    /// at most one structural change (growth checked first), then
    /// adaptation of the winning rule.
    pub fn step_detailed(&mut self, reference: f64, measured: f64) -> StepOutput {
        if self.fault.is_some() {
            return StepOutput::idle(self.rules.len());
        }
        if !reference.is_finite() || !measured.is_finite() {
            return self.latch_fault("non-finite reference or measurement");
        }
        self.diagnostics.steps += 1;

        let error = reference - measured;
        let (integral, derivative) = self.tracker.update(error, self.dt);
        let input = ExtendedInput::new(error, integral, measured);

        let lambdas = self.firing(reference, &input);
        let v_up = defuzzify(&self.rules, &lambdas, &input);

        let surface = sliding_surface(error, integral, derivative, &self.gains);
        let v_us = saturate(surface, self.gains.a_m);
        let command = v_us - v_up;
        if !(surface.is_finite() && v_up.is_finite() && command.is_finite()) {
            return self.latch_fault("non-finite surface or network output");
        }

        let target = match self.config.stats_target {
            StatsTarget::Measured => measured,
            StatsTarget::Reference => reference,
            StatsTarget::Error => reference - measured,
        };
        self.stats
            .update(target, &self.rules, &input, self.config.variance_form);
        if !(self.stats.bias_sq.is_finite() && self.stats.variance.is_finite()) {
            return self.latch_fault("non-finite network statistics");
        }

        let event = self.evolve_structure();
        let lambdas = if event.is_some() {
            self.firing(reference, &input)
        } else {
            lambdas
        };

        let winner = winning_rule(&self.rules, &self.stats.mu_x);
        let regressor = input.as_vector() * lambdas[winner];
        let outcome = adapt_winner(
            &mut self.rules[winner],
            &regressor,
            surface,
            self.dt,
            self.config.initial_gain,
            self.config.gain_step,
        );
        let gain_reset = outcome == AdaptOutcome::GainReset;
        if gain_reset {
            self.diagnostics.gain_resets += 1;
        }
        if !self.rules[winner].weights.iter().all(|w| w.is_finite()) {
            return self.latch_fault("non-finite rule weights");
        }
        for rule in &mut self.rules {
            rule.age += 1;
        }

        StepOutput {
            command,
            surface,
            v_us,
            v_up,
            rules: self.rules.len(),
            bias_sq: self.stats.bias_sq,
            variance: self.stats.variance,
            event,
            winner,
            gain_reset,
        }
    }

    fn firing(&self, reference: f64, input: &ExtendedInput) -> Vec<f64> {
        let mus = memberships(
            reference,
            &self.rules,
            input,
            self.config.alpha,
            self.config.weight_eps,
            self.config.distance_eps,
        );
        firing_strengths(&mus)
    }

    fn in_grace(&self) -> bool {
        matches!(self.steps_since_event, Some(n) if n <= self.config.grace_steps)
    }

    /// Grow check gated by the rule cap, warmup and grace period.
    pub fn should_grow(&self) -> bool {
        self.stats.n_samples >= self.config.warmup
            && !self.in_grace()
            && self.rules.len() < self.config.max_rules
            && self.stats.growth_condition()
    }

    /// Prune check gated by the one-rule floor, warmup and grace period.
    pub fn should_prune(&self) -> bool {
        self.stats.n_samples >= self.config.warmup
            && !self.in_grace()
            && self.rules.len() > 1
            && self.stats.prune_condition()
    }

    fn evolve_structure(&mut self) -> Option<StructuralEvent> {
        if let Some(n) = self.steps_since_event.as_mut() {
            *n += 1;
        }
        if self.should_grow() {
            self.grow_rule();
            Some(StructuralEvent::Grow)
        } else if self.should_prune() {
            self.prune_rule();
            Some(StructuralEvent::Prune)
        } else {
            None
        }
    }

    /// Appends a copy of the winning rule's hyperplane with a fresh gain
    /// matrix. No-op at the rule cap.
    pub fn grow_rule(&mut self) -> bool {
        if self.rules.len() >= self.config.max_rules {
            return false;
        }
        let winner = winning_rule(&self.rules, &self.stats.mu_x);
        let weights = self.rules[winner].weights;
        self.rules
            .push(HyperplaneRule::new(weights, self.config.initial_gain));
        self.stats.reset_bias_minima();
        self.steps_since_event = Some(0);
        self.diagnostics.grow_events += 1;
        true
    }

    /// Removes the least significant rule. No-op with a single rule.
    pub fn prune_rule(&mut self) -> bool {
        if self.rules.len() <= 1 {
            return false;
        }
        let target = least_significant_rule(&self.rules, &self.stats.mu_x);
        self.rules.remove(target);
        self.stats.reset_variance_minima();
        self.steps_since_event = Some(0);
        self.diagnostics.prune_events += 1;
        true
    }

    fn latch_fault(&mut self, reason: &str) -> StepOutput {
        self.fault = Some(reason.to_string());
        StepOutput::idle(self.rules.len())
    }

    #[cfg(test)]
    pub(crate) fn rules_mut(&mut self) -> &mut Vec<HyperplaneRule> {
        &mut self.rules
    }

    #[cfg(test)]
    pub(crate) fn stats_mut(&mut self) -> &mut NetworkStats {
        &mut self.stats
    }
}
