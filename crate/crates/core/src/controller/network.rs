//! Hyperplane-membership Takagi-Sugeno network: inference, rule statistics
//! and the winner's least-squares adaptation.
//!
//! Every rule is a single hyperplane `W_i` over the extended input
//! `[1, e, ∫e, x]`. The same hyperplane serves as premise (through its
//! distance to the reference) and consequent (through `W_i · λ_i·xe`), so a
//! rule carries no separate premise parameters.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

/// Guard added under the square root of `W·Wᵀ` so an all-zero rule has a
/// finite (large) distance.
pub const DEFAULT_WEIGHT_EPS: f64 = 1e-12;
/// Floor on the largest distance used to normalize memberships.
pub const DEFAULT_DISTANCE_EPS: f64 = 1e-12;

/// Regressor `[1, e, ∫e, x]` feeding every rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedInput(Vector4<f64>);

impl ExtendedInput {
    pub fn new(error: f64, integral: f64, position: f64) -> Self {
        Self(Vector4::new(1.0, error, integral, position))
    }

    pub fn as_vector(&self) -> &Vector4<f64> {
        &self.0
    }

    pub fn error(&self) -> f64 {
        self.0[1]
    }

    pub fn integral(&self) -> f64 {
        self.0[2]
    }

    pub fn position(&self) -> f64 {
        self.0[3]
    }
}

/// One fuzzy rule: hyperplane weights and the rule's least-squares gain
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneRule {
    pub weights: Vector4<f64>,
    pub gain: Matrix4<f64>,
    /// Samples seen since the rule was created.
    pub age: u64,
}

impl HyperplaneRule {
    pub fn new(weights: Vector4<f64>, initial_gain: f64) -> Self {
        Self {
            weights,
            gain: Matrix4::identity() * initial_gain,
            age: 0,
        }
    }

    pub fn zero(initial_gain: f64) -> Self {
        Self::new(Vector4::zeros(), initial_gain)
    }

    /// `W · v` for any 4-vector.
    #[inline]
    pub fn output(&self, v: &Vector4<f64>) -> f64 {
        self.weights.dot(v)
    }
}

/// Distance of the reference from a rule's hyperplane, normalized by the
/// (guarded) weight norm.
pub fn hyperplane_distance(
    reference: f64,
    rule: &HyperplaneRule,
    input: &ExtendedInput,
    weight_eps: f64,
) -> f64 {
    let residual = reference - rule.output(input.as_vector());
    residual.abs() / (rule.weights.norm_squared() + weight_eps).sqrt()
}

/// `exp(-alpha * d / max(d_max, eps))`.
#[inline]
pub fn membership(distance: f64, max_distance: f64, alpha: f64, distance_eps: f64) -> f64 {
    (-alpha * distance / max_distance.max(distance_eps)).exp()
}

/// Normalizes memberships into firing strengths that sum to one.
pub fn firing_strengths(memberships: &[f64]) -> Vec<f64> {
    let total: f64 = memberships.iter().sum();
    memberships.iter().map(|mu| mu / total).collect()
}

/// Memberships of every rule for one input.
pub fn memberships(
    reference: f64,
    rules: &[HyperplaneRule],
    input: &ExtendedInput,
    alpha: f64,
    weight_eps: f64,
    distance_eps: f64,
) -> Vec<f64> {
    let distances: Vec<f64> = rules
        .iter()
        .map(|rule| hyperplane_distance(reference, rule, input, weight_eps))
        .collect();
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    distances
        .iter()
        .map(|d| membership(*d, max_distance, alpha, distance_eps))
        .collect()
}

/// Crisp network output `Σ W_i · (λ_i · xe)`.
pub fn defuzzify(rules: &[HyperplaneRule], lambdas: &[f64], input: &ExtendedInput) -> f64 {
    debug_assert_eq!(rules.len(), lambdas.len());
    rules
        .iter()
        .zip(lambdas)
        .map(|(rule, lambda)| rule.output(&(input.as_vector() * *lambda)))
        .sum()
}

/// `|W · mu_x|`: the rule's contribution to the expected network output.
#[inline]
pub fn rule_significance(rule: &HyperplaneRule, mean_input: &Vector4<f64>) -> f64 {
    rule.output(mean_input).abs()
}

/// Index of the most significant rule; the lowest index wins ties.
pub fn winning_rule(rules: &[HyperplaneRule], mean_input: &Vector4<f64>) -> usize {
    let mut best = 0;
    let mut best_rs = f64::NEG_INFINITY;
    for (i, rule) in rules.iter().enumerate() {
        let rs = rule_significance(rule, mean_input);
        if rs > best_rs {
            best = i;
            best_rs = rs;
        }
    }
    best
}

/// Index of the least significant rule; the lowest index wins ties.
pub fn least_significant_rule(rules: &[HyperplaneRule], mean_input: &Vector4<f64>) -> usize {
    let mut worst = 0;
    let mut worst_rs = f64::INFINITY;
    for (i, rule) in rules.iter().enumerate() {
        let rs = rule_significance(rule, mean_input);
        if rs < worst_rs {
            worst = i;
            worst_rs = rs;
        }
    }
    worst
}

/// How the gain-matrix flow `Ṗ = -P Λ Λᵀ P` is advanced over one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainStep {
    /// Exact flow under a sample-and-hold regressor:
    /// `P⁺ = P - dt P Λ Λᵀ P / (1 + dt Λᵀ P Λ)`, i.e. `P⁺⁻¹ = P⁻¹ + dt Λ Λᵀ`.
    #[default]
    Exact,
    /// Forward Euler: `P⁺ = P - dt P Λ Λᵀ P`.
    Euler,
}

/// What happened to a rule during one adaptation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptOutcome {
    Updated,
    /// The gain matrix lost positive definiteness and was reset to `P₀·I`.
    GainReset,
}

/// Advances the winner's gain matrix and weights by one sample.
///
/// `regressor` is `λ_winner · xe`. The weight step uses the updated gain
/// matrix: `W⁺ = W - dt P⁺ Λ s`.
pub fn adapt_winner(
    rule: &mut HyperplaneRule,
    regressor: &Vector4<f64>,
    surface: f64,
    dt: f64,
    initial_gain: f64,
    step: GainStep,
) -> AdaptOutcome {
    let p = &rule.gain;
    let p_lambda = p * regressor;
    let mut next = match step {
        GainStep::Exact => {
            let denom = 1.0 + dt * regressor.dot(&p_lambda);
            p - (p_lambda * p_lambda.transpose()) * (dt / denom)
        }
        GainStep::Euler => p - (p_lambda * p_lambda.transpose()) * dt,
    };
    next = (next + next.transpose()) * 0.5;

    let mut outcome = AdaptOutcome::Updated;
    if !is_positive_definite(&next) {
        next = Matrix4::identity() * initial_gain;
        outcome = AdaptOutcome::GainReset;
    }
    rule.weights -= (next * regressor) * (dt * surface);
    rule.gain = next;
    outcome
}

/// Cholesky succeeds only for symmetric positive definite matrices.
pub fn is_positive_definite(m: &Matrix4<f64>) -> bool {
    m.iter().all(|v| v.is_finite()) && m.cholesky().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(w: [f64; 4]) -> HyperplaneRule {
        HyperplaneRule::new(Vector4::from(w), 100.0)
    }

    #[test]
    fn distance_examples() {
        let xe = ExtendedInput::new(0.3, 0.2, -1.0);
        let on_plane = rule([2.5, 0.0, 0.0, 0.0]);
        assert!(hyperplane_distance(2.5, &on_plane, &xe, DEFAULT_WEIGHT_EPS) < 1e-15);

        let zero = rule([0.0; 4]);
        let d = hyperplane_distance(1.0, &zero, &xe, 1e-12);
        assert!((d - 1e6).abs() < 1e-6);

        let unit = rule([1.0, 0.0, 0.0, 0.0]);
        let d = hyperplane_distance(2.0, &unit, &xe, 0.0);
        assert_eq!(d, 1.0);
    }

    #[test]
    fn membership_examples() {
        assert_eq!(membership(0.0, 5.0, 1.0, 1e-12), 1.0);
        let m = membership(3.0, 3.0, 1.0, 1e-12);
        assert!((m - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn single_rule_membership_is_exp_minus_alpha() {
        let xe = ExtendedInput::new(0.4, 1.0, 2.0);
        for alpha in [0.5, 1.0, 3.0] {
            let mus = memberships(1.3, &[rule([0.1, 0.2, 0.3, 0.4])], &xe, alpha, 1e-12, 1e-12);
            assert!((mus[0] - (-alpha).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn firing_strength_examples() {
        assert_eq!(firing_strengths(&[0.5]), vec![1.0]);
        assert_eq!(firing_strengths(&[0.2, 0.2]), vec![0.5, 0.5]);
        let l = firing_strengths(&[0.1, 0.3]);
        assert!((l[0] - 0.25).abs() < 1e-15 && (l[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn defuzzify_examples() {
        let xe = ExtendedInput::new(0.3, 7.0, -2.0);
        assert_eq!(defuzzify(&[rule([0.0; 4])], &[1.0], &xe), 0.0);
        assert!((defuzzify(&[rule([0.0, 1.0, 0.0, 0.0])], &[1.0], &xe) - 0.3).abs() < 1e-15);
        let two = [rule([1.0, 0.0, 0.0, 0.0]), rule([3.0, 0.0, 0.0, 0.0])];
        assert!((defuzzify(&two, &[0.25, 0.75], &xe) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn significance_and_selection() {
        let mu = Vector4::new(1.0, 0.5, -0.2, 3.0);
        assert_eq!(rule_significance(&rule([0.0; 4]), &mu), 0.0);
        assert_eq!(rule_significance(&rule([2.0, 0.0, 0.0, 0.0]), &mu), 2.0);
        assert_eq!(rule_significance(&rule([-2.0, 0.0, 0.0, 0.0]), &mu), 2.0);

        let rs = |v: f64| rule([v, 0.0, 0.0, 0.0]);
        assert_eq!(winning_rule(&[rs(1.0)], &mu), 0);
        assert_eq!(winning_rule(&[rs(1.0), rs(3.0), rs(2.0)], &mu), 1);
        assert_eq!(winning_rule(&[rs(2.0), rs(-2.0), rs(2.0)], &mu), 0);

        assert_eq!(least_significant_rule(&[rs(0.5), rs(0.0)], &mu), 1);
        assert_eq!(least_significant_rule(&[rs(0.3), rs(-0.3)], &mu), 0);
    }

    #[test]
    fn zero_surface_keeps_weights() {
        let mut r = rule([0.1, -0.2, 0.3, 0.0]);
        let before = r.clone();
        let lambda = Vector4::new(1.0, 0.1, 0.0, 0.2);
        adapt_winner(&mut r, &lambda, 0.0, 0.01, 100.0, GainStep::Exact);
        assert_eq!(r.weights, before.weights);
        assert_ne!(r.gain, before.gain);
    }

    #[test]
    fn zero_regressor_changes_nothing() {
        let mut r = rule([0.1, -0.2, 0.3, 0.0]);
        let before = r.clone();
        adapt_winner(&mut r, &Vector4::zeros(), 0.7, 0.01, 100.0, GainStep::Exact);
        assert_eq!(r, before);
    }

    #[test]
    fn exact_step_matches_information_form() {
        // P⁺⁻¹ = P⁻¹ + dt Λ Λᵀ.
        let mut r = rule([0.0; 4]);
        let lambda = Vector4::new(1.0, 0.4, -0.3, 2.0);
        let dt = 0.01;
        adapt_winner(&mut r, &lambda, 0.0, dt, 100.0, GainStep::Exact);
        let info = Matrix4::identity() / 100.0 + lambda * lambda.transpose() * dt;
        let err = (r.gain * info - Matrix4::identity()).norm();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn euler_step_loses_definiteness_at_large_gain() {
        // dt Λᵀ P Λ > 1 drives the Euler update indefinite.
        let mut r = rule([0.0; 4]);
        let lambda = Vector4::new(1.0, 0.5, 0.0, 0.5);
        let outcome = adapt_winner(&mut r, &lambda, 1.0, 0.01, 100.0, GainStep::Euler);
        assert_eq!(outcome, AdaptOutcome::GainReset);
        assert_eq!(r.gain, Matrix4::identity() * 100.0);
    }
}
