//! Streaming bias/variance estimates of the network output and the
//! grow/prune tests built on them.

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use super::network::{ExtendedInput, HyperplaneRule};

/// Single-pass mean and population standard deviation (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
        // Rounding can leave m2 a hair below zero on constant streams.
        if self.m2 < 0.0 {
            self.m2 = 0.0;
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Reading of the output second moment `E[x_p²]` used for the variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceForm {
    /// `Σ_i W_i · (μ_x ∘ μ_x)`: component-wise square of the input mean.
    #[default]
    ComponentSquare,
    /// `Σ_i W_i · E[xe ∘ xe]`: running mean of the squared input.
    InputSecondMoment,
}

/// Bias/variance bookkeeping for one axis network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStats {
    /// Running mean of the extended input.
    pub mu_x: Vector4<f64>,
    /// Running mean of the component-wise squared extended input.
    pub mu_x_sq: Vector4<f64>,
    /// Latest squared bias `(x - E[x_p])²`.
    pub bias_sq: f64,
    /// Latest variance `E[x_p²] - E[x_p]²`.
    pub variance: f64,
    pub bias: RunningStats,
    pub var: RunningStats,
    /// Minima since the last growth event.
    pub min_mean_bias: f64,
    pub min_std_bias: f64,
    /// Minima since the last pruning event.
    pub min_mean_var: f64,
    pub min_std_var: f64,
    pub n_samples: u64,
}

impl Default for NetworkStats {
    fn default() -> Self {
        Self {
            mu_x: Vector4::zeros(),
            mu_x_sq: Vector4::zeros(),
            bias_sq: 0.0,
            variance: 0.0,
            bias: RunningStats::new(),
            var: RunningStats::new(),
            min_mean_bias: f64::INFINITY,
            min_std_bias: f64::INFINITY,
            min_mean_var: f64::INFINITY,
            min_std_var: f64::INFINITY,
            n_samples: 0,
        }
    }
}

impl NetworkStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mean_bias(&self) -> f64 {
        self.bias.mean()
    }

    pub fn std_bias(&self) -> f64 {
        self.bias.std_dev()
    }

    pub fn mean_var(&self) -> f64 {
        self.var.mean()
    }

    pub fn std_var(&self) -> f64 {
        self.var.std_dev()
    }

    /// Folds one sample into the estimates.
    ///
    /// The network output is evaluated with every firing strength set to one,
    /// so `E[x_p] = Σ_i W_i · μ_x`.
    pub fn update(
        &mut self,
        target: f64,
        rules: &[HyperplaneRule],
        input: &ExtendedInput,
        form: VarianceForm,
    ) {
        self.n_samples += 1;
        let n = self.n_samples as f64;
        let x = input.as_vector();
        self.mu_x += (x - self.mu_x) / n;
        let x_sq = x.component_mul(x);
        self.mu_x_sq += (x_sq - self.mu_x_sq) / n;

        let second_moment_basis = match form {
            VarianceForm::ComponentSquare => self.mu_x.component_mul(&self.mu_x),
            VarianceForm::InputSecondMoment => self.mu_x_sq,
        };
        let mut expected = 0.0;
        let mut second = 0.0;
        for rule in rules {
            expected += rule.output(&self.mu_x);
            second += rule.output(&second_moment_basis);
        }
        self.bias_sq = (target - expected).powi(2);
        self.variance = second - expected * expected;

        self.bias.push(self.bias_sq);
        self.var.push(self.variance);

        self.min_mean_bias = self.min_mean_bias.min(self.bias.mean());
        self.min_std_bias = self.min_std_bias.min(self.bias.std_dev());
        self.min_mean_var = self.min_mean_var.min(self.var.mean());
        self.min_std_var = self.min_std_var.min(self.var.std_dev());
    }

    pub fn reset_bias_minima(&mut self) {
        self.min_mean_bias = self.bias.mean();
        self.min_std_bias = self.bias.std_dev();
    }

    pub fn reset_variance_minima(&mut self) {
        self.min_mean_var = self.var.mean();
        self.min_std_var = self.var.std_dev();
    }

    /// `μ_β + σ_β ≥ μ_β^min + Γ σ_β^min`.
    pub fn growth_condition(&self) -> bool {
        let gamma = growth_factor(self.bias_sq);
        let lhs = self.mean_bias() + self.std_bias();
        // A stream that has never been nonzero carries no evidence of bias.
        lhs > 0.0 && lhs >= self.min_mean_bias + gamma * self.min_std_bias
    }

    /// `μ_ϑ + σ_ϑ ≥ μ_ϑ^min + ζ σ_ϑ^min`.
    pub fn prune_condition(&self) -> bool {
        let zeta = prune_factor(self.variance);
        let lhs = self.mean_var() + self.std_var();
        lhs > 0.0 && lhs >= self.min_mean_var + zeta * self.min_std_var
    }
}

/// Adaptive confidence multiplier for growth, `1.5 exp(-β²) + 0.5`.
#[inline]
pub fn growth_factor(bias_sq: f64) -> f64 {
    1.5 * (-bias_sq.max(0.0)).exp() + 0.5
}

/// Adaptive confidence multiplier for pruning, `1.5 exp(-ϑ) + 0.5`.
///
/// The variance estimate can come out negative; it is floored at zero so the
/// factor stays within `[0.5, 2]`.
#[inline]
pub fn prune_factor(variance: f64) -> f64 {
    1.5 * (-variance.max(0.0)).exp() + 0.5
}
