//! Recursive winner update against batch least squares.
//!
//! Streams are scripted so that `s = v + W·Λ`; the recursion then minimizes
//! `Σ (W·Λ + v)² dt`, whose batch minimizer is `W = -G⁺ Σ Λ v dt` with
//! `G = Σ ΛΛᵀ dt`. Reference values come from `tests/oracles/batch_ls.py`.

use nalgebra::{Matrix4, Vector4};
use pac_core::controller::{adapt_winner, AdaptOutcome, GainStep, HyperplaneRule};

const DT: f64 = 0.01;
const P0: f64 = 100.0;

fn constant_stream(k: usize) -> (Vector4<f64>, f64) {
    let t = k as f64 * DT;
    (
        Vector4::new(1.0, 0.1, 0.0, 0.2),
        0.5 + 0.1 * (3.0 * t).sin(),
    )
}

fn exciting_stream(k: usize) -> (Vector4<f64>, f64) {
    let t = k as f64 * DT;
    let lam = Vector4::new(
        1.0,
        (1.3 * t).sin(),
        0.8 * (0.7 * t).cos(),
        0.5 * (2.9 * t + 0.4).sin(),
    );
    let w_true = Vector4::new(0.3, -0.2, 0.5, 0.1);
    (lam, -w_true.dot(&lam) + 0.05 * (5.1 * t).sin())
}

const CONSTANT_BATCH: [f64; 4] = [
    -0.47688917394522634,
    -0.04768891739452263,
    0.0,
    -0.09537783478904527,
];
const EXCITING_BATCH: [f64; 4] = [
    0.2996305930586951,
    -0.20001784650031096,
    0.49902301605146343,
    0.09973176171770377,
];

struct Recursion {
    rule: HyperplaneRule,
    gram: Matrix4<f64>,
    rhs: Vector4<f64>,
    resets: usize,
}

fn recurse(stream: fn(usize) -> (Vector4<f64>, f64), steps: usize, step: GainStep) -> Recursion {
    let mut rule = HyperplaneRule::zero(P0);
    let mut gram = Matrix4::zeros();
    let mut rhs = Vector4::zeros();
    let mut resets = 0;
    for k in 0..steps {
        let (lam, v) = stream(k);
        let s = v + rule.weights.dot(&lam);
        if adapt_winner(&mut rule, &lam, s, DT, P0, step) == AdaptOutcome::GainReset {
            resets += 1;
        }
        gram += lam * lam.transpose() * DT;
        rhs += lam * v * DT;
    }
    Recursion {
        rule,
        gram,
        rhs,
        resets,
    }
}

fn within_five_percent(w: &Vector4<f64>, batch: &[f64; 4]) {
    for i in 0..4 {
        if batch[i].abs() > 1e-6 {
            let rel = (w[i] - batch[i]).abs() / batch[i].abs();
            assert!(
                rel <= 0.05,
                "component {i}: {} vs {} ({rel:.4})",
                w[i],
                batch[i]
            );
        }
    }
}

fn pseudo_inverse_solution(gram: &Matrix4<f64>, rhs: &Vector4<f64>) -> Vector4<f64> {
    -gram.pseudo_inverse(1e-9).unwrap() * rhs
}

#[test]
fn constant_regressor_matches_minimum_norm_batch() {
    let r = recurse(constant_stream, 200, GainStep::Exact);
    assert_eq!(r.resets, 0);
    within_five_percent(&r.rule.weights, &CONSTANT_BATCH);
    // The regressor never excites the third component.
    assert_eq!(r.rule.weights[2], 0.0);
    let in_test = pseudo_inverse_solution(&r.gram, &r.rhs);
    for i in 0..4 {
        assert!((in_test[i] - CONSTANT_BATCH[i]).abs() < 1e-9);
    }
}

#[test]
fn exciting_stream_matches_batch_and_information_form() {
    let r = recurse(exciting_stream, 2000, GainStep::Exact);
    assert_eq!(r.resets, 0);
    within_five_percent(&r.rule.weights, &EXCITING_BATCH);
    let residual = r.rule.gain * r.gram - Matrix4::identity();
    assert!(residual.norm() <= 1e-2, "‖P·G - I‖ = {}", residual.norm());
    let in_test = pseudo_inverse_solution(&r.gram, &r.rhs);
    for i in 0..4 {
        assert!((in_test[i] - EXCITING_BATCH[i]).abs() < 1e-9);
    }
}

#[test]
fn exact_step_is_regularized_least_squares() {
    // With P(0) = P0·I the recursion lands on (I/P0 + G)⁻¹ b exactly.
    let r = recurse(exciting_stream, 2000, GainStep::Exact);
    let info = Matrix4::identity() / P0 + r.gram;
    let expected = -info.try_inverse().unwrap() * r.rhs;
    assert!((r.rule.weights - expected).norm() < 1e-9);
    assert!((r.rule.gain - info.try_inverse().unwrap()).norm() < 1e-9);
}

#[test]
fn euler_step_with_large_gain_resets() {
    let r = recurse(exciting_stream, 50, GainStep::Euler);
    assert!(r.resets > 0);
}
