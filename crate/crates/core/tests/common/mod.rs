//! Per-step invariant checks shared by the property and acceptance suites.

#![allow(dead_code)]

use pac_core::controller::{
    firing_strengths, growth_factor, is_positive_definite, memberships, prune_factor,
    AxisController, ExtendedInput, PacConfig, SlidingGains, StructuralEvent,
};

/// Steps `c` once and checks every per-step invariant against its prior state.
pub fn checked_step(c: &mut AxisController, reference: f64, measured: f64) -> Result<f64, String> {
    let before = c.clone();
    let out = c.step_detailed(reference, measured);
    if let Some(f) = c.fault() {
        return Err(format!("fault: {f}"));
    }
    let cfg = *before.config();

    // Firing strengths of the pre-step network.
    let error = reference - measured;
    let integral = before.tracker().integral() + error * before.dt();
    let input = ExtendedInput::new(error, integral, measured);
    let mus = memberships(
        reference,
        before.rules(),
        &input,
        cfg.alpha,
        cfg.weight_eps,
        cfg.distance_eps,
    );
    let lambdas = firing_strengths(&mus);
    let sum: f64 = lambdas.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(format!("firing strengths sum to {sum}"));
    }
    if lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(format!("non-positive firing strength in {lambdas:?}"));
    }

    let a_m = before.gains().a_m;
    if out.v_us.abs() > a_m {
        return Err(format!("|v_us| = {} exceeds a_m = {a_m}", out.v_us.abs()));
    }
    if out.command != out.v_us - out.v_up {
        return Err("command is not v_us - v_up".into());
    }

    let n_before = before.rules().len();
    let n_after = c.rules().len();
    if n_after < 1 || n_after > cfg.max_rules {
        return Err(format!(
            "rule count {n_after} outside [1, {}]",
            cfg.max_rules
        ));
    }
    if n_after.abs_diff(n_before) > 1 {
        return Err("rule count changed by more than one".into());
    }

    let g = growth_factor(out.bias_sq);
    let z = prune_factor(out.variance);
    if !(0.5..=2.0).contains(&g) || !(0.5..=2.0).contains(&z) {
        return Err(format!("factor out of range: gamma {g}, zeta {z}"));
    }

    let stats = c.stats();
    match out.event {
        Some(StructuralEvent::Grow) => {
            if n_after != n_before + 1 {
                return Err("grow did not add a rule".into());
            }
            if stats.min_mean_bias != stats.mean_bias() || stats.min_std_bias != stats.std_bias() {
                return Err("bias minima not reset on growth".into());
            }
        }
        Some(StructuralEvent::Prune) => {
            if n_after + 1 != n_before {
                return Err("prune did not remove a rule".into());
            }
            if stats.min_mean_var != stats.mean_var() || stats.min_std_var != stats.std_var() {
                return Err("variance minima not reset on pruning".into());
            }
        }
        None => {
            if n_after != n_before {
                return Err("rule count changed without an event".into());
            }
            // Only the winner's weights may move.
            for (i, (a, b)) in before.rules().iter().zip(c.rules()).enumerate() {
                if i != out.winner && a.weights != b.weights {
                    return Err(format!("rule {i} changed but winner is {}", out.winner));
                }
                if i != out.winner && a.gain != b.gain {
                    return Err(format!(
                        "rule {i} gain changed but winner is {}",
                        out.winner
                    ));
                }
            }
        }
    }
    if stats.std_bias() < 0.0 || stats.std_var() < 0.0 || stats.bias_sq < 0.0 {
        return Err("negative spread or squared bias".into());
    }

    for (i, rule) in c.rules().iter().enumerate() {
        let p = &rule.gain;
        let scale = p.amax().max(f64::MIN_POSITIVE);
        let asym = (p - p.transpose()).amax();
        if asym > 1e-9 * scale {
            return Err(format!("rule {i}: P asymmetry {asym}"));
        }
        if !is_positive_definite(p) {
            return Err(format!("rule {i}: P not positive definite"));
        }
    }
    Ok(out.command)
}

/// Drives a fresh controller through `inputs`, checking invariants at every
/// step, then replays and demands bit-identical commands.
pub fn drive(gains: SlidingGains, config: PacConfig, inputs: &[(f64, f64)]) -> Result<(), String> {
    let mut c = AxisController::new(gains, config, 0.01).map_err(|e| e.to_string())?;
    let mut commands = Vec::with_capacity(inputs.len());
    for (k, (r, m)) in inputs.iter().enumerate() {
        commands.push(checked_step(&mut c, *r, *m).map_err(|e| format!("step {k}: {e}"))?);
    }
    let mut replay = AxisController::new(gains, config, 0.01).map_err(|e| e.to_string())?;
    for (k, (r, m)) in inputs.iter().enumerate() {
        let cmd = replay.step(*r, *m);
        if cmd.to_bits() != commands[k].to_bits() {
            return Err(format!(
                "step {k}: replay differs ({cmd} vs {})",
                commands[k]
            ));
        }
    }
    Ok(())
}

/// Zero reference, zero state, zero network: the command stays exactly zero.
pub fn zero_fixed_point(
    gains: SlidingGains,
    config: PacConfig,
    steps: usize,
) -> Result<(), String> {
    let mut c = AxisController::new(gains, config, 0.01).map_err(|e| e.to_string())?;
    for k in 0..steps {
        let cmd = c.step(0.0, 0.0);
        if cmd != 0.0 {
            return Err(format!("step {k}: command {cmd}"));
        }
    }
    if c.rules().len() != 1 {
        return Err(format!("{} rules at the fixed point", c.rules().len()));
    }
    Ok(())
}
