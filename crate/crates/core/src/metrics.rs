//! Run traces and tracking-error metrics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sample of a closed-loop run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceRow {
    pub t: f64,
    pub reference: [f64; 3],
    pub position: [f64; 3],
    pub command: [f64; 3],
    pub v_us: [f64; 3],
    pub v_up: [f64; 3],
    pub rules: [usize; 3],
    pub bias: [f64; 3],
    pub variance: [f64; 3],
    /// Structural events of this step, e.g. `grow_x;prune_z`.
    pub event: String,
}

impl TraceRow {
    /// Tracking error `reference - position`.
    pub fn error(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.reference[i] - self.position[i])
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

pub const CSV_HEADER: &str = "t,x_ref,y_ref,z_ref,x,y,z,vx_cmd,vy_cmd,vz_cmd,\
v_us_x,v_up_x,v_us_y,v_up_y,v_us_z,v_up_z,rules_x,rules_y,rules_z,\
bias_x,var_x,bias_y,var_y,bias_z,var_z,event";

/// 17 significant digits: enough to round-trip any `f64`.
fn fmt_f64(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 420 + CSV_HEADER.len() + 1);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let mut floats = Vec::with_capacity(25);
            floats.push(row.t);
            floats.extend_from_slice(&row.reference);
            floats.extend_from_slice(&row.position);
            floats.extend_from_slice(&row.command);
            for i in 0..3 {
                floats.push(row.v_us[i]);
                floats.push(row.v_up[i]);
            }
            for (i, v) in floats.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                fmt_f64(&mut out, *v);
            }
            for r in row.rules {
                let _ = write!(out, ",{r}");
            }
            for i in 0..3 {
                out.push(',');
                fmt_f64(&mut out, row.bias[i]);
                out.push(',');
                fmt_f64(&mut out, row.variance[i]);
            }
            out.push(',');
            out.push_str(&row.event);
            out.push('\n');
        }
        out
    }

    /// Rows at or after `t_start`.
    pub fn from_time(&self, t_start: f64) -> RunTrace {
        RunTrace {
            rows: self
                .rows
                .iter()
                .filter(|r| r.t >= t_start)
                .cloned()
                .collect(),
        }
    }
}

/// `sqrt(mean(eᵀe))` over every sample and all three axes.
pub fn rmse(trace: &RunTrace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let sum: f64 = trace
        .rows
        .iter()
        .map(|r| r.error().iter().map(|e| e * e).sum::<f64>())
        .sum();
    Ok((sum / trace.len() as f64).sqrt())
}

/// Per-axis root mean squared error.
pub fn axis_rmse(trace: &RunTrace) -> Result<[f64; 3]> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let n = trace.len() as f64;
    let mut acc = [0.0; 3];
    for row in &trace.rows {
        let e = row.error();
        for i in 0..3 {
            acc[i] += e[i] * e[i];
        }
    }
    Ok(acc.map(|s| (s / n).sqrt()))
}

/// Horizontal error magnitude per sample.
pub fn euclidean_error(trace: &RunTrace) -> Vec<f64> {
    trace
        .rows
        .iter()
        .map(|r| {
            let e = r.error();
            e[0].hypot(e[1])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Order statistics with linearly interpolated quantiles at `h = (n-1)p`.
pub fn summary(series: &[f64]) -> Result<Summary> {
    if series.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(Summary {
        mean,
        std: var.sqrt(),
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
