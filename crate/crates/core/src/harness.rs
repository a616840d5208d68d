//! Closed-loop runs of scenarios, trace files and comparison reports.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::PidController;
use crate::controller::{AxisController, StructuralEvent};
use crate::error::{Error, Result};
use crate::metrics::{self, RunTrace, Summary, TraceRow};
use crate::plant::{Axis, Plant};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Pac,
    Pid,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Pac => "pac",
            ControllerKind::Pid => "pid",
        }
    }
}

/// Per-axis output of one control period.
#[derive(Debug, Clone, Copy, Default)]
struct AxisSample {
    command: f64,
    v_us: f64,
    v_up: f64,
    rules: usize,
    bias: f64,
    variance: f64,
    event: Option<StructuralEvent>,
}

enum Controllers {
    Pac(Box<[AxisController; 3]>),
    Pid(Box<[PidController; 3]>),
}

impl Controllers {
    fn new(kind: ControllerKind, scenario: &Scenario) -> Result<Self> {
        let g = &scenario.gains;
        Ok(match kind {
            ControllerKind::Pac => {
                let make = |i: usize| AxisController::new(g[i], scenario.pac, scenario.dt);
                Controllers::Pac(Box::new([make(0)?, make(1)?, make(2)?]))
            }
            ControllerKind::Pid => {
                let make = |i: usize| PidController::new(g[i], scenario.dt);
                Controllers::Pid(Box::new([make(0)?, make(1)?, make(2)?]))
            }
        })
    }

    fn step(&mut self, reference: [f64; 3], measured: [f64; 3]) -> Result<[AxisSample; 3]> {
        let mut out = [AxisSample::default(); 3];
        match self {
            Controllers::Pac(axes) => {
                for (i, c) in axes.iter_mut().enumerate() {
                    let s = c.step_detailed(reference[i], measured[i]);
                    if let Some(reason) = c.fault() {
                        return Err(Error::Fault(format!(
                            "axis {}: {reason}",
                            Axis::ALL[i].name()
                        )));
                    }
                    out[i] = AxisSample {
                        command: s.command,
                        v_us: s.v_us,
                        v_up: s.v_up,
                        rules: s.rules,
                        bias: s.bias_sq,
                        variance: s.variance,
                        event: s.event,
                    };
                }
            }
            Controllers::Pid(axes) => {
                for (i, c) in axes.iter_mut().enumerate() {
                    let u = c.step(reference[i], measured[i]);
                    out[i] = AxisSample {
                        command: u,
                        v_us: u,
                        ..AxisSample::default()
                    };
                }
            }
        }
        Ok(out)
    }

    fn gain_resets(&self) -> u64 {
        match self {
            Controllers::Pac(axes) => axes.iter().map(|c| c.diagnostics().gain_resets).sum(),
            Controllers::Pid(_) => 0,
        }
    }
}

/// A rule-count event recorded in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    pub axis: Axis,
    pub event: StructuralEvent,
    pub rules_after: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleCounts {
    pub min: usize,
    pub max: usize,
    #[serde(rename = "final")]
    pub last: usize,
}

/// Outcome of one controller on one scenario.
#[derive(Debug, Clone)]
pub struct ControllerRun {
    pub kind: ControllerKind,
    pub trace: RunTrace,
    pub events: Vec<EventRecord>,
    pub gain_resets: u64,
    pub fault: Option<String>,
}

impl ControllerRun {
    pub fn summarize(&self, rmse_from: f64) -> RunSummary {
        let scored = self.trace.from_time(rmse_from);
        let rmse = metrics::rmse(&scored).ok();
        let axis_rmse = metrics::axis_rmse(&scored).ok();
        let eps_xy = metrics::summary(&metrics::euclidean_error(&scored)).ok();
        let rules = Axis::ALL.map(|axis| {
            let mut counts = self.trace.rows.iter().map(|r| r.rules[axis.index()]);
            RuleCounts {
                min: counts.clone().min().unwrap_or(0),
                max: counts.clone().max().unwrap_or(0),
                last: counts.next_back().unwrap_or(0),
            }
        });
        let count = |e: StructuralEvent| self.events.iter().filter(|r| r.event == e).count();
        RunSummary {
            controller: self.kind,
            samples: self.trace.len(),
            rmse,
            axis_rmse,
            eps_xy,
            rules,
            grow_events: count(StructuralEvent::Grow),
            prune_events: count(StructuralEvent::Prune),
            gain_resets: self.gain_resets,
            fault: self.fault.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub controller: ControllerKind,
    pub samples: usize,
    pub rmse: Option<f64>,
    pub axis_rmse: Option<[f64; 3]>,
    pub eps_xy: Option<Summary>,
    pub rules: [RuleCounts; 3],
    pub grow_events: usize,
    pub prune_events: usize,
    pub gain_resets: u64,
    pub fault: Option<String>,
}

/// All controller runs for one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub runs: Vec<ControllerRun>,
}

impl ScenarioRun {
    pub fn get(&self, kind: ControllerKind) -> Option<&ControllerRun> {
        self.runs.iter().find(|r| r.kind == kind)
    }

    pub fn rmse_start(&self) -> f64 {
        if self.scenario.output.skip_intercept_in_rmse {
            self.scenario.trajectory.shape_start()
        } else {
            0.0
        }
    }

    pub fn rmse(&self, kind: ControllerKind) -> Option<f64> {
        let start = self.rmse_start();
        self.get(kind)
            .and_then(|r| metrics::rmse(&r.trace.from_time(start)).ok())
    }

    pub fn report(&self) -> ScenarioReport {
        let start = self.rmse_start();
        ScenarioReport {
            scenario: self.scenario.name.clone(),
            rmse_from: start,
            runs: self.runs.iter().map(|r| r.summarize(start)).collect(),
            events: self
                .runs
                .iter()
                .filter(|r| r.kind == ControllerKind::Pac)
                .flat_map(|r| r.events.iter().cloned())
                .collect(),
        }
    }

    pub fn faulted(&self) -> bool {
        self.runs.iter().any(|r| r.fault.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub rmse_from: f64,
    pub runs: Vec<RunSummary>,
    pub events: Vec<EventRecord>,
}

impl ScenarioReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario);
        if self.rmse_from > 0.0 {
            let _ = writeln!(out, "rmse from t = {} s", self.rmse_from);
        }
        let _ = writeln!(
            out,
            "{:<6} {:>10} {:>10} {:>10} {:>10} {:>14} {:>14} {:>14}",
            "ctrl", "rmse", "eps_mean", "eps_med", "eps_max", "rules_x", "rules_y", "rules_z"
        );
        for run in &self.runs {
            let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
            let rules = |r: &RuleCounts| format!("{}/{}/{}", r.min, r.max, r.last);
            let _ = writeln!(
                out,
                "{:<6} {:>10} {:>10} {:>10} {:>10} {:>14} {:>14} {:>14}",
                run.controller.name(),
                num(run.rmse),
                num(run.eps_xy.map(|s| s.mean)),
                num(run.eps_xy.map(|s| s.median)),
                num(run.eps_xy.map(|s| s.max)),
                rules(&run.rules[0]),
                rules(&run.rules[1]),
                rules(&run.rules[2]),
            );
            if let Some(fault) = &run.fault {
                let _ = writeln!(out, "  fault: {fault}");
            }
        }
        let _ = writeln!(out, "structural events: {}", self.events.len());
        out
    }
}

/// Closed loop of one controller family against its own plant.
pub fn run_controller(scenario: &Scenario, kind: ControllerKind) -> Result<ControllerRun> {
    scenario.validate()?;
    let mut controllers = Controllers::new(kind, scenario)?;
    let mut plant = Plant::new(
        scenario.start,
        scenario.disturbance.clone(),
        scenario.inner_loop,
        scenario.dt,
    );
    let steps = scenario.steps();
    let mut trace = RunTrace {
        rows: Vec::with_capacity(steps),
    };
    let mut events = Vec::new();
    let mut fault = None;

    for k in 0..steps {
        let t = k as f64 * scenario.dt;
        let reference = scenario.trajectory.reference_unchecked(t);
        let position = plant.state.position;
        let samples = match controllers.step(reference, position) {
            Ok(s) => s,
            Err(e) => {
                fault = Some(e.to_string());
                break;
            }
        };

        let mut labels = Vec::new();
        for (i, s) in samples.iter().enumerate() {
            if let Some(event) = s.event {
                let axis = Axis::ALL[i];
                let tag = match event {
                    StructuralEvent::Grow => "grow",
                    StructuralEvent::Prune => "prune",
                };
                labels.push(format!("{tag}_{}", axis.name()));
                events.push(EventRecord {
                    t,
                    axis,
                    event,
                    rules_after: s.rules,
                });
            }
        }
        let command = samples.map(|s| s.command);
        trace.rows.push(TraceRow {
            t,
            reference,
            position,
            command,
            v_us: samples.map(|s| s.v_us),
            v_up: samples.map(|s| s.v_up),
            rules: samples.map(|s| s.rules),
            bias: samples.map(|s| s.bias),
            variance: samples.map(|s| s.variance),
            event: labels.join(";"),
        });

        if let Err(e) = plant.step(command) {
            fault = Some(e.to_string());
            break;
        }
    }

    Ok(ControllerRun {
        kind,
        trace,
        events,
        gain_resets: controllers.gain_resets(),
        fault,
    })
}

/// Runs every controller the scenario selects.
pub fn run(scenario: &Scenario) -> Result<ScenarioRun> {
    scenario.validate()?;
    let mut runs = Vec::new();
    if scenario.controller.includes_pid() {
        runs.push(run_controller(scenario, ControllerKind::Pid)?);
    }
    if scenario.controller.includes_pac() {
        runs.push(run_controller(scenario, ControllerKind::Pac)?);
    }
    Ok(ScenarioRun {
        scenario: scenario.clone(),
        runs,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `<name>_<ctrl>.csv` per controller plus `<name>_report.{txt,json}`.
/// Returns the paths written.
pub fn write_outputs(result: &ScenarioRun, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let name = &result.scenario.name;
    let mut written = Vec::new();
    for run in &result.runs {
        let path = dir.join(format!("{name}_{}.csv", run.kind.name()));
        write_file(&path, &run.trace.to_csv())?;
        written.push(path);
    }
    let report = result.report();
    let txt = dir.join(format!("{name}_report.txt"));
    write_file(&txt, &report.to_text())?;
    written.push(txt);
    let json = dir.join(format!("{name}_report.json"));
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&json, &body)?;
    written.push(json);
    Ok(written)
}

/// One cell of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareCell {
    pub scenario: String,
    pub controller: ControllerKind,
    pub rmse: Option<f64>,
    pub fault: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub cells: Vec<CompareCell>,
}

impl CompareReport {
    pub fn failed(&self) -> bool {
        self.cells
            .iter()
            .any(|c| c.fault.is_some() || c.rmse.is_none())
    }

    pub fn rmse(&self, scenario: &str, controller: ControllerKind) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario && c.controller == controller)
            .and_then(|c| c.rmse)
    }

    /// Aligned table: one row per scenario, one column per controller.
    pub fn to_text(&self) -> String {
        let mut names: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !names.contains(&c.scenario.as_str()) {
                names.push(&c.scenario);
            }
        }
        let width = names.iter().map(|n| n.len()).max().unwrap_or(8).max(8);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$} {:>10} {:>10}", "scenario", "PID", "PAC");
        for name in names {
            let cell = |kind| match self
                .cells
                .iter()
                .find(|c| c.scenario == name && c.controller == kind)
            {
                None => "-".to_string(),
                Some(CompareCell { fault: Some(_), .. }) => "FAULT".to_string(),
                Some(CompareCell { rmse: Some(v), .. }) => format!("{v:.4}"),
                Some(_) => "-".to_string(),
            };
            let _ = writeln!(
                out,
                "{:<width$} {:>10} {:>10}",
                name,
                cell(ControllerKind::Pid),
                cell(ControllerKind::Pac)
            );
        }
        out
    }
}

/// Runs several scenarios concurrently and tabulates RMSE per controller.
/// Scenario names must be unique.
pub fn compare(scenarios: &[Scenario]) -> Result<(CompareReport, Vec<ScenarioRun>)> {
    if scenarios.is_empty() {
        return Err(Error::InvalidConfig(
            "compare needs at least one scenario".into(),
        ));
    }
    let mut seen = HashSet::new();
    for s in scenarios {
        if !seen.insert(s.name.as_str()) {
            return Err(Error::InvalidConfig(format!(
                "duplicate scenario name `{}`",
                s.name
            )));
        }
        s.validate()?;
    }

    let results: Vec<Result<ScenarioRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || run(s)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    for result in &runs {
        for run in &result.runs {
            cells.push(CompareCell {
                scenario: result.scenario.name.clone(),
                controller: run.kind,
                rmse: result.rmse(run.kind),
                fault: run.fault.clone(),
            });
        }
    }
    Ok((CompareReport { cells }, runs))
}
