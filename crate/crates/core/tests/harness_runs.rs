use pac_core::harness::{self, compare, run, write_outputs, ControllerKind};
use pac_core::metrics::{self, CSV_HEADER};
use pac_core::scenario::{preset, ControllerSelection, Scenario};
use pac_core::trajectory::{Shape, TrajectorySpec};

fn shortened(name: &str, duration: f64) -> Scenario {
    let mut s = preset(name).unwrap();
    s.duration = duration;
    s.trajectory.duration = duration;
    s
}

fn hold(duration: f64) -> Scenario {
    let mut s = preset("sim_circle_low_wind").unwrap();
    s.name = "hold".into();
    s.trajectory = TrajectorySpec::new(Shape::Hold { point: [0.0; 3] }, duration);
    s.disturbance = Default::default();
    s.start = [0.0; 3];
    s.duration = duration;
    s
}

#[test]
fn hold_at_rest_has_zero_error_and_one_rule() {
    let result = run(&hold(10.0)).unwrap();
    for r in &result.runs {
        assert_eq!(metrics::rmse(&r.trace).unwrap(), 0.0);
        assert!(r.trace.rows.iter().all(|row| row.command == [0.0; 3]));
    }
    let pac = result.get(ControllerKind::Pac).unwrap();
    assert!(pac.trace.rows.iter().all(|row| row.rules == [1, 1, 1]));
    assert!(pac.events.is_empty());
}

#[test]
fn trace_has_one_row_per_step() {
    let result = run(&hold(0.1)).unwrap();
    for r in &result.runs {
        assert_eq!(r.trace.len(), 10);
        assert_eq!(r.trace.to_csv().lines().count(), 11);
    }
    let s = shortened("exp_circle", 3.0);
    for r in &run(&s).unwrap().runs {
        assert_eq!(r.trace.len(), 300);
        let ts: Vec<f64> = r.trace.rows.iter().map(|row| row.t).collect();
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn identical_scenarios_give_identical_csv_bytes() {
    let s = shortened("exp_eight_wind", 15.0);
    let a = run(&s).unwrap();
    let b = run(&s).unwrap();
    for (x, y) in a.runs.iter().zip(&b.runs) {
        assert_eq!(x.trace.to_csv(), y.trace.to_csv());
    }
}

#[test]
fn pac_without_learning_reduces_to_pid() {
    // A vanishing gain matrix freezes the network at zero output.
    let mut s = shortened("sim_circle_med_wind", 30.0);
    s.pac.initial_gain = 1e-12;
    let result = run(&s).unwrap();
    let pid = &result.get(ControllerKind::Pid).unwrap().trace;
    let pac = &result.get(ControllerKind::Pac).unwrap().trace;
    let mut worst: f64 = 0.0;
    for (a, b) in pid.rows.iter().zip(&pac.rows) {
        for i in 0..3 {
            worst = worst.max((a.position[i] - b.position[i]).abs());
        }
    }
    assert!(worst < 1e-6, "max position gap {worst}");
}

#[test]
fn first_row_matches_the_preset_start() {
    let s = preset("sim_circle_high_wind").unwrap();
    let short = shortened("sim_circle_high_wind", 1.0);
    let result = run(&short).unwrap();
    for r in &result.runs {
        let row = &r.trace.rows[0];
        assert_eq!(row.t, 0.0);
        assert_eq!(row.position, s.start);
        assert_eq!(row.reference, [6.0, 0.0, 0.0]);
    }
}

#[test]
fn outputs_are_written_with_the_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let s = shortened("exp_circle", 2.0);
    let result = run(&s).unwrap();
    let paths = write_outputs(&result, dir.path()).unwrap();
    let names: Vec<String> = paths
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "exp_circle_pid.csv",
            "exp_circle_pac.csv",
            "exp_circle_report.txt",
            "exp_circle_report.json"
        ]
    );
    let csv = std::fs::read_to_string(dir.path().join("exp_circle_pac.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    let json = std::fs::read_to_string(dir.path().join("exp_circle_report.json")).unwrap();
    let report: harness::ScenarioReport = serde_json::from_str(&json).unwrap();
    assert_eq!(report.runs.len(), 2);
    assert_eq!(report, result.report());
}

#[test]
fn diverging_run_keeps_a_partial_trace_and_reports_the_fault() {
    // A small initial gain destabilizes the altitude loop on this preset.
    let mut s = preset("exp_altitude_proximity").unwrap();
    s.pac.initial_gain = 10.0;
    let result = run(&s).unwrap();
    assert!(result.faulted());
    let pac = result.get(ControllerKind::Pac).unwrap();
    assert!(pac.fault.as_deref().unwrap().contains("axis z"));
    assert!(!pac.trace.is_empty() && pac.trace.len() < s.steps());
    let pid = result.get(ControllerKind::Pid).unwrap();
    assert!(pid.fault.is_none());
    assert_eq!(pid.trace.len(), s.steps());
    let report = result.report();
    assert!(report.runs.iter().any(|r| r.fault.is_some()));
}

#[test]
fn compare_tabulates_three_wind_levels() {
    let scenarios: Vec<Scenario> = [
        "sim_circle_low_wind",
        "sim_circle_med_wind",
        "sim_circle_high_wind",
    ]
    .iter()
    .map(|n| shortened(n, 20.0))
    .collect();
    let (report, runs) = compare(&scenarios).unwrap();
    assert_eq!(report.cells.len(), 6);
    assert_eq!(runs.len(), 3);
    assert!(!report.failed());
    for s in &scenarios {
        for kind in [ControllerKind::Pid, ControllerKind::Pac] {
            let sequential = run(s).unwrap().rmse(kind).unwrap();
            assert_eq!(report.rmse(&s.name, kind), Some(sequential));
        }
    }
    let text = report.to_text();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn controller_selection_limits_the_runs() {
    let mut s = hold(1.0);
    s.controller = ControllerSelection::Pac;
    let result = run(&s).unwrap();
    assert_eq!(result.runs.len(), 1);
    assert_eq!(result.runs[0].kind, ControllerKind::Pac);
    let (report, _) = compare(&[s]).unwrap();
    assert_eq!(report.cells.len(), 1);
}

#[test]
fn intercept_can_be_left_out_of_the_rmse() {
    let mut s = shortened("exp_circle", 20.0);
    let full = run(&s).unwrap().rmse(ControllerKind::Pid).unwrap();
    s.output.skip_intercept_in_rmse = true;
    let result = run(&s).unwrap();
    assert_eq!(result.rmse_start(), 10.0);
    let trimmed = result.rmse(ControllerKind::Pid).unwrap();
    assert_ne!(full, trimmed);
    let pid = &result.get(ControllerKind::Pid).unwrap().trace;
    assert_eq!(trimmed, metrics::rmse(&pid.from_time(10.0)).unwrap());
}
