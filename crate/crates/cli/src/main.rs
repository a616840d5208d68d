use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pac_core::harness::{self, ScenarioRun};
use pac_core::scenario::{self, ControllerSelection, Scenario};
use pac_core::Error;

/// Run PAC and PID velocity controllers against a simulated multirotor.
#[derive(Parser)]
#[command(name = "pac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RunFlags {
    /// Directory for CSV traces and reports (default: the scenario's, else `out`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Exclude the straight-line intercept from the RMSE.
    #[arg(long)]
    skip_intercept_in_rmse: bool,
    /// Controllers to run: pac, pid or both.
    #[arg(long)]
    controller: Option<ControllerSelection>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (file path or preset name).
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run several scenarios (file paths or preset names) and tabulate RMSE per controller.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Built-in scenarios.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Parse and validate a scenario (file path or preset name) without running it.
    Validate { config: PathBuf },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List preset names.
    List,
    /// Print a preset as a scenario file.
    Show { name: String },
}

fn load(path: &Path, flags: &RunFlags) -> Result<Scenario, Error> {
    let mut s = scenario::load_scenario(path)?;
    if flags.skip_intercept_in_rmse {
        s.output.skip_intercept_in_rmse = true;
    }
    if let Some(c) = flags.controller {
        s.controller = c;
    }
    Ok(s)
}

fn out_dir(flags: &RunFlags, s: &Scenario) -> PathBuf {
    flags
        .out_dir
        .clone()
        .or_else(|| s.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn write(result: &ScenarioRun, dir: &Path) -> Result<(), Error> {
    for path in harness::write_outputs(result, dir)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run { config, flags } => {
            let s = load(&config, &flags)?;
            let result = harness::run(&s)?;
            write(&result, &out_dir(&flags, &s))?;
            print!("{}", result.report().to_text());
            Ok(if result.faulted() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Compare { configs, flags } => {
            let scenarios = configs
                .iter()
                .map(|p| load(p, &flags))
                .collect::<Result<Vec<_>, _>>()?;
            let (report, runs) = harness::compare(&scenarios)?;
            for (s, result) in scenarios.iter().zip(&runs) {
                write(result, &out_dir(&flags, s))?;
            }
            let dir = out_dir(&flags, &scenarios[0]);
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            let path = dir.join("compare_report.json");
            std::fs::write(&path, json).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            let text = report.to_text();
            let path = dir.join("compare_report.txt");
            std::fs::write(&path, &text).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            print!("{text}");
            Ok(if report.failed() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Presets { action } => {
            match action {
                PresetAction::List => {
                    for name in scenario::PRESET_NAMES {
                        println!("{name}");
                    }
                }
                PresetAction::Show { name } => {
                    let s = scenario::preset(&name)
                        .ok_or_else(|| Error::InvalidConfig(format!("unknown preset `{name}`")))?;
                    print!("{}", s.to_toml());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let s = scenario::load_scenario(&config)?;
            println!("{}: ok ({} steps)", s.name, s.steps());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
