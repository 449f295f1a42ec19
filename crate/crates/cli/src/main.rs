//! `magsteer`: run slew scenarios, coil budgets, parameter sweeps and the
//! reproduction table from the command line.
//!
//! Exit status: 0 on success, 1 when a run or check fails, 2 on bad input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use magsteer::coilbudget::budget_report;
use magsteer::maneuver::simulate;
use magsteer::paper_check::paper_check;
use magsteer::scenario::{ScenarioConfig, ScenarioDocument, PAPER_BASELINE};
use magsteer::sweep::{render_sweep_csv, run_sweep, SweepSpec};
use magsteer::telemetry::{render_budget, render_summary, write_timeseries};

#[derive(Debug, Parser)]
#[command(name = "magsteer", version, about = "Magnetic attitude steering of inflatable antennas")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Output directory
    #[arg(long, global = true, default_value = "magsteer-out")]
    out: PathBuf,
    /// Override a scenario value, e.g. `--set maneuver.current_A=4`
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Integration step (s), same as `--set sim.dt_s=...`
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Integration limit (s), same as `--set sim.max_time_s=...`
    #[arg(long, global = true)]
    max_time: Option<f64>,
    /// Worker threads for `sweep`
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a maneuver; writes timeseries.csv and summary.txt
    Simulate {
        /// Scenario file (built-in baseline when omitted)
        scenario: Option<PathBuf>,
    },
    /// Coil resistance, power, mass, pressure and skin-depth budget
    Budget { scenario: Option<PathBuf> },
    /// One simulation per grid point; writes sweep.csv
    Sweep {
        scenario: Option<PathBuf>,
        /// `key=start:stop:count`
        #[arg(long)]
        param: String,
    },
    /// Reproduce the reference numbers of the single-ring model
    PaperCheck { scenario: Option<PathBuf> },
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Input(String),
    Check,
}

impl From<magsteer::Error> for Failure {
    fn from(e: magsteer::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<magsteer::scenario::ScenarioError> for Failure {
    fn from(e: magsteer::scenario::ScenarioError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn load_document(path: Option<&Path>, global: &GlobalOpts) -> Result<ScenarioDocument, Failure> {
    let mut doc = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            ScenarioDocument::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?
        }
        None => ScenarioDocument::parse(PAPER_BASELINE)?,
    };
    for o in &global.overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("--set expects KEY=VALUE, got `{o}`")))?;
        doc.set(key.trim(), value)?;
    }
    if let Some(dt) = global.dt {
        doc.set("sim.dt_s", &dt.to_string())?;
    }
    if let Some(t) = global.max_time {
        doc.set("sim.max_time_s", &t.to_string())?;
    }
    Ok(doc)
}

fn load_config(path: Option<&Path>, global: &GlobalOpts) -> Result<ScenarioConfig, Failure> {
    Ok(ScenarioConfig::from_document(&load_document(path, global)?)?)
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate { scenario } => {
            let config = load_config(scenario.as_deref(), g)?;
            let run = simulate(&config)?;
            let summary = render_summary(&run.summary);
            write_output(&g.out, "timeseries.csv", &write_timeseries(&run.records)?)?;
            write_output(&g.out, "summary.txt", &summary)?;
            print!("{summary}");
            if !run.summary.pass {
                return Err(Failure::Check);
            }
        }
        Command::Budget { scenario } => {
            let report = budget_report(&load_config(scenario.as_deref(), g)?)?;
            print!("{}", render_budget(&report));
            if !report.all_pass() {
                return Err(Failure::Check);
            }
        }
        Command::Sweep { scenario, param } => {
            let doc = load_document(scenario.as_deref(), g)?;
            // Validate the base scenario before fanning out.
            ScenarioConfig::from_document(&doc)?;
            let spec: SweepSpec = param.parse()?;
            let rows = run_sweep(&doc, &spec, g.jobs as usize)?;
            let csv = render_sweep_csv(&rows);
            write_output(&g.out, "sweep.csv", &csv)?;
            print!("{csv}");
            if rows.iter().any(|r| r.outcome.is_err()) {
                return Err(Failure::Check);
            }
        }
        Command::PaperCheck { scenario } => {
            let report = paper_check(&load_config(scenario.as_deref(), g)?)?;
            print!("{}", report.render());
            if !report.all_pass() {
                return Err(Failure::Check);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("magsteer").chain(args.iter().copied())).unwrap()
    }

    fn scratch(name: &str) -> String {
        let dir = std::env::temp_dir().join(format!("magsteer-cli-{}-{name}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir.to_string_lossy().into_owned()
    }

    fn elapsed(dir: &str) -> f64 {
        let summary = fs::read_to_string(Path::new(dir).join("summary.txt")).unwrap();
        summary
            .lines()
            .find_map(|l| l.strip_prefix("elapsed_s: "))
            .unwrap()
            .parse()
            .unwrap()
    }

    #[test]
    fn quadrupled_current_halves_elapsed() {
        let base = scratch("base");
        let fast = scratch("fast");
        assert!(run(&cli(&["simulate", "--out", &base])).is_ok());
        assert!(run(&cli(&["simulate", "--out", &fast, "--set", "maneuver.current_A=4"])).is_ok());
        let ratio = elapsed(&fast) / elapsed(&base);
        assert!((ratio - 0.5).abs() < 1e-6, "{ratio}");
        let csv = fs::read_to_string(Path::new(&base).join("timeseries.csv")).unwrap();
        let last: f64 = csv.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert!((last - 40f64.to_radians()).abs() < 1e-8);
    }

    #[test]
    fn input_errors_are_reported_as_such() {
        for args in [
            vec!["simulate", "/nonexistent/scenario.scn"],
            vec!["simulate", "--set", "maneuver.colour=red"],
            vec!["simulate", "--set", "no-equals-sign"],
            vec!["simulate", "--set", "balloon.mass_kg=-3"],
            vec!["sweep", "--param", "field.model=1:2:3"],
        ] {
            assert!(matches!(run(&cli(&args)), Err(Failure::Input(_))), "{args:?}");
        }
    }

    #[test]
    fn global_flags_follow_the_subcommand() {
        let c = cli(&["sweep", "--param", "maneuver.current_A=1:2:2", "--jobs", "3", "--dt", "0.05"]);
        assert_eq!(c.global.jobs, 3);
        assert_eq!(c.global.dt, Some(0.05));
        assert!(Cli::try_parse_from(["magsteer", "sweep", "--param", "x=1:2:2", "--jobs", "0"]).is_err());
    }

    #[test]
    fn stalled_run_is_a_check_failure() {
        let out = scratch("stalled");
        let args = ["simulate", "--out", &out, "--set", "maneuver.current_A=0", "--max-time", "100"];
        assert!(matches!(run(&cli(&args)), Err(Failure::Check)));
        assert!(fs::read_to_string(Path::new(&out).join("summary.txt"))
            .unwrap()
            .contains("status: max_time_exceeded"));
    }
}
