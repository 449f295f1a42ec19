//! One-parameter sweeps over a scenario, run in parallel.
//!
//! Each grid point gets its own copy of the scenario and its own simulation;
//! results are collected in grid order so the output does not depend on the
//! number of worker threads.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maneuver::{simulate, ManeuverSummary};
use crate::scenario::{is_numeric_key, ScenarioConfig, ScenarioDocument, ScenarioError, KNOWN_KEYS};

pub const SWEEP_HEADER: &str = "param_value,elapsed_s,ohmic_energy_J,residual_rate_rad_s,status";

/// `key=start:stop:count`, an inclusive linear grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|n| {
                if n + 1 == self.count {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * (n as f64 / last)
                }
            })
            .collect()
    }
}

impl FromStr for SweepSpec {
    type Err = ScenarioError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let bad = |message: &str| ScenarioError::Validation {
            key: "sweep".into(),
            message: format!("{message} in `{s}` (expected key=start:stop:count)"),
        };
        let (key, range) = s.split_once('=').ok_or_else(|| bad("missing `=`"))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(ScenarioError::UnknownKey(key.to_string()));
        }
        if !is_numeric_key(key) {
            return Err(ScenarioError::Validation {
                key: key.to_string(),
                message: "not a numeric key, cannot be swept".into(),
            });
        }
        let parts: Vec<&str> = range.split(':').map(str::trim).collect();
        let [start, stop, count] = parts[..] else {
            return Err(bad("expected three `:`-separated fields"));
        };
        let number = |v: &str| v.parse::<f64>().ok().filter(|x| x.is_finite());
        let start = number(start).ok_or_else(|| bad("bad start"))?;
        let stop = number(stop).ok_or_else(|| bad("bad stop"))?;
        let count = count
            .parse::<usize>()
            .ok()
            .filter(|c| *c >= 1)
            .ok_or_else(|| bad("count must be a positive integer"))?;
        Ok(Self {
            key: key.to_string(),
            start,
            stop,
            count,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// The run's summary, or the error that stopped it.
    pub outcome: std::result::Result<ManeuverSummary, String>,
}

fn run_point(document: &ScenarioDocument, key: &str, value: f64) -> Result<ManeuverSummary> {
    let mut doc = document.clone();
    doc.set(key, &value.to_string())?;
    let config = ScenarioConfig::from_document(&doc)?;
    Ok(simulate(&config)?.summary)
}

/// Runs every grid point on a pool of `jobs` threads (at least one).
pub fn run_sweep(document: &ScenarioDocument, spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    let grid = spec.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Scenario(ScenarioError::Validation {
            key: "jobs".into(),
            message: e.to_string(),
        }))?;
    let rows = pool.install(|| {
        grid.par_iter()
            .map(|&value| SweepRow {
                value,
                outcome: run_point(document, &spec.key, value).map_err(|e| e.to_string()),
            })
            .collect()
    });
    Ok(rows)
}

pub fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        match &row.outcome {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    row.value, s.elapsed, s.ohmic_energy, s.residual_rate, s.status
                );
            }
            Err(message) => {
                let message = message.replace([',', '\n', '\r'], ";");
                let _ = writeln!(out, "{},,,,error: {message}", row.value);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::PAPER_BASELINE;

    fn baseline() -> ScenarioDocument {
        ScenarioDocument::parse(PAPER_BASELINE).unwrap()
    }

    #[test]
    fn spec_parsing() {
        let spec: SweepSpec = "maneuver.current_A=0.5:4:8".parse().unwrap();
        assert_eq!(spec.key, "maneuver.current_A");
        assert_eq!(spec.grid(), vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]);
        assert_eq!("x.y=1:2:3".parse::<SweepSpec>().unwrap_err(), ScenarioError::UnknownKey("x.y".into()));
        let err = "field.model=1:2:3".parse::<SweepSpec>().unwrap_err();
        assert_eq!(err.key(), Some("field.model"));
        assert!("maneuver.current_A=1:2".parse::<SweepSpec>().is_err());
        assert!("maneuver.current_A=1:2:0".parse::<SweepSpec>().is_err());
    }

    #[test]
    fn elapsed_strictly_decreases_with_current() {
        let spec: SweepSpec = "maneuver.current_A=0.5:4:8".parse().unwrap();
        let rows = run_sweep(&baseline(), &spec, 4).unwrap();
        let times: Vec<f64> = rows.iter().map(|r| r.outcome.as_ref().unwrap().elapsed).collect();
        assert!(times.windows(2).all(|w| w[1] < w[0]), "{times:?}");
    }

    #[test]
    fn output_is_independent_of_jobs() {
        let spec: SweepSpec = "maneuver.current_A=0.5:4:8".parse().unwrap();
        let one = render_sweep_csv(&run_sweep(&baseline(), &spec, 1).unwrap());
        let eight = render_sweep_csv(&run_sweep(&baseline(), &spec, 8).unwrap());
        assert_eq!(one, eight);
    }

    #[test]
    fn single_point_matches_simulation() {
        let spec: SweepSpec = "maneuver.current_A=1:1:1".parse().unwrap();
        let rows = run_sweep(&baseline(), &spec, 2).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = simulate(&ScenarioConfig::paper_baseline()).unwrap().summary;
        assert_eq!(rows[0].outcome.as_ref().unwrap(), &direct);
    }

    #[test]
    fn failed_points_become_error_rows() {
        let spec: SweepSpec = "balloon.mass_kg=-1:50:2".parse().unwrap();
        let rows = run_sweep(&baseline(), &spec, 2).unwrap();
        assert!(rows[0].outcome.is_err());
        assert!(rows[1].outcome.is_ok());
        let csv = render_sweep_csv(&rows);
        let widths: Vec<usize> = csv.lines().map(|l| l.split(',').count()).collect();
        assert!(widths.iter().all(|w| *w == 5), "{csv}");
        assert!(csv.lines().nth(1).unwrap().contains(",,,,error: "));
    }
}
