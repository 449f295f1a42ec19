//! Acceptance gate: one PASS/FAIL line per criterion, with every tolerance
//! pinned below. Runs without the libtest harness so the lines always print.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use magsteer::attitude::{final_slew_rate, small_angle_slew_time, small_angle_theta, CoilSet, PendulumParams};
use magsteer::coilbudget::{
    coil_resistance, kinetic_energy_point_mass, min_internal_pressure, ohmic_power, uniform_slew_kinematics,
};
use magsteer::geomag::{dipole_field, DipoleFieldSpec, EARTH_RADIUS};
use magsteer::maneuver::{field_ratio_perigee_apogee, simulate};
use magsteer::orbit::EllipticalOrbitSpec;
use magsteer::paper_check::{
    decompose_round_trip_error, momentum_along_field_drift, pendulum_energy_drift, rk4_convergence_order,
    scalar_rigid_deviation,
};
use magsteer::scenario::ScenarioConfig;
use nalgebra::Vector3;

// Criterion 1
const SLEW_30_RANGE_S: (f64, f64) = (1050.0, 1150.0);
const EIGHTEEN_MINUTES_S: f64 = 1080.0;
const EIGHTEEN_MINUTES_TOL: f64 = 0.03;
// Criterion 2
const COEFFICIENT: f64 = 4.3e-7;
const COEFFICIENT_TOL: f64 = 0.05e-7;
// Criterion 3
const FIGURE4_BOUND_S: f64 = 2500.0;
/// Adaptive quadrature of the energy integral for 90 -> 40 degrees.
const FIGURE4_QUADRATURE_S: f64 = 1439.976367634235;
const FIGURE4_ORACLE_TOL: f64 = 0.01;
const FIGURE4_DT_TOL: f64 = 0.001;
// Criterion 4
const FINAL_RATE: f64 = 9.5e-4;
const FINAL_RATE_TOL: f64 = 0.01;
// Criterion 5
const RESISTANCE_OHM: f64 = 1.645;
const POWER_W: f64 = 1.645;
const WIRE_TOL: f64 = 0.005;
// Criterion 6
const UNIFORM_RATE: f64 = 1.745e-3;
const UNIFORM_RATE_TOL: f64 = 0.005;
const RIM_SPEED_CM_S: f64 = 2.55;
const RIM_SPEED_TOL: f64 = 0.01;
const KINETIC_J: f64 = 0.0163;
const KINETIC_TOL: f64 = 0.01;
// Criterion 7
const PRESSURE_PA: f64 = 1.83e-6;
const PRESSURE_TOL: f64 = 0.02;
// Criterion 8
const DIPOLE_T: f64 = 1.375e-5;
const DIPOLE_TOL: f64 = 0.01;
const DOUBLED_RATIO_TOL: f64 = 1e-12;
// Criterion 9
const ENERGY_DRIFT_MAX: f64 = 1e-6;
const MOMENTUM_DRIFT_MAX: f64 = 1e-9;
const RK4_ORDER_MIN: f64 = 3.9;
const RIGID_SCALAR_MAX_RAD: f64 = 1e-6;
const ROUND_TRIP_MAX: f64 = 1e-12;
// Criterion 10
const FIELD_RATIO: f64 = 67.8;
const FIELD_RATIO_TOL: f64 = 0.01;

struct Gate {
    failed: Vec<u8>,
}

impl Gate {
    fn report(&mut self, criterion: u8, parts: &[(String, bool)]) {
        let pass = parts.iter().all(|(_, ok)| *ok);
        let detail: Vec<String> = parts
            .iter()
            .map(|(text, ok)| if *ok { text.clone() } else { format!("{text} [FAIL]") })
            .collect();
        println!(
            "criterion {criterion:>2}: {}  {}",
            if pass { "PASS" } else { "FAIL" },
            detail.join("; ")
        );
        if !pass {
            self.failed.push(criterion);
        }
    }
}

fn rel(label: &str, expected: f64, computed: f64, tol: f64) -> (String, bool) {
    let err = ((computed - expected) / expected).abs();
    (format!("{label} {computed:.6e} vs {expected:e} (rel err {err:.3e}, tol {tol:e})"), err <= tol)
}

fn below(label: &str, computed: f64, limit: f64) -> (String, bool) {
    (format!("{label} {computed:.3e} < {limit:e}"), computed < limit)
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_magsteer")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(bin()).args(args).output().expect("run magsteer");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_default()
}

fn main() -> ExitCode {
    let mut gate = Gate { failed: Vec::new() };
    let params = PendulumParams {
        current: 1.0,
        area: PI * 15.0 * 15.0,
        field_magnitude: 1.375e-5,
        inertia: 11250.0,
    };
    let thirty = 30f64.to_radians();
    let baseline = ScenarioConfig::paper_baseline();

    let t30 = small_angle_slew_time(thirty, &params).unwrap();
    gate.report(
        1,
        &[
            (
                format!("t(30deg) {t30:.4} s in [{}, {}]", SLEW_30_RANGE_S.0, SLEW_30_RANGE_S.1),
                (SLEW_30_RANGE_S.0..=SLEW_30_RANGE_S.1).contains(&t30),
            ),
            rel("vs 18 min", EIGHTEEN_MINUTES_S, t30, EIGHTEEN_MINUTES_TOL),
        ],
    );

    let probe = 600.0;
    let coefficient = small_angle_theta(probe, &params) / (probe * probe);
    gate.report(
        2,
        &[(
            format!("theta/t^2 {coefficient:.6e} within {COEFFICIENT:e} +- {COEFFICIENT_TOL:e}"),
            (coefficient - COEFFICIENT).abs() <= COEFFICIENT_TOL,
        )],
    );

    let figure4 = simulate(&baseline).unwrap().summary;
    let mut fine_cfg = baseline.clone();
    fine_cfg.sim.dt_s = 0.01;
    let fine = simulate(&fine_cfg).unwrap().summary;
    gate.report(
        3,
        &[
            below("elapsed", figure4.elapsed, FIGURE4_BOUND_S),
            rel("vs quadrature", FIGURE4_QUADRATURE_S, figure4.elapsed, FIGURE4_ORACLE_TOL),
            rel("dt 0.1 vs 0.01", fine.elapsed, figure4.elapsed, FIGURE4_DT_TOL),
        ],
    );

    gate.report(
        4,
        &[rel("final rate", FINAL_RATE, final_slew_rate(thirty, &params).unwrap(), FINAL_RATE_TOL)],
    );

    let resistance = coil_resistance(&baseline.wire());
    gate.report(
        5,
        &[
            rel("R", RESISTANCE_OHM, resistance, WIRE_TOL),
            rel("P(1 A)", POWER_W, ohmic_power(resistance, 1.0), WIRE_TOL),
        ],
    );

    let kin = uniform_slew_kinematics(thirty, 600.0, 15.0);
    gate.report(
        6,
        &[
            rel("omega", UNIFORM_RATE, kin.omega_final, UNIFORM_RATE_TOL),
            rel("rim cm/s", RIM_SPEED_CM_S, kin.rim_speed * 100.0, RIM_SPEED_TOL),
            rel("Ek", KINETIC_J, kinetic_energy_point_mass(50.0, kin.rim_speed), KINETIC_TOL),
        ],
    );

    gate.report(
        7,
        &[rel("2iB/R", PRESSURE_PA, min_internal_pressure(1.0, 1.375e-5, 15.0, 1.0), PRESSURE_TOL)],
    );

    let dipole = DipoleFieldSpec::default();
    let r = EARTH_RADIUS + 2.0e6;
    let near = dipole_field(&dipole, &Vector3::new(r, 0.0, 0.0)).unwrap().magnitude;
    let far = dipole_field(&dipole, &Vector3::new(2.0 * r, 0.0, 0.0)).unwrap().magnitude;
    gate.report(
        8,
        &[
            rel("|B| 2000 km", DIPOLE_T, near, DIPOLE_TOL),
            rel("doubled radius", 0.125, far / near, DOUBLED_RATIO_TOL),
        ],
    );

    let coils = CoilSet::great_circles(15.0, 3, 1).unwrap();
    gate.report(
        9,
        &[
            below("energy drift", pendulum_energy_drift(&params, FRAC_PI_2, 2500.0, 0.1).unwrap(), ENERGY_DRIFT_MAX),
            below("L.B drift", momentum_along_field_drift(&baseline, 10_000, 0.1).unwrap(), MOMENTUM_DRIFT_MAX),
            {
                let order = rk4_convergence_order(&params, FRAC_PI_2).unwrap();
                (format!("RK4 order {order:.3} >= {RK4_ORDER_MIN}"), order >= RK4_ORDER_MIN)
            },
            below("3-D vs scalar rad", scalar_rigid_deviation(&baseline, 2500.0, 0.1).unwrap(), RIGID_SCALAR_MAX_RAD),
            below("round trip", decompose_round_trip_error(&coils).unwrap(), ROUND_TRIP_MAX),
        ],
    );

    let ellipse = EllipticalOrbitSpec::new(EARTH_RADIUS + 5.0e6, EARTH_RADIUS + 40.0e6).unwrap();
    gate.report(
        10,
        &[rel("perigee/apogee", FIELD_RATIO, field_ratio_perigee_apogee(&ellipse, &dipole).unwrap(), FIELD_RATIO_TOL)],
    );

    // The discrepancy rows are informational: present, marked INFO, and not
    // among the failures listed by the report.
    let (_, report) = run_cli(&["paper-check", "--out", scratch("paper").to_str().unwrap()]);
    let info_rows: Vec<&str> = report
        .lines()
        .filter(|l| l.trim_start().starts_with("11 ") && l.trim_end().ends_with("INFO"))
        .collect();
    let expected_info = ["slew_kinetic_energy_j", "slew_average_power_w", "wire_mass_3_rings_kg"];
    gate.report(
        11,
        &[
            (
                format!("{} INFO rows", info_rows.len()),
                expected_info.iter().all(|n| info_rows.iter().any(|l| l.contains(n))),
            ),
            (
                "no INFO row among failures".into(),
                !report
                    .lines()
                    .filter(|l| l.starts_with("failed:"))
                    .any(|l| expected_info.iter().any(|n| l.contains(n))),
            ),
        ],
    );

    let a = scratch("sim_a");
    let b = scratch("sim_b");
    let (code_a, _) = run_cli(&["simulate", "--out", a.to_str().unwrap()]);
    let (code_b, _) = run_cli(&["simulate", "--out", b.to_str().unwrap()]);
    let sim_same = code_a == 0
        && code_b == 0
        && !read(&a.join("timeseries.csv")).is_empty()
        && read(&a.join("timeseries.csv")) == read(&b.join("timeseries.csv"))
        && read(&a.join("summary.txt")) == read(&b.join("summary.txt"));
    let sweep = |name: &str, jobs: &str| {
        let dir = scratch(name);
        run_cli(&[
            "sweep",
            "--param",
            "maneuver.current_A=0.5:4:8",
            "--jobs",
            jobs,
            "--out",
            dir.to_str().unwrap(),
        ]);
        read(&dir.join("sweep.csv"))
    };
    let s8a = sweep("sweep_8a", "8");
    let s8b = sweep("sweep_8b", "8");
    let s1 = sweep("sweep_1", "1");
    gate.report(
        12,
        &[
            ("simulate x2 byte-identical".into(), sim_same),
            (
                "sweep --jobs 8 x2 and --jobs 1 byte-identical".into(),
                !s8a.is_empty() && s8a == s8b && s8a == s1,
            ),
        ],
    );

    if gate.failed.is_empty() {
        println!("acceptance: all criteria PASS");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED criteria {:?}", gate.failed);
        ExitCode::FAILURE
    }
}
