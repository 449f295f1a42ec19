//! Reproduction table for the headline numbers of the single-ring model.
//!
//! Every row is computed from the supplied scenario, so perturbing the
//! scenario (say, doubling the mass) moves the computed values and can flip
//! rows to FAIL. INFO rows report figures that are printed for comparison
//! only and never fail the table.

use std::f64::consts::FRAC_PI_2;
use std::fmt::{self, Write as _};

use nalgebra::{SVector, UnitQuaternion, Vector3};

use crate::attitude::{
    body_rhs_3d, final_slew_rate, pendulum_rhs, small_angle_slew_time, small_angle_theta, AttitudeState3D,
    CoilSet, PendulumParams, ScalarAttitudeState,
};
use crate::coilbudget::{
    average_power, coil_resistance, kinetic_energy_point_mass, min_internal_pressure, ohmic_power,
    uniform_slew_kinematics, wire_mass, WireSpec, GOLD_DENSITY,
};
use crate::error::Result;
use crate::geomag::{dipole_field, DipoleFieldSpec, FieldSample, EARTH_RADIUS};
use crate::maneuver::{field_ratio_perigee_apogee, simulate, ManeuverRun};
use crate::odesolve::{integrate, rk4_step, IntegrationSettings, OdeSystem};
use crate::orbit::EllipticalOrbitSpec;
use crate::scenario::{ManeuverKind, Mode, ScenarioConfig, ScenarioDocument, TorqueModel};
use crate::sweep::{render_sweep_csv, run_sweep, SweepSpec};
use crate::telemetry::{render_summary, write_timeseries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    /// Row number in the reproduction table.
    pub criterion: u8,
    pub name: &'static str,
    pub expected: String,
    pub computed: String,
    pub tolerance: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PaperCheckReport {
    pub rows: Vec<CheckRow>,
}

impl PaperCheckReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>2}  {:<28} {:<28} {:<30} {:<14} result",
            "#", "check", "expected", "computed", "tolerance"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>2}  {:<28} {:<28} {:<30} {:<14} {}",
                r.criterion, r.name, r.expected, r.computed, r.tolerance, r.verdict
            );
        }
        let count = |v| self.rows.iter().filter(|r| r.verdict == v).count();
        let _ = writeln!(
            out,
            "\n{} PASS, {} FAIL, {} INFO",
            count(Verdict::Pass),
            count(Verdict::Fail),
            count(Verdict::Info)
        );
        for r in self.failures() {
            let _ = writeln!(out, "failed: {} {}", r.criterion, r.name);
        }
        out
    }
}

fn num(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-2 || x.abs() >= 1e5) {
        format!("{x:.6e}")
    } else {
        format!("{x:.6}")
    }
}

fn verdict(pass: bool) -> Verdict {
    if pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn relative(criterion: u8, name: &'static str, expected: f64, computed: f64, tol: f64) -> CheckRow {
    CheckRow {
        criterion,
        name,
        expected: num(expected),
        computed: num(computed),
        tolerance: if tol >= 1e-4 {
            format!("±{}%", tol * 100.0)
        } else {
            format!("±{tol:e} rel")
        },
        verdict: verdict(((computed - expected) / expected).abs() <= tol),
    }
}

fn within(criterion: u8, name: &'static str, lo: f64, hi: f64, computed: f64) -> CheckRow {
    CheckRow {
        criterion,
        name,
        expected: format!("[{}, {}]", num(lo), num(hi)),
        computed: num(computed),
        tolerance: "range".into(),
        verdict: verdict((lo..=hi).contains(&computed)),
    }
}

fn below(criterion: u8, name: &'static str, limit: f64, computed: f64) -> CheckRow {
    CheckRow {
        criterion,
        name,
        expected: format!("< {}", num(limit)),
        computed: num(computed),
        tolerance: "bound".into(),
        verdict: verdict(computed < limit),
    }
}

fn at_least(criterion: u8, name: &'static str, limit: f64, computed: f64) -> CheckRow {
    CheckRow {
        criterion,
        name,
        expected: format!(">= {}", num(limit)),
        computed: num(computed),
        tolerance: "bound".into(),
        verdict: verdict(computed >= limit),
    }
}

fn info(criterion: u8, name: &'static str, paper: &str, computed: String) -> CheckRow {
    CheckRow {
        criterion,
        name,
        expected: paper.into(),
        computed,
        tolerance: "-".into(),
        verdict: Verdict::Info,
    }
}

/// Time for the pendulum `theta'' = -k sin(theta)` to swing from rest at
/// `theta_start` to `theta_end < theta_start`, from energy conservation:
/// `t = integral dtheta / sqrt(2k (cos theta - cos theta_start))`.
///
/// The endpoint singularity is removed with `theta = theta_start - u^2`
/// and the smooth integrand is summed with composite Simpson.
pub fn pendulum_quadrature_time(theta_start: f64, theta_end: f64, k: f64) -> f64 {
    const INTERVALS: usize = 4000;
    let u_max = (theta_start - theta_end).sqrt();
    let integrand = |u: f64| {
        if u == 0.0 {
            return 2.0 / (2.0 * k * theta_start.sin()).sqrt();
        }
        let v = u * u;
        // cos(a - v) - cos(a) without cancellation
        let gap = 2.0 * (theta_start - 0.5 * v).sin() * (0.5 * v).sin();
        2.0 * u / (2.0 * k * gap).sqrt()
    };
    let h = u_max / INTERVALS as f64;
    let inner: f64 = (1..INTERVALS)
        .map(|n| {
            let w = if n % 2 == 1 { 4.0 } else { 2.0 };
            w * integrand(n as f64 * h)
        })
        .sum();
    h / 3.0 * (integrand(0.0) + inner + integrand(u_max))
}

struct Pendulum(PendulumParams);

impl OdeSystem<2> for Pendulum {
    fn derivative(&mut self, t: f64, y: &SVector<f64, 2>) -> SVector<f64, 2> {
        let (a, b) = pendulum_rhs(
            &ScalarAttitudeState {
                theta: y[0],
                theta_dot: y[1],
                time: t,
            },
            &self.0,
        );
        SVector::<f64, 2>::new(a, b)
    }
}

/// Largest `|E(t) - E(0)|` over a free swing from rest at `theta0`,
/// relative to `i A B`.
pub fn pendulum_energy_drift(params: &PendulumParams, theta0: f64, duration: f64, dt: f64) -> Result<f64> {
    let settings = IntegrationSettings {
        dt,
        max_time: duration,
        ..Default::default()
    };
    let trajectory = integrate(&mut Pendulum(*params), SVector::<f64, 2>::new(theta0, 0.0), 0.0, |_, _| -1.0, &settings)?;
    let energy = |y: &SVector<f64, 2>| {
        params.energy(&ScalarAttitudeState {
            theta: y[0],
            theta_dot: y[1],
            time: 0.0,
        })
    };
    let e0 = energy(&trajectory.samples[0].y);
    let scale = (params.current * params.area * params.field_magnitude).abs();
    Ok(trajectory
        .samples
        .iter()
        .map(|s| (energy(&s.y) - e0).abs() / scale)
        .fold(0.0, f64::max))
}

/// Observed convergence order of the integrator on the pendulum, from the
/// errors at steps `h` and `h/2` against a much finer reference.
pub fn rk4_convergence_order(params: &PendulumParams, theta0: f64) -> Result<f64> {
    const SPAN: f64 = 2000.0;
    let run = |h: f64| -> Result<f64> {
        let mut system = Pendulum(*params);
        let mut y = SVector::<f64, 2>::new(theta0, 0.0);
        let steps = (SPAN / h).round() as usize;
        for n in 0..steps {
            y = rk4_step(&mut system, &y, n as f64 * h, h)?;
        }
        Ok(y[0])
    };
    let reference = run(2.5)?;
    let coarse = (run(80.0)? - reference).abs();
    let fine = (run(40.0)? - reference).abs();
    Ok((coarse / fine).log2())
}

struct FixedCurrents {
    body: crate::attitude::RigidBody,
    coils: CoilSet,
    currents: Vec<f64>,
    field: FieldSample,
}

impl OdeSystem<7> for FixedCurrents {
    fn derivative(&mut self, t: f64, y: &SVector<f64, 7>) -> SVector<f64, 7> {
        let state = AttitudeState3D::from_slice(y.as_slice(), t);
        match body_rhs_3d(&state, &self.body, &self.coils, &self.currents, &self.field) {
            Ok(d) => {
                let q = d.orientation_dot;
                SVector::<f64, 7>::from_column_slice(&[
                    q.w,
                    q.i,
                    q.j,
                    q.k,
                    d.omega_dot.x,
                    d.omega_dot.y,
                    d.omega_dot.z,
                ])
            }
            Err(_) => SVector::<f64, 7>::repeat(f64::NAN),
        }
    }

    fn project(&self, y: &mut SVector<f64, 7>) {
        let n = y.fixed_rows::<4>(0).norm();
        if n > 0.0 {
            y.fixed_rows_mut::<4>(0).unscale_mut(n);
        }
    }
}

fn uniform_field(config: &ScenarioConfig) -> Result<FieldSample> {
    let b = config.field_at_time(0.0)?;
    Ok(FieldSample {
        b: Vector3::new(0.0, 0.0, b.magnitude),
        magnitude: b.magnitude,
    })
}

/// Drift of the inertial angular momentum along B over `steps` RK4 steps of
/// a tumbling body with fixed coil currents, relative to the peak `|L|`.
pub fn momentum_along_field_drift(config: &ScenarioConfig, steps: usize, dt: f64) -> Result<f64> {
    let mut system = FixedCurrents {
        body: config.body()?.rigid_body()?,
        coils: CoilSet::great_circles(config.balloon.radius_m, 3, config.coils.turns)?,
        currents: vec![1.0, -0.6, 0.3],
        field: uniform_field(config)?,
    };
    let q0 = UnitQuaternion::from_euler_angles(0.3, -0.2, 0.7);
    let mut state = AttitudeState3D::at_rest(q0, 0.0);
    state.omega_body = Vector3::new(1e-3, -2e-3, 5e-4);
    let mut y = state.to_vector();
    let b_hat = system.field.b.normalize();
    let body = system.body;
    let momentum = |y: &SVector<f64, 7>| {
        let s = AttitudeState3D::from_slice(y.as_slice(), 0.0);
        s.angular_momentum(&body)
    };
    let l0 = momentum(&y).dot(&b_hat);
    let mut peak: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for n in 0..steps {
        y = rk4_step(&mut system, &y, n as f64 * dt, dt)?;
        system.project(&mut y);
        let l = momentum(&y);
        peak = peak.max(l.norm());
        drift = drift.max((l.dot(&b_hat) - l0).abs());
    }
    Ok(drift / peak)
}

/// Largest difference between the scalar pendulum angle and the angle of a
/// single ring on an isotropic rigid body, over `duration` at step `dt`.
pub fn scalar_rigid_deviation(config: &ScenarioConfig, duration: f64, dt: f64) -> Result<f64> {
    let params = config.pendulum_params()?;
    let theta0 = config.initial_angle_rad();
    let mut rigid = FixedCurrents {
        body: crate::attitude::RigidBody::new(nalgebra::Matrix3::identity() * params.inertia)?,
        coils: CoilSet::great_circles(config.balloon.radius_m, 1, 1)?,
        currents: vec![params.current],
        field: uniform_field(config)?,
    };
    // Coil normal (body x) in the x-z plane at theta0 from B (z).
    let q0 = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), theta0 - FRAC_PI_2);
    let mut y3 = AttitudeState3D::at_rest(q0, 0.0).to_vector();
    let mut scalar = Pendulum(params);
    let mut y1 = SVector::<f64, 2>::new(theta0, 0.0);
    let steps = (duration / dt).round() as usize;
    let mut worst: f64 = 0.0;
    for n in 0..steps {
        let t = n as f64 * dt;
        y3 = rk4_step(&mut rigid, &y3, t, dt)?;
        rigid.project(&mut y3);
        y1 = rk4_step(&mut scalar, &y1, t, dt)?;
        let state = AttitudeState3D::from_slice(y3.as_slice(), t + dt);
        let normal = state.unit_orientation() * Vector3::x();
        worst = worst.max((normal.x.atan2(normal.z) - y1[0]).abs());
    }
    Ok(worst)
}

/// Largest relative compose-after-decompose error over a fixed spread of
/// moments.
pub fn decompose_round_trip_error(coils: &CoilSet) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in 0..1000 {
        let x = n as f64;
        let scale = 10f64.powi((n % 9) as i32 - 4);
        let m = Vector3::new((1.3 * x).sin(), (2.1 * x).cos(), (0.7 * x + 1.0).sin()) * scale;
        let currents = crate::maneuver::decompose_moment(&m, coils)?;
        let back = coils.body_moment(&currents)?;
        worst = worst.max((back - m).norm() / m.norm());
    }
    Ok(worst)
}

fn figure4_config(config: &ScenarioConfig, dt: f64) -> ScenarioConfig {
    let mut c = config.clone();
    c.maneuver.mode = Mode::Scalar;
    c.maneuver.kind = ManeuverKind::Constant;
    c.maneuver.torque_model = TorqueModel::Nonlinear;
    c.maneuver.initial_angle_deg = 90.0;
    c.maneuver.target_deg = 50.0;
    c.maneuver.segments.clear();
    c.sim.dt_s = dt;
    c
}

fn run_bytes(run: &ManeuverRun) -> Result<String> {
    Ok(write_timeseries(&run.records)? + &render_summary(&run.summary))
}

/// Evaluates the full reproduction table against `config`.
pub fn paper_check(config: &ScenarioConfig) -> Result<PaperCheckReport> {
    let mut rows = Vec::new();
    let params = config.pendulum_params()?;
    let thirty = 30f64.to_radians();

    // Small-angle slew
    let t30 = small_angle_slew_time(thirty, &params)?;
    rows.push(within(1, "slew_time_30deg_s", 1050.0, 1150.0, t30));
    rows.push(relative(1, "slew_time_vs_18_minutes_s", 1080.0, t30, 0.03));
    let probe = 1000.0;
    rows.push(within(
        2,
        "small_angle_coefficient",
        4.25e-7,
        4.35e-7,
        small_angle_theta(probe, &params) / (probe * probe),
    ));

    // Nonlinear 90 -> 40 degree swing
    let coarse = simulate(&figure4_config(config, 0.1))?.summary;
    let fine = simulate(&figure4_config(config, 0.01))?.summary;
    let oracle = pendulum_quadrature_time(FRAC_PI_2, 40f64.to_radians(), params.torque_coefficient());
    rows.push(below(3, "figure4_elapsed_s", 2500.0, coarse.elapsed));
    rows.push(relative(3, "figure4_vs_quadrature_s", oracle, coarse.elapsed, 0.01));
    rows.push(relative(3, "figure4_dt_convergence_s", fine.elapsed, coarse.elapsed, 0.001));

    rows.push(relative(4, "final_rate_30deg_rad_s", 9.5e-4, final_slew_rate(thirty, &params)?, 0.01));

    // Wire budget
    let wire = config.wire();
    let resistance = coil_resistance(&wire);
    rows.push(relative(5, "coil_resistance_ohm", 1.645, resistance, 0.005));
    rows.push(relative(
        5,
        "ohmic_power_w",
        1.645,
        ohmic_power(resistance, config.maneuver.current_a),
        0.005,
    ));

    // Uniform 30 degree slew over the configured duration
    let duration = config.checks.slew_duration_s;
    let kin = uniform_slew_kinematics(thirty, duration, config.balloon.radius_m);
    let ek = kinetic_energy_point_mass(config.balloon.mass_kg, kin.rim_speed);
    rows.push(relative(6, "uniform_slew_rate_rad_s", 1.745e-3, kin.omega_final, 0.005));
    rows.push(relative(6, "uniform_slew_rim_speed_cm_s", 2.55, kin.rim_speed * 100.0, 0.01));
    rows.push(relative(6, "uniform_slew_kinetic_j", 0.0163, ek, 0.01));

    let field = config.field_at_time(0.0)?.magnitude;
    rows.push(relative(
        7,
        "pressure_floor_pa",
        1.83e-6,
        min_internal_pressure(config.maneuver.current_a, field, config.balloon.radius_m, 1.0),
        0.02,
    ));

    // Dipole calibration
    let dipole = DipoleFieldSpec::default();
    let r = EARTH_RADIUS + 2.0e6;
    let near = dipole_field(&dipole, &Vector3::new(r, 0.0, 0.0))?.magnitude;
    let far = dipole_field(&dipole, &Vector3::new(2.0 * r, 0.0, 0.0))?.magnitude;
    rows.push(relative(8, "dipole_2000km_t", 1.375e-5, near, 0.01));
    rows.push(relative(8, "dipole_doubled_radius_ratio", 0.125, far / near, 1e-12));

    // Property suite
    let theta0 = config.initial_angle_rad();
    rows.push(below(
        9,
        "pendulum_energy_drift",
        1e-6,
        pendulum_energy_drift(&params, theta0, 2500.0, 0.1)?,
    ));
    rows.push(below(
        9,
        "momentum_along_b_drift",
        1e-9,
        momentum_along_field_drift(config, 10_000, 0.1)?,
    ));
    rows.push(at_least(9, "rk4_observed_order", 3.9, rk4_convergence_order(&params, theta0)?));
    rows.push(below(
        9,
        "rigid_vs_scalar_rad",
        1e-6,
        scalar_rigid_deviation(config, 2500.0, 0.1)?,
    ));
    rows.push(below(
        9,
        "decompose_round_trip",
        1e-12,
        decompose_round_trip_error(&CoilSet::great_circles(config.balloon.radius_m, 3, config.coils.turns)?)?,
    ));

    let orbit = EllipticalOrbitSpec::new(EARTH_RADIUS + 5.0e6, EARTH_RADIUS + 40.0e6)?;
    rows.push(relative(
        10,
        "perigee_apogee_field_ratio",
        67.8,
        field_ratio_perigee_apogee(&orbit, &dipole)?,
        0.01,
    ));

    // Figures printed for comparison only
    rows.push(info(11, "slew_kinetic_energy_j", "1.3", num(ek)));
    rows.push(info(11, "slew_average_power_w", "0.00027", num(average_power(ek, duration))));
    let gold = WireSpec {
        density_kg_m3: GOLD_DENSITY,
        ..wire
    };
    rows.push(info(
        11,
        "wire_mass_3_rings_kg",
        "~6",
        format!(
            "{} ({}) / {} (Au)",
            num(wire_mass(&wire, 3)),
            material_label(wire.density_kg_m3),
            num(wire_mass(&gold, 3))
        ),
    ));

    // Determinism
    let first = run_bytes(&simulate(config)?)?;
    let second = run_bytes(&simulate(config)?)?;
    rows.push(CheckRow {
        criterion: 12,
        name: "simulate_repeatable",
        expected: "identical".into(),
        computed: if first == second { "identical" } else { "differs" }.into(),
        tolerance: "bytes".into(),
        verdict: verdict(first == second),
    });
    let doc = ScenarioDocument::parse(&config.serialize())?;
    let spec: SweepSpec = "maneuver.current_A=0.5:4:8".parse()?;
    let serial = render_sweep_csv(&run_sweep(&doc, &spec, 1)?);
    let parallel = render_sweep_csv(&run_sweep(&doc, &spec, 8)?);
    rows.push(CheckRow {
        criterion: 12,
        name: "sweep_jobs_1_vs_8",
        expected: "identical".into(),
        computed: if serial == parallel { "identical" } else { "differs" }.into(),
        tolerance: "bytes".into(),
        verdict: verdict(serial == parallel),
    });

    Ok(PaperCheckReport { rows })
}

fn material_label(density: f64) -> &'static str {
    if density == crate::coilbudget::COPPER_DENSITY {
        "Cu"
    } else {
        "wire"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const K: f64 = 8.639379797371932e-7;

    #[test]
    fn quadrature_matches_reference() {
        // Adaptive quadrature of the same integral, computed independently.
        let t = pendulum_quadrature_time(FRAC_PI_2, 40f64.to_radians(), K);
        assert_relative_eq!(t, 1439.976367634235, max_relative = 1e-9);
    }

    #[test]
    fn quadrature_small_swing_is_quarter_period() {
        // For a small amplitude the swing to the bottom is T/4 = pi / (2 sqrt k).
        let a = 1e-3;
        let t = pendulum_quadrature_time(a, 0.0, K);
        assert_relative_eq!(t, PI / (2.0 * K.sqrt()), max_relative = 1e-6);
    }

    #[test]
    fn energy_drift_is_small() {
        let drift = pendulum_energy_drift(&PendulumParams::baseline(), FRAC_PI_2, 2500.0, 0.1).unwrap();
        assert!(drift < 1e-6, "{drift}");
    }

    #[test]
    fn observed_order_is_four() {
        let order = rk4_convergence_order(&PendulumParams::baseline(), FRAC_PI_2).unwrap();
        assert!(order >= 3.9 && order < 4.3, "{order}");
    }

    #[test]
    fn property_measurements_are_tight() {
        let config = ScenarioConfig::paper_baseline();
        assert!(momentum_along_field_drift(&config, 10_000, 0.1).unwrap() < 1e-9);
        assert!(scalar_rigid_deviation(&config, 2500.0, 0.1).unwrap() < 1e-6);
        assert!(decompose_round_trip_error(&CoilSet::great_circles(15.0, 3, 1).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn doubled_inertia_fails_the_slew_time_row() {
        let mut config = ScenarioConfig::paper_baseline();
        config.balloon.mass_kg *= 2.0;
        let report = paper_check(&config).unwrap();
        let row = report.rows.iter().find(|r| r.name == "slew_time_30deg_s").unwrap();
        assert_eq!(row.verdict, Verdict::Fail);
        assert!(!report.all_pass());
    }

    #[test]
    fn info_rows_never_fail() {
        let report = paper_check(&ScenarioConfig::paper_baseline()).unwrap();
        let info: Vec<&CheckRow> = report.rows.iter().filter(|r| r.criterion == 11).collect();
        assert_eq!(info.len(), 3);
        assert!(info.iter().all(|r| r.verdict == Verdict::Info));
        assert!(report.render().contains("INFO"));
    }

    #[test]
    fn baseline_rows() {
        let report = paper_check(&ScenarioConfig::paper_baseline()).unwrap();
        let failing: Vec<&str> = report.failures().map(|r| r.name).collect();
        // The rim-speed and kinetic-energy figures quoted alongside the
        // 0.0017 rad/s rate were computed from that rounded rate; from the
        // exact 1.745e-3 rad/s they come out 2.7% and 5.1% higher.
        assert_eq!(failing, vec!["uniform_slew_rim_speed_cm_s", "uniform_slew_kinetic_j"]);
    }
}
