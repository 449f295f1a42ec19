//! Time-series CSV and `key: value` summary rendering.

use std::fmt::Write as _;

use crate::coilbudget::BudgetReport;
use crate::error::{Error, Result};
use crate::maneuver::{ManeuverSummary, RunStatus};

pub const CSV_HEADER: &str =
    "t_s,theta_rad,omega_rad_s,torque_Nm,i1_A,i2_A,i3_A,Bx_T,By_T,Bz_T,ohmic_W,kinetic_J,qw,qx,qy,qz";

/// One trajectory sample with its derived quantities.
///
/// In scalar runs `theta` is the normal-to-B angle, `omega` its rate and
/// `torque` the signed torque about the tilt axis. In 3-D runs `theta` is the
/// angle between coil 1's normal and B, and `omega`/`torque` are magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRecord {
    pub t: f64,
    pub theta: f64,
    pub omega: f64,
    pub torque: f64,
    pub currents: [f64; 3],
    pub b: [f64; 3],
    pub ohmic_power: f64,
    pub kinetic_energy: f64,
    /// `[w, x, y, z]`, 3-D runs only.
    pub quaternion: Option<[f64; 4]>,
}

/// Full-precision, locale-independent CSV with `\n` line endings.
pub fn write_timeseries(records: &[TimeSeriesRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut out = String::with_capacity(64 + records.len() * 200);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let fixed = [
            r.t,
            r.theta,
            r.omega,
            r.torque,
            r.currents[0],
            r.currents[1],
            r.currents[2],
            r.b[0],
            r.b[1],
            r.b[2],
            r.ohmic_power,
            r.kinetic_energy,
        ];
        for (idx, v) in fixed.iter().enumerate() {
            if idx > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        match r.quaternion {
            Some(q) => {
                for v in q {
                    let _ = write!(out, ",{v}");
                }
            }
            None => out.push_str(",,,,"),
        }
        out.push('\n');
    }
    Ok(out)
}

/// Stable `key: value` rendering of a maneuver summary.
pub fn render_summary(summary: &ManeuverSummary) -> String {
    let status = match summary.status {
        RunStatus::Completed => "completed",
        RunStatus::MaxTimeExceeded => "max_time_exceeded",
        RunStatus::Underactuated => "underactuated",
    };
    let lines = [
        ("mode", summary.mode.to_string()),
        ("maneuver", summary.kind.to_string()),
        ("status", status.to_string()),
        ("pass", summary.pass.to_string()),
        ("underactuated", summary.underactuated.to_string()),
        ("target_deg", format!("{}", summary.target.to_degrees())),
        ("achieved_rotation_deg", format!("{}", summary.achieved_rotation.to_degrees())),
        ("elapsed_s", format!("{}", summary.elapsed)),
        ("residual_rate_rad_s", format!("{}", summary.residual_rate)),
        ("final_theta_normal_deg", format!("{}", summary.final_theta.to_degrees())),
        (
            "final_theta_plane_deg",
            format!("{}", 90.0 - summary.final_theta.to_degrees()),
        ),
        ("peak_torque_Nm", format!("{}", summary.peak_torque)),
        ("ohmic_energy_J", format!("{}", summary.ohmic_energy)),
        ("peak_kinetic_J", format!("{}", summary.peak_kinetic_energy)),
    ];
    let mut out = String::new();
    for (k, v) in lines {
        let _ = writeln!(out, "{k}: {v}");
    }
    out
}

/// Human-readable budget table ending in one PASS/FAIL line per check.
pub fn render_budget(report: &BudgetReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ring  resistance_ohm  current_A  ohmic_W  wire_mass_kg");
    for (n, c) in report.coils.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {:>14.6}  {:>9.4}  {:>7.4}  {:>12.6}",
            n + 1,
            c.resistance_ohm,
            c.current_a,
            c.ohmic_power_w,
            c.wire_mass_kg
        );
    }
    let _ = writeln!(out, "total_power_W: {}", report.total_power_w);
    let _ = writeln!(out, "total_wire_mass_kg: {}", report.total_mass_kg);
    let _ = writeln!(out, "gold_wire_mass_kg: {}", report.gold_mass_kg);
    let _ = writeln!(out, "field_T: {}", report.field_t);
    let _ = writeln!(out, "line_force_N_per_m: {}", report.line_force_n_per_m);
    let _ = writeln!(out, "required_pressure_Pa (with margin): {}", report.pressure_floor_pa);
    for row in &report.skin_depths {
        let _ = writeln!(
            out,
            "skin_depth_m @ {} m ({:.4e} Hz): {}",
            row.wavelength_m, row.frequency_hz, row.depth_m
        );
    }
    let slew = |out: &mut String, label: &str, s: &crate::coilbudget::SlewBudget| {
        let _ = writeln!(
            out,
            "{label}: {:.2} deg in {} s, final rate {} rad/s, rim speed {} m/s, kinetic {} J, mean power {} W",
            s.target_rad.to_degrees(),
            s.duration_s,
            s.kinematics.omega_final,
            s.kinematics.rim_speed,
            s.kinetic_energy_j,
            s.average_power_w
        );
    };
    slew(&mut out, "uniform_slew", &report.uniform_slew);
    if let Some(s) = &report.constant_current_slew {
        slew(&mut out, "constant_current_slew", s);
    }
    let _ = writeln!(
        out,
        "INFO wire_mass: {:.2} kg copper / {:.2} kg gold for all rings; the ~6 kg estimate is not reproduced",
        report.total_mass_kg, report.gold_mass_kg
    );
    for c in &report.checks {
        let _ = writeln!(out, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    out
}
