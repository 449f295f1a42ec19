//! Electrical, mass, kinematic and structural budgets for the current rings.

use std::f64::consts::PI;

use crate::attitude::{final_slew_rate, small_angle_slew_time};
use crate::error::Result;
use crate::scenario::ScenarioConfig;

pub const VACUUM_PERMEABILITY: f64 = 4.0e-7 * PI;
pub const SPEED_OF_LIGHT: f64 = 2.998e8;
pub const COPPER_DENSITY: f64 = 8960.0;
pub const GOLD_DENSITY: f64 = 19300.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireSpec {
    /// Ohm mm^2 / m.
    pub resistivity_ohm_mm2_per_m: f64,
    pub cross_section_mm2: f64,
    pub density_kg_m3: f64,
    /// Length of one coil (m).
    pub length_m: f64,
}

/// `R = rho L / s`.
pub fn coil_resistance(wire: &WireSpec) -> f64 {
    wire.resistivity_ohm_mm2_per_m * wire.length_m / wire.cross_section_mm2
}

/// `P = R i^2`.
pub fn ohmic_power(resistance: f64, current: f64) -> f64 {
    resistance * current * current
}

pub fn wire_mass(wire: &WireSpec, coil_count: usize) -> f64 {
    coil_count as f64 * wire.density_kg_m3 * wire.length_m * wire.cross_section_mm2 * 1.0e-6
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlewKinematics {
    /// rad/s^2
    pub alpha: f64,
    /// rad/s
    pub omega_final: f64,
    /// m/s
    pub rim_speed: f64,
}

/// Rest-to-`theta_target` slew at constant angular acceleration.
pub fn uniform_slew_kinematics(theta_target: f64, duration: f64, radius: f64) -> SlewKinematics {
    let alpha = 2.0 * theta_target / (duration * duration);
    let omega_final = alpha * duration;
    SlewKinematics {
        alpha,
        omega_final,
        rim_speed: omega_final * radius,
    }
}

pub fn kinetic_energy_point_mass(mass: f64, speed: f64) -> f64 {
    0.5 * mass * speed * speed
}

pub fn average_power(energy: f64, duration: f64) -> f64 {
    energy / duration
}

/// Ampere force per metre of wire, `i B` (N/m).
pub fn line_force_per_meter(current: f64, field: f64) -> f64 {
    current * field
}

/// Internal pressure the balloon needs so that the membrane reaction per
/// metre of wire, `R p / 2`, exceeds the Ampere force `i B` by `margin`.
pub fn min_internal_pressure(current: f64, field: f64, radius: f64, margin: f64) -> f64 {
    margin * 2.0 * line_force_per_meter(current, field) / radius
}

/// `sqrt(rho / (pi f mu0))` with `rho` in Ohm m.
pub fn skin_depth(resistivity_ohm_m: f64, frequency: f64) -> f64 {
    (resistivity_ohm_m / (PI * frequency * VACUUM_PERMEABILITY)).sqrt()
}

pub fn wavelength_to_frequency(wavelength_m: f64) -> f64 {
    SPEED_OF_LIGHT / wavelength_m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilBudget {
    pub resistance_ohm: f64,
    pub current_a: f64,
    pub ohmic_power_w: f64,
    pub wire_mass_kg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinDepthRow {
    pub wavelength_m: f64,
    pub frequency_hz: f64,
    pub depth_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlewBudget {
    pub target_rad: f64,
    pub duration_s: f64,
    pub kinematics: SlewKinematics,
    pub kinetic_energy_j: f64,
    pub average_power_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub coils: Vec<CoilBudget>,
    pub total_power_w: f64,
    pub total_mass_kg: f64,
    /// Same wire set in gold, for comparison with heavier conductors.
    pub gold_mass_kg: f64,
    pub field_t: f64,
    pub line_force_n_per_m: f64,
    pub pressure_floor_pa: f64,
    pub skin_depths: Vec<SkinDepthRow>,
    /// Uniform-acceleration slew over `checks.slew_duration_s`.
    pub uniform_slew: SlewBudget,
    /// Constant-current slew from rest; `None` when the ring is unpowered.
    pub constant_current_slew: Option<SlewBudget>,
    pub checks: Vec<BudgetCheck>,
}

impl BudgetReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn budget_report(scenario: &ScenarioConfig) -> Result<BudgetReport> {
    let wire = scenario.wire();
    let radius = scenario.balloon.radius_m;
    let mass = scenario.balloon.mass_kg;
    let current = scenario.maneuver.current_a;
    let field = scenario.field_at_time(0.0)?.magnitude;

    let resistance = coil_resistance(&wire);
    let coils: Vec<CoilBudget> = (0..scenario.coils.count)
        .map(|_| CoilBudget {
            resistance_ohm: resistance,
            current_a: current,
            ohmic_power_w: ohmic_power(resistance, current),
            wire_mass_kg: wire_mass(&wire, 1),
        })
        .collect();
    let total_power_w = coils.iter().map(|c| c.ohmic_power_w).sum();
    let total_mass_kg = coils.iter().map(|c| c.wire_mass_kg).sum();
    let gold = WireSpec {
        density_kg_m3: GOLD_DENSITY,
        ..wire
    };
    let gold_mass_kg = wire_mass(&gold, scenario.coils.count);

    let checks_cfg = &scenario.checks;
    let pressure_floor_pa = min_internal_pressure(current, field, radius, checks_cfg.pressure_margin);
    let skin_depths: Vec<SkinDepthRow> = checks_cfg
        .wavelengths_m
        .iter()
        .map(|&wavelength_m| {
            let frequency_hz = wavelength_to_frequency(wavelength_m);
            SkinDepthRow {
                wavelength_m,
                frequency_hz,
                depth_m: skin_depth(checks_cfg.coating_resistivity_ohm_m, frequency_hz),
            }
        })
        .collect();

    let target = scenario.target_rad();
    let duration = checks_cfg.slew_duration_s;
    let kinematics = uniform_slew_kinematics(target, duration, radius);
    let ke = kinetic_energy_point_mass(mass, kinematics.rim_speed);
    let uniform_slew = SlewBudget {
        target_rad: target,
        duration_s: duration,
        kinematics,
        kinetic_energy_j: ke,
        average_power_w: average_power(ke, duration),
    };

    let constant_current_slew = match scenario.pendulum_params() {
        Ok(params) => match (small_angle_slew_time(target, &params), final_slew_rate(target, &params)) {
            (Ok(t), Ok(rate)) if t > 0.0 => {
                let ke = kinetic_energy_point_mass(mass, rate * radius);
                Some(SlewBudget {
                    target_rad: target,
                    duration_s: t,
                    kinematics: SlewKinematics {
                        alpha: params.torque_coefficient(),
                        omega_final: rate,
                        rim_speed: rate * radius,
                    },
                    kinetic_energy_j: ke,
                    average_power_w: average_power(ke, t),
                })
            }
            _ => None,
        },
        Err(_) => None,
    };

    let per_ring = coils.iter().map(|c| c.ohmic_power_w).fold(0.0, f64::max);
    let deepest = skin_depths
        .iter()
        .max_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz))
        .copied();
    let mut checks = vec![
        BudgetCheck {
            name: "pv_power",
            pass: per_ring <= checks_cfg.pv_watts,
            detail: format!("per-ring {per_ring:.4} W vs {} W available", checks_cfg.pv_watts),
        },
        BudgetCheck {
            name: "internal_pressure",
            pass: checks_cfg.internal_pressure_pa >= pressure_floor_pa,
            detail: format!(
                "{} Pa vs floor {pressure_floor_pa:.4e} Pa (margin {})",
                checks_cfg.internal_pressure_pa, checks_cfg.pressure_margin
            ),
        },
    ];
    if let Some(row) = deepest {
        checks.push(BudgetCheck {
            name: "skin_depth",
            pass: checks_cfg.coating_thickness_m >= row.depth_m,
            detail: format!(
                "coating {:.4e} m vs skin depth {:.4e} m at {:.4e} Hz",
                checks_cfg.coating_thickness_m, row.depth_m, row.frequency_hz
            ),
        });
    }

    Ok(BudgetReport {
        coils,
        total_power_w,
        total_mass_kg,
        gold_mass_kg,
        field_t: field,
        line_force_n_per_m: line_force_per_meter(current, field),
        pressure_floor_pa,
        skin_depths,
        uniform_slew,
        constant_current_slew,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioDocument;
    use crate::scenario::PAPER_BASELINE;
    use proptest::prelude::*;

    fn ring_wire(rho: f64, density: f64) -> WireSpec {
        WireSpec {
            resistivity_ohm_mm2_per_m: rho,
            cross_section_mm2: 1.0,
            density_kg_m3: density,
            length_m: 2.0 * PI * 15.0,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn resistance_values() {
        let r = coil_resistance(&ring_wire(0.0175, COPPER_DENSITY));
        assert!((r - 1.649_336_143_134_641_6).abs() < 1e-12);
        assert!(rel(r, 1.645) < 0.005);
        let unit = WireSpec {
            length_m: 1.0,
            ..ring_wire(0.017, COPPER_DENSITY)
        };
        assert_eq!(coil_resistance(&unit), 0.017);
        let thick = WireSpec {
            cross_section_mm2: 2.0,
            ..ring_wire(0.0175, COPPER_DENSITY)
        };
        assert_eq!(coil_resistance(&thick), 0.5 * r);
    }

    #[test]
    fn power_values() {
        assert_eq!(ohmic_power(1.645, 1.0), 1.645);
        assert_eq!(ohmic_power(1.645, 0.0), 0.0);
        assert_eq!(ohmic_power(1.645, 2.0), 4.0 * 1.645);
    }

    #[test]
    fn wire_mass_values() {
        let cu = wire_mass(&ring_wire(0.0175, COPPER_DENSITY), 3);
        assert!((cu - 2.533_380_315_854_809).abs() < 1e-12);
        assert!((wire_mass(&ring_wire(0.0175, COPPER_DENSITY), 1) - cu / 3.0).abs() < 1e-15);
        let au = wire_mass(&ring_wire(0.0175, GOLD_DENSITY), 3);
        assert!((au - 5.456_946_439_285_470_5).abs() < 1e-12);
    }

    #[test]
    fn uniform_slew_values() {
        let k = uniform_slew_kinematics(30f64.to_radians(), 600.0, 15.0);
        assert!((k.omega_final - 1.745_329_251_994_33e-3).abs() < 1e-15);
        assert!(rel(k.omega_final, 1.745e-3) < 0.005);
        assert!((k.rim_speed - 2.617_993_877_991_494_4e-2).abs() < 1e-15);
        let zero = uniform_slew_kinematics(0.0, 600.0, 15.0);
        assert_eq!((zero.alpha, zero.omega_final, zero.rim_speed), (0.0, 0.0, 0.0));
        let slow = uniform_slew_kinematics(30f64.to_radians(), 1200.0, 15.0);
        assert!((slow.omega_final - 0.5 * k.omega_final).abs() < 1e-18);
    }

    #[test]
    fn energy_and_average_power_values() {
        let ke = kinetic_energy_point_mass(50.0, 0.0255);
        assert!((ke - 0.016_256_25).abs() < 1e-15);
        assert!(rel(ke, 0.0163) < 0.01);
        assert_eq!(kinetic_energy_point_mass(50.0, 0.0), 0.0);
        let final_ke = kinetic_energy_point_mass(50.0, 0.014265);
        assert!(rel(final_ke, 5.1e-3) < 0.01);

        assert!(rel(average_power(0.0163, 600.0), 2.72e-5) < 0.002);
        assert_eq!(average_power(0.0, 600.0), 0.0);
        let p = average_power(5.1e-3, 1000.0);
        assert!((p - 5.1e-6).abs() < 1e-18);
        assert!(p < 1.645);
    }

    #[test]
    fn force_and_pressure_values() {
        assert_eq!(line_force_per_meter(1.0, 1.375e-5), 1.375e-5);
        assert_eq!(line_force_per_meter(0.0, 1.375e-5), 0.0);
        assert!((line_force_per_meter(10.0, 1.375e-5) - 1.375e-4).abs() < 1e-19);

        let floor = min_internal_pressure(1.0, 1.375e-5, 15.0, 1.0);
        assert!((floor - 1.833_333_333_333_333_5e-6).abs() < 1e-20);
        assert!(rel(floor, 1.83e-6) < 0.02);
        assert_eq!(min_internal_pressure(0.0, 1.375e-5, 15.0, 1.0), 0.0);
        assert!((min_internal_pressure(1.0, 1.375e-5, 15.0, 10.0) - 10.0 * floor).abs() < 1e-20);
    }

    #[test]
    fn skin_depth_values() {
        let f_k = wavelength_to_frequency(0.0135);
        let d = skin_depth(1.75e-8, f_k);
        assert!((d - 4.467_764_016_424_348_4e-7).abs() < 1e-18);
        assert!((d - 0.45e-6).abs() < 0.01e-6);
        let d92 = skin_depth(1.75e-8, wavelength_to_frequency(0.92));
        assert!((d92 - 3.688_223_709_968_006_7e-6).abs() < 1e-17);
        assert!((skin_depth(1.75e-8, 4.0 * f_k) - 0.5 * d).abs() < 1e-20);
    }

    #[test]
    fn baseline_budget() {
        let report = budget_report(&ScenarioConfig::paper_baseline()).unwrap();
        assert_eq!(report.coils.len(), 3);
        assert!(rel(report.coils[0].resistance_ohm, 1.645) < 0.005);
        assert!(rel(report.total_power_w, 4.9) < 0.01);
        assert_eq!(
            report.total_power_w,
            report.coils.iter().map(|c| c.ohmic_power_w).sum::<f64>()
        );
        assert_eq!(
            report.total_mass_kg,
            report.coils.iter().map(|c| c.wire_mass_kg).sum::<f64>()
        );
        assert!((report.total_mass_kg - 2.533).abs() < 1e-3);
        assert!(report.all_pass(), "{:?}", report.checks);
        let slew = report.constant_current_slew.unwrap();
        // target 50 degrees in the baseline
        assert!(rel(slew.duration_s, (2.0 * 50f64.to_radians() / 8.639_379_797_371_932e-7).sqrt()) < 1e-12);
    }

    #[test]
    fn zero_current_budget() {
        let mut doc = ScenarioDocument::parse(PAPER_BASELINE).unwrap();
        doc.set("maneuver.current_A", "0").unwrap();
        let c = ScenarioConfig::from_document(&doc).unwrap();
        let report = budget_report(&c).unwrap();
        assert_eq!(report.total_power_w, 0.0);
        assert_eq!(report.pressure_floor_pa, 0.0);
        assert!(report.constant_current_slew.is_none());
    }

    #[test]
    fn thin_coating_fails_skin_depth() {
        let mut doc = ScenarioDocument::parse(PAPER_BASELINE).unwrap();
        doc.set("checks.coating_thickness_m", "0.2e-6").unwrap();
        let report = budget_report(&ScenarioConfig::from_document(&doc).unwrap()).unwrap();
        let check = report.checks.iter().find(|c| c.name == "skin_depth").unwrap();
        assert!(!check.pass);
        assert!(!report.all_pass());
    }

    proptest! {
        #[test]
        fn budget_scaling_laws(
            rho in 0.01f64..0.05, len in 1.0f64..500.0, s in 0.1f64..10.0,
            i in 0.0f64..10.0, b in 1e-6f64..1e-4, r in 1.0f64..50.0, lambda in 1.1f64..4.0,
        ) {
            let wire = WireSpec { resistivity_ohm_mm2_per_m: rho, cross_section_mm2: s, density_kg_m3: 8960.0, length_m: len };
            let longer = WireSpec { length_m: len * lambda, ..wire };
            let thicker = WireSpec { cross_section_mm2: s * lambda, ..wire };
            prop_assert!(rel(coil_resistance(&longer), lambda * coil_resistance(&wire)) < 1e-12);
            prop_assert!(rel(coil_resistance(&thicker), coil_resistance(&wire) / lambda) < 1e-12);
            prop_assert!(rel(wire_mass(&longer, 3), lambda * wire_mass(&wire, 3)) < 1e-12);
            prop_assert!(rel(wire_mass(&thicker, 2), lambda * wire_mass(&wire, 2)) < 1e-12);
            let r0 = coil_resistance(&wire);
            if i > 0.0 {
                prop_assert!(rel(ohmic_power(r0, lambda * i), lambda * lambda * ohmic_power(r0, i)) < 1e-12);
                prop_assert!(rel(min_internal_pressure(lambda * i, b, r, 1.0), lambda * min_internal_pressure(i, b, r, 1.0)) < 1e-12);
                prop_assert!(rel(min_internal_pressure(i, b, lambda * r, 1.0), min_internal_pressure(i, b, r, 1.0) / lambda) < 1e-12);
            }
        }

        #[test]
        fn uniform_slew_identities(theta in 0.0f64..3.0, t in 1.0f64..1e4, r in 1.0f64..50.0, m in 1.0f64..500.0) {
            let k = uniform_slew_kinematics(theta, t, r);
            prop_assert!((0.5 * k.alpha * t * t - theta).abs() <= 1e-12 * theta.max(1e-300));
            prop_assert!((k.alpha * t - k.omega_final).abs() <= 1e-12 * k.omega_final.max(1e-300));
            let ke = kinetic_energy_point_mass(m, k.rim_speed);
            let ring = 0.5 * (m * r * r) * k.omega_final * k.omega_final;
            prop_assert!((ke - ring).abs() <= 1e-12 * ring.max(1e-300));
        }
    }
}
