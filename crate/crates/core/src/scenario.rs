//! Scenario files: a flat sectioned `key = value` format.
//!
//! ```text
//! # comment
//! [balloon]
//! mass_kg = 50
//! radius_m = 15
//! ```
//!
//! Vectors and lists are comma separated. Keys ending in `_deg` hold degrees.
//! Unknown sections or keys are rejected; keys that do not apply to the
//! selected model (for example `field.axis` with a uniform field) are
//! accepted and ignored. `maneuver.type` is the only required key.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::attitude::{BalloonBody, CoilSet, InertiaModel, PendulumParams};
use crate::coilbudget::WireSpec;
use crate::geomag::{self, DipoleFieldSpec, FieldModel, FieldSample, UniformFieldSpec, EARTH_RADIUS};
use crate::odesolve::IntegrationSettings;
use crate::orbit::{CircularOrbitSpec, EllipticalOrbitSpec, Orbit, EARTH_MU};

/// Bundled scenario reproducing the single-ring 50 degree rotation.
pub const PAPER_BASELINE: &str = include_str!("../scenarios/paper_baseline.scn");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
}

impl ScenarioError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// The offending key for validation errors.
    pub fn key(&self) -> Option<&str> {
        match self {
            ScenarioError::Validation { key, .. } | ScenarioError::UnknownKey(key) => Some(key),
            ScenarioError::Parse { .. } => None,
        }
    }
}

/// Every accepted key, in canonical order.
pub const KNOWN_KEYS: &[&str] = &[
    "balloon.mass_kg",
    "balloon.radius_m",
    "balloon.inertia_model",
    "balloon.inertia_tensor_kg_m2",
    "coils.count",
    "coils.turns",
    "coils.cross_section_mm2",
    "coils.resistivity_ohm_mm2_per_m",
    "coils.density_kg_m3",
    "field.model",
    "field.magnitude_T",
    "field.direction",
    "field.equatorial_surface_field_T",
    "field.reference_radius_m",
    "field.axis",
    "orbit.type",
    "orbit.altitude_m",
    "orbit.reference_radius_m",
    "orbit.mu_m3_s2",
    "orbit.normal",
    "orbit.phase_deg",
    "orbit.perigee_radius_m",
    "orbit.apogee_radius_m",
    "orbit.raan_deg",
    "orbit.inclination_deg",
    "orbit.arg_perigee_deg",
    "orbit.mean_anomaly_deg",
    "maneuver.mode",
    "maneuver.type",
    "maneuver.torque_model",
    "maneuver.target_deg",
    "maneuver.current_A",
    "maneuver.initial_angle_deg",
    "maneuver.axis",
    "maneuver.segments",
    "sim.dt_s",
    "sim.max_time_s",
    "sim.stop_tolerance_rad",
    "checks.pv_watts",
    "checks.coating_thickness_m",
    "checks.coating_resistivity_ohm_m",
    "checks.internal_pressure_Pa",
    "checks.pressure_margin",
    "checks.slew_duration_s",
    "checks.wavelengths_m",
];

/// Keys holding one number, i.e. the ones a sweep may vary.
pub fn is_numeric_key(key: &str) -> bool {
    matches!(
        key,
        "balloon.mass_kg"
            | "balloon.radius_m"
            | "coils.cross_section_mm2"
            | "coils.resistivity_ohm_mm2_per_m"
            | "coils.density_kg_m3"
            | "field.magnitude_T"
            | "field.equatorial_surface_field_T"
            | "field.reference_radius_m"
            | "orbit.altitude_m"
            | "orbit.reference_radius_m"
            | "orbit.mu_m3_s2"
            | "orbit.phase_deg"
            | "orbit.perigee_radius_m"
            | "orbit.apogee_radius_m"
            | "orbit.raan_deg"
            | "orbit.inclination_deg"
            | "orbit.arg_perigee_deg"
            | "orbit.mean_anomaly_deg"
            | "maneuver.target_deg"
            | "maneuver.current_A"
            | "maneuver.initial_angle_deg"
            | "sim.dt_s"
            | "sim.max_time_s"
            | "sim.stop_tolerance_rad"
            | "checks.pv_watts"
            | "checks.coating_thickness_m"
            | "checks.coating_resistivity_ohm_m"
            | "checks.internal_pressure_Pa"
            | "checks.pressure_margin"
            | "checks.slew_duration_s"
    )
}

#[derive(Debug, Clone, PartialEq)]
struct RawValue {
    text: String,
    line: Option<usize>,
}

/// A parsed but not yet validated scenario: `section.key -> value`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioDocument {
    entries: BTreeMap<String, RawValue>,
}

impl ScenarioDocument {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ScenarioError::Parse {
                    line,
                    message: "unterminated section header".into(),
                })?;
                let name = name.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(ScenarioError::Parse {
                        line,
                        message: format!("bad section name `{name}`"),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ScenarioError::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ScenarioError::Parse {
                    line,
                    message: "empty key".into(),
                });
            }
            let section = section.as_ref().ok_or_else(|| ScenarioError::Parse {
                line,
                message: format!("key `{key}` appears before any [section]"),
            })?;
            let full = format!("{section}.{key}");
            if !KNOWN_KEYS.contains(&full.as_str()) {
                return Err(ScenarioError::UnknownKey(full));
            }
            let value = RawValue {
                text: value.trim().to_string(),
                line: Some(line),
            };
            if entries.insert(full.clone(), value).is_some() {
                return Err(ScenarioError::Parse {
                    line,
                    message: format!("duplicate key `{full}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    /// Sets or replaces one value, as `--set key=value` does.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ScenarioError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ScenarioError::UnknownKey(key.to_string()));
        }
        self.entries.insert(
            key.to_string(),
            RawValue {
                text: value.trim().to_string(),
                line: None,
            },
        );
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|v| v.text.as_str())
    }

    fn err(&self, key: &str, message: impl Into<String>) -> ScenarioError {
        let message = message.into();
        match self.entries.get(key).and_then(|v| v.line) {
            Some(line) => ScenarioError::invalid(key, format!("{message} (line {line})")),
            None => ScenarioError::invalid(key, message),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ScenarioError> {
        match self.get(key) {
            None => Ok(default),
            Some(text) => parse_f64(text).ok_or_else(|| self.err(key, format!("`{text}` is not a finite number"))),
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, ScenarioError> {
        let v = self.f64_or(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(key, "must be positive"))
        }
    }

    fn non_negative(&self, key: &str, default: f64) -> Result<f64, ScenarioError> {
        let v = self.f64_or(key, default)?;
        if v >= 0.0 {
            Ok(v)
        } else {
            Err(self.err(key, "must not be negative"))
        }
    }

    fn vector_or(&self, key: &str, default: [f64; 3]) -> Result<[f64; 3], ScenarioError> {
        let Some(text) = self.get(key) else {
            return Ok(default);
        };
        let values = parse_list(text).ok_or_else(|| self.err(key, "expected comma-separated numbers"))?;
        let v: [f64; 3] = values
            .try_into()
            .map_err(|_| self.err(key, "expected exactly three components"))?;
        if v.iter().all(|c| *c == 0.0) {
            return Err(self.err(key, "vector must be non-zero"));
        }
        Ok(v)
    }

    fn choice<'a>(&self, key: &str, default: Option<&'a str>, options: &[&'a str]) -> Result<&'a str, ScenarioError> {
        let text = match (self.get(key), default) {
            (Some(t), _) => t,
            (None, Some(d)) => return Ok(d),
            (None, None) => return Err(ScenarioError::invalid(key, "required key is missing")),
        };
        options
            .iter()
            .copied()
            .find(|o| *o == text)
            .ok_or_else(|| self.err(key, format!("`{text}` is not one of {}", options.join(", "))))
    }
}

fn parse_f64(text: &str) -> Option<f64> {
    text.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_list(text: &str) -> Option<Vec<f64>> {
    text.split(',').map(parse_f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalloonSection {
    pub mass_kg: f64,
    pub radius_m: f64,
    pub inertia_model: InertiaModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilSection {
    pub count: usize,
    pub turns: u32,
    pub cross_section_mm2: f64,
    pub resistivity_ohm_mm2_per_m: f64,
    pub density_kg_m3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSection {
    Uniform {
        magnitude_t: f64,
        direction: [f64; 3],
    },
    Dipole {
        equatorial_surface_field_t: f64,
        reference_radius_m: f64,
        axis: [f64; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitSection {
    None,
    Circular {
        altitude_m: f64,
        reference_radius_m: f64,
        mu_m3_s2: f64,
        normal: [f64; 3],
        phase_deg: f64,
    },
    Elliptical {
        perigee_radius_m: f64,
        apogee_radius_m: f64,
        mu_m3_s2: f64,
        raan_deg: f64,
        inclination_deg: f64,
        arg_perigee_deg: f64,
        mean_anomaly_deg: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Scalar,
    ThreeD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManeuverKind {
    /// Fixed current until the target rotation is reached.
    Constant,
    /// `+i` then `-i`, switched at the constant-torque midpoint.
    BangBang,
    /// Explicit current segments.
    Plan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorqueModel {
    /// `theta'' = -k sin(theta)`.
    Nonlinear,
    /// `theta'' = -k`, the cos(plane angle) = 1 approximation.
    Constant,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Scalar => "scalar",
            Mode::ThreeD => "3d",
        })
    }
}

impl fmt::Display for ManeuverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ManeuverKind::Constant => "constant",
            ManeuverKind::BangBang => "bang_bang",
            ManeuverKind::Plan => "plan",
        })
    }
}

impl fmt::Display for TorqueModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TorqueModel::Nonlinear => "nonlinear",
            TorqueModel::Constant => "constant",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub duration_s: f64,
    /// One value per coil (3-D) or a single value (scalar).
    pub currents: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverSection {
    pub mode: Mode,
    pub kind: ManeuverKind,
    pub torque_model: TorqueModel,
    pub target_deg: f64,
    pub current_a: f64,
    pub initial_angle_deg: f64,
    /// Inertial rotation axis commanded in 3-D mode.
    pub axis: [f64; 3],
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSection {
    pub dt_s: f64,
    pub max_time_s: f64,
    pub stop_tolerance_rad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChecksSection {
    pub pv_watts: f64,
    pub coating_thickness_m: f64,
    pub coating_resistivity_ohm_m: f64,
    pub internal_pressure_pa: f64,
    pub pressure_margin: f64,
    pub slew_duration_s: f64,
    pub wavelengths_m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub balloon: BalloonSection,
    pub coils: CoilSection,
    pub field: FieldSection,
    pub orbit: OrbitSection,
    pub maneuver: ManeuverSection,
    pub sim: SimSection,
    pub checks: ChecksSection,
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    ScenarioConfig::from_document(&ScenarioDocument::parse(text)?)
}

impl ScenarioConfig {
    pub fn paper_baseline() -> Self {
        parse_scenario(PAPER_BASELINE).expect("bundled baseline scenario is valid")
    }

    pub fn from_document(doc: &ScenarioDocument) -> Result<Self, ScenarioError> {
        let maneuver = maneuver_section(doc)?;
        let balloon = balloon_section(doc)?;
        let coils = coil_section(doc)?;
        let field = field_section(doc)?;
        let orbit = orbit_section(doc)?;
        let sim = SimSection {
            dt_s: doc.positive("sim.dt_s", 0.1)?,
            max_time_s: doc.positive("sim.max_time_s", 1.0e6)?,
            stop_tolerance_rad: doc.positive("sim.stop_tolerance_rad", 1.0e-9)?,
        };
        if sim.max_time_s <= sim.dt_s {
            return Err(doc.err("sim.max_time_s", "must exceed sim.dt_s"));
        }
        let checks = checks_section(doc)?;

        let config = Self {
            balloon,
            coils,
            field,
            orbit,
            maneuver,
            sim,
            checks,
        };
        config.check_consistency(doc)?;
        Ok(config)
    }

    fn check_consistency(&self, doc: &ScenarioDocument) -> Result<(), ScenarioError> {
        if self.maneuver.mode == Mode::Scalar {
            if let InertiaModel::Explicit(_) = self.balloon.inertia_model {
                return Err(doc.err("balloon.inertia_model", "an explicit tensor requires maneuver.mode = 3d"));
            }
        }
        if matches!(self.field, FieldSection::Dipole { .. }) && self.orbit == OrbitSection::None {
            return Err(ScenarioError::invalid("orbit.type", "a dipole field needs an orbit to sample"));
        }
        if self.maneuver.kind == ManeuverKind::Plan {
            let width = match self.maneuver.mode {
                Mode::Scalar => 1,
                Mode::ThreeD => self.coils.count,
            };
            if self.maneuver.segments.is_empty() {
                return Err(ScenarioError::invalid("maneuver.segments", "plan maneuvers need at least one segment"));
            }
            if self.maneuver.segments.iter().any(|s| s.currents.len() != width) {
                return Err(doc.err("maneuver.segments", format!("each segment needs {width} current value(s)")));
            }
        }
        // Build the typed models once so every later accessor is infallible.
        self.body().map_err(|e| doc.err("balloon.inertia_model", e.to_string()))?;
        self.field_model().map_err(|e| doc.err("field.model", e.to_string()))?;
        if let Some(orbit) = self.orbit_model().map_err(|e| doc.err("orbit.type", e.to_string()))? {
            let p = orbit.position(0.0).map_err(|e| doc.err("orbit.type", e.to_string()))?;
            geomag::field_at(&self.field_model().expect("validated above"), &p)
                .map_err(|e| doc.err("field.model", e.to_string()))?;
        }
        Ok(())
    }

    pub fn body(&self) -> Result<BalloonBody, crate::attitude::AttitudeError> {
        BalloonBody::new(self.balloon.mass_kg, self.balloon.radius_m, self.balloon.inertia_model)
    }

    pub fn coil_set(&self) -> CoilSet {
        CoilSet::great_circles(self.balloon.radius_m, self.coils.count, self.coils.turns)
            .expect("coil count and radius validated")
    }

    /// Wire of one great-circle ring (all turns).
    pub fn wire(&self) -> WireSpec {
        WireSpec {
            resistivity_ohm_mm2_per_m: self.coils.resistivity_ohm_mm2_per_m,
            cross_section_mm2: self.coils.cross_section_mm2,
            density_kg_m3: self.coils.density_kg_m3,
            length_m: 2.0 * std::f64::consts::PI * self.balloon.radius_m * self.coils.turns as f64,
        }
    }

    pub fn field_model(&self) -> Result<FieldModel, geomag::FieldError> {
        Ok(match self.field {
            FieldSection::Uniform { magnitude_t, direction } => {
                FieldModel::Uniform(UniformFieldSpec::new(magnitude_t, Vector3::from(direction))?)
            }
            FieldSection::Dipole {
                equatorial_surface_field_t,
                reference_radius_m,
                axis,
            } => FieldModel::Dipole(DipoleFieldSpec::new(
                equatorial_surface_field_t,
                reference_radius_m,
                Vector3::from(axis),
            )?),
        })
    }

    pub fn orbit_model(&self) -> Result<Option<Orbit>, crate::orbit::OrbitError> {
        Ok(match self.orbit {
            OrbitSection::None => None,
            OrbitSection::Circular {
                altitude_m,
                reference_radius_m,
                mu_m3_s2,
                normal,
                phase_deg,
            } => {
                let spec = CircularOrbitSpec {
                    altitude: altitude_m,
                    reference_radius: reference_radius_m,
                    gravitational_parameter: mu_m3_s2,
                    plane_normal: nalgebra::Unit::new_normalize(Vector3::from(normal)),
                    phase: phase_deg.to_radians(),
                };
                spec.validate()?;
                Some(Orbit::Circular(spec))
            }
            OrbitSection::Elliptical {
                perigee_radius_m,
                apogee_radius_m,
                mu_m3_s2,
                raan_deg,
                inclination_deg,
                arg_perigee_deg,
                mean_anomaly_deg,
            } => {
                let spec = EllipticalOrbitSpec {
                    perigee_radius: perigee_radius_m,
                    apogee_radius: apogee_radius_m,
                    gravitational_parameter: mu_m3_s2,
                    raan: raan_deg.to_radians(),
                    inclination: inclination_deg.to_radians(),
                    arg_perigee: arg_perigee_deg.to_radians(),
                    epoch_mean_anomaly: mean_anomaly_deg.to_radians(),
                };
                spec.validate()?;
                Some(Orbit::Elliptical(spec))
            }
        })
    }

    /// Field at the balloon's position at time `t` (origin without an orbit).
    pub fn field_at_time(&self, t: f64) -> Result<FieldSample, crate::Error> {
        let model = self.field_model()?;
        let position = match self.orbit_model()? {
            Some(orbit) => orbit.position(t)?,
            None => Vector3::zeros(),
        };
        Ok(geomag::field_at(&model, &position)?)
    }

    /// Single-ring pendulum parameters with the field sampled at t = 0.
    pub fn pendulum_params(&self) -> Result<PendulumParams, crate::Error> {
        let body = self.body()?;
        let inertia = body
            .scalar_inertia()
            .ok_or_else(|| ScenarioError::invalid("balloon.inertia_model", "scalar inertia required"))?;
        let coil = self.coil_set().coils()[0];
        Ok(PendulumParams {
            current: self.maneuver.current_a,
            area: coil.area * coil.turns as f64,
            field_magnitude: self.field_at_time(0.0)?.magnitude,
            inertia,
        })
    }

    pub fn settings(&self) -> IntegrationSettings {
        IntegrationSettings {
            dt: self.sim.dt_s,
            max_time: self.sim.max_time_s,
            stop_tolerance: self.sim.stop_tolerance_rad,
        }
    }

    pub fn target_rad(&self) -> f64 {
        self.maneuver.target_deg.to_radians()
    }

    pub fn initial_angle_rad(&self) -> f64 {
        self.maneuver.initial_angle_deg.to_radians()
    }

    /// Canonical text form; `parse_scenario(&c.serialize()) == Ok(c)`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let kv = |out: &mut String, key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };

        out.push_str("[balloon]\n");
        kv(&mut out, "mass_kg", num(self.balloon.mass_kg));
        kv(&mut out, "radius_m", num(self.balloon.radius_m));
        match self.balloon.inertia_model {
            InertiaModel::RingAxis => kv(&mut out, "inertia_model", "ring_axis".into()),
            InertiaModel::RingDiameter => kv(&mut out, "inertia_model", "ring_diameter".into()),
            InertiaModel::SphericalShell => kv(&mut out, "inertia_model", "spherical_shell".into()),
            InertiaModel::Explicit(m) => {
                kv(&mut out, "inertia_model", "explicit".into());
                let row_major: Vec<f64> = m.transpose().iter().copied().collect();
                kv(&mut out, "inertia_tensor_kg_m2", list(&row_major));
            }
        }

        out.push_str("\n[coils]\n");
        kv(&mut out, "count", self.coils.count.to_string());
        kv(&mut out, "turns", self.coils.turns.to_string());
        kv(&mut out, "cross_section_mm2", num(self.coils.cross_section_mm2));
        kv(&mut out, "resistivity_ohm_mm2_per_m", num(self.coils.resistivity_ohm_mm2_per_m));
        kv(&mut out, "density_kg_m3", num(self.coils.density_kg_m3));

        out.push_str("\n[field]\n");
        match self.field {
            FieldSection::Uniform { magnitude_t, direction } => {
                kv(&mut out, "model", "uniform".into());
                kv(&mut out, "magnitude_T", num(magnitude_t));
                kv(&mut out, "direction", list(&direction));
            }
            FieldSection::Dipole {
                equatorial_surface_field_t,
                reference_radius_m,
                axis,
            } => {
                kv(&mut out, "model", "dipole".into());
                kv(&mut out, "equatorial_surface_field_T", num(equatorial_surface_field_t));
                kv(&mut out, "reference_radius_m", num(reference_radius_m));
                kv(&mut out, "axis", list(&axis));
            }
        }

        out.push_str("\n[orbit]\n");
        match self.orbit {
            OrbitSection::None => kv(&mut out, "type", "none".into()),
            OrbitSection::Circular {
                altitude_m,
                reference_radius_m,
                mu_m3_s2,
                normal,
                phase_deg,
            } => {
                kv(&mut out, "type", "circular".into());
                kv(&mut out, "altitude_m", num(altitude_m));
                kv(&mut out, "reference_radius_m", num(reference_radius_m));
                kv(&mut out, "mu_m3_s2", num(mu_m3_s2));
                kv(&mut out, "normal", list(&normal));
                kv(&mut out, "phase_deg", num(phase_deg));
            }
            OrbitSection::Elliptical {
                perigee_radius_m,
                apogee_radius_m,
                mu_m3_s2,
                raan_deg,
                inclination_deg,
                arg_perigee_deg,
                mean_anomaly_deg,
            } => {
                kv(&mut out, "type", "elliptical".into());
                kv(&mut out, "perigee_radius_m", num(perigee_radius_m));
                kv(&mut out, "apogee_radius_m", num(apogee_radius_m));
                kv(&mut out, "mu_m3_s2", num(mu_m3_s2));
                kv(&mut out, "raan_deg", num(raan_deg));
                kv(&mut out, "inclination_deg", num(inclination_deg));
                kv(&mut out, "arg_perigee_deg", num(arg_perigee_deg));
                kv(&mut out, "mean_anomaly_deg", num(mean_anomaly_deg));
            }
        }

        let m = &self.maneuver;
        out.push_str("\n[maneuver]\n");
        kv(&mut out, "mode", m.mode.to_string());
        kv(&mut out, "type", m.kind.to_string());
        kv(&mut out, "torque_model", m.torque_model.to_string());
        kv(&mut out, "target_deg", num(m.target_deg));
        kv(&mut out, "current_A", num(m.current_a));
        kv(&mut out, "initial_angle_deg", num(m.initial_angle_deg));
        kv(&mut out, "axis", list(&m.axis));
        if !m.segments.is_empty() {
            let segs: Vec<String> = m
                .segments
                .iter()
                .map(|s| {
                    let currents: Vec<String> = s.currents.iter().map(|c| num(*c)).collect();
                    format!("{}:{}", num(s.duration_s), currents.join("/"))
                })
                .collect();
            kv(&mut out, "segments", segs.join(", "));
        }

        out.push_str("\n[sim]\n");
        kv(&mut out, "dt_s", num(self.sim.dt_s));
        kv(&mut out, "max_time_s", num(self.sim.max_time_s));
        kv(&mut out, "stop_tolerance_rad", num(self.sim.stop_tolerance_rad));

        let c = &self.checks;
        out.push_str("\n[checks]\n");
        kv(&mut out, "pv_watts", num(c.pv_watts));
        kv(&mut out, "coating_thickness_m", num(c.coating_thickness_m));
        kv(&mut out, "coating_resistivity_ohm_m", num(c.coating_resistivity_ohm_m));
        kv(&mut out, "internal_pressure_Pa", num(c.internal_pressure_pa));
        kv(&mut out, "pressure_margin", num(c.pressure_margin));
        kv(&mut out, "slew_duration_s", num(c.slew_duration_s));
        kv(&mut out, "wavelengths_m", list(&c.wavelengths_m));
        out
    }
}

fn num(v: f64) -> String {
    // Shortest representation that parses back to the same bits.
    format!("{v:?}")
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(", ")
}

fn balloon_section(doc: &ScenarioDocument) -> Result<BalloonSection, ScenarioError> {
    let model = match doc.choice(
        "balloon.inertia_model",
        Some("ring_axis"),
        &["ring_axis", "ring_diameter", "spherical_shell", "explicit"],
    )? {
        "ring_axis" => InertiaModel::RingAxis,
        "ring_diameter" => InertiaModel::RingDiameter,
        "spherical_shell" => InertiaModel::SphericalShell,
        _ => {
            let key = "balloon.inertia_tensor_kg_m2";
            let text = doc
                .get(key)
                .ok_or_else(|| ScenarioError::invalid(key, "required when inertia_model = explicit"))?;
            let values = parse_list(text).ok_or_else(|| doc.err(key, "expected comma-separated numbers"))?;
            if values.len() != 9 {
                return Err(doc.err(key, "expected nine row-major components"));
            }
            InertiaModel::Explicit(Matrix3::from_row_slice(&values))
        }
    };
    Ok(BalloonSection {
        mass_kg: doc.positive("balloon.mass_kg", 50.0)?,
        radius_m: doc.positive("balloon.radius_m", 15.0)?,
        inertia_model: model,
    })
}

fn coil_section(doc: &ScenarioDocument) -> Result<CoilSection, ScenarioError> {
    let count = match doc.get("coils.count") {
        None => 3,
        Some(t) => t
            .parse::<usize>()
            .ok()
            .filter(|c| (1..=3).contains(c))
            .ok_or_else(|| doc.err("coils.count", "must be 1, 2 or 3"))?,
    };
    let turns = match doc.get("coils.turns") {
        None => 1,
        Some(t) => t
            .parse::<u32>()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| doc.err("coils.turns", "must be a positive integer"))?,
    };
    Ok(CoilSection {
        count,
        turns,
        cross_section_mm2: doc.positive("coils.cross_section_mm2", 1.0)?,
        resistivity_ohm_mm2_per_m: doc.positive("coils.resistivity_ohm_mm2_per_m", 0.0175)?,
        density_kg_m3: doc.positive("coils.density_kg_m3", 8960.0)?,
    })
}

fn field_section(doc: &ScenarioDocument) -> Result<FieldSection, ScenarioError> {
    Ok(match doc.choice("field.model", Some("uniform"), &["uniform", "dipole"])? {
        "uniform" => FieldSection::Uniform {
            magnitude_t: doc.positive("field.magnitude_T", 1.375e-5)?,
            direction: doc.vector_or("field.direction", [0.0, 0.0, 1.0])?,
        },
        _ => FieldSection::Dipole {
            equatorial_surface_field_t: doc
                .positive("field.equatorial_surface_field_T", geomag::DEFAULT_EQUATORIAL_SURFACE_FIELD)?,
            reference_radius_m: doc.positive("field.reference_radius_m", EARTH_RADIUS)?,
            axis: doc.vector_or("field.axis", [0.0, 0.0, 1.0])?,
        },
    })
}

fn orbit_section(doc: &ScenarioDocument) -> Result<OrbitSection, ScenarioError> {
    Ok(match doc.choice("orbit.type", Some("none"), &["none", "circular", "elliptical"])? {
        "none" => OrbitSection::None,
        "circular" => OrbitSection::Circular {
            altitude_m: doc.positive("orbit.altitude_m", 2.0e6)?,
            reference_radius_m: doc.positive("orbit.reference_radius_m", EARTH_RADIUS)?,
            mu_m3_s2: doc.positive("orbit.mu_m3_s2", EARTH_MU)?,
            normal: doc.vector_or("orbit.normal", [0.0, 0.0, 1.0])?,
            phase_deg: doc.f64_or("orbit.phase_deg", 0.0)?,
        },
        _ => {
            let perigee = doc.positive("orbit.perigee_radius_m", 11_371_000.0)?;
            let apogee = doc.positive("orbit.apogee_radius_m", 46_371_000.0)?;
            if apogee < perigee {
                return Err(doc.err("orbit.apogee_radius_m", "must be at least orbit.perigee_radius_m"));
            }
            OrbitSection::Elliptical {
                perigee_radius_m: perigee,
                apogee_radius_m: apogee,
                mu_m3_s2: doc.positive("orbit.mu_m3_s2", EARTH_MU)?,
                raan_deg: doc.f64_or("orbit.raan_deg", 0.0)?,
                inclination_deg: doc.f64_or("orbit.inclination_deg", 0.0)?,
                arg_perigee_deg: doc.f64_or("orbit.arg_perigee_deg", 0.0)?,
                mean_anomaly_deg: doc.f64_or("orbit.mean_anomaly_deg", 0.0)?,
            }
        }
    })
}

fn maneuver_section(doc: &ScenarioDocument) -> Result<ManeuverSection, ScenarioError> {
    let kind = match doc.choice("maneuver.type", None, &["constant", "bang_bang", "plan"])? {
        "constant" => ManeuverKind::Constant,
        "bang_bang" => ManeuverKind::BangBang,
        _ => ManeuverKind::Plan,
    };
    let mode = match doc.choice("maneuver.mode", Some("scalar"), &["scalar", "3d"])? {
        "scalar" => Mode::Scalar,
        _ => Mode::ThreeD,
    };
    let torque_model = match doc.choice("maneuver.torque_model", Some("nonlinear"), &["nonlinear", "constant"])? {
        "nonlinear" => TorqueModel::Nonlinear,
        _ => TorqueModel::Constant,
    };
    let segments = match doc.get("maneuver.segments") {
        None => Vec::new(),
        Some(text) => parse_segments(text).ok_or_else(|| {
            doc.err(
                "maneuver.segments",
                "expected `duration_s:current[/current...]` entries separated by commas",
            )
        })?,
    };
    Ok(ManeuverSection {
        mode,
        kind,
        torque_model,
        target_deg: doc.non_negative("maneuver.target_deg", 30.0)?,
        current_a: doc.non_negative("maneuver.current_A", 1.0)?,
        initial_angle_deg: doc.f64_or("maneuver.initial_angle_deg", 90.0)?,
        axis: doc.vector_or("maneuver.axis", [1.0, 0.0, 0.0])?,
        segments,
    })
}

fn parse_segments(text: &str) -> Option<Vec<Segment>> {
    text.split(',')
        .map(|entry| {
            let (duration, currents) = entry.split_once(':')?;
            let duration_s = parse_f64(duration).filter(|d| *d > 0.0)?;
            let currents = currents.split('/').map(parse_f64).collect::<Option<Vec<_>>>()?;
            Some(Segment { duration_s, currents })
        })
        .collect()
}

fn checks_section(doc: &ScenarioDocument) -> Result<ChecksSection, ScenarioError> {
    let margin = doc.f64_or("checks.pressure_margin", 10.0)?;
    if !(margin >= 1.0) {
        return Err(doc.err("checks.pressure_margin", "must be at least 1"));
    }
    let wavelengths_m = match doc.get("checks.wavelengths_m") {
        None => vec![0.0135, 0.06, 0.18, 0.92],
        Some(text) => parse_list(text)
            .filter(|v| !v.is_empty() && v.iter().all(|w| *w > 0.0))
            .ok_or_else(|| doc.err("checks.wavelengths_m", "expected positive comma-separated wavelengths"))?,
    };
    Ok(ChecksSection {
        pv_watts: doc.non_negative("checks.pv_watts", 5.0)?,
        coating_thickness_m: doc.positive("checks.coating_thickness_m", 1.0e-6)?,
        coating_resistivity_ohm_m: doc.positive("checks.coating_resistivity_ohm_m", 1.75e-8)?,
        internal_pressure_pa: doc.non_negative("checks.internal_pressure_Pa", 1.0e-3)?,
        pressure_margin: margin,
        slew_duration_s: doc.positive("checks.slew_duration_s", 600.0)?,
        wavelengths_m,
    })
}
