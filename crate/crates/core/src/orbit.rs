//! Two-body Keplerian propagation for circular and elliptical orbits.

use std::f64::consts::{PI, TAU};

use nalgebra::{Rotation3, Unit, Vector3};
use thiserror::Error;

use crate::geomag::EARTH_RADIUS;

/// Earth gravitational parameter (m^3/s^2).
pub const EARTH_MU: f64 = 3.986_004_418e14;

const KEPLER_MAX_ITER: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("Kepler solver did not converge for M = {mean_anomaly}, e = {eccentricity}")]
    NoConvergence { mean_anomaly: f64, eccentricity: f64 },
    #[error("invalid orbit: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularOrbitSpec {
    /// Height above `reference_radius` (m).
    pub altitude: f64,
    pub reference_radius: f64,
    pub gravitational_parameter: f64,
    pub plane_normal: Unit<Vector3<f64>>,
    /// Argument of latitude at t = 0 (rad).
    pub phase: f64,
}

impl CircularOrbitSpec {
    pub fn new(altitude: f64) -> Result<Self, OrbitError> {
        let spec = Self {
            altitude,
            reference_radius: EARTH_RADIUS,
            gravitational_parameter: EARTH_MU,
            plane_normal: Vector3::z_axis(),
            phase: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), OrbitError> {
        if !(self.altitude > 0.0) {
            return Err(OrbitError::InvalidSpec("altitude must be positive"));
        }
        if !(self.reference_radius > 0.0) {
            return Err(OrbitError::InvalidSpec("reference radius must be positive"));
        }
        if !(self.gravitational_parameter > 0.0) {
            return Err(OrbitError::InvalidSpec("gravitational parameter must be positive"));
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        self.reference_radius + self.altitude
    }

    /// Angular rate sqrt(mu / r^3) (rad/s).
    pub fn mean_motion(&self) -> f64 {
        (self.gravitational_parameter / self.radius().powi(3)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticalOrbitSpec {
    pub perigee_radius: f64,
    pub apogee_radius: f64,
    pub gravitational_parameter: f64,
    pub raan: f64,
    pub inclination: f64,
    pub arg_perigee: f64,
    /// Mean anomaly at t = 0 (rad).
    pub epoch_mean_anomaly: f64,
}

impl EllipticalOrbitSpec {
    /// Equatorial orbit starting at perigee.
    pub fn new(perigee_radius: f64, apogee_radius: f64) -> Result<Self, OrbitError> {
        let spec = Self {
            perigee_radius,
            apogee_radius,
            gravitational_parameter: EARTH_MU,
            raan: 0.0,
            inclination: 0.0,
            arg_perigee: 0.0,
            epoch_mean_anomaly: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), OrbitError> {
        if !(self.perigee_radius > 0.0) {
            return Err(OrbitError::InvalidSpec("perigee radius must be positive"));
        }
        if !(self.apogee_radius >= self.perigee_radius) {
            return Err(OrbitError::InvalidSpec("apogee radius must be at least the perigee radius"));
        }
        if !(self.gravitational_parameter > 0.0) {
            return Err(OrbitError::InvalidSpec("gravitational parameter must be positive"));
        }
        Ok(())
    }

    pub fn semi_major_axis(&self) -> f64 {
        0.5 * (self.perigee_radius + self.apogee_radius)
    }

    pub fn eccentricity(&self) -> f64 {
        (self.apogee_radius - self.perigee_radius) / (self.apogee_radius + self.perigee_radius)
    }

    pub fn mean_motion(&self) -> f64 {
        (self.gravitational_parameter / self.semi_major_axis().powi(3)).sqrt()
    }

    fn perifocal_to_inertial(&self) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Vector3::z_axis(), self.raan)
            * Rotation3::from_axis_angle(&Vector3::x_axis(), self.inclination)
            * Rotation3::from_axis_angle(&Vector3::z_axis(), self.arg_perigee)
    }

    /// Position for a given eccentric anomaly.
    pub fn position_at_eccentric_anomaly(&self, eccentric_anomaly: f64) -> Vector3<f64> {
        let a = self.semi_major_axis();
        let e = self.eccentricity();
        let b = a * (1.0 - e * e).sqrt();
        let (s, c) = eccentric_anomaly.sin_cos();
        self.perifocal_to_inertial() * Vector3::new(a * (c - e), b * s, 0.0)
    }
}

/// Either orbit shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Orbit {
    Circular(CircularOrbitSpec),
    Elliptical(EllipticalOrbitSpec),
}

impl Orbit {
    pub fn position(&self, t: f64) -> Result<Vector3<f64>, OrbitError> {
        match self {
            Orbit::Circular(spec) => Ok(circular_position(spec, t)),
            Orbit::Elliptical(spec) => propagate_elliptical(spec, t),
        }
    }

    pub fn period(&self) -> f64 {
        orbital_period(self)
    }
}

/// Orthonormal in-plane basis `(p, q)` with `p x q = normal`.
pub(crate) fn plane_basis(normal: &Unit<Vector3<f64>>) -> (Vector3<f64>, Vector3<f64>) {
    let n = normal.into_inner();
    let reference = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let p = (reference - n * reference.dot(&n)).normalize();
    let q = n.cross(&p);
    (p, q)
}

pub fn circular_position(spec: &CircularOrbitSpec, t: f64) -> Vector3<f64> {
    let (p, q) = plane_basis(&spec.plane_normal);
    let (s, c) = (spec.phase + spec.mean_motion() * t).sin_cos();
    (p * c + q * s) * spec.radius()
}

/// Solves Kepler's equation `E - e sin E = M` by damped Newton iteration
/// starting from `E = M`.
pub fn solve_kepler(mean_anomaly: f64, eccentricity: f64) -> Result<f64, OrbitError> {
    if !(0.0..1.0).contains(&eccentricity) || !mean_anomaly.is_finite() {
        return Err(OrbitError::InvalidSpec("eccentricity must lie in [0, 1)"));
    }
    // Reduce to (-pi, pi] so the iteration sees a bounded problem.
    let turns = ((mean_anomaly + PI) / TAU).floor();
    let m = mean_anomaly - turns * TAU;
    let offset = turns * TAU;

    let mut e_anom = m;
    for _ in 0..KEPLER_MAX_ITER {
        let f = e_anom - eccentricity * e_anom.sin() - m;
        if f.abs() < 1e-14 {
            return Ok(e_anom + offset);
        }
        let fp = 1.0 - eccentricity * e_anom.cos();
        let step = (f / fp).clamp(-1.0, 1.0);
        e_anom -= step;
        if step.abs() < 1e-15 {
            return Ok(e_anom + offset);
        }
    }
    let residual = e_anom - eccentricity * e_anom.sin() - m;
    if residual.abs() < 1e-12 {
        Ok(e_anom + offset)
    } else {
        Err(OrbitError::NoConvergence {
            mean_anomaly,
            eccentricity,
        })
    }
}

pub fn propagate_elliptical(spec: &EllipticalOrbitSpec, t: f64) -> Result<Vector3<f64>, OrbitError> {
    let mean_anomaly = spec.epoch_mean_anomaly + spec.mean_motion() * t;
    let e_anom = solve_kepler(mean_anomaly, spec.eccentricity())?;
    Ok(spec.position_at_eccentric_anomaly(e_anom))
}

/// `2 pi sqrt(a^3 / mu)`.
pub fn orbital_period(orbit: &Orbit) -> f64 {
    let n = match orbit {
        Orbit::Circular(spec) => spec.mean_motion(),
        Orbit::Elliptical(spec) => spec.mean_motion(),
    };
    TAU / n
}
