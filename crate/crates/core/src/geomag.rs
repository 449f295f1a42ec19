//! Magnetic field models: a uniform field and a centered Earth dipole.
//!
//! All vectors live in one non-rotating inertial frame. The dipole axis is the
//! direction of the magnetic north pole, so the field at the magnetic equator
//! points along the axis (as Earth's does) and the dipole moment itself is
//! anti-parallel to it.

use nalgebra::{Unit, Vector3};
use thiserror::Error;

/// Earth mean radius (m).
pub const EARTH_RADIUS: f64 = 6_371_000.0;

/// Equatorial surface field that puts 1.375e-5 T at 2000 km altitude.
pub const DEFAULT_EQUATORIAL_SURFACE_FIELD: f64 = 3.12e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("position radius {radius} m is inside 0.5 x reference radius {limit} m")]
    PositionTooDeep { radius: f64, limit: f64 },
    #[error("invalid field model: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformFieldSpec {
    /// Field strength (T).
    pub magnitude: f64,
    pub direction: Unit<Vector3<f64>>,
}

impl UniformFieldSpec {
    pub fn new(magnitude: f64, direction: Vector3<f64>) -> Result<Self, FieldError> {
        if !(magnitude > 0.0 && magnitude.is_finite()) {
            return Err(FieldError::InvalidSpec("uniform magnitude must be positive"));
        }
        let direction = Unit::try_new(direction, 1e-300)
            .ok_or(FieldError::InvalidSpec("uniform direction must be non-zero"))?;
        Ok(Self { magnitude, direction })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleFieldSpec {
    /// Field magnitude on the magnetic equator at `reference_radius` (T).
    pub equatorial_surface_field: f64,
    /// Radius at which `equatorial_surface_field` applies (m).
    pub reference_radius: f64,
    /// Magnetic north pole direction.
    pub dipole_axis: Unit<Vector3<f64>>,
}

impl Default for DipoleFieldSpec {
    fn default() -> Self {
        Self {
            equatorial_surface_field: DEFAULT_EQUATORIAL_SURFACE_FIELD,
            reference_radius: EARTH_RADIUS,
            dipole_axis: Vector3::z_axis(),
        }
    }
}

impl DipoleFieldSpec {
    pub fn new(
        equatorial_surface_field: f64,
        reference_radius: f64,
        dipole_axis: Vector3<f64>,
    ) -> Result<Self, FieldError> {
        if !(equatorial_surface_field > 0.0 && equatorial_surface_field.is_finite()) {
            return Err(FieldError::InvalidSpec("equatorial surface field must be positive"));
        }
        if !(reference_radius > 0.0 && reference_radius.is_finite()) {
            return Err(FieldError::InvalidSpec("reference radius must be positive"));
        }
        let dipole_axis = Unit::try_new(dipole_axis, 1e-300)
            .ok_or(FieldError::InvalidSpec("dipole axis must be non-zero"))?;
        Ok(Self {
            equatorial_surface_field,
            reference_radius,
            dipole_axis,
        })
    }
}

/// Either supported field model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldModel {
    Uniform(UniformFieldSpec),
    Dipole(DipoleFieldSpec),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    /// Field vector (T).
    pub b: Vector3<f64>,
    /// |b| (T).
    pub magnitude: f64,
}

impl FieldSample {
    fn from_vector(b: Vector3<f64>) -> Self {
        Self { b, magnitude: b.norm() }
    }
}

pub fn uniform_field(spec: &UniformFieldSpec, _position: &Vector3<f64>) -> FieldSample {
    FieldSample {
        b: spec.direction.into_inner() * spec.magnitude,
        magnitude: spec.magnitude,
    }
}

/// Point-dipole field `B = B0 (R/r)^3 [d - 3 (d.r) r]` with `d` the north
/// pole direction and `r` the unit position.
///
/// With `c` the cosine of the polar angle between `d` and the position, the
/// magnitude is `B0 (R/r)^3 sqrt(1 + 3 c^2)`: `B0 (R/r)^3` on the equator and
/// twice that over either pole.
pub fn dipole_field(spec: &DipoleFieldSpec, position: &Vector3<f64>) -> Result<FieldSample, FieldError> {
    let radius = position.norm();
    let limit = 0.5 * spec.reference_radius;
    if !(radius > limit) {
        return Err(FieldError::PositionTooDeep { radius, limit });
    }
    let r_hat = position / radius;
    let d = spec.dipole_axis.into_inner();
    let scale = spec.equatorial_surface_field * (spec.reference_radius / radius).powi(3);
    let b = (d - r_hat * (3.0 * d.dot(&r_hat))) * scale;
    Ok(FieldSample::from_vector(b))
}

pub fn field_at(model: &FieldModel, position: &Vector3<f64>) -> Result<FieldSample, FieldError> {
    match model {
        FieldModel::Uniform(spec) => Ok(uniform_field(spec, position)),
        FieldModel::Dipole(spec) => dipole_field(spec, position),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn equator(r: f64) -> Vector3<f64> {
        Vector3::new(r, 0.0, 0.0)
    }

    #[test]
    fn uniform_value_and_position_independence() {
        let spec = UniformFieldSpec::new(1.375e-5, Vector3::z()).unwrap();
        let a = uniform_field(&spec, &Vector3::new(1.0, 2.0, 3.0));
        let b = uniform_field(&spec, &Vector3::new(-7e6, 0.0, 4e5));
        assert_eq!(a.b, Vector3::new(0.0, 0.0, 1.375e-5));
        assert_eq!(a, b);

        let spec = UniformFieldSpec::new(2.75e-5, Vector3::x()).unwrap();
        assert_eq!(uniform_field(&spec, &Vector3::zeros()).magnitude, 2.75e-5);
    }

    #[test]
    fn dipole_reproduces_2000_km_datum() {
        let spec = DipoleFieldSpec::default();
        let s = dipole_field(&spec, &equator(8_371_000.0)).unwrap();
        // 3.12e-5 * (6371/8371)^3
        let expected = 1.375_451_823_692_368_3e-5;
        assert!((s.magnitude - expected).abs() / expected < 1e-12);
        assert!((s.magnitude - 1.375e-5).abs() / 1.375e-5 < 0.005);
        // Equatorial field points north.
        assert!(s.b.z > 0.0 && s.b.x.abs() < 1e-20);
    }

    #[test]
    fn dipole_ratios() {
        let spec = DipoleFieldSpec::default();
        let r = 8_371_000.0;
        let eq = dipole_field(&spec, &equator(r)).unwrap().magnitude;
        let eq2 = dipole_field(&spec, &equator(2.0 * r)).unwrap().magnitude;
        assert!((eq2 / eq - 0.125).abs() < 1e-12);
        let pole = dipole_field(&spec, &Vector3::new(0.0, 0.0, r)).unwrap().magnitude;
        assert!((pole / eq - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dipole_rejects_deep_positions() {
        let spec = DipoleFieldSpec::default();
        let err = dipole_field(&spec, &equator(0.4 * EARTH_RADIUS)).unwrap_err();
        assert!(matches!(err, FieldError::PositionTooDeep { .. }));
        assert!(dipole_field(&spec, &Vector3::zeros()).is_err());
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let u = UniformFieldSpec::new(1.375e-5, Vector3::z()).unwrap();
        let d = DipoleFieldSpec::default();
        let p = equator(8_371_000.0);
        assert_eq!(field_at(&FieldModel::Uniform(u), &p).unwrap(), uniform_field(&u, &p));
        assert_eq!(field_at(&FieldModel::Dipole(d), &p).unwrap(), dipole_field(&d, &p).unwrap());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(UniformFieldSpec::new(0.0, Vector3::z()).is_err());
        assert!(UniformFieldSpec::new(1.0, Vector3::zeros()).is_err());
        assert!(DipoleFieldSpec::new(-1.0, EARTH_RADIUS, Vector3::z()).is_err());
        assert!(DipoleFieldSpec::new(1.0, 0.0, Vector3::z()).is_err());
    }

    fn direction() -> impl Strategy<Value = Vector3<f64>> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
    }

    proptest! {
        #[test]
        fn uniform_is_position_independent(x in -1e8f64..1e8, y in -1e8f64..1e8, z in -1e8f64..1e8) {
            let spec = UniformFieldSpec::new(1.375e-5, Vector3::new(1.0, 2.0, -0.5)).unwrap();
            let s = uniform_field(&spec, &Vector3::new(x, y, z));
            prop_assert_eq!(s, uniform_field(&spec, &Vector3::zeros()));
            prop_assert!((s.magnitude - s.b.norm()).abs() <= 1e-12 * s.magnitude);
        }

        #[test]
        fn dipole_inverse_cube(dir in direction(), r in 4.0e6f64..5.0e7, scale in 1.1f64..5.0) {
            let spec = DipoleFieldSpec::default();
            let a = dipole_field(&spec, &(dir * r)).unwrap().magnitude;
            let b = dipole_field(&spec, &(dir * r * scale)).unwrap().magnitude;
            prop_assert!((a / b - scale.powi(3)).abs() <= 1e-12 * scale.powi(3));
        }

        #[test]
        fn dipole_is_divergence_free(dir in direction(), r in 7.0e6f64..4.0e7) {
            let spec = DipoleFieldSpec::default();
            let p = dir * r;
            let h = 1000.0;
            let mut div = 0.0;
            for axis in 0..3 {
                let mut e = Vector3::zeros();
                e[axis] = h;
                let plus = dipole_field(&spec, &(p + e)).unwrap().b[axis];
                let minus = dipole_field(&spec, &(p - e)).unwrap().b[axis];
                div += (plus - minus) / (2.0 * h);
            }
            let b = dipole_field(&spec, &p).unwrap().magnitude;
            prop_assert!(div.abs() < 1e-6 * b / h);
        }
    }
}
