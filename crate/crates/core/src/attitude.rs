//! Rotational dynamics of the balloon under magnetic torque.
//!
//! Two models live here. The scalar one treats a single ring as a magnetic
//! pendulum, `I theta'' = -i A B sin(theta)`, where `theta` is the angle
//! between the ring NORMAL and the field; the angle between the field and the
//! ring plane is its complement. The 3-D one integrates quaternion kinematics
//! and Euler's equations for up to three orthogonal rings.

use nalgebra::{Matrix3, Quaternion, SVector, Unit, UnitQuaternion, Vector3};
use thiserror::Error;

use crate::geomag::FieldSample;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttitudeError {
    #[error("{currents} currents given for {coils} coils")]
    CountMismatch { coils: usize, currents: usize },
    #[error("coil produces no torque (zero current, area or field)")]
    InactiveCoil,
    #[error("inertia tensor is singular or not positive definite")]
    SingularInertia,
    #[error("quaternion has zero norm")]
    ZeroQuaternion,
    #[error("invalid balloon body: {0}")]
    InvalidBody(&'static str),
    #[error("invalid coil set: {0}")]
    InvalidCoils(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InertiaModel {
    /// Mass on a ring, spun about the ring axis: `m R^2`.
    RingAxis,
    /// Mass on a ring, tilted about a diameter: `m R^2 / 2`.
    RingDiameter,
    /// Thin spherical shell: `2 m R^2 / 3`.
    SphericalShell,
    /// Full body-frame tensor (kg m^2).
    Explicit(Matrix3<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalloonBody {
    pub mass: f64,
    pub radius: f64,
    pub inertia_model: InertiaModel,
}

impl BalloonBody {
    pub fn new(mass: f64, radius: f64, inertia_model: InertiaModel) -> Result<Self, AttitudeError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(AttitudeError::InvalidBody("mass must be positive"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(AttitudeError::InvalidBody("radius must be positive"));
        }
        let body = Self {
            mass,
            radius,
            inertia_model,
        };
        if let InertiaModel::Explicit(_) = inertia_model {
            body.rigid_body()?;
        }
        Ok(body)
    }

    /// Scalar moment of inertia, `None` for an explicit tensor.
    pub fn scalar_inertia(&self) -> Option<f64> {
        let mr2 = self.mass * self.radius * self.radius;
        match self.inertia_model {
            InertiaModel::RingAxis => Some(mr2),
            InertiaModel::RingDiameter => Some(0.5 * mr2),
            InertiaModel::SphericalShell => Some(2.0 * mr2 / 3.0),
            InertiaModel::Explicit(_) => None,
        }
    }

    /// Body-frame tensor; scalar models become isotropic.
    pub fn inertia_tensor(&self) -> Matrix3<f64> {
        match self.inertia_model {
            InertiaModel::Explicit(m) => m,
            _ => Matrix3::identity() * self.scalar_inertia().unwrap_or_default(),
        }
    }

    pub fn rigid_body(&self) -> Result<RigidBody, AttitudeError> {
        RigidBody::new(self.inertia_tensor())
    }
}

/// Inertia tensor with its precomputed inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBody {
    pub inertia: Matrix3<f64>,
    pub inverse: Matrix3<f64>,
}

impl RigidBody {
    pub fn new(inertia: Matrix3<f64>) -> Result<Self, AttitudeError> {
        let symmetric = (inertia - inertia.transpose()).norm() <= 1e-9 * inertia.norm();
        if !symmetric || inertia.cholesky().is_none() {
            return Err(AttitudeError::SingularInertia);
        }
        let inverse = inertia.try_inverse().ok_or(AttitudeError::SingularInertia)?;
        Ok(Self { inertia, inverse })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coil {
    /// Enclosed area (m^2).
    pub area: f64,
    /// Body-frame normal.
    pub normal: Unit<Vector3<f64>>,
    pub turns: u32,
}

/// One to three current loops fixed in the body.
#[derive(Debug, Clone, PartialEq)]
pub struct CoilSet {
    coils: Vec<Coil>,
}

impl CoilSet {
    pub fn new(coils: Vec<Coil>) -> Result<Self, AttitudeError> {
        if coils.is_empty() || coils.len() > 3 {
            return Err(AttitudeError::InvalidCoils(format!(
                "expected 1 to 3 coils, got {}",
                coils.len()
            )));
        }
        for c in &coils {
            if !(c.area > 0.0 && c.area.is_finite()) || c.turns == 0 {
                return Err(AttitudeError::InvalidCoils("area and turns must be positive".into()));
            }
        }
        if coils.len() == 3 {
            for i in 0..3 {
                for j in i + 1..3 {
                    let d = coils[i].normal.dot(&coils[j].normal);
                    if d.abs() >= 1e-9 {
                        return Err(AttitudeError::InvalidCoils(format!(
                            "coils {} and {} are not orthogonal (dot = {d})",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(Self { coils })
    }

    /// `count` great-circle rings of the given sphere radius with normals
    /// along body x, y, z in that order.
    pub fn great_circles(radius: f64, count: usize, turns: u32) -> Result<Self, AttitudeError> {
        if count == 0 || count > 3 {
            return Err(AttitudeError::InvalidCoils(format!("expected 1 to 3 coils, got {count}")));
        }
        let axes = [Vector3::x_axis(), Vector3::y_axis(), Vector3::z_axis()];
        let area = std::f64::consts::PI * radius * radius;
        Self::new(
            axes.iter()
                .take(count)
                .map(|&normal| Coil { area, normal, turns })
                .collect(),
        )
    }

    pub fn coils(&self) -> &[Coil] {
        &self.coils
    }

    pub fn len(&self) -> usize {
        self.coils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coils.is_empty()
    }

    /// Body-frame moment `sum_j turns_j i_j A_j n_j`.
    pub fn body_moment(&self, currents: &[f64]) -> Result<Vector3<f64>, AttitudeError> {
        if currents.len() != self.coils.len() {
            return Err(AttitudeError::CountMismatch {
                coils: self.coils.len(),
                currents: currents.len(),
            });
        }
        Ok(self
            .coils
            .iter()
            .zip(currents)
            .map(|(c, &i)| c.normal.into_inner() * (i * c.area * c.turns as f64))
            .sum())
    }
}

/// Inertial-frame magnetic moment (A m^2) of the coil set at `orientation`
/// (body to inertial).
pub fn magnetic_moment(
    coils: &CoilSet,
    currents: &[f64],
    orientation: &UnitQuaternion<f64>,
) -> Result<Vector3<f64>, AttitudeError> {
    Ok(orientation * coils.body_moment(currents)?)
}

/// `m x B` (N m).
pub fn magnetic_torque(moment: &Vector3<f64>, field: &Vector3<f64>) -> Vector3<f64> {
    moment.cross(field)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    /// Ring current (A).
    pub current: f64,
    /// Ring area (m^2).
    pub area: f64,
    /// |B| (T).
    pub field_magnitude: f64,
    /// Moment of inertia about the tilt axis (kg m^2).
    pub inertia: f64,
}

impl PendulumParams {
    /// The single-ring configuration: 1 A in a 15 m great circle, 1.375e-5 T,
    /// 50 kg on the rim.
    pub fn baseline() -> Self {
        Self {
            current: 1.0,
            area: std::f64::consts::PI * 15.0 * 15.0,
            field_magnitude: 1.375e-5,
            inertia: 50.0 * 15.0 * 15.0,
        }
    }

    pub fn with_current(self, current: f64) -> Self {
        Self { current, ..self }
    }

    /// Torque coefficient `k = i A B / I` (rad/s^2).
    pub fn torque_coefficient(&self) -> f64 {
        self.current * self.area * self.field_magnitude / self.inertia
    }

    fn active_k(&self) -> Result<f64, AttitudeError> {
        let k = self.torque_coefficient();
        if k == 0.0 || !k.is_finite() {
            Err(AttitudeError::InactiveCoil)
        } else {
            Ok(k.abs())
        }
    }

    /// `E = I w^2 / 2 - i A B cos(theta)`.
    pub fn energy(&self, state: &ScalarAttitudeState) -> f64 {
        0.5 * self.inertia * state.theta_dot * state.theta_dot
            - self.current * self.area * self.field_magnitude * state.theta.cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarAttitudeState {
    /// Angle between the ring normal and B (rad).
    pub theta: f64,
    pub theta_dot: f64,
    pub time: f64,
}

impl ScalarAttitudeState {
    /// Angle between B and the ring plane.
    pub fn plane_angle(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 - self.theta
    }
}

/// `(theta', theta'')` with `theta'' = -k sin(theta)`.
pub fn pendulum_rhs(state: &ScalarAttitudeState, params: &PendulumParams) -> (f64, f64) {
    (state.theta_dot, -params.torque_coefficient() * state.theta.sin())
}

/// Constant-torque rotation from rest: `k t^2 / 2`.
pub fn small_angle_theta(t: f64, params: &PendulumParams) -> f64 {
    0.5 * params.torque_coefficient() * t * t
}

/// Time to turn `theta_target` from rest under constant torque.
pub fn small_angle_slew_time(theta_target: f64, params: &PendulumParams) -> Result<f64, AttitudeError> {
    let k = params.active_k()?;
    Ok((2.0 * theta_target / k).sqrt())
}

/// Rate reached at `theta_target`: `sqrt(2 k theta)`.
pub fn final_slew_rate(theta_target: f64, params: &PendulumParams) -> Result<f64, AttitudeError> {
    let k = params.active_k()?;
    Ok((2.0 * k * theta_target).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeState3D {
    /// Body-to-inertial rotation; unit length after every accepted step.
    pub orientation: Quaternion<f64>,
    /// Body-frame angular velocity (rad/s).
    pub omega_body: Vector3<f64>,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative3D {
    pub orientation_dot: Quaternion<f64>,
    pub omega_dot: Vector3<f64>,
}

impl AttitudeState3D {
    pub fn at_rest(orientation: UnitQuaternion<f64>, time: f64) -> Self {
        Self {
            orientation: orientation.into_inner(),
            omega_body: Vector3::zeros(),
            time,
        }
    }

    pub fn unit_orientation(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::new_normalize(self.orientation)
    }

    /// Packs as `[w, x, y, z, wx, wy, wz]`.
    pub fn to_vector(&self) -> SVector<f64, 7> {
        let q = &self.orientation;
        SVector::<f64, 7>::from_column_slice(&[
            q.w,
            q.i,
            q.j,
            q.k,
            self.omega_body.x,
            self.omega_body.y,
            self.omega_body.z,
        ])
    }

    pub fn from_slice(v: &[f64], time: f64) -> Self {
        Self {
            orientation: Quaternion::new(v[0], v[1], v[2], v[3]),
            omega_body: Vector3::new(v[4], v[5], v[6]),
            time,
        }
    }

    /// Inertial angular momentum `R I w`.
    pub fn angular_momentum(&self, body: &RigidBody) -> Vector3<f64> {
        self.unit_orientation() * (body.inertia * self.omega_body)
    }
}

/// Quaternion kinematics `q' = q (0, w) / 2` and Euler's equations
/// `I w' = tau - w x (I w)` with the magnetic torque in body axes.
pub fn body_rhs_3d(
    state: &AttitudeState3D,
    body: &RigidBody,
    coils: &CoilSet,
    currents: &[f64],
    field: &FieldSample,
) -> Result<StateDerivative3D, AttitudeError> {
    let moment_body = coils.body_moment(currents)?;
    let attitude = state.unit_orientation();
    let field_body = attitude.inverse_transform_vector(&field.b);
    Ok(rigid_body_rhs(
        state,
        body,
        &magnetic_torque(&moment_body, &field_body),
    ))
}

/// Rigid-body derivative for an already computed body-frame torque.
pub fn rigid_body_rhs(state: &AttitudeState3D, body: &RigidBody, torque_body: &Vector3<f64>) -> StateDerivative3D {
    let w = state.omega_body;
    let orientation_dot = state.orientation * Quaternion::from_imag(w) * 0.5;
    let omega_dot = body.inverse * (torque_body - w.cross(&(body.inertia * w)));
    StateDerivative3D {
        orientation_dot,
        omega_dot,
    }
}

pub fn renormalize(state: &AttitudeState3D) -> Result<AttitudeState3D, AttitudeError> {
    let n = state.orientation.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(AttitudeError::ZeroQuaternion);
    }
    Ok(AttitudeState3D {
        orientation: state.orientation / n,
        ..*state
    })
}
