//! Slew planning and simulation.
//!
//! Plans come from the constant-torque closed forms; simulations integrate
//! the full dynamics and report what actually happened. Fields are sampled
//! from the orbit position at each evaluation time (orbit drives field drives
//! torque, never the reverse).

use std::fmt;

use nalgebra::{SVector, UnitQuaternion, Vector3};

use crate::attitude::{
    body_rhs_3d, final_slew_rate, magnetic_torque, rigid_body_rhs, small_angle_slew_time, AttitudeError,
    AttitudeState3D, CoilSet, PendulumParams, RigidBody,
};
use crate::coilbudget::coil_resistance;
use crate::error::{Error, Result};
use crate::geomag::{dipole_field, field_at, DipoleFieldSpec, FieldModel, FieldSample};
use crate::odesolve::{integrate, IntegrationSettings, OdeSystem, Sample, StopReason, Trajectory};
use crate::orbit::{plane_basis, EllipticalOrbitSpec, Orbit};
use crate::scenario::{ManeuverKind, Mode, ScenarioConfig, Segment, TorqueModel};
use crate::telemetry::TimeSeriesRecord;

/// Relative tolerance on achieved rotation for a run to count as passing.
pub const ROTATION_TOLERANCE: f64 = 0.02;

/// Below this |B x axis| / |B| the commanded axis counts as parallel to B.
const UNDERACTUATED_SINE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverPlan {
    pub segments: Vec<Segment>,
    /// Rotation predicted at the end of the last segment (rad).
    pub predicted_final_angle: f64,
    pub predicted_final_rate: f64,
    /// `sum R i^2 duration` over segments (J).
    pub ohmic_energy: f64,
    /// Peak rotational kinetic energy along the plan (J).
    pub mechanical_energy: f64,
}

impl ManeuverPlan {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    fn empty() -> Self {
        Self {
            segments: Vec::new(),
            predicted_final_angle: 0.0,
            predicted_final_rate: 0.0,
            ohmic_energy: 0.0,
            mechanical_energy: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    MaxTimeExceeded,
    Underactuated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManeuverSummary {
    pub mode: Mode,
    pub kind: ManeuverKind,
    pub status: RunStatus,
    pub target: f64,
    /// Scalar: |theta - theta0|. 3-D with three coils: rotation about the
    /// commanded axis. 3-D otherwise: total rotation angle.
    pub achieved_rotation: f64,
    pub elapsed: f64,
    pub residual_rate: f64,
    /// Final angle between (coil 1) normal and B.
    pub final_theta: f64,
    pub peak_torque: f64,
    pub ohmic_energy: f64,
    pub peak_kinetic_energy: f64,
    pub underactuated: bool,
    pub pass: bool,
}

impl ManeuverSummary {
    fn judge(&mut self) {
        let close = if self.target == 0.0 {
            self.achieved_rotation == 0.0
        } else {
            ((self.achieved_rotation - self.target) / self.target).abs() <= ROTATION_TOLERANCE
        };
        self.pass = self.status == RunStatus::Completed && close;
    }
}

/// A simulated maneuver: per-sample records, the summary, and for 3-D runs
/// the raw attitude states.
#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverRun {
    pub records: Vec<TimeSeriesRecord>,
    pub summary: ManeuverSummary,
    pub attitude: Vec<AttitudeState3D>,
}

/// Coil currents `i_j = (m . n_j) / (turns_j A_j)` realizing a body-frame
/// moment. Fails when the moment has a component outside the coils' span.
pub fn decompose_moment(desired: &Vector3<f64>, coils: &CoilSet) -> Result<Vec<f64>> {
    let currents: Vec<f64> = coils
        .coils()
        .iter()
        .map(|c| desired.dot(&c.normal) / (c.area * c.turns as f64))
        .collect();
    let rebuilt = coils.body_moment(&currents)?;
    if (rebuilt - desired).norm() > 1e-9 * desired.norm() {
        return Err(Error::InsufficientCoils { coils: coils.len() });
    }
    Ok(currents)
}

/// Single constant-current segment reaching `theta_target` (arrives moving).
pub fn plan_constant_current(
    theta_target: f64,
    current: f64,
    params: &PendulumParams,
    resistance: f64,
) -> Result<ManeuverPlan> {
    let params = params.with_current(current);
    if params.torque_coefficient() == 0.0 {
        return Err(AttitudeError::InactiveCoil.into());
    }
    if theta_target == 0.0 {
        return Ok(ManeuverPlan::empty());
    }
    let duration = small_angle_slew_time(theta_target, &params)?;
    let rate = final_slew_rate(theta_target, &params)?;
    Ok(ManeuverPlan {
        segments: vec![Segment {
            duration_s: duration,
            currents: vec![current],
        }],
        predicted_final_angle: theta_target,
        predicted_final_rate: rate,
        ohmic_energy: resistance * current * current * duration,
        mechanical_energy: 0.5 * params.inertia * rate * rate,
    })
}

/// `+i` for `sqrt(theta/k)`, then `-i` for the same time: arrives at rest
/// under constant torque.
pub fn plan_bang_bang(
    theta_target: f64,
    current: f64,
    params: &PendulumParams,
    resistance: f64,
) -> Result<ManeuverPlan> {
    let params = params.with_current(current);
    let k = params.torque_coefficient();
    if k == 0.0 {
        return Err(AttitudeError::InactiveCoil.into());
    }
    if theta_target == 0.0 {
        return Ok(ManeuverPlan::empty());
    }
    let half = (theta_target / k.abs()).sqrt();
    let peak_rate = k.abs() * half;
    Ok(ManeuverPlan {
        segments: vec![
            Segment {
                duration_s: half,
                currents: vec![current],
            },
            Segment {
                duration_s: half,
                currents: vec![-current],
            },
        ],
        predicted_final_angle: theta_target,
        predicted_final_rate: 0.0,
        ohmic_energy: 2.0 * resistance * current * current * half,
        mechanical_energy: 0.5 * params.inertia * peak_rate * peak_rate,
    })
}

/// `|B(perigee)| / |B(apogee)|` along the orbit.
pub fn field_ratio_perigee_apogee(orbit: &EllipticalOrbitSpec, dipole: &DipoleFieldSpec) -> Result<f64> {
    let perigee = dipole_field(dipole, &orbit.position_at_eccentric_anomaly(0.0))?;
    let apogee = dipole_field(dipole, &orbit.position_at_eccentric_anomaly(std::f64::consts::PI))?;
    Ok(perigee.magnitude / apogee.magnitude)
}

/// Field seen by the balloon over time.
#[derive(Debug, Clone, Copy)]
struct FieldTrack {
    model: FieldModel,
    orbit: Option<Orbit>,
}

impl FieldTrack {
    fn from_config(config: &ScenarioConfig) -> Result<Self> {
        Ok(Self {
            model: config.field_model()?,
            orbit: config.orbit_model()?,
        })
    }

    fn sample(&self, t: f64) -> Result<FieldSample> {
        let position = match &self.orbit {
            Some(orbit) => orbit.position(t)?,
            None => Vector3::zeros(),
        };
        Ok(field_at(&self.model, &position)?)
    }
}

/// Piecewise-constant currents; `tail` applies after the last segment.
#[derive(Debug, Clone)]
struct Schedule {
    segments: Vec<(f64, f64, Vec<f64>)>,
    tail: Vec<f64>,
}

impl Schedule {
    fn constant(currents: Vec<f64>) -> Self {
        Self {
            segments: Vec::new(),
            tail: currents,
        }
    }

    fn from_segments(segments: &[Segment], width: usize) -> Self {
        let mut start = 0.0;
        let segments = segments
            .iter()
            .map(|s| {
                let end = start + s.duration_s;
                let entry = (start, end, s.currents.clone());
                start = end;
                entry
            })
            .collect();
        Self {
            segments,
            tail: vec![0.0; width],
        }
    }

    fn at(&self, t: f64) -> &[f64] {
        self.segments
            .iter()
            .find(|(_, end, _)| t < *end)
            .map(|(_, _, c)| c.as_slice())
            .unwrap_or(&self.tail)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.1).collect()
    }

    fn end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.1)
    }

    fn ohmic_energy(&self, resistance: f64, elapsed: f64) -> f64 {
        let sq = |c: &[f64]| c.iter().map(|i| i * i).sum::<f64>();
        let mut energy: f64 = self
            .segments
            .iter()
            .map(|(start, end, c)| {
                let overlap = (end.min(elapsed) - start).max(0.0);
                resistance * sq(c) * overlap
            })
            .sum();
        let tail = (elapsed - self.end()).max(0.0);
        if tail > 0.0 {
            energy += resistance * sq(&self.tail) * tail;
        }
        energy
    }
}

fn pad3(c: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, v) in out.iter_mut().zip(c) {
        *o = *v;
    }
    out
}

/// Runs the scenario in its configured mode.
pub fn simulate(config: &ScenarioConfig) -> Result<ManeuverRun> {
    match config.maneuver.mode {
        Mode::Scalar => simulate_scalar_maneuver(config),
        Mode::ThreeD => simulate_3d_maneuver(config),
    }
}

/// Systems whose inputs are piecewise constant in time. While a piece is
/// set, inputs are evaluated at that representative time so that RK4 stages
/// landing exactly on a breakpoint stay on the current piece.
trait Piecewise {
    fn set_piece(&mut self, representative: Option<f64>);
}

/// Integrates piece by piece, restarting at each breakpoint so no step
/// straddles a current switch. Without breakpoints this is a plain
/// [`integrate`] with `event`; with them the run ends at the last one.
fn integrate_pieces<const N: usize, S, E>(
    system: &mut S,
    y0: SVector<f64, N>,
    breakpoints: &[f64],
    event: E,
    settings: &IntegrationSettings,
) -> Result<Trajectory<N>>
where
    S: OdeSystem<N> + Piecewise,
    E: FnMut(f64, &SVector<f64, N>) -> f64,
{
    system.set_piece(None);
    if breakpoints.is_empty() {
        return Ok(integrate(system, y0, 0.0, event, settings)?);
    }
    let mut samples = vec![Sample { t: 0.0, y: y0 }];
    let mut start = 0.0;
    let mut stop = StopReason::Event;
    for &end in breakpoints {
        if end <= start {
            continue;
        }
        let remaining = settings.max_time - start;
        if remaining <= settings.dt {
            stop = StopReason::MaxTimeExceeded;
            break;
        }
        system.set_piece(Some(0.5 * (start + end)));
        let piece_settings = IntegrationSettings {
            max_time: remaining,
            ..*settings
        };
        let y = samples.last().map(|s| s.y).unwrap_or(y0);
        let piece = integrate(system, y, start, |t, _| t - end, &piece_settings)?;
        samples.extend(piece.samples.into_iter().skip(1));
        if piece.stop == StopReason::MaxTimeExceeded {
            stop = StopReason::MaxTimeExceeded;
            break;
        }
        if let Some(last) = samples.last_mut() {
            last.t = end;
        }
        start = end;
    }
    system.set_piece(None);
    Ok(Trajectory { samples, stop })
}

struct ScalarSystem {
    schedule: Schedule,
    field: FieldTrack,
    area: f64,
    inertia: f64,
    torque_model: TorqueModel,
    piece: Option<f64>,
    error: Option<Error>,
}

impl ScalarSystem {
    fn torque(&mut self, t: f64, theta: f64) -> (f64, f64, FieldSample) {
        let current = self.schedule.at(self.piece.unwrap_or(t))[0];
        let field = match self.field.sample(t) {
            Ok(f) => f,
            Err(e) => {
                self.error.get_or_insert(e);
                FieldSample {
                    b: Vector3::zeros(),
                    magnitude: 0.0,
                }
            }
        };
        let amplitude = current * self.area * field.magnitude;
        let torque = match self.torque_model {
            TorqueModel::Nonlinear => -amplitude * theta.sin(),
            TorqueModel::Constant => -amplitude,
        };
        (torque, current, field)
    }
}

impl Piecewise for ScalarSystem {
    fn set_piece(&mut self, representative: Option<f64>) {
        self.piece = representative;
    }
}

impl OdeSystem<2> for ScalarSystem {
    fn derivative(&mut self, t: f64, y: &SVector<f64, 2>) -> SVector<f64, 2> {
        let (torque, _, _) = self.torque(t, y[0]);
        SVector::<f64, 2>::new(y[1], torque / self.inertia)
    }
}

/// Single-ring pendulum maneuver (ring 1 only).
pub fn simulate_scalar_maneuver(config: &ScenarioConfig) -> Result<ManeuverRun> {
    let params = config.pendulum_params()?;
    let resistance = coil_resistance(&config.wire());
    let m = &config.maneuver;
    let target = config.target_rad();
    let theta0 = config.initial_angle_rad();

    let schedule = match m.kind {
        ManeuverKind::Constant => Schedule::constant(vec![m.current_a]),
        ManeuverKind::BangBang => {
            let plan = plan_bang_bang(target, m.current_a, &params, resistance)?;
            Schedule::from_segments(&plan.segments, 1)
        }
        ManeuverKind::Plan => Schedule::from_segments(&m.segments, 1),
    };
    let end = schedule.end();
    let breakpoints = schedule.breakpoints();
    let mut system = ScalarSystem {
        schedule,
        field: FieldTrack::from_config(config)?,
        area: params.area,
        inertia: params.inertia,
        torque_model: m.torque_model,
        piece: None,
        error: None,
    };

    let y0 = SVector::<f64, 2>::new(theta0, 0.0);
    let kind = m.kind;
    let trajectory = integrate_pieces(
        &mut system,
        y0,
        &breakpoints,
        |t, y| match kind {
            ManeuverKind::Constant => (y[0] - theta0).abs() - target,
            _ => t - end,
        },
        &config.settings(),
    )?;
    if let Some(e) = system.error.take() {
        return Err(e);
    }

    let mut records = Vec::with_capacity(trajectory.samples.len());
    let mut peak_torque: f64 = 0.0;
    let mut peak_kinetic: f64 = 0.0;
    for s in &trajectory.samples {
        let (torque, current, field) = system.torque(s.t, s.y[0]);
        let kinetic = 0.5 * params.inertia * s.y[1] * s.y[1];
        peak_torque = peak_torque.max(torque.abs());
        peak_kinetic = peak_kinetic.max(kinetic);
        records.push(TimeSeriesRecord {
            t: s.t,
            theta: s.y[0],
            omega: s.y[1],
            torque,
            currents: [current, 0.0, 0.0],
            b: field.b.into(),
            ohmic_power: resistance * current * current,
            kinetic_energy: kinetic,
            quaternion: None,
        });
    }

    let last = trajectory.last();
    let elapsed = last.t;
    let mut summary = ManeuverSummary {
        mode: Mode::Scalar,
        kind,
        status: match trajectory.stop {
            StopReason::Event => RunStatus::Completed,
            StopReason::MaxTimeExceeded => RunStatus::MaxTimeExceeded,
        },
        target,
        achieved_rotation: (last.y[0] - theta0).abs(),
        elapsed,
        residual_rate: last.y[1].abs(),
        final_theta: last.y[0],
        peak_torque,
        ohmic_energy: system.schedule.ohmic_energy(resistance, elapsed),
        peak_kinetic_energy: peak_kinetic,
        underactuated: false,
        pass: false,
    };
    summary.judge();
    Ok(ManeuverRun {
        records,
        summary,
        attitude: Vec::new(),
    })
}

#[derive(Debug, Clone)]
enum Control {
    /// Three-coil steering: moment of fixed size along `B x axis`, sign
    /// flipped after `switch_time`.
    Steer {
        axis: Vector3<f64>,
        moment: f64,
        switch_time: Option<f64>,
    },
    /// Body-fixed currents.
    OpenLoop(Schedule),
}

struct RigidSystem {
    body: RigidBody,
    coils: CoilSet,
    field: FieldTrack,
    control: Control,
    resistance: f64,
    underactuated: bool,
    piece: Option<f64>,
    error: Option<Error>,
}

struct Evaluation {
    currents: Vec<f64>,
    field: FieldSample,
    torque_body: Vector3<f64>,
}

impl RigidSystem {
    fn record_error(&mut self, e: Error) {
        self.error.get_or_insert(e);
    }

    fn evaluate(&mut self, t: f64, state: &AttitudeState3D) -> Evaluation {
        let field = match self.field.sample(t) {
            Ok(f) => f,
            Err(e) => {
                self.record_error(e);
                FieldSample {
                    b: Vector3::zeros(),
                    magnitude: 0.0,
                }
            }
        };
        let attitude = state.unit_orientation();
        let currents = match &self.control {
            Control::OpenLoop(schedule) => schedule.at(self.piece.unwrap_or(t)).to_vec(),
            Control::Steer {
                axis,
                moment,
                switch_time,
            } => {
                let direction = field.b.cross(axis);
                let sine = if field.magnitude > 0.0 {
                    direction.norm() / field.magnitude
                } else {
                    0.0
                };
                if sine < UNDERACTUATED_SINE {
                    self.underactuated = true;
                    vec![0.0; self.coils.len()]
                } else {
                    let sign = match switch_time {
                        Some(ts) if self.piece.unwrap_or(t) >= *ts => -1.0,
                        _ => 1.0,
                    };
                    let m_inertial = direction.normalize() * (sign * moment);
                    let m_body = attitude.inverse_transform_vector(&m_inertial);
                    match decompose_moment(&m_body, &self.coils) {
                        Ok(c) => c,
                        Err(e) => {
                            self.record_error(e);
                            vec![0.0; self.coils.len()]
                        }
                    }
                }
            }
        };
        let moment_body = self.coils.body_moment(&currents).unwrap_or_else(|_| Vector3::zeros());
        let field_body = attitude.inverse_transform_vector(&field.b);
        Evaluation {
            currents,
            field,
            torque_body: magnetic_torque(&moment_body, &field_body),
        }
    }
}

impl Piecewise for RigidSystem {
    fn set_piece(&mut self, representative: Option<f64>) {
        self.piece = representative;
    }
}

impl OdeSystem<8> for RigidSystem {
    fn derivative(&mut self, t: f64, y: &SVector<f64, 8>) -> SVector<f64, 8> {
        let state = AttitudeState3D::from_slice(y.as_slice(), t);
        let eval = self.evaluate(t, &state);
        let d = match &self.control {
            // Open-loop runs go through the generic coil-set derivative.
            Control::OpenLoop(_) => match body_rhs_3d(&state, &self.body, &self.coils, &eval.currents, &eval.field) {
                Ok(d) => d,
                Err(e) => {
                    self.record_error(e.into());
                    rigid_body_rhs(&state, &self.body, &Vector3::zeros())
                }
            },
            Control::Steer { .. } => rigid_body_rhs(&state, &self.body, &eval.torque_body),
        };
        let power = self.resistance * eval.currents.iter().map(|i| i * i).sum::<f64>();
        let q = d.orientation_dot;
        SVector::<f64, 8>::from_column_slice(&[
            q.w,
            q.i,
            q.j,
            q.k,
            d.omega_dot.x,
            d.omega_dot.y,
            d.omega_dot.z,
            power,
        ])
    }

    fn project(&self, y: &mut SVector<f64, 8>) {
        let n = y.fixed_rows::<4>(0).norm();
        if n > 0.0 {
            y.fixed_rows_mut::<4>(0).unscale_mut(n);
        }
    }
}

/// Orientation placing coil 1's normal (body x) at `theta0` from `b_hat`.
fn initial_orientation(b_hat: &Vector3<f64>, theta0: f64) -> UnitQuaternion<f64> {
    let (perp, _) = plane_basis(&nalgebra::Unit::new_unchecked(*b_hat));
    let target = b_hat * theta0.cos() + perp * theta0.sin();
    UnitQuaternion::rotation_between(&Vector3::x(), &target)
        .unwrap_or_else(|| UnitQuaternion::from_axis_angle(&Vector3::z_axis(), std::f64::consts::PI))
}

/// Rigid-body maneuver with one to three coils.
///
/// With three coils the moment is steered each step along `B x axis` so the
/// torque points along the commanded axis as far as `tau _|_ B` allows. With
/// fewer coils the currents are body-fixed (open loop).
pub fn simulate_3d_maneuver(config: &ScenarioConfig) -> Result<ManeuverRun> {
    let body = config.body()?.rigid_body()?;
    let coils = config.coil_set();
    let field = FieldTrack::from_config(config)?;
    let resistance = coil_resistance(&config.wire());
    let m = &config.maneuver;
    let target = config.target_rad();
    let coil = coils.coils()[0];
    let moment = m.current_a * coil.area * coil.turns as f64;

    let b0 = field.sample(0.0)?;
    let b_hat = b0.b / b0.magnitude;
    let q0 = initial_orientation(&b_hat, config.initial_angle_rad());
    let axis = Vector3::from(m.axis).normalize();
    let inertia_inertial = q0.to_rotation_matrix() * body.inertia * q0.to_rotation_matrix().transpose();
    let steering = coils.len() == 3 && m.kind != ManeuverKind::Plan;

    // Constant-torque bang-bang half time about the relevant axis.
    let bang_bang_half = |torque_axis: Vector3<f64>, torque: f64| -> Result<f64> {
        let inertia = torque_axis.dot(&(inertia_inertial * torque_axis));
        if torque == 0.0 {
            return Err(AttitudeError::InactiveCoil.into());
        }
        Ok((target * inertia / torque).sqrt())
    };

    let control = if steering {
        let sine = b_hat.cross(&axis).norm();
        if sine < UNDERACTUATED_SINE {
            return Ok(underactuated_run(config, &body, &coils, q0, b0, resistance));
        }
        let switch_time = match m.kind {
            ManeuverKind::BangBang => Some(bang_bang_half(axis, moment * b0.magnitude * sine)?),
            _ => None,
        };
        Control::Steer {
            axis,
            moment,
            switch_time,
        }
    } else {
        let width = coils.len();
        match m.kind {
            ManeuverKind::Constant => Control::OpenLoop(Schedule::constant(vec![m.current_a; width])),
            ManeuverKind::Plan => Control::OpenLoop(Schedule::from_segments(&m.segments, width)),
            ManeuverKind::BangBang => {
                let m_inertial = q0 * coils.body_moment(&vec![m.current_a; width])?;
                let tau = m_inertial.cross(&b0.b);
                let half = if tau.norm() == 0.0 {
                    return Err(AttitudeError::InactiveCoil.into());
                } else {
                    bang_bang_half(tau.normalize(), tau.norm())?
                };
                let segments = [
                    Segment {
                        duration_s: half,
                        currents: vec![m.current_a; width],
                    },
                    Segment {
                        duration_s: half,
                        currents: vec![-m.current_a; width],
                    },
                ];
                Control::OpenLoop(Schedule::from_segments(&segments, width))
            }
        }
    };
    let breakpoints = match (&control, m.kind) {
        (Control::Steer { switch_time: Some(ts), .. }, _) => vec![*ts, 2.0 * ts],
        (Control::OpenLoop(s), ManeuverKind::BangBang | ManeuverKind::Plan) => s.breakpoints(),
        _ => Vec::new(),
    };
    let end = breakpoints.last().copied().unwrap_or(0.0);

    let mut system = RigidSystem {
        body,
        coils,
        field,
        control,
        resistance,
        underactuated: false,
        piece: None,
        error: None,
    };

    let rotation = |y: &SVector<f64, 8>| -> f64 {
        let q = UnitQuaternion::new_normalize(nalgebra::Quaternion::new(y[0], y[1], y[2], y[3]));
        let relative = q * q0.inverse();
        if steering {
            relative.scaled_axis().dot(&axis)
        } else {
            relative.angle()
        }
    };

    let mut y0 = SVector::<f64, 8>::zeros();
    y0.fixed_rows_mut::<7>(0)
        .copy_from(&AttitudeState3D::at_rest(q0, 0.0).to_vector());
    let kind = m.kind;
    let trajectory = integrate_pieces(
        &mut system,
        y0,
        &breakpoints,
        |t, y| match kind {
            ManeuverKind::Constant => rotation(y) - target,
            _ => t - end,
        },
        &config.settings(),
    )?;
    if let Some(e) = system.error.take() {
        return Err(e);
    }

    let mut records = Vec::with_capacity(trajectory.samples.len());
    let mut attitude = Vec::with_capacity(trajectory.samples.len());
    let mut peak_torque: f64 = 0.0;
    let mut peak_kinetic: f64 = 0.0;
    for s in &trajectory.samples {
        let state = AttitudeState3D::from_slice(s.y.as_slice(), s.t);
        let eval = system.evaluate(s.t, &state);
        let kinetic = 0.5 * state.omega_body.dot(&(system.body.inertia * state.omega_body));
        peak_torque = peak_torque.max(eval.torque_body.norm());
        peak_kinetic = peak_kinetic.max(kinetic);
        records.push(three_d_record(&state, &eval, &system, kinetic));
        attitude.push(state);
    }

    let last = trajectory.last();
    let final_state = AttitudeState3D::from_slice(last.y.as_slice(), last.t);
    let final_field = system.field.sample(last.t)?;
    let mut summary = ManeuverSummary {
        mode: Mode::ThreeD,
        kind,
        status: match trajectory.stop {
            StopReason::Event => RunStatus::Completed,
            StopReason::MaxTimeExceeded => RunStatus::MaxTimeExceeded,
        },
        target,
        achieved_rotation: rotation(&last.y),
        elapsed: last.t,
        residual_rate: final_state.omega_body.norm(),
        final_theta: coil_angle(&final_state, &final_field),
        peak_torque,
        ohmic_energy: match &system.control {
            Control::OpenLoop(schedule) => schedule.ohmic_energy(resistance, last.t),
            Control::Steer { .. } => last.y[7],
        },
        peak_kinetic_energy: peak_kinetic,
        underactuated: system.underactuated,
        pass: false,
    };
    summary.judge();
    Ok(ManeuverRun {
        records,
        summary,
        attitude,
    })
}

fn coil_angle(state: &AttitudeState3D, field: &FieldSample) -> f64 {
    let normal = state.unit_orientation() * Vector3::x();
    if field.magnitude > 0.0 {
        normal.angle(&field.b)
    } else {
        0.0
    }
}

fn three_d_record(state: &AttitudeState3D, eval: &Evaluation, system: &RigidSystem, kinetic: f64) -> TimeSeriesRecord {
    let q = state.orientation;
    TimeSeriesRecord {
        t: state.time,
        theta: coil_angle(state, &eval.field),
        omega: state.omega_body.norm(),
        torque: eval.torque_body.norm(),
        currents: pad3(&eval.currents),
        b: eval.field.b.into(),
        ohmic_power: system.resistance * eval.currents.iter().map(|i| i * i).sum::<f64>(),
        kinetic_energy: kinetic,
        quaternion: Some([q.w, q.i, q.j, q.k]),
    }
}

fn underactuated_run(
    config: &ScenarioConfig,
    body: &RigidBody,
    coils: &CoilSet,
    q0: UnitQuaternion<f64>,
    b0: FieldSample,
    resistance: f64,
) -> ManeuverRun {
    let state = AttitudeState3D::at_rest(q0, 0.0);
    let width = coils.len();
    let eval = Evaluation {
        currents: vec![0.0; width],
        field: b0,
        torque_body: Vector3::zeros(),
    };
    let system = RigidSystem {
        body: *body,
        coils: coils.clone(),
        field: FieldTrack {
            model: FieldModel::Uniform(crate::geomag::UniformFieldSpec {
                magnitude: b0.magnitude,
                direction: nalgebra::Unit::new_normalize(b0.b),
            }),
            orbit: None,
        },
        control: Control::OpenLoop(Schedule::constant(vec![0.0; width])),
        resistance,
        underactuated: true,
        piece: None,
        error: None,
    };
    let record = three_d_record(&state, &eval, &system, 0.0);
    let mut summary = ManeuverSummary {
        mode: Mode::ThreeD,
        kind: config.maneuver.kind,
        status: RunStatus::Underactuated,
        target: config.target_rad(),
        achieved_rotation: 0.0,
        elapsed: 0.0,
        residual_rate: 0.0,
        final_theta: coil_angle(&state, &b0),
        peak_torque: 0.0,
        ohmic_energy: 0.0,
        peak_kinetic_energy: 0.0,
        underactuated: true,
        pass: false,
    };
    summary.judge();
    ManeuverRun {
        records: vec![record],
        summary,
        attitude: vec![state],
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Completed => "completed",
            RunStatus::MaxTimeExceeded => "max_time_exceeded",
            RunStatus::Underactuated => "underactuated",
        })
    }
}
