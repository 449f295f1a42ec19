//! Fixed-step classical Runge-Kutta integration with event-based stopping.
//!
//! States are fixed-size `nalgebra` vectors. A run advances on the grid
//! `t0 + n * dt` until a scalar event function turns non-negative, then the
//! crossing step is refined by bisection on the step length so the event
//! value lands within `stop_tolerance` of zero.

use nalgebra::SVector;
use thiserror::Error;

/// Errors raised by the integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("non-finite derivative at t = {t}")]
    NonFiniteDerivative { t: f64 },
    #[error("invalid integration settings: {0}")]
    InvalidSettings(&'static str),
}

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem<const N: usize> {
    fn derivative(&mut self, t: f64, y: &SVector<f64, N>) -> SVector<f64, N>;

    /// Hook applied to every accepted state (e.g. quaternion renormalization).
    fn project(&self, _y: &mut SVector<f64, N>) {}
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
{
    fn derivative(&mut self, t: f64, y: &SVector<f64, N>) -> SVector<f64, N> {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    /// Step length (s).
    pub dt: f64,
    /// Time budget measured from the start time (s).
    pub max_time: f64,
    /// Acceptable event residual at the refined stop point.
    pub stop_tolerance: f64,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            dt: 0.1,
            max_time: 1.0e6,
            stop_tolerance: 1.0e-9,
        }
    }
}

impl IntegrationSettings {
    pub fn validate(&self) -> Result<(), OdeError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(OdeError::InvalidSettings("dt must be positive"));
        }
        if !(self.max_time > self.dt) {
            return Err(OdeError::InvalidSettings("max_time must exceed dt"));
        }
        if !(self.stop_tolerance > 0.0) {
            return Err(OdeError::InvalidSettings("stop_tolerance must be positive"));
        }
        Ok(())
    }
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The event function crossed zero.
    Event,
    /// The time budget ran out before the event fired.
    MaxTimeExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<const N: usize> {
    pub t: f64,
    pub y: SVector<f64, N>,
}

/// Every accepted step of one run, in increasing time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub samples: Vec<Sample<N>>,
    pub stop: StopReason,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> &Sample<N> {
        self.samples.last().expect("trajectory always holds the initial sample")
    }

    pub fn duration(&self) -> f64 {
        self.last().t - self.samples[0].t
    }
}

fn checked<const N: usize>(d: SVector<f64, N>, t: f64) -> Result<SVector<f64, N>, OdeError> {
    if d.iter().all(|v| v.is_finite()) {
        Ok(d)
    } else {
        Err(OdeError::NonFiniteDerivative { t })
    }
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<const N: usize, S: OdeSystem<N> + ?Sized>(
    system: &mut S,
    y: &SVector<f64, N>,
    t: f64,
    dt: f64,
) -> Result<SVector<f64, N>, OdeError> {
    let half = 0.5 * dt;
    let k1 = checked(system.derivative(t, y), t)?;
    let k2 = checked(system.derivative(t + half, &(y + k1 * half)), t + half)?;
    let k3 = checked(system.derivative(t + half, &(y + k2 * half)), t + half)?;
    let k4 = checked(system.derivative(t + dt, &(y + k3 * dt)), t + dt)?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

fn projected_step<const N: usize, S: OdeSystem<N> + ?Sized>(
    system: &mut S,
    y: &SVector<f64, N>,
    t: f64,
    dt: f64,
) -> Result<SVector<f64, N>, OdeError> {
    let mut next = rk4_step(system, y, t, dt)?;
    system.project(&mut next);
    Ok(next)
}

/// Integrates from `(t0, y0)` until `event(t, y) >= 0` or the time budget is
/// spent. The step that first crosses is shortened by bisection until the
/// event value is within `stop_tolerance` of zero.
pub fn integrate<const N: usize, S, E>(
    system: &mut S,
    y0: SVector<f64, N>,
    t0: f64,
    mut event: E,
    settings: &IntegrationSettings,
) -> Result<Trajectory<N>, OdeError>
where
    S: OdeSystem<N> + ?Sized,
    E: FnMut(f64, &SVector<f64, N>) -> f64,
{
    settings.validate()?;
    let mut samples = vec![Sample { t: t0, y: y0 }];
    if event(t0, &y0) >= 0.0 {
        return Ok(Trajectory {
            samples,
            stop: StopReason::Event,
        });
    }

    let dt = settings.dt;
    let t_end = t0 + settings.max_time;
    let mut y = y0;
    let mut n: u64 = 0;
    loop {
        let t = t0 + n as f64 * dt;
        if t >= t_end {
            return Ok(Trajectory {
                samples,
                stop: StopReason::MaxTimeExceeded,
            });
        }
        let step = dt.min(t_end - t);
        let next = projected_step(system, &y, t, step)?;
        let g = event(t + step, &next);
        if g >= 0.0 {
            let (t_stop, y_stop) = refine(system, &mut event, &y, t, step, next, g, settings)?;
            samples.push(Sample { t: t_stop, y: y_stop });
            return Ok(Trajectory {
                samples,
                stop: StopReason::Event,
            });
        }
        n += 1;
        y = next;
        let t_next = if step < dt { t + step } else { t0 + n as f64 * dt };
        samples.push(Sample { t: t_next, y });
        if step < dt {
            return Ok(Trajectory {
                samples,
                stop: StopReason::MaxTimeExceeded,
            });
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn refine<const N: usize, S, E>(
    system: &mut S,
    event: &mut E,
    y: &SVector<f64, N>,
    t: f64,
    step: f64,
    crossed: SVector<f64, N>,
    g_crossed: f64,
    settings: &IntegrationSettings,
) -> Result<(f64, SVector<f64, N>), OdeError>
where
    S: OdeSystem<N> + ?Sized,
    E: FnMut(f64, &SVector<f64, N>) -> f64,
{
    // Invariant: event < 0 at `lo`, >= 0 at `hi`.
    let mut lo = 0.0;
    let mut hi = step;
    let mut best = (t + step, crossed);
    if g_crossed <= settings.stop_tolerance {
        return Ok(best);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let candidate = projected_step(system, y, t, mid)?;
        let g = event(t + mid, &candidate);
        if g >= 0.0 {
            hi = mid;
            best = (t + mid, candidate);
            if g <= settings.stop_tolerance {
                break;
            }
        } else {
            lo = mid;
            if -g <= settings.stop_tolerance {
                best = (t + mid, candidate);
                break;
            }
        }
    }
    Ok(best)
}
