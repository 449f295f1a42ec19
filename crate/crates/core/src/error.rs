use thiserror::Error;

use crate::attitude::AttitudeError;
use crate::geomag::FieldError;
use crate::odesolve::OdeError;
use crate::orbit::OrbitError;
use crate::scenario::ScenarioError;

/// Errors surfaced by maneuver simulation, budgets and scenario handling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Attitude(#[from] AttitudeError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("desired moment lies outside the span of the {coils} available coil(s)")]
    InsufficientCoils { coils: usize },
    #[error("no samples to write")]
    EmptyTrajectory,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
