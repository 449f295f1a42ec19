//! Magnetic attitude control of large inflatable orbiting antennas.
//!
//! A balloon carrying up to three orthogonal current rings is steered by the
//! torque `m x B` between the rings' magnetic moment and the geomagnetic
//! field. The crate provides the field and orbit models, scalar and 3-D
//! attitude dynamics, a fixed-step RK4 integrator, coil power/mass budgets,
//! maneuver planning and simulation, and the scenario file format used by the
//! `magsteer` command-line tool.

pub mod attitude;
pub mod coilbudget;
pub mod error;
pub mod geomag;
pub mod maneuver;
pub mod odesolve;
pub mod orbit;
pub mod paper_check;
pub mod scenario;
pub mod sweep;
pub mod telemetry;

pub use error::{Error, Result};
