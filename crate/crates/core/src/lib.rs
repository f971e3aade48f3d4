//! Parallel-plate electrostatic actuators operated in fluids.
//!
//! * [`statics`]: force balance with dielectric encapsulation, pull-in and
//!   gap-closing voltages, displacement sweeps.
//! * [`dynamics`]: hydrodynamic function, added mass, viscous damping,
//!   quality factor and the in-fluid resonance.
//! * [`response`]: steady-state amplitude and phase from the period-averaged
//!   Lagrangian.
//! * [`transient`]: RK4 time integration, envelopes and settling.
//! * [`oracle`]: brute-force validators used by the tests.
//!
//! Sweeps take an [`Execution`] and fan out over rayon when the `parallel`
//! feature is enabled (the default).

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod model;
pub mod oracle;
pub mod response;
pub mod statics;
pub mod transient;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{
    Actuator, ActuatorGeometry, DielectricStack, DriveKind, DriveSignal, FluidMedium, SpringModel,
    SpringProvenance, StructuralMaterial, EPS0,
};
