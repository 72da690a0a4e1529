//! Asymptotic-preserving discretization of a kinetic equation in the
//! Hopf-Cole (log) variable, its `eps = 0` limit scheme for a nonlocal
//! Hamilton-Jacobi system, a naive explicit baseline on the density itself,
//! and path-space oracles used to cross-check the limit scheme.

pub mod ap_scheme;
pub mod baseline_kinetic;
pub mod discretization;
pub mod error;
pub mod initial_data;
pub mod limit_scheme;
pub mod representation_oracle;

pub use ap_scheme::{ApScheme, ApState, AuxMinima};
pub use baseline_kinetic::{KineticState, UpwindScheme};
pub use discretization::{build_grid, GridSpec, PhaseField, SpatialField, TransportStencil};
pub use error::{Error, Result};
pub use limit_scheme::{LimitScheme, LimitState};
