//! Numerical toolkit for two-patch Rosenzweig-MacArthur predator-prey
//! models with predator dispersal driven either by predation strength or by
//! predator density difference: equilibrium enumeration, eigenvalue
//! stability, persistence predicates, trajectory classification, Lyapunov
//! descent checks, and bifurcation-region sweeps.

pub mod bifurcation;
pub mod classic;
pub mod conditions;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod poly;
pub mod rng;
pub mod stability;
pub mod test_support;

pub use error::{CoreError, Result};
pub use model::{ModelParams, State4, Variant};

/// Version string stamped into every CSV/JSON output.
pub const SCHEMA_VERSION: &str = "patchdyn/1";
