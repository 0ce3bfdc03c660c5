//! Equilibria, dynamics, policy counterfactuals and moment-inequality bounds
//! for a two-type, two-sector Roy model in which individuals care about the
//! type composition of their sector.

pub mod abm;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod identification;
pub mod model;
pub mod numfmt;
pub mod policy;
mod roots;

pub use error::{Error, Result};
pub use model::{Composition, ModelParams, PerType, TypeId};
