//! Domain types: operator constants, nonlinearity, potential, cutoff bump,
//! and grid profiles.

mod bump;
mod grid;
mod nonlinearity;
mod potential;
mod profile;
mod pucci;
mod validation;

pub use bump::Bump;
pub use grid::Grid;
pub use nonlinearity::{validate_nonlinearity, Nonlinearity, NonlinearityKind, PowerTerm};
pub use potential::{reflect, validate_potential, Hypothesis, Potential};
pub use profile::{Profile, Provenance};
pub use pucci::{Extremal, PucciParams};
pub use validation::{Check, ValidationReport};
