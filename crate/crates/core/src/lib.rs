//! Ground states, truncated-domain solvers and numerical certificates for
//! the one-dimensional fully nonlinear equation
//!
//! ```text
//! -M±(u'') + V(x) u = f(u),   u > 0,   u(x) -> 0 as |x| -> inf,
//! ```
//!
//! where `M±` are the Pucci extremal operators with ellipticity constants
//! `0 < lambda <= Lambda`.
//!
//! * [`model`]: operator constants, nonlinearities, potentials, profiles.
//! * [`scalar`]: the limiting landscape `g_inf`, `G_inf` and its roots.
//! * [`homoclinic`]: phase-plane construction of the constant-potential
//!   ground states `omega±` by gluing two semilinear orbits.
//! * [`bvp`]: Dirichlet solver on `[-L, L]`, forced family and continuation.
//! * [`certify`]: weighted norms, decay fits, energy diagnostics and the
//!   monotone-potential nonexistence certificate.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvp;
pub mod certify;
pub mod error;
pub mod homoclinic;
pub mod model;
pub mod scalar;
mod tridiag;

pub use error::{Error, Result};
pub use model::{
    reflect, Bump, Extremal, Grid, Hypothesis, Nonlinearity, Potential, Profile, Provenance, PucciParams,
};
pub use scalar::Landscape;
