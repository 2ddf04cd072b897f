//! Reduced dynamics of an `(N+1)`-level system whose excited levels each
//! couple to their own zero-temperature Lorentzian reservoir.
//!
//! The exact solution uses one damped pseudomode per level ([`exact`]). The
//! approximate descriptions are the Born-approximated Nakajima-Zwanzig
//! equation ([`born`]) and the non-Markovian and Markovian Redfield
//! equations ([`redfield`]). [`classify`] compares their decay rates over the
//! `(dE/g, gamma/g)` plane, and [`oracle`] provides brute-force references
//! (a discretized continuum and direct memory-kernel quadrature).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod born;
pub mod classify;
pub mod cubic;
pub mod error;
pub mod exact;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod rates;
pub mod redfield;
pub mod state;

pub use error::{Error, Result};
pub use model::{diagonalize, GlobalBasis, InitialState, ReservoirSpec, SystemSpec, C64};
pub use rates::{Method, RateTable};
pub use state::{Basis, Picture, ReducedState, Trajectory};
