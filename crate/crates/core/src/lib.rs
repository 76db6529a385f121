//! Simulation and analysis toolkit for a photonic quantum engine driven by a
//! superradiant atomic-beam reservoir.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`]: truncated Fock-space operators, states and scalar functionals
//! * [`reservoir`]: atom preparation and the closed-form reservoir quantities
//! * [`dynamics`]: Lindblad evolution, steady states and two-time correlations
//! * [`trajectory`]: micromaser-style quantum-jump simulation
//! * [`engine`]: the four-stroke cycle and its thermodynamic ledger
//! * [`cli`]: configuration-driven experiment runner and self-check

// NaN-rejecting `!(x > 0.0)` checks and index loops over banded storage are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod constants;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod fock;
pub mod reservoir;
pub mod trajectory;

pub use error::{Error, Result};
pub use fock::{CMatrix, FieldOperator, FieldState, C64};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
