//! Consistent-histories quantum mechanics for finite-dimensional systems.
//!
//! Properties are projectors; a framework is a projective decomposition of
//! the identity, and properties from incompatible frameworks cannot be
//! combined. Families of histories are checked for consistency through the
//! Gram matrix of their chain kets, and consistent families receive
//! extended Born probabilities. On top of that sit a von Neumann-style
//! measurement model with retrodiction and the single-qudit information
//! bounds (Shannon, von Neumann, Holevo).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x <= tol)` so that NaN fails every check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod config;
pub mod error;
pub mod histories;
pub mod info;
pub mod measurement;
pub mod numeric;
pub mod properties;
#[cfg(feature = "random")]
pub mod random;

pub use config::Tolerances;
pub use error::Error;
pub use histories::{
    ConsistencyMode, ConsistencyReport, Dynamics, Events, History, HistoryFamily, InitialCondition, ProbabilityTable,
};
pub use numeric::{c64, tensor_product, ComplexMatrix, ComplexVector, EigenSystem, C64};
pub use properties::{Decomposition, IncompatibleError, MeaninglessError, ObservableSpectrum, Projector};
