//! Polarization (Stokes-operator) entanglement of bright two-mode squeezed
//! light, and two purification protocols judged by it.
//!
//! Modules, bottom up:
//!
//! - [`fock`]: truncated multi-mode Fock space, sparse operators, expectations.
//! - [`gaussian`]: exact moments of quadratic observables on Gaussian states.
//! - [`stokes`]: exact and linearized Stokes operators, balanced carriers.
//! - [`insep`]: the variance criterion and closed-form degrees of inseparability.
//! - [`protocol_a`]: photon-number Schmidt projection and its exact Fock oracle.
//! - [`protocol_b`]: cross-Kerr filtering, entanglement increment and efficiency.
//!
//! Sweeps run through [`exec`], which is rayon-backed under the default
//! `parallel` feature and sequential otherwise; results are bit-identical
//! either way.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod fock;
pub mod gaussian;
pub mod insep;
pub mod protocol_a;
pub mod protocol_b;
pub mod stokes;

pub use error::{Error, Result};
pub use exec::Execution;
pub use num_complex::Complex64;
