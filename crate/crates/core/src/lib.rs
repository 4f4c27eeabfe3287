//! Optimal unambiguous quantum-state filtering and its use for sensing
//! depolarizing and lossy channels.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense Hermitian eigendecomposition, support projectors,
//!   tensor products.
//! - [`states`]: density operators, qudit and truncated Fock-space probes.
//! - [`channels`]: depolarizing and linear-loss maps in Kraus form.
//! - [`filtering`]: the optimal filtering POVM, false-alarm checks and
//!   outcome sampling.
//! - [`sensing`]: closed-form detection probabilities, minimum detectable
//!   loss and minimum probe power.
//! - [`crosscheck`]: closed forms against the numerical pipeline.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod crosscheck;
pub mod error;
pub mod filtering;
pub mod linalg;
pub mod random;
pub mod sensing;
pub mod states;

pub use error::{Error, Result};
