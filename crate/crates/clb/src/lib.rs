//! Desk-scale numerical laboratory for lifted lattice-fluid marching.
//!
//! The crate walks one pipeline end to end at sizes a laptop can hold:
//!
//! * [`ode`] / [`carleman`] — a quadratic test flow with a closed form, its
//!   truncated lifting hierarchy, and the figure tables that map where
//!   truncation converges;
//! * [`lbm`] — a one-dimensional lattice-Boltzmann reference solver whose
//!   quadratic collision closes after two tensor powers ([`lbm::clb2`]);
//! * [`block_encoding`] — scaled embeddings of the non-unitary step map into
//!   a dilated unitary, with post-selected marching and its success
//!   probabilities;
//! * [`advantage`] — the resource calculus comparing classical marching,
//!   ensemble sampling, and lifted marching over flow scenarios;
//! * [`multiscale`] — blockwise coarse-graining with reconstruction
//!   operators and hybrid fine/coarse schedules;
//! * [`config`] / [`run`] — the INI-configured command layer behind the
//!   `clb` binary, emitting provenance-stamped CSV via [`table`].

// Validation guards are written `!(x > 0.0)` on purpose: the negation also
// rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod advantage;
pub mod block_encoding;
pub mod carleman;
pub mod config;
pub mod error;
pub mod lbm;
pub mod multiscale;
pub mod ode;
pub mod run;
pub mod sparse;
pub mod table;

#[cfg(test)]
pub(crate) mod testsupport;

pub use error::{Error, Result};
