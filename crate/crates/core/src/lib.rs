//! Relaxation machinery for fixed-endpoint variational problems
//! `min ∫₀ᵀ [f(t, u′) + g(t, u)] dt` whose velocity integrand may be
//! non-convex and grow only linearly.
//!
//! The pipeline is: sample `f(t, ·)` and take its lower convex hull
//! ([`convex`]), certify the structural hypotheses numerically
//! ([`classify`]), solve the relaxed problem by dynamic programming
//! ([`relax`]), check the DuBois–Reymond condition on the result
//! ([`conditions`]), and split every relaxed velocity into hull vertices to
//! recover a trajectory of the original problem ([`reconstruct`]).
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod classify;
pub mod conditions;
pub mod convex;
pub mod error;
pub mod family;
pub mod reconstruct;
pub mod relax;

pub use error::{Error, Result};
