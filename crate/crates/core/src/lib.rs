//! Linear time-varying (LTV) channel model for mobile-to-mobile shallow-water
//! acoustic links.
//!
//! The crate is layered bottom-up:
//!
//! - [`geometry`]: the flat, parallel waveguide, transceiver trajectories and
//!   image-method eigenpath enumeration.
//! - [`static_channel`]: the LTI channel between two fixed points (CFR, dense
//!   CIR by inverse DFT, and a sparse fractional-delay tap form).
//! - [`ltv`]: Green's function of a moving scenario, type I / type II CIRs,
//!   their interconversion and the two filtering structures.
//! - [`scenarios`]: builders for the moving-Rx, moving-Tx, static and
//!   co-moving cases.
//! - [`analysis`]: closed-form delay and Doppler predictors and checks of
//!   simulated grids against them.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod ltv;
pub mod scenarios;
pub mod static_channel;

pub use error::{Error, Result};
