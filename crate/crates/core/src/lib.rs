//! Sliding-mode benchmark core.
//!
//! Three discontinuous second-order sliding-mode controllers (terminal,
//! sub-optimal and energy-saving sub-optimal) share one quadratic terminal
//! surface and are driven against a perturbed voice-coil plant with a
//! first-order actuator lag and noisy position sensing.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! parsing and the command-line front end live in the `smc-bench` crate.
//!
//! ```
//! use smc_bench_core::engine::{run, SimConfig};
//!
//! let mut config = SimConfig::default();
//! config.duration = 0.3;
//! let out = run(&config).unwrap();
//! assert!(out.summary.energy > 0.0);
//! ```
#![no_std]
// negated comparisons are how NaN parameters fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod controllers;
pub mod engine;
mod error;
pub mod estimation;
pub mod math;
pub mod plant;
pub mod surface;

pub use error::{Error, Result};
