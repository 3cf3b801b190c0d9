//! Hybrid analog/digital beamforming for secure precise wireless transmission
//! over a random frequency diverse array.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`array`]: the sub-array partitioned ULA, random sub-carrier allocation,
//!   steering vectors and effective (post analog stage) channels.
//! * [`leakage`]: the SLNR/ANLNR alternating optimizer with closed-form
//!   per-element analog phase updates.
//! * [`schemes`]: the fully digital and equal-amplitude baselines.
//! * [`metrics`]: SINR, secrecy rate, SINR surfaces and FLOP counts.
//! * [`linalg`]: the small dense complex kernels everything above uses.
//!
//! ```
//! use spwt_core::array::{ArrayConfig, ArrayParams, PolarPosition};
//! use spwt_core::leakage::{optimize_hybrid, Initialization, LinkBudget, SolverOptions};
//! use spwt_core::metrics::secrecy_rate;
//! use spwt_core::schemes::TransmitDesign;
//!
//! let config = ArrayConfig::with_random_frequencies(ArrayParams::default(), 7).unwrap();
//! let h_b = config.steering_vector(&PolarPosition::from_degrees(45.0, 600.0).unwrap());
//! let h_e = config.steering_vector(&PolarPosition::from_degrees(120.0, 300.0).unwrap());
//! let budget = LinkBudget::from_snr_db(15.0, 0.5).unwrap();
//!
//! let solution = optimize_hybrid(
//!     &h_b,
//!     &h_e,
//!     config.subarray_size(),
//!     &budget,
//!     &SolverOptions::default(),
//!     Initialization::Random { seed: 1 },
//! )
//! .unwrap();
//! let design = TransmitDesign::from(&solution);
//! assert!(secrecy_rate(&h_b, &h_e, &design, &budget).unwrap() > 0.0);
//! ```
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod array;
mod error;
pub mod leakage;
pub mod linalg;
mod math;
pub mod metrics;
pub mod rng;
pub mod schemes;

pub use error::{Error, Result};
pub use num_complex::Complex64;
