//! Automatic parameter tuning for a simulated camera ISP.
//!
//! The crate is organised along the tuning flow:
//!
//! * [`imaging`] holds image containers, CFA sampling, convolution kernels,
//!   color conversion and Netpbm I/O.
//! * [`isp`] is the tunable four-block pipeline (Bayer NR, demosaic, YUV NR,
//!   sharpening).
//! * [`refgen`] simulates sensor captures and builds the per-block reference
//!   images the tuner compares against.
//! * [`fitness`] scores a block output against its reference (SAD for the
//!   optimizer, MAD/SSIM/MS-SSIM for reports).
//! * [`optim`] contains the parameter abstraction and the gradient-free
//!   optimizers (artificial bee colony, Nelder-Mead, Subplex).
//! * [`tuner`] orchestrates per-block and per-gain tuning and the evaluation
//!   experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fitness;
pub mod imaging;
pub mod isp;
pub mod optim;
pub mod refgen;
pub mod tuner;

pub use error::{Error, Result};
