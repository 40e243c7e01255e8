//! Sparse principal component analysis by covariance thresholding.
//!
//! This crate is the numerical core of the workbench. It has no I/O and
//! builds without the standard library (an allocator is required). The
//! `std` feature turns on wall-clock timing of estimator stages and lets the
//! matrix-product backend pick SIMD kernels at runtime.
//!
//! Layout:
//!
//! * [`linalg`]: dense/sparse symmetric matrices, soft thresholding, Gram
//!   matrices, robust scale and the top-r symmetric eigensolvers.
//! * [`model`]: the spiked covariance model, spike construction, dataset
//!   sampling and the orthonormal Haar transform.
//! * [`algorithms`]: covariance thresholding (known and over-estimated
//!   sparsity), diagonal thresholding, plain PCA and the data-driven
//!   pipeline.
//! * [`metrics`]: support recovery scores, sign-agnostic loss and the block
//!   decomposition diagnostics of the thresholded covariance.
//! * [`experiments`]: single Monte Carlo trials, cell summaries and the
//!   Haar reconstruction demo. Parallel sweeps live in the CLI crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod algorithms;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod rng;
mod timing;

pub use error::{Error, Result};
