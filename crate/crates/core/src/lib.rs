//! Core numerics for studying how heavy-tailed class imbalance slows down
//! gradient descent on softmax linear classifiers while sign-based methods
//! make uniform progress across class frequencies.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. All floating point math goes through [`libm`] so results do not
//! depend on the platform math library.
//!
//! Modules:
//! - [`dataset`]: synthetic imbalanced problems and frequency groups.
//! - [`model`]: softmax linear model, loss, per-class gradient/Hessian blocks.
//! - [`optim`]: GD / normalized GD / sign descent / Adam, reweighting,
//!   the training loop and step-size grid search.
//! - [`theory`]: closed-form gradient flow, sign-descent loss, Lambert W,
//!   RK4 cross-checks and the weighted quadratic toy problem.
//! - [`analysis`]: post-hoc correlation, predicted probability and Hessian
//!   heatmap summaries.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod analysis;
pub mod dataset;
mod error;
pub mod linalg;
pub mod math;
pub mod model;
pub mod optim;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::Matrix;
