//! Nonparametric estimation of the drift of a linear SDE driven by small
//! alpha-stable Levy noise, with simulators, kernels, limit theory and a
//! Monte-Carlo study harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod kernel;
pub mod multiplier;
pub mod path;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod sde;
pub mod stable;
pub mod study;

pub use error::{Error, Result};
pub use kernel::{make_kernel, Kernel, KernelFamily};
pub use multiplier::Multiplier;
pub use path::{SamplePath, TimeGrid};
pub use stable::StableParams;
