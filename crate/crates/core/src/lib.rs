// SPDX-License-Identifier: MIT OR Apache-2.0

//! Lagrange-multiplier (score) test for a change in the mean of a time series
//! whose innovation variance changes deterministically over time.
//!
//! The crate is split by concern:
//!
//! * [`cusum`] holds the data transforms, the null estimates, the CUSUM path
//!   `B_n(k/n)` and the end-to-end [`cusum::lm_test`].
//! * [`dist`] evaluates the law of `sup |B(τ)|` for a Brownian bridge `B`,
//!   which gives p-values and critical values.
//! * [`signals`] builds mean and volatility paths and synthesizes series
//!   `y_t = μ_t + σ_t ε_t` from a reproducible Gaussian stream.
//! * [`asymptotics`] evaluates drift functions, limiting variances and the
//!   partial-sum process used by the large-sample theory.
//! * [`montecarlo`] runs size and power experiments over the nine reference
//!   designs and serializes rejection tables.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cusum;
pub mod dist;
mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod signals;

pub use cusum::{
    absolute_transform, compute_returns, cusum_path, lm_test, null_estimates, CusumPath,
    NullEstimates, Series, TestOutcome,
};
pub use dist::{bridge_sup_cdf, bridge_sup_quantile, p_value, BridgeSupLaw};
pub use error::{Error, Result};
