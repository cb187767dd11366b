// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series has {n} observations, at least {required} are required")]
    InsufficientData { n: usize, required: usize },

    #[error("observation {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("price at index {index} is not strictly positive ({value})")]
    NonPositivePrice { index: usize, value: f64 },

    #[error("series has zero sample variance; the test statistic is undefined")]
    DegenerateSeries,

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid signal specification: {0}")]
    InvalidSpec(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}
