// SPDX-License-Identifier: MIT OR Apache-2.0

//! Null-model estimates, the CUSUM path and the sup-statistic.
//!
//! Under the null `y_t = μ + σ ε_t` the first score component evaluated at
//! the maximum-likelihood estimates and normalized by the information is
//!
//! ```text
//! B_n(τ) = 1/(√n σ̂) Σ_{t ≤ [nτ]} (y_t − μ̂)
//! ```
//!
//! a step function of `τ`, so its supremum over `[0, 1]` is a maximum over
//! the grid `k/n`, `k = 0..=n`.

use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{Error, Result};

/// A finite, non-empty sequence of observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series(Vec<f64>);

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData { n: 0, required: 1 });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// The same observations in reverse time order.
    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }
}

impl TryFrom<Vec<f64>> for Series {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl AsRef<[f64]> for Series {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Maximum-likelihood estimates of the mean and variance under the null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullEstimates {
    pub mu_hat: f64,
    /// Variance with divisor `n`.
    pub sigma2_hat: f64,
}

/// `B_n(k/n)` for `k = 0..=n` together with the `σ̂` used to scale it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CusumPath {
    points: Vec<f64>,
    scale: f64,
}

impl CusumPath {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Sample size `n` (the path has `n + 1` points).
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    /// `(max_k |B_n(k/n)|, smallest maximizing k)`.
    pub fn sup_abs(&self) -> (f64, usize) {
        let mut best = 0.0;
        let mut arg = 0;
        for (k, p) in self.points.iter().enumerate() {
            if p.abs() > best {
                best = p.abs();
                arg = k;
            }
        }
        (best, arg)
    }
}

/// Result of the change-in-mean test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// Number of observations in the first segment at the maximizing split.
    pub break_index: usize,
    pub alpha: f64,
    pub reject: bool,
}

/// Log returns `log P_{t+1} − log P_t`.
pub fn compute_returns(prices: &Series) -> Result<Series> {
    let p = prices.values();
    if p.len() < 2 {
        return Err(Error::InsufficientData {
            n: p.len(),
            required: 2,
        });
    }
    if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::NonPositivePrice { index, value });
    }
    let returns = p.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    Series::new(returns)
}

pub fn absolute_transform(series: &Series) -> Series {
    Series(series.values().iter().map(|v| v.abs()).collect())
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn compensated_mean(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    for &v in values {
        acc.add(v);
    }
    acc.value() / values.len() as f64
}

pub fn null_estimates(series: &Series) -> Result<NullEstimates> {
    let y = series.values();
    let n = y.len();
    if n < 2 {
        return Err(Error::InsufficientData { n, required: 2 });
    }
    let first = y[0];
    if y.iter().all(|&v| v == first) {
        return Ok(NullEstimates {
            mu_hat: first,
            sigma2_hat: 0.0,
        });
    }
    let mu_hat = compensated_mean(y);
    let mut ss = CompensatedSum::default();
    for &v in y {
        let d = v - mu_hat;
        ss.add(d * d);
    }
    Ok(NullEstimates {
        mu_hat,
        sigma2_hat: ss.value() / n as f64,
    })
}

/// The CUSUM process on the grid `k/n`.
///
/// Partial sums of the pre-centered data are accumulated with compensation
/// and the final centering is applied as `(n·S_k − k·S_n)/n`, which is zero
/// in floating point at `k = n`.
pub fn cusum_path(series: &Series) -> Result<CusumPath> {
    let est = null_estimates(series)?;
    if !(est.sigma2_hat > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    let y = series.values();
    let n = y.len();
    let nf = n as f64;
    let center = est.mu_hat;

    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = CompensatedSum::default();
    for &v in y {
        acc.add(v - center);
        prefix.push(acc.value());
    }
    let total = prefix[n];

    let sigma_hat = est.sigma2_hat.sqrt();
    let norm = 1.0 / (nf * nf.sqrt() * sigma_hat);
    let points = prefix
        .iter()
        .enumerate()
        .map(|(k, &s)| (nf * s - k as f64 * total) * norm)
        .collect();

    Ok(CusumPath {
        points,
        scale: sigma_hat,
    })
}

/// Sup-CUSUM test for a change in mean at level `alpha`.
pub fn lm_test(series: &Series, alpha: f64) -> Result<TestOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    let path = cusum_path(series)?;
    let (statistic, break_index) = path.sup_abs();
    let p_value = dist::p_value(statistic)?;
    Ok(TestOutcome {
        statistic,
        p_value,
        break_index,
        alpha,
        reject: p_value < alpha,
    })
}
