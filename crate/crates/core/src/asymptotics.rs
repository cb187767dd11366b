// SPDX-License-Identifier: MIT OR Apache-2.0

//! Large-sample quantities behind the test.
//!
//! Under a smooth mean shift `μ_t = μ_(1) + (μ_(2) − μ_(1)) F(t/n)` the
//! normalized CUSUM drifts like `√n (μ_(2) − μ_(1)) T(τ) / σ_*` with
//!
//! ```text
//! T(τ) = ∫_0^τ F(x) dx − τ ∫_0^1 F(x) dx
//! ```
//!
//! and `σ̂²` converges to `σ_*²`, the ergodic noise variance plus the variance
//! of the mean path over `[0, 1]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::signals::{self, GaussianStream, SigmaSpec, TransitionFamily, TransitionSpec};

const QUAD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMethod {
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftEvaluation {
    pub tau: f64,
    pub value: f64,
    pub method: DriftMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitVariance {
    /// Probability limit of `σ̂²` under the alternative.
    pub sigma_star2: f64,
    /// Ergodic noise variance `σ̄₂²`.
    pub sigma_bar2: f64,
    /// Contribution of the mean path, always nonnegative.
    pub shift_contribution: f64,
}

/// Error function, accurate to about one ulp; exactly odd.
pub fn erf(x: f64) -> f64 {
    if x.is_sign_negative() {
        -libm::erf(-x)
    } else {
        libm::erf(x)
    }
}

/// `T(τ)` by adaptive quadrature of both integrals.
pub fn drift_quadrature(spec: &TransitionSpec, tau: f64) -> f64 {
    let f = |x: f64| spec.eval(x);
    let breaks = [spec.tau1];
    let partial = quadrature::integrate_with_breaks(f, 0.0, tau, &breaks, QUAD_TOLERANCE).value;
    let whole = quadrature::integrate_with_breaks(f, 0.0, 1.0, &breaks, QUAD_TOLERANCE).value;
    partial - tau * whole
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `T(τ)` for the logistic transition.
///
/// From `∫ F_L dx = softplus(γ(x − τ₁))/γ`:
///
/// ```text
/// ∫_0^τ F_L = τ + (1/γ) log[(1 + e^{γ(τ₁−τ)}) / (1 + e^{γτ₁})]
/// T(τ)      = (1/γ) { log[(1 + e^{γ(τ₁−τ)}) / (1 + e^{γτ₁})]
///                     − τ log[(1 + e^{γ(τ₁−1)}) / (1 + e^{γτ₁})] }
/// ```
///
/// The commonly printed version with products inside the logarithms and the
/// opposite overall sign does not match quadrature; this one does.
pub fn drift_closed_logistic(tau1: f64, gamma: f64, tau: f64) -> f64 {
    let integral = |upper: f64| (softplus(gamma * (upper - tau1)) - softplus(-gamma * tau1)) / gamma;
    integral(tau) - tau * integral(1.0)
}

/// `T(τ)` for the exponential transition.
///
/// With `c = √(π/(4γ))`, `∫_0^τ F_e = τ − c [erf(√γ(τ − τ₁)) + erf(√γ τ₁)]`,
/// hence
///
/// ```text
/// T(τ) = c { (τ − 1) erf(√γ τ₁) + erf(√γ (τ₁ − τ)) + τ erf(√γ (1 − τ₁)) }
/// ```
///
/// The last term enters with `+τ erf(√γ(1 − τ₁))`, not `−τ erf(√γ(τ₁ − τ))`.
pub fn drift_closed_exponential(tau1: f64, gamma: f64, tau: f64) -> f64 {
    let root = gamma.sqrt();
    let c = (std::f64::consts::PI / (4.0 * gamma)).sqrt();
    let integral = |upper: f64| upper - c * (erf(root * (upper - tau1)) + erf(root * tau1));
    integral(tau) - tau * integral(1.0)
}

pub fn drift_closed(spec: &TransitionSpec, tau: f64) -> f64 {
    match spec.family {
        TransitionFamily::Logistic => drift_closed_logistic(spec.tau1, spec.gamma, tau),
        TransitionFamily::Exponential => drift_closed_exponential(spec.tau1, spec.gamma, tau),
    }
}

pub fn evaluate_drift(spec: &TransitionSpec, tau: f64, method: DriftMethod) -> DriftEvaluation {
    let value = match method {
        DriftMethod::Quadrature => drift_quadrature(spec, tau),
        DriftMethod::ClosedForm => drift_closed(spec, tau),
    };
    DriftEvaluation { tau, value, method }
}

/// `σ_*² = σ̄₂² + τ₁(1 − τ₁)(μ_(1) − μ_(2))²` for a single abrupt break.
pub fn limit_variance_abrupt(tau1: f64, mu1: f64, mu2: f64, sigma_bar2: f64) -> Result<LimitVariance> {
    if !(tau1 > 0.0 && tau1 < 1.0) {
        return Err(Error::Domain(format!("break fraction must lie in (0, 1), got {tau1}")));
    }
    check_sigma_bar2(sigma_bar2)?;
    let shift = tau1 * (1.0 - tau1) * (mu1 - mu2).powi(2);
    Ok(LimitVariance {
        sigma_star2: sigma_bar2 + shift,
        sigma_bar2,
        shift_contribution: shift,
    })
}

/// `σ_*² = σ̄₂² + (μ_(2) − μ_(1))² [∫F² − (∫F)²]` for a smooth transition.
pub fn limit_variance_smooth(
    spec: &TransitionSpec,
    mu1: f64,
    mu2: f64,
    sigma_bar2: f64,
) -> Result<LimitVariance> {
    spec.validate()?;
    check_sigma_bar2(sigma_bar2)?;
    let breaks = [spec.tau1];
    let m1 = quadrature::integrate_with_breaks(|x| spec.eval(x), 0.0, 1.0, &breaks, QUAD_TOLERANCE).value;
    let m2 = quadrature::integrate_with_breaks(
        |x| {
            let f = spec.eval(x);
            f * f
        },
        0.0,
        1.0,
        &breaks,
        QUAD_TOLERANCE,
    )
    .value;
    let shift = (mu2 - mu1).powi(2) * (m2 - m1 * m1).max(0.0);
    Ok(LimitVariance {
        sigma_star2: sigma_bar2 + shift,
        sigma_bar2,
        shift_contribution: shift,
    })
}

fn check_sigma_bar2(sigma_bar2: f64) -> Result<()> {
    if !(sigma_bar2 > 0.0) || !sigma_bar2.is_finite() {
        return Err(Error::Domain(format!(
            "ergodic variance must be positive, got {sigma_bar2}"
        )));
    }
    Ok(())
}

/// `W_n(k/n) = (σ̄₂ √n)⁻¹ Σ_{t ≤ k} σ_t ε_t` for `k = 0..=n`.
pub fn wn_path(noise_scaled: &[f64], sigma_bar2: f64) -> Result<Vec<f64>> {
    check_sigma_bar2(sigma_bar2)?;
    let norm = 1.0 / (sigma_bar2.sqrt() * (noise_scaled.len() as f64).sqrt());
    let mut out = Vec::with_capacity(noise_scaled.len() + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for &v in noise_scaled {
        acc += v;
        out.push(acc * norm);
    }
    Ok(out)
}

/// Empirical covariance of `W_n` at a few time points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceDiagnostic {
    pub n: usize,
    pub replications: usize,
    pub taus: Vec<f64>,
    pub sigma_bar2: f64,
    /// Sample covariance over replications, row-major `taus.len()²`.
    pub empirical: Vec<f64>,
    /// Exact finite-n covariance `(n σ̄₂²)⁻¹ Σ_{t ≤ [n min(τᵢ,τⱼ)]} σ_t²`.
    pub finite_n: Vec<f64>,
    /// Standard Brownian motion covariance `min(τᵢ, τⱼ)`.
    pub brownian: Vec<f64>,
}

impl CovarianceDiagnostic {
    pub fn dim(&self) -> usize {
        self.taus.len()
    }

    pub fn entry(values: &[f64], dim: usize, i: usize, j: usize) -> f64 {
        values[i * dim + j]
    }
}

/// Simulates `W_n` for `sigma` and tabulates its covariance at `taus`.
///
/// Replication `r` draws its noise from `derive_seed(seed, [r])`, so the
/// result does not depend on the rayon schedule.
pub fn partial_sum_covariance(
    sigma: &SigmaSpec,
    n: usize,
    taus: &[f64],
    replications: usize,
    seed: u64,
) -> Result<CovarianceDiagnostic> {
    if replications < 2 {
        return Err(Error::Domain("at least two replications are required".into()));
    }
    if let Some(t) = taus.iter().find(|t| !(**t >= 0.0 && **t <= 1.0)) {
        return Err(Error::Domain(format!("time points must lie in [0, 1], got {t}")));
    }
    let sd = signals::sigma_path(sigma, n)?;
    let sigma_bar2 = signals::ergodic_variance_limit(sigma)?;
    let indices: Vec<usize> = taus.iter().map(|&t| (t * n as f64).floor() as usize).collect();
    let dim = taus.len();

    let samples: Vec<Vec<f64>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut noise = GaussianStream::new(signals::derive_seed(seed, &[r as u64]));
            let scaled: Vec<f64> = sd.iter().map(|s| s * noise.next_normal()).collect();
            let path = wn_path(&scaled, sigma_bar2).expect("validated variance");
            indices.iter().map(|&k| path[k]).collect()
        })
        .collect();

    let rf = replications as f64;
    let means: Vec<f64> = (0..dim)
        .map(|i| samples.iter().map(|s| s[i]).sum::<f64>() / rf)
        .collect();
    let mut empirical = vec![0.0; dim * dim];
    for s in &samples {
        for i in 0..dim {
            for j in 0..dim {
                empirical[i * dim + j] += (s[i] - means[i]) * (s[j] - means[j]);
            }
        }
    }
    for v in &mut empirical {
        *v /= rf - 1.0;
    }

    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for s in &sd {
        acc += s * s;
        cumulative.push(acc);
    }
    let mut finite_n = vec![0.0; dim * dim];
    let mut brownian = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let k = indices[i].min(indices[j]);
            finite_n[i * dim + j] = cumulative[k] / (n as f64 * sigma_bar2);
            brownian[i * dim + j] = taus[i].min(taus[j]);
        }
    }

    Ok(CovarianceDiagnostic {
        n,
        replications,
        taus: taus.to_vec(),
        sigma_bar2,
        empirical,
        finite_n,
        brownian,
    })
}
