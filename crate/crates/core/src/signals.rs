// SPDX-License-Identifier: MIT OR Apache-2.0

//! Deterministic mean and volatility paths plus reproducible Gaussian noise.
//!
//! A series is synthesized as `y_t = μ_t + σ_t ε_t` for `t = 1..=n`, with the
//! paths evaluated on the grid `x = t/n` (so `t = n` maps to `x = 1` exactly).
//! Step boundaries use the integer part `n_j = [λ_j n]`, regime `j` covering
//! indices `n_{j-1}+1 ..= n_j`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::cusum::Series;
use crate::error::{Error, Result};
use crate::quadrature;

const QUAD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionFamily {
    Logistic,
    Exponential,
}

impl TransitionFamily {
    /// Transition with unit slope and zero location.
    pub fn standard(self, u: f64) -> f64 {
        match self {
            Self::Logistic => logistic(u),
            Self::Exponential => -(-u * u).exp_m1(),
        }
    }
}

impl std::str::FromStr for TransitionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" => Ok(Self::Logistic),
            "exponential" => Ok(Self::Exponential),
            other => Err(Error::InvalidSpec(format!("unknown transition family `{other}`"))),
        }
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Transition function `F(x, τ₁, γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub family: TransitionFamily,
    pub tau1: f64,
    pub gamma: f64,
}

impl TransitionSpec {
    pub fn new(family: TransitionFamily, tau1: f64, gamma: f64) -> Result<Self> {
        let spec = Self { family, tau1, gamma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn logistic(tau1: f64, gamma: f64) -> Result<Self> {
        Self::new(TransitionFamily::Logistic, tau1, gamma)
    }

    pub fn exponential(tau1: f64, gamma: f64) -> Result<Self> {
        Self::new(TransitionFamily::Exponential, tau1, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau1 > 0.0 && self.tau1 < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "transition location must lie in (0, 1), got {}",
                self.tau1
            )));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "transition slope must be positive and finite, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        transition(self, x)
    }
}

/// `F_L = [1 + exp(−γ(x−τ₁))]⁻¹` or `F_e = 1 − exp(−γ(x−τ₁)²)`.
pub fn transition(spec: &TransitionSpec, x: f64) -> f64 {
    let d = x - spec.tau1;
    match spec.family {
        TransitionFamily::Logistic => logistic(spec.gamma * d),
        TransitionFamily::Exponential => -(-spec.gamma * d * d).exp_m1(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MeanSpec {
    Constant {
        mu: f64,
    },
    /// `levels.len() == fractions.len() + 1`.
    Step {
        levels: Vec<f64>,
        fractions: Vec<f64>,
    },
    Smooth {
        mu1: f64,
        mu2: f64,
        transition: TransitionSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SigmaSpec {
    Constant {
        sigma: f64,
    },
    Step {
        levels: Vec<f64>,
        fractions: Vec<f64>,
    },
    Smooth {
        sigma1: f64,
        sigma2: f64,
        transition: TransitionSpec,
    },
    /// `m + 1` levels joined by `m` transitions located at `locations[j]`
    /// with scale `scales[j]` and shape `families[j]`.
    MultiRegime {
        levels: Vec<f64>,
        locations: Vec<f64>,
        scales: Vec<f64>,
        families: Vec<TransitionFamily>,
    },
}

fn check_finite(label: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::InvalidSpec(format!("{label} must be finite, got {v}"))),
        None => Ok(()),
    }
}

fn check_positive(label: &str, values: &[f64]) -> Result<()> {
    check_finite(label, values)?;
    match values.iter().find(|v| **v <= 0.0) {
        Some(v) => Err(Error::InvalidSpec(format!("{label} must be positive, got {v}"))),
        None => Ok(()),
    }
}

fn check_fractions(label: &str, fractions: &[f64], levels: usize) -> Result<()> {
    if levels != fractions.len() + 1 {
        return Err(Error::InvalidSpec(format!(
            "{} levels need {} {label}, got {}",
            levels,
            levels.saturating_sub(1),
            fractions.len()
        )));
    }
    let mut previous = 0.0;
    for &f in fractions {
        if !(f > previous && f < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "{label} must be strictly increasing in (0, 1), got {fractions:?}"
            )));
        }
        previous = f;
    }
    Ok(())
}

impl MeanSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { mu } => check_finite("mean level", &[*mu]),
            Self::Step { levels, fractions } => {
                check_finite("mean levels", levels)?;
                check_fractions("break fractions", fractions, levels.len())
            }
            Self::Smooth { mu1, mu2, transition } => {
                check_finite("mean levels", &[*mu1, *mu2])?;
                transition.validate()
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Self::Constant { .. } => true,
            Self::Step { levels, .. } => levels.windows(2).all(|w| w[0] == w[1]),
            Self::Smooth { mu1, mu2, .. } => mu1 == mu2,
        }
    }
}

impl SigmaSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { sigma } => check_positive("volatility level", &[*sigma]),
            Self::Step { levels, fractions } => {
                check_positive("volatility levels", levels)?;
                check_fractions("break fractions", fractions, levels.len())
            }
            Self::Smooth {
                sigma1,
                sigma2,
                transition,
            } => {
                check_positive("volatility levels", &[*sigma1, *sigma2])?;
                transition.validate()
            }
            Self::MultiRegime {
                levels,
                locations,
                scales,
                families,
            } => {
                check_positive("volatility levels", levels)?;
                check_fractions("transition locations", locations, levels.len())?;
                check_positive("transition scales", scales)?;
                if scales.len() != locations.len() || families.len() != locations.len() {
                    return Err(Error::InvalidSpec(format!(
                        "{} transitions need as many scales and families, got {} and {}",
                        locations.len(),
                        scales.len(),
                        families.len()
                    )));
                }
                Ok(())
            }
        }
    }

    /// σ as a function of continuous time `x ∈ [0, 1]`.
    ///
    /// Multi-regime paths are read regime-locally:
    /// `σ(x) = σ_(1) + Σ_j (σ_(j+1) − σ_(j)) F_j((x − τ_j)/s_j)`, which equals
    /// `σ_(j)` inside regime `j` once neighbouring transitions saturate.
    pub fn at(&self, x: f64) -> f64 {
        match self {
            Self::Constant { sigma } => *sigma,
            Self::Step { levels, fractions } => {
                let j = fractions.iter().take_while(|&&f| x > f).count();
                levels[j]
            }
            Self::Smooth {
                sigma1,
                sigma2,
                transition,
            } => sigma1 + (sigma2 - sigma1) * transition.eval(x),
            Self::MultiRegime {
                levels,
                locations,
                scales,
                families,
            } => {
                let mut value = levels[0];
                for j in 0..locations.len() {
                    let u = (x - locations[j]) / scales[j];
                    value += (levels[j + 1] - levels[j]) * families[j].standard(u);
                }
                value
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Constant { .. } => Vec::new(),
            Self::Step { fractions, .. } => fractions.clone(),
            Self::Smooth { transition, .. } => vec![transition.tau1],
            Self::MultiRegime { locations, .. } => locations.clone(),
        }
    }
}

/// `[λ n]` with the integer part taken after snapping values that are within
/// rounding of an integer (so `[(2/3)·3] = 2`).
fn integer_part(lambda: f64, n: usize) -> usize {
    let x = lambda * n as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

fn step_path(levels: &[f64], fractions: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    for (j, &level) in levels.iter().enumerate() {
        let end = fractions.get(j).map_or(n, |&f| integer_part(f, n)).clamp(start, n);
        out.extend(std::iter::repeat_n(level, end - start));
        start = end;
    }
    out
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    let nf = n as f64;
    (1..=n).map(move |t| t as f64 / nf)
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InsufficientData { n, required: 1 });
    }
    Ok(())
}

pub fn mean_path(spec: &MeanSpec, n: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    check_len(n)?;
    Ok(match spec {
        MeanSpec::Constant { mu } => vec![*mu; n],
        MeanSpec::Step { levels, fractions } => step_path(levels, fractions, n),
        MeanSpec::Smooth { mu1, mu2, transition } => grid(n)
            .map(|x| mu1 + (mu2 - mu1) * transition.eval(x))
            .collect(),
    })
}

pub fn sigma_path(spec: &SigmaSpec, n: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    check_len(n)?;
    let path: Vec<f64> = match spec {
        SigmaSpec::Constant { sigma } => vec![*sigma; n],
        SigmaSpec::Step { levels, fractions } => step_path(levels, fractions, n),
        _ => grid(n).map(|x| spec.at(x)).collect(),
    };
    if let Some((t, v)) = path.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::InvalidSpec(format!(
            "volatility path is not positive at t = {} ({v})",
            t + 1
        )));
    }
    Ok(path)
}

/// Cesàro limit of `(1/n) Σ σ_t²`.
pub fn ergodic_variance_limit(spec: &SigmaSpec) -> Result<f64> {
    spec.validate()?;
    Ok(match spec {
        SigmaSpec::Constant { sigma } => sigma * sigma,
        SigmaSpec::Step { levels, fractions } => {
            let mut acc = 0.0;
            let mut previous = 0.0;
            for (j, level) in levels.iter().enumerate() {
                let next = fractions.get(j).copied().unwrap_or(1.0);
                acc += (next - previous) * level * level;
                previous = next;
            }
            acc
        }
        _ => {
            let breaks = spec.breakpoints();
            quadrature::integrate_with_breaks(
                |x| {
                    let s = spec.at(x);
                    s * s
                },
                0.0,
                1.0,
                &breaks,
                QUAD_TOLERANCE,
            )
            .value
        }
    })
}

/// Counter-based standard normal stream.
///
/// Variate `i` depends only on `(seed, i)`: pair `k = i / 2` is produced by
/// Box–Muller from the two 64-bit words at ChaCha8 block position `4k`, the
/// even index taking the cosine branch and the odd index the sine branch.
/// The transcendental functions come from `libm` so results are identical on
/// every platform.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Positions the stream so the next variate is the one at `index`.
    pub fn seek(&mut self, index: u64) {
        self.rng.set_word_pos(u128::from(index / 2) * 4);
        self.spare = None;
        if index % 2 == 1 {
            self.next_normal();
        }
    }

    pub fn at(seed: u64, index: u64) -> f64 {
        let mut s = Self::new(seed);
        s.seek(index);
        s.next_normal()
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        // u1 ∈ (0, 1], u2 ∈ [0, 1)
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * libm::log(u1)).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_normal();
        }
    }
}

impl Iterator for GaussianStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a tuple of coordinates.
///
/// Each coordinate is absorbed through a SplitMix64 round, so the result is
/// stable across runs and independent of evaluation order.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |h, &p| splitmix64(h ^ splitmix64(p)))
}

pub fn gaussian_stream(seed: u64, count: usize) -> Vec<f64> {
    GaussianStream::new(seed).take(count).collect()
}

/// `y_t = μ_t + σ_t ε_t` with `ε` drawn from [`GaussianStream`].
pub fn generate_series(mean: &MeanSpec, sigma: &SigmaSpec, n: usize, seed: u64) -> Result<Series> {
    let mu = mean_path(mean, n)?;
    let sd = sigma_path(sigma, n)?;
    Series::new(synthesize(&mu, &sd, seed))
}

/// Combines precomputed paths with fresh noise; `mu` and `sd` must have equal length.
pub fn synthesize(mu: &[f64], sd: &[f64], seed: u64) -> Vec<f64> {
    debug_assert_eq!(mu.len(), sd.len());
    let mut noise = GaussianStream::new(seed);
    mu.iter()
        .zip(sd)
        .map(|(m, s)| m + s * noise.next_normal())
        .collect()
}

/// Flat key/value form of a mean or volatility specification.
///
/// `variant` is one of `constant`, `step`, `smooth`, `multi_regime`.
/// `levels` holds the regime values (one for `constant`, two for `smooth`),
/// `fractions` the break fractions or transition locations, `tau1`/`gamma`
/// the smooth transition, and `scales`/`families` the multi-regime shapes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatSpec {
    pub variant: String,
    pub levels: Vec<f64>,
    pub fractions: Vec<f64>,
    pub family: Option<TransitionFamily>,
    pub tau1: Option<f64>,
    pub gamma: Option<f64>,
    pub scales: Vec<f64>,
    pub families: Vec<TransitionFamily>,
}

impl FlatSpec {
    fn transition(&self) -> Result<TransitionSpec> {
        let missing = |k: &str| Error::InvalidSpec(format!("smooth variant requires `{k}`"));
        TransitionSpec::new(
            self.family.unwrap_or(TransitionFamily::Logistic),
            self.tau1.ok_or_else(|| missing("tau1"))?,
            self.gamma.ok_or_else(|| missing("gamma"))?,
        )
    }

    fn levels<const N: usize>(&self) -> Result<[f64; N]> {
        self.levels.as_slice().try_into().map_err(|_| {
            Error::InvalidSpec(format!(
                "`{}` variant takes {N} level(s), got {}",
                self.variant,
                self.levels.len()
            ))
        })
    }

    pub fn to_mean(&self) -> Result<MeanSpec> {
        let spec = match self.variant.as_str() {
            "constant" => {
                let [mu] = self.levels()?;
                MeanSpec::Constant { mu }
            }
            "step" => MeanSpec::Step {
                levels: self.levels.clone(),
                fractions: self.fractions.clone(),
            },
            "smooth" => {
                let [mu1, mu2] = self.levels()?;
                MeanSpec::Smooth {
                    mu1,
                    mu2,
                    transition: self.transition()?,
                }
            }
            other => return Err(Error::InvalidSpec(format!("unknown mean variant `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_sigma(&self) -> Result<SigmaSpec> {
        let spec = match self.variant.as_str() {
            "constant" => {
                let [sigma] = self.levels()?;
                SigmaSpec::Constant { sigma }
            }
            "step" => SigmaSpec::Step {
                levels: self.levels.clone(),
                fractions: self.fractions.clone(),
            },
            "smooth" => {
                let [sigma1, sigma2] = self.levels()?;
                SigmaSpec::Smooth {
                    sigma1,
                    sigma2,
                    transition: self.transition()?,
                }
            }
            "multi_regime" => SigmaSpec::MultiRegime {
                levels: self.levels.clone(),
                locations: self.fractions.clone(),
                scales: self.scales.clone(),
                families: if self.families.is_empty() {
                    vec![TransitionFamily::Logistic; self.fractions.len()]
                } else {
                    self.families.clone()
                },
            },
            other => return Err(Error::InvalidSpec(format!("unknown volatility variant `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<&MeanSpec> for FlatSpec {
    fn from(spec: &MeanSpec) -> Self {
        match spec {
            MeanSpec::Constant { mu } => Self {
                variant: "constant".into(),
                levels: vec![*mu],
                ..Self::default()
            },
            MeanSpec::Step { levels, fractions } => Self {
                variant: "step".into(),
                levels: levels.clone(),
                fractions: fractions.clone(),
                ..Self::default()
            },
            MeanSpec::Smooth { mu1, mu2, transition } => Self {
                variant: "smooth".into(),
                levels: vec![*mu1, *mu2],
                family: Some(transition.family),
                tau1: Some(transition.tau1),
                gamma: Some(transition.gamma),
                ..Self::default()
            },
        }
    }
}

impl From<&SigmaSpec> for FlatSpec {
    fn from(spec: &SigmaSpec) -> Self {
        match spec {
            SigmaSpec::Constant { sigma } => Self {
                variant: "constant".into(),
                levels: vec![*sigma],
                ..Self::default()
            },
            SigmaSpec::Step { levels, fractions } => Self {
                variant: "step".into(),
                levels: levels.clone(),
                fractions: fractions.clone(),
                ..Self::default()
            },
            SigmaSpec::Smooth {
                sigma1,
                sigma2,
                transition,
            } => Self {
                variant: "smooth".into(),
                levels: vec![*sigma1, *sigma2],
                family: Some(transition.family),
                tau1: Some(transition.tau1),
                gamma: Some(transition.gamma),
                ..Self::default()
            },
            SigmaSpec::MultiRegime {
                levels,
                locations,
                scales,
                families,
            } => Self {
                variant: "multi_regime".into(),
                levels: levels.clone(),
                fractions: locations.clone(),
                scales: scales.clone(),
                families: families.clone(),
                ..Self::default()
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_reference_points() {
        let l = TransitionSpec::logistic(0.5, 20.0).unwrap();
        assert_eq!(l.eval(0.5), 0.5);
        assert!((l.eval(1.0) - 0.999_954_602_131_297_6).abs() < 1e-7);
        let e = TransitionSpec::exponential(0.3, 7.0).unwrap();
        assert_eq!(e.eval(0.3), 0.0);
    }

    #[test]
    fn transition_is_stable_for_extreme_arguments() {
        let l = TransitionSpec::logistic(0.5, 1400.0).unwrap();
        // γ(x − τ₁) = −700
        let tiny = l.eval(0.0);
        assert!(tiny > 0.0 && tiny < 1e-300, "{tiny}");
        assert_eq!(l.eval(1.0), 1.0);
        let e = TransitionSpec::exponential(0.5, 1e6).unwrap();
        assert_eq!(e.eval(1.0), 1.0);
        assert!(e.eval(0.5 + 1e-9) > 0.0);
    }

    #[test]
    fn transition_validation() {
        assert!(TransitionSpec::logistic(0.0, 1.0).is_err());
        assert!(TransitionSpec::logistic(1.0, 1.0).is_err());
        assert!(TransitionSpec::logistic(0.5, 0.0).is_err());
        assert!(TransitionSpec::logistic(0.5, f64::INFINITY).is_err());
        assert_eq!(
            "Exponential".parse::<TransitionFamily>().unwrap(),
            TransitionFamily::Exponential
        );
        assert!("gompertz".parse::<TransitionFamily>().is_err());
    }

    #[test]
    fn mean_paths() {
        assert_eq!(mean_path(&MeanSpec::Constant { mu: 1.0 }, 4).unwrap(), vec![1.0; 4]);
        let step = MeanSpec::Step {
            levels: vec![1.0, 2.0],
            fractions: vec![0.5],
        };
        assert_eq!(mean_path(&step, 4).unwrap(), vec![1.0, 1.0, 2.0, 2.0]);
        assert_eq!(mean_path(&step, 5).unwrap(), vec![1.0, 1.0, 2.0, 2.0, 2.0]);
        let smooth = MeanSpec::Smooth {
            mu1: 1.0,
            mu2: 2.0,
            transition: TransitionSpec::logistic(0.5, 20.0).unwrap(),
        };
        let p = mean_path(&smooth, 2).unwrap();
        assert!((p[0] - 1.5).abs() < 1e-6);
        assert!((p[1] - 1.999_954_6).abs() < 1e-6);
    }

    #[test]
    fn sigma_paths() {
        assert_eq!(sigma_path(&SigmaSpec::Constant { sigma: 1.0 }, 3).unwrap(), vec![1.0; 3]);
        let step = SigmaSpec::Step {
            levels: vec![0.5, 1.5],
            fractions: vec![2.0 / 3.0],
        };
        assert_eq!(sigma_path(&step, 3).unwrap(), vec![0.5, 0.5, 1.5]);
        assert_eq!(sigma_path(&step, 30).unwrap().iter().filter(|&&s| s == 0.5).count(), 20);
        assert_eq!(sigma_path(&step, 100).unwrap().iter().filter(|&&s| s == 0.5).count(), 66);
        let smooth = SigmaSpec::Smooth {
            sigma1: 0.5,
            sigma2: 1.5,
            transition: TransitionSpec::logistic(2.0 / 3.0, 20.0).unwrap(),
        };
        let p = sigma_path(&smooth, 3).unwrap();
        assert!((p[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_level_step() {
        let step = MeanSpec::Step {
            levels: vec![0.0, 5.0, -1.0],
            fractions: vec![0.25, 0.5],
        };
        assert_eq!(
            mean_path(&step, 8).unwrap(),
            vec![0.0, 0.0, 5.0, 5.0, -1.0, -1.0, -1.0, -1.0]
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(sigma_path(&SigmaSpec::Constant { sigma: 0.0 }, 3).is_err());
        assert!(sigma_path(&SigmaSpec::Constant { sigma: -1.0 }, 3).is_err());
        let bad_order = MeanSpec::Step {
            levels: vec![1.0, 2.0, 3.0],
            fractions: vec![0.6, 0.4],
        };
        assert!(matches!(mean_path(&bad_order, 10), Err(Error::InvalidSpec(_))));
        let bad_count = SigmaSpec::Step {
            levels: vec![1.0, 2.0],
            fractions: vec![],
        };
        assert!(sigma_path(&bad_count, 10).is_err());
        let bad_scale = SigmaSpec::MultiRegime {
            levels: vec![1.0, 2.0],
            locations: vec![0.5],
            scales: vec![0.0],
            families: vec![TransitionFamily::Logistic],
        };
        assert!(bad_scale.validate().is_err());
        assert!(mean_path(&MeanSpec::Constant { mu: 1.0 }, 0).is_err());
        assert!(generate_series(&MeanSpec::Constant { mu: 5.0 }, &SigmaSpec::Constant { sigma: 0.0 }, 10, 1).is_err());
    }

    #[test]
    fn multi_regime_negative_path_is_rejected() {
        let spec = SigmaSpec::MultiRegime {
            // near x = 0.3: 0.1 + 4.9·0 − 4.8·1 < 0
            levels: vec![0.1, 5.0, 0.2],
            locations: vec![0.3, 0.6],
            scales: vec![0.01, 0.01],
            families: vec![TransitionFamily::Exponential; 2],
        };
        assert!(spec.validate().is_ok());
        assert!(sigma_path(&spec, 100).is_err());
    }

    #[test]
    fn ergodic_limits() {
        assert_eq!(ergodic_variance_limit(&SigmaSpec::Constant { sigma: 1.0 }).unwrap(), 1.0);
        let step = SigmaSpec::Step {
            levels: vec![0.5, 1.5],
            fractions: vec![2.0 / 3.0],
        };
        let v = ergodic_variance_limit(&step).unwrap();
        assert!((v - (2.0 / 3.0 * 0.25 + 1.0 / 3.0 * 2.25)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_stream_is_deterministic_and_seekable() {
        let a = gaussian_stream(99, 10);
        let b = gaussian_stream(99, 10);
        assert_eq!(a, b);
        assert_ne!(a, gaussian_stream(100, 10));
        for (i, &v) in a.iter().enumerate() {
            assert_eq!(GaussianStream::at(99, i as u64).to_bits(), v.to_bits());
        }
        let mut s = GaussianStream::new(99);
        s.seek(7);
        assert_eq!(s.next_normal(), a[7]);
    }

    #[test]
    fn derived_seeds_differ_by_coordinate() {
        let base = derive_seed(42, &[1, 1000, 0]);
        assert_eq!(base, derive_seed(42, &[1, 1000, 0]));
        assert_ne!(base, derive_seed(43, &[1, 1000, 0]));
        assert_ne!(base, derive_seed(42, &[2, 1000, 0]));
        assert_ne!(base, derive_seed(42, &[1, 1000, 1]));
        assert_ne!(derive_seed(42, &[1, 2]), derive_seed(42, &[2, 1]));
    }

    #[test]
    fn constant_specs_reproduce_raw_noise() {
        let y = generate_series(&MeanSpec::Constant { mu: 0.0 }, &SigmaSpec::Constant { sigma: 1.0 }, 50, 3).unwrap();
        assert_eq!(y.values(), gaussian_stream(3, 50).as_slice());
    }

    #[test]
    fn flat_spec_round_trip() {
        let specs = [
            SigmaSpec::Constant { sigma: 2.0 },
            SigmaSpec::Step {
                levels: vec![0.5, 1.5],
                fractions: vec![2.0 / 3.0],
            },
            SigmaSpec::Smooth {
                sigma1: 0.5,
                sigma2: 1.5,
                transition: TransitionSpec::exponential(0.4, 3.0).unwrap(),
            },
            SigmaSpec::MultiRegime {
                levels: vec![1.0, 2.0, 0.5],
                locations: vec![0.3, 0.7],
                scales: vec![0.05, 0.01],
                families: vec![TransitionFamily::Logistic; 2],
            },
        ];
        for spec in specs {
            assert_eq!(FlatSpec::from(&spec).to_sigma().unwrap(), spec);
        }
        let mean = MeanSpec::Smooth {
            mu1: 1.0,
            mu2: 2.0,
            transition: TransitionSpec::logistic(0.5, 20.0).unwrap(),
        };
        assert_eq!(FlatSpec::from(&mean).to_mean().unwrap(), mean);
        let flat = FlatSpec {
            variant: "smooth".into(),
            levels: vec![1.0, 2.0],
            ..FlatSpec::default()
        };
        assert!(flat.to_mean().is_err());
        assert!(FlatSpec { variant: "multi_regime".into(), ..FlatSpec::default() }.to_mean().is_err());
    }
}
