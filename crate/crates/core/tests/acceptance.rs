// SPDX-License-Identifier: MIT OR Apache-2.0

//! Acceptance suite. Each test prints one `ACCEPTANCE [PASS|FAIL]` line per
//! criterion; run with `--nocapture` to see them.

use lmcusum::asymptotics::{self, CovarianceDiagnostic};
use lmcusum::montecarlo::{self, ExperimentConfig, RejectionTable, SeriesDesign, TableFormat};
use lmcusum::signals::{self, SigmaSpec, TransitionSpec};
use lmcusum::{bridge_sup_cdf, bridge_sup_quantile, cusum_path, null_estimates};

const TABLE_SEED: u64 = 7;
const SIZES: [usize; 4] = [30, 100, 500, 1000];
const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

fn report(id: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE [{}] {id}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn table_for(series: &[u8], workers: usize) -> RejectionTable {
    let config = ExperimentConfig {
        series: series.iter().copied().map(SeriesDesign::Preset).collect(),
        sample_sizes: SIZES.to_vec(),
        levels: LEVELS.to_vec(),
        replications: 1000,
        master_seed: TABLE_SEED,
        workers,
    };
    montecarlo::run_experiment(&config).unwrap()
}

#[test]
fn criterion_01_limit_law_golden_values() {
    let cases = [(1.225, 0.9005625), (1.359, 0.9502443), (1.628, 0.9900245)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (z, expected) in cases {
        let got = bridge_sup_cdf(z);
        ok &= (got - expected).abs() <= 1e-6;
        detail.push(format!("F({z})={got:.7}"));
    }
    report("1 limit-law golden values (tol 1e-6)", ok, &detail.join(", "));
    assert!(ok);
}

#[test]
fn criterion_02_quantile_inversion() {
    let cases = [(0.90, 1.225), (0.95, 1.359), (0.99, 1.628)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (p, expected) in cases {
        let got = bridge_sup_quantile(p).unwrap();
        ok &= (got - expected).abs() <= 5e-3;
        detail.push(format!("q({p})={got:.5}"));
    }
    report("2 quantile inversion (tol 5e-3)", ok, &detail.join(", "));
    assert!(ok);
}

/// Rows: series 1..=3; columns: n = 30, 100, 500, 1000; entries: 1%, 5%, 10%.
const TABLE1: [[[f64; 3]; 4]; 3] = [
    [[0.2, 2.9, 5.1], [0.4, 3.3, 7.9], [0.7, 3.8, 8.2], [0.5, 4.1, 8.4]],
    [[0.3, 3.4, 7.1], [0.9, 5.1, 10.6], [1.3, 6.2, 11.7], [1.3, 6.3, 12.4]],
    [[0.5, 4.3, 7.9], [0.9, 4.9, 10.1], [1.1, 6.4, 12.7], [1.1, 6.3, 12.4]],
];

/// Rows: series 4..=9; columns: n = 30, 100 (every n ≥ 500 entry is 100).
const TABLE2: [[[f64; 3]; 2]; 6] = [
    [[18.3, 47.3, 61.9], [95.9, 98.8, 99.4]],
    [[10.6, 33.9, 48.5], [85.0, 95.4, 97.7]],
    [[14.2, 34.5, 48.7], [84.8, 94.8, 98.0]],
    [[17.1, 46.6, 58.4], [92.9, 98.4, 99.3]],
    [[12.6, 36.0, 52.1], [79.8, 93.1, 96.5]],
    [[14.0, 35.9, 50.8], [74.8, 92.0, 95.5]],
];

#[test]
fn criterion_03_table1_sizes() {
    let table = table_for(&[1, 2, 3], montecarlo::default_workers());
    let mut misses = Vec::new();
    for (s, rows) in TABLE1.iter().enumerate() {
        for (j, &n) in SIZES.iter().enumerate() {
            for (l, &alpha) in LEVELS.iter().enumerate() {
                let cell = table.get(&(s + 1).to_string(), n, alpha).unwrap();
                let paper = rows[j][l] / 100.0;
                let band = 3.0 * (paper * (1.0 - paper) / 1000.0).sqrt();
                let got = cell.frequency;
                let hit = (got - paper).abs() <= band && cell.is_valid();
                println!(
                    "  series {} n={n:<5} alpha={alpha:<4} paper {:>5.1}% got {:>5.1}% band ±{:.2} pp {}",
                    s + 1,
                    paper * 100.0,
                    got * 100.0,
                    band * 100.0,
                    if hit { "ok" } else { "MISS" }
                );
                if !hit {
                    misses.push(format!("S{} n={n} {alpha}", s + 1));
                }
            }
        }
    }
    let ok = misses.is_empty();
    report(
        "3 Table 1 sizes within 3 binomial SE of paper",
        ok,
        &if ok { "36/36 cells".into() } else { format!("misses: {}", misses.join("; ")) },
    );
    assert!(ok);
}

#[test]
fn criterion_04_table2_powers() {
    let table = table_for(&[4, 5, 6, 7, 8, 9], montecarlo::default_workers());
    let mut misses = Vec::new();
    for (s, rows) in TABLE2.iter().enumerate() {
        let series = (s + 4).to_string();
        for &n in &SIZES {
            for (l, &alpha) in LEVELS.iter().enumerate() {
                let cell = table.get(&series, n, alpha).unwrap();
                let got = cell.frequency * 100.0;
                let (paper, hit, rule) = match n {
                    30 => (rows[0][l], (got - rows[0][l]).abs() <= 5.0, "±5 pp"),
                    100 => (rows[1][l], (got - rows[1][l]).abs() <= 3.0, "±3 pp"),
                    _ => (100.0, got >= 99.0, ">= 99%"),
                };
                let hit = hit && cell.is_valid();
                println!(
                    "  series {series} n={n:<5} alpha={alpha:<4} paper {paper:>5.1}% got {got:>5.1}% {rule} {}",
                    if hit { "ok" } else { "MISS" }
                );
                if !hit {
                    misses.push(format!("S{series} n={n} {alpha}"));
                }
            }
        }
    }
    let ok = misses.is_empty();
    report(
        "4 Table 2 powers",
        ok,
        &if ok { "72/72 cells".into() } else { format!("misses: {}", misses.join("; ")) },
    );
    assert!(ok);
}

#[test]
fn criterion_05_null_law_convergence() {
    let (mean, sigma) = montecarlo::preset(2).unwrap();
    let stats = montecarlo::simulate_statistics(&mean, &sigma, 1000, 5000, |r| {
        montecarlo::replication_seed(505, 2, 1000, r)
    })
    .unwrap();
    let mut z: Vec<f64> = stats.into_iter().map(Option::unwrap).collect();
    z.sort_by(f64::total_cmp);
    let m = z.len() as f64;
    let ks = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = bridge_sup_cdf(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max);
    let ok = ks < 0.05;
    report("5 null-law KS distance, Series 2, n=1000 (< 0.05)", ok, &format!("D = {ks:.4}"));
    assert!(ok);
}

fn fclt_check(sigma: &SigmaSpec, label: &str) -> bool {
    let taus = [0.25, 0.5, 0.75];
    let d = asymptotics::partial_sum_covariance(sigma, 2000, &taus, 5000, 606).unwrap();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let emp = CovarianceDiagnostic::entry(&d.empirical, 3, i, j);
            let target = CovarianceDiagnostic::entry(&d.brownian, 3, i, j);
            let rel = (emp - target).abs() / target;
            worst = worst.max(rel);
            ok &= rel <= 0.05;
            println!(
                "  {label} cov(W({}), W({})) = {emp:.4}  min = {target:.4}  finite-n exact = {:.4}",
                taus[i],
                taus[j],
                CovarianceDiagnostic::entry(&d.finite_n, 3, i, j)
            );
        }
    }
    report(
        &format!("6 FCLT covariance vs min(τi,τj), {label} (5%)"),
        ok,
        &format!("worst relative error {:.2}%", worst * 100.0),
    );
    ok
}

#[test]
fn criterion_06a_fclt_covariance_constant_sigma() {
    assert!(fclt_check(&SigmaSpec::Constant { sigma: 1.0 }, "constant σ"));
}

#[test]
fn criterion_06b_fclt_covariance_series2_sigma() {
    let (_, sigma) = montecarlo::preset(2).unwrap();
    assert!(fclt_check(&sigma, "Series-2 σ"));
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

#[test]
fn criterion_07_consistency_rate() {
    let mut ok = true;
    let mut detail = Vec::new();
    for id in [4u8, 7] {
        let (mean, sigma) = montecarlo::preset(id).unwrap();
        let med = |n: usize| {
            let s = montecarlo::simulate_statistics(&mean, &sigma, n, 501, |r| {
                montecarlo::replication_seed(707, u64::from(id), n, r)
            })
            .unwrap();
            median(s.into_iter().map(Option::unwrap).collect())
        };
        let ratio = med(3200) / med(800);
        ok &= (1.6..=2.4).contains(&ratio);
        detail.push(format!("Series {id}: ratio {ratio:.3}"));
    }
    report("7 median statistic ratio n=3200/n=800 in [1.6, 2.4]", ok, &detail.join(", "));
    assert!(ok);
}

#[test]
fn criterion_08_drift_closed_forms() {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for gamma in [1.0, 20.0, 100.0] {
        for tau1 in [0.2, 0.5, 0.8] {
            for spec in [
                TransitionSpec::logistic(tau1, gamma).unwrap(),
                TransitionSpec::exponential(tau1, gamma).unwrap(),
            ] {
                let mut peak: f64 = 0.0;
                for k in 1..=99 {
                    let tau = k as f64 / 100.0;
                    let q = asymptotics::drift_quadrature(&spec, tau);
                    let c = asymptotics::drift_closed(&spec, tau);
                    worst = worst.max((q - c).abs());
                    peak = peak.max(q.abs());
                }
                ok &= peak > 0.0;
            }
        }
    }
    ok &= worst <= 1e-8;
    report(
        "8 closed-form T(τ) vs quadrature (1e-8), non-degenerate",
        ok,
        &format!("max |closed − quadrature| = {worst:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_09_limit_variances() {
    let n = 100_000;
    let (mean4, sigma4) = montecarlo::preset(4).unwrap();
    let y4 = signals::generate_series(&mean4, &sigma4, n, 909).unwrap();
    let v4 = null_estimates(&y4).unwrap().sigma2_hat;
    let theory4 = asymptotics::limit_variance_abrupt(0.5, 1.0, 2.0, 1.0).unwrap().sigma_star2;

    let (mean7, sigma7) = montecarlo::preset(7).unwrap();
    let y7 = signals::generate_series(&mean7, &sigma7, n, 910).unwrap();
    let v7 = null_estimates(&y7).unwrap().sigma2_hat;
    let spec = TransitionSpec::logistic(0.5, 20.0).unwrap();
    let theory7 = asymptotics::limit_variance_smooth(&spec, 1.0, 2.0, 1.0).unwrap().sigma_star2;

    let r4 = (v4 - theory4).abs() / theory4;
    let r7 = (v7 - theory7).abs() / theory7;
    let ok = r4 <= 0.02 && r7 <= 0.02;
    report(
        "9 limit variances vs sample variance at n=1e5 (2%)",
        ok,
        &format!(
            "Series 4: {v4:.4} vs {theory4:.4} ({:.2}%), Series 7: {v7:.4} vs {theory7:.4} ({:.2}%)",
            r4 * 100.0,
            r7 * 100.0
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_10_determinism_across_workers() {
    let grid = |workers| {
        let mut c = ExperimentConfig::paper_grid(TABLE_SEED);
        c.workers = workers;
        montecarlo::emit_table(&montecarlo::run_experiment(&c).unwrap(), TableFormat::Json)
    };
    let one = grid(1);
    let ok = grid(4) == one && grid(16) == one;
    report("10 identical tables for 1, 4, 16 workers", ok, &format!("{} bytes", one.len()));
    assert!(ok);
}

#[test]
fn demo_absolute_returns_with_mean_shift_underflow() {
    // not gated: a long |returns|-like series whose level doubles halfway
    let n = 15_000;
    let noise = signals::gaussian_stream(2008, n);
    let y: Vec<f64> = noise
        .iter()
        .enumerate()
        .map(|(t, e)| (if t < n / 2 { 0.006 } else { 0.012 }) * e.abs())
        .collect();
    let y = lmcusum::Series::new(y).unwrap();
    let (stat, _) = cusum_path(&y).unwrap().sup_abs();
    let p = lmcusum::p_value(stat).unwrap();
    println!("demo: statistic {stat:.2}, p-value {p:e}");
    assert!(p < 1e-12);
}

/// Not a gate. Re-runs the heteroskedastic size designs with 0.5 and 1.5
/// taken as variances instead of standard deviations and prints the cells
/// next to the published sizes.
#[test]
fn diagnostic_table1_with_variance_levels() {
    use lmcusum::signals::MeanSpec;
    let step = SigmaSpec::Step {
        levels: vec![0.5_f64.sqrt(), 1.5_f64.sqrt()],
        fractions: vec![2.0 / 3.0],
    };
    // σ moves from √0.5 to √1.5 along the same logistic path
    let smooth = SigmaSpec::MultiRegime {
        levels: vec![0.5_f64.sqrt(), 1.5_f64.sqrt()],
        locations: vec![2.0 / 3.0],
        scales: vec![1.0 / 20.0],
        families: vec![lmcusum::signals::TransitionFamily::Logistic],
    };
    let config = ExperimentConfig {
        series: vec![
            SeriesDesign::Custom {
                label: "2v".into(),
                mean: MeanSpec::Constant { mu: 1.0 },
                sigma: step,
            },
            SeriesDesign::Custom {
                label: "3v".into(),
                mean: MeanSpec::Constant { mu: 1.0 },
                sigma: smooth,
            },
        ],
        sample_sizes: SIZES.to_vec(),
        levels: LEVELS.to_vec(),
        replications: 1000,
        master_seed: TABLE_SEED,
        workers: montecarlo::default_workers(),
    };
    let table = montecarlo::run_experiment(&config).unwrap();
    let mut inside = 0;
    for (s, label) in ["2v", "3v"].iter().enumerate() {
        for (j, &n) in SIZES.iter().enumerate() {
            for (l, &alpha) in LEVELS.iter().enumerate() {
                let paper = TABLE1[s + 1][j][l] / 100.0;
                let band = 3.0 * (paper * (1.0 - paper) / 1000.0).sqrt();
                let got = table.get(label, n, alpha).unwrap().frequency;
                inside += usize::from((got - paper).abs() <= band);
                println!(
                    "  variance-level series {label} n={n:<5} alpha={alpha:<4} paper {:>5.1}% got {:>5.1}%",
                    paper * 100.0,
                    got * 100.0
                );
            }
        }
    }
    println!("diagnostic: {inside}/24 heteroskedastic size cells inside the criterion-3 band");
}
