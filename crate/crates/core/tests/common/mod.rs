//! Shared helpers for the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use telefit::{
    load_dataset, simulate_dataset, CorrelatorDataset, CorrelatorPoint, ExpSumParams,
};

/// Critical value of the (asymptotic) Kolmogorov statistic at alpha = 0.001.
pub const KS_CRIT_001: f64 = 1.9495;

/// One-sample Kolmogorov-Smirnov statistic against an analytic CDF.
pub fn ks_statistic(draws: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = (f - i as f64 / n).abs();
            let hi = ((i + 1) as f64 / n - f).abs();
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Rejects at alpha = 0.001 when the scaled statistic exceeds the critical value.
pub fn ks_rejects(draws: &[f64], cdf: impl Fn(f64) -> f64) -> bool {
    let d = ks_statistic(draws, cdf);
    d * (draws.len() as f64).sqrt() > KS_CRIT_001
}

/// Two-sample Kolmogorov-Smirnov test at alpha = 0.001.
pub fn ks_two_sample_rejects(a: &[f64], b: &[f64]) -> bool {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() && j < ys.len() {
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d > KS_CRIT_001 * ((n + m) / (n * m)).sqrt()
}

/// The five-mode parameter set used throughout the validation runs.
pub fn table_params() -> ExpSumParams {
    ExpSumParams::new(vec![0.8, 0.6, 0.4, 0.2, 0.1], 0.9, 0.5).unwrap()
}

/// Simulated dataset matching the validation construction.
pub fn simulated(seed: u64) -> CorrelatorDataset {
    simulate_dataset(&table_params(), 12, 0.001, seed).unwrap()
}

/// Noise-free series: y = G(t) exactly, sigma per the standard noise model.
pub fn noise_free(params: &ExpSumParams, t_max: u32, coeff: f64) -> CorrelatorDataset {
    let points = (1..=t_max)
        .map(|t| {
            let g = params.eval(t);
            CorrelatorPoint { t, y: g, sigma: coeff * g * f64::from(t) }
        })
        .collect();
    CorrelatorDataset::new(points, 0.0, vec![]).unwrap()
}

/// The checked-in pion dataset.
pub fn pion() -> CorrelatorDataset {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/pion_correlator.csv");
    load_dataset(&path).expect("pion dataset should parse")
}
