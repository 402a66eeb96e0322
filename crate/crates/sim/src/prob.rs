//! Separation probability and bound over a parameter grid.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use rcrt::noise::{separation_bound, separation_probability, stream_rng};

use crate::format::g6;

pub const PROB_HEADER: &str = "sigma,n,l,probability,bound,monte_carlo";

#[derive(Debug, Clone, PartialEq)]
pub struct ProbRow {
    pub sigma: f64,
    pub n: usize,
    pub l: usize,
    pub probability: f64,
    pub bound: f64,
    /// Empirical frequency of the separation event, when simulated.
    pub monte_carlo: Option<f64>,
}

/// Fraction of `trials` draws in which all `n` numbers have noise spread
/// below `Γ/(2n)` across `l` moduli.
pub fn simulate_separation(sigma: f64, gamma: f64, n: usize, l: usize, trials: usize, seed: u64) -> f64 {
    let delta = gamma / (2.0 * n as f64);
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let separated = (0..n).all(|_| {
                let (lo, hi) = (0..l).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), _| {
                    let x = sigma * rng.sample::<f64, _>(StandardNormal);
                    (lo.min(x), hi.max(x))
                });
                hi - lo < delta
            });
            usize::from(separated)
        })
        .sum();
    hits as f64 / trials as f64
}

/// Rows for every `(σ, n, l)`; `l_values` empty means `l = 2n`.
pub fn probability_table(
    gamma: f64,
    sigmas: &[f64],
    n_values: &[usize],
    l_values: &[usize],
    mc_trials: usize,
    seed: u64,
) -> Vec<ProbRow> {
    let mut rows = Vec::new();
    for &sigma in sigmas {
        for &n in n_values {
            let ls = if l_values.is_empty() {
                vec![2 * n]
            } else {
                l_values.to_vec()
            };
            for l in ls {
                rows.push(ProbRow {
                    sigma,
                    n,
                    l,
                    probability: separation_probability(sigma, gamma, n, l),
                    bound: separation_bound(sigma, gamma, n, l),
                    monte_carlo: (mc_trials > 0).then(|| simulate_separation(sigma, gamma, n, l, mc_trials, seed)),
                });
            }
        }
    }
    rows
}

pub fn write_table(rows: &[ProbRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{PROB_HEADER}")?;
    for r in rows {
        let mc = r.monte_carlo.map_or(String::new(), g6);
        writeln!(
            out,
            "{},{},{},{},{},{mc}",
            g6(r.sigma),
            r.n,
            r.l,
            g6(r.probability),
            g6(r.bound)
        )?;
    }
    Ok(())
}
