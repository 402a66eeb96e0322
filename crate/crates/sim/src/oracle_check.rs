//! Agreement of the fast algorithms with their brute-force references.

use std::fmt;

use rand::Rng;

use rcrt::algo2::{iterate, match_step, matching_cost, DEFAULT_MAX_ITERS};
use rcrt::modular::{primes_from, wrap, ModulusSet};
use rcrt::noise::{assumption1_holds, sample_instance, stream_rng, InstanceSpec};
use rcrt::oracle::{brute_force_map_clustering, brute_force_matching, exhaustive_reconstruct, OracleBudget};
use rcrt::{map_clustering, reconstruct_single, ClusterResidues};

use crate::SimError;

const GAMMA: f64 = 100.0;
const OBJECTIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub agreed: usize,
    pub total: usize,
    /// Smallest agreement fraction that counts as a pass.
    pub required: f64,
}

impl SuiteResult {
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.agreed as f64 / self.total as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.total > 0 && self.rate() >= self.required
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {}/{} agree (need {:.0}%)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.agreed,
            self.total,
            100.0 * self.required
        )
    }
}

/// Cutting-point MAP clustering against exhaustive likelihood maximization on
/// `instances` random instances that satisfy the separation assumption.
///
/// Instances have `N, L ∈ {2, 3}`, `Γ = 100` and SNR in `[0, 20]` dB.
pub fn map_clustering_suite(instances: usize, seed: u64) -> Result<SuiteResult, SimError> {
    let budget = OracleBudget::default();
    let mut rng = stream_rng(seed, u64::MAX);
    let (mut agreed, mut total) = (0, 0);
    let mut stream = 0u64;
    while total < instances {
        if stream > 50 * instances as u64 {
            break;
        }
        let n = rng.random_range(2..=3);
        let l = rng.random_range(2..=3);
        let snr = rng.random_range(0.0..=20.0);
        let ms = ModulusSet::from_snr(GAMMA, primes_from(23, l), snr)?;
        let (truth, obs) = sample_instance(&InstanceSpec::new(n, ms.clone(), seed).with_stream(stream))?;
        stream += 1;
        if !assumption1_holds(&truth, GAMMA) {
            continue;
        }
        let commons = obs.commons(GAMMA);
        let fast = map_clustering(&commons, &ms)?.clustering.canonical();
        let slow = brute_force_map_clustering(&commons, &ms, &budget)?;
        total += 1;
        agreed += usize::from(fast == slow);
    }
    Ok(SuiteResult {
        name: "map clustering vs exhaustive likelihood",
        agreed,
        total,
        required: 0.99,
    })
}

/// Rotation matching against all `N!` assignments, `N ≤ 6`.
pub fn matching_suite(trials: usize, seed: u64) -> Result<SuiteResult, SimError> {
    let budget = OracleBudget::default();
    let mut rng = stream_rng(seed, 1);
    let mut agreed = 0;
    for _ in 0..trials {
        let n = rng.random_range(1..=6);
        let gamma = rng.random_range(1.0..200.0);
        let column: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..gamma)).collect();
        let mu: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..gamma)).collect();
        let fast = matching_cost(&column, &mu, &match_step(&column, &mu, gamma), gamma);
        let slow = brute_force_matching(&column, &mu, gamma, &budget)?;
        let slow = matching_cost(&column, &mu, &slow, gamma);
        agreed += usize::from((fast - slow).abs() <= OBJECTIVE_TOLERANCE);
    }
    Ok(SuiteResult {
        name: "rotation matching vs all assignments",
        agreed,
        total: trials,
        required: 1.0,
    })
}

/// Alternating runs from random centres: every run must converge within the
/// default iteration cap with a non-increasing objective.
pub fn descent_suite(runs: usize, seed: u64) -> Result<SuiteResult, SimError> {
    let mut rng = stream_rng(seed, 2);
    let mut agreed = 0;
    for stream in 0..runs as u64 {
        let n = rng.random_range(1..=5);
        let l = rng.random_range(1..=6);
        let snr = rng.random_range(-40.0..10.0);
        let ms = ModulusSet::from_snr(GAMMA, primes_from(23, l), snr)?;
        let (_, obs) = sample_instance(&InstanceSpec::new(n, ms.clone(), seed).with_stream(stream))?;
        let init: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..GAMMA)).collect();
        let state = iterate(&obs, &ms, &init, DEFAULT_MAX_ITERS)?;
        let mut previous = f64::INFINITY;
        let mut monotone = true;
        for &(after_match, after_update) in &state.history {
            monotone &= after_match <= previous + OBJECTIVE_TOLERANCE;
            monotone &= after_update <= after_match + OBJECTIVE_TOLERANCE;
            previous = after_update;
        }
        agreed += usize::from(monotone && state.converged);
    }
    Ok(SuiteResult {
        name: "alternating descent is monotone and terminates",
        agreed,
        total: runs,
        required: 1.0,
    })
}

/// Circular-mean reconstruction against exhaustive search over every quotient,
/// on clusters whose noise spread is below `Γ/2`.
pub fn single_number_suite(trials: usize, seed: u64) -> Result<SuiteResult, SimError> {
    let mut rng = stream_rng(seed, 3);
    let mut agreed = 0;
    for _ in 0..trials {
        let weights: Vec<f64> = (0..3).map(|_| rng.random_range(0.2..5.0)).collect();
        let ms = ModulusSet::with_weights(10.0, vec![3, 5, 7], weights)?;
        let range = ms.dynamic_range();
        let y = rng.random_range(0.0..range);
        let noise: Vec<f64> = loop {
            let draw: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let hi = draw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = draw.iter().copied().fold(f64::INFINITY, f64::min);
            if hi - lo < 5.0 {
                break draw;
            }
        };
        let raws = noise
            .iter()
            .enumerate()
            .map(|(l, d)| wrap(y + d, ms.modulus(l)))
            .collect();
        let cluster = ClusterResidues::new(raws, &ms)?;
        let fast = reconstruct_single(&cluster, &ms)?;
        let slow = exhaustive_reconstruct(&cluster, &ms)?;
        let d = wrap(fast.y_hat - slow.y_hat, range);
        agreed += usize::from(d.min(range - d) < 1e-9);
    }
    Ok(SuiteResult {
        name: "single-number fit vs exhaustive quotient search",
        agreed,
        total: trials,
        required: 1.0,
    })
}

/// Every suite with `trials` cases each.
pub fn run_oracle_check(trials: usize, seed: u64) -> Result<Vec<SuiteResult>, SimError> {
    Ok(vec![
        map_clustering_suite(trials, seed)?,
        matching_suite(trials, seed)?,
        descent_suite(trials, seed)?,
        single_number_suite(trials, seed)?,
    ])
}
