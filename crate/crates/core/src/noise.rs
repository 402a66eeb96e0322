//! Noise model, reproducible instance generation and separation probabilities.
//!
//! Instances draw from ChaCha8: the master seed picks the key and the stream
//! id selects an independent substream, so trial `k` of a sweep is the same
//! whatever order trials run in. Within a stream the draw order is fixed:
//! `N` uniforms for the numbers, `N·L` standard normals (number-major), then
//! one Fisher–Yates shuffle per modulus. The normals are scaled by `σ_l`
//! afterwards, so two instances that differ only in noise level share their
//! numbers, noise shapes and column orders.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{RcrtError, Result};
use crate::modular::{wrap, ModulusSet};
use crate::observation::{Clustering, ObservationMatrix};
use crate::quadrature::integrate;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Generator for substream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub n: usize,
    /// Moduli and the per-modulus noise levels to sample with.
    pub ms: ModulusSet,
    /// Numbers are drawn uniformly from `[0, range)`.
    pub range: f64,
    pub seed: u64,
    pub stream: u64,
}

impl InstanceSpec {
    /// Numbers over the full dynamic range of `ms`, substream 0.
    pub fn new(n: usize, ms: ModulusSet, seed: u64) -> Self {
        InstanceSpec {
            n,
            range: ms.dynamic_range(),
            ms,
            seed,
            stream: 0,
        }
    }

    pub fn with_range(mut self, range: f64) -> Self {
        self.range = range;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }
}

/// The hidden quantities behind an [`ObservationMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub ys: Vec<f64>,
    /// `noises[i][l]` perturbs number `i` at modulus `l`.
    pub noises: Vec<Vec<f64>>,
    pub true_perms: Clustering,
}

impl GroundTruth {
    pub fn common_residues(&self, gamma: f64) -> Vec<f64> {
        self.ys.iter().map(|&y| wrap(y, gamma)).collect()
    }

    /// `max_l Δ_il − min_l Δ_il` for every number.
    pub fn spreads(&self) -> Vec<f64> {
        self.noises
            .iter()
            .map(|row| {
                let (lo, hi) = row.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
                    (lo.min(d), hi.max(d))
                });
                hi - lo
            })
            .collect()
    }
}

pub fn sample_instance(spec: &InstanceSpec) -> Result<(GroundTruth, ObservationMatrix)> {
    if spec.n == 0 {
        return Err(RcrtError::Empty("instance"));
    }
    if !(spec.range.is_finite() && spec.range > 0.0) {
        return Err(RcrtError::invalid("range", "must be finite and positive"));
    }
    let ms = &spec.ms;
    let l = ms.len();
    let mut rng = stream_rng(spec.seed, spec.stream);

    let ys: Vec<f64> = (0..spec.n).map(|_| rng.random_range(0.0..spec.range)).collect();
    let noises: Vec<Vec<f64>> = (0..spec.n)
        .map(|_| {
            (0..l)
                .map(|k| {
                    let z: f64 = rng.sample(StandardNormal);
                    z * ms.sigmas()[k]
                })
                .collect()
        })
        .collect();
    let perms: Vec<Vec<usize>> = (0..l)
        .map(|_| {
            let mut rows: Vec<usize> = (0..spec.n).collect();
            rows.shuffle(&mut rng);
            rows
        })
        .collect();

    let columns = (0..l)
        .map(|k| {
            let mut col = vec![0.0; spec.n];
            for i in 0..spec.n {
                col[perms[k][i]] = wrap(ys[i] + noises[i][k], ms.modulus(k));
            }
            col
        })
        .collect();
    let truth = GroundTruth {
        ys,
        noises,
        true_perms: Clustering::new(perms)?,
    };
    Ok((truth, ObservationMatrix::from_columns(columns)?))
}

/// Whether a cutting point exists: every noise arc
/// `[μ_i + min_l Δ_il, μ_i + max_l Δ_il]` is shorter than `Γ/2` and together
/// they leave part of the circle uncovered.
pub fn assumption1_holds(truth: &GroundTruth, gamma: f64) -> bool {
    let spreads = truth.spreads();
    if spreads.iter().any(|&s| s >= gamma / 2.0) {
        return false;
    }
    let arcs: Vec<(f64, f64)> = truth
        .ys
        .iter()
        .zip(&truth.noises)
        .zip(&spreads)
        .map(|((&y, row), &len)| {
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            (wrap(y + lo, gamma), len)
        })
        .collect();
    let covered = |x: f64| arcs.iter().any(|&(start, len)| wrap(x - start, gamma) <= len);
    // Any uncovered gap begins right after the end of some arc.
    let eps = 1e-9 * gamma;
    arcs.iter()
        .any(|&(start, len)| !covered(wrap(start + len + eps, gamma)))
}

/// Probability that every number's noise spread across `l` moduli stays below
/// `δ = Γ/(2n)`, with i.i.d. `N(0, σ²)` noise.
///
/// Per number the spread of `L` samples is below `δ` with probability
/// `L·∫ φ_σ(x)·(Φ_σ(x+δ) − Φ_σ(x))^{L−1} dx`, integrated adaptively over
/// `[−8σ, 8σ]`; the numbers are independent.
pub fn separation_probability(sigma: f64, gamma: f64, n: usize, l: usize) -> f64 {
    let delta = gamma / (2.0 * n as f64);
    if l <= 1 || sigma == 0.0 {
        return 1.0;
    }
    let d = delta / sigma;
    // Substituting x = σ·u makes the integrand scale-free.
    let integrand = |u: f64| normal_pdf(u) * (normal_cdf(u + d) - normal_cdf(u)).powi(l as i32 - 1);
    let per_number = (l as f64 * integrate(integrand, -8.0, 8.0, 1e-8 / l as f64)).clamp(0.0, 1.0);
    per_number.powi(n as i32)
}

/// Upper bound `(Φ_σ(δ) − Φ_σ(−δ))^{n(l−1)}` on [`separation_probability`].
pub fn separation_bound(sigma: f64, gamma: f64, n: usize, l: usize) -> f64 {
    let exponent = n * l.saturating_sub(1);
    if exponent == 0 || sigma == 0.0 {
        return 1.0;
    }
    let d = gamma / (2.0 * n as f64) / sigma;
    (normal_cdf(d) - normal_cdf(-d)).clamp(0.0, 1.0).powi(exponent as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo2::objective;

    fn spec(sigma: f64, seed: u64) -> InstanceSpec {
        let ms = ModulusSet::uniform(100.0, vec![23, 29, 31, 37], sigma).unwrap();
        InstanceSpec::new(3, ms, seed).with_range(100.0 * 23.0 * 29.0)
    }

    #[test]
    fn cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_779_5).abs() < 1e-12);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_instance(&spec(2.0, 7)).unwrap();
        let b = sample_instance(&spec(2.0, 7)).unwrap();
        assert_eq!(a, b);
        let c = sample_instance(&spec(2.0, 7).with_stream(1)).unwrap();
        assert_ne!(a.0.ys, c.0.ys);
    }

    #[test]
    fn noise_level_only_scales_the_noise() {
        let (quiet, _) = sample_instance(&spec(1.0, 3)).unwrap();
        let (loud, _) = sample_instance(&spec(4.0, 3)).unwrap();
        assert_eq!(quiet.ys, loud.ys);
        assert_eq!(quiet.true_perms, loud.true_perms);
        for (q, l) in quiet.noises.iter().flatten().zip(loud.noises.iter().flatten()) {
            assert!((4.0 * q - l).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_observations_are_exact_residues() {
        let s = spec(0.0, 11);
        let (truth, obs) = sample_instance(&s).unwrap();
        for l in 0..4 {
            for i in 0..3 {
                let r = obs.column(l)[truth.true_perms.row(i, l)];
                assert_eq!(r, wrap(truth.ys[i], s.ms.modulus(l)));
            }
        }
        assert!(assumption1_holds(&truth, 100.0));
        let commons = obs.commons(100.0);
        assert_eq!(
            objective(&commons, &truth.true_perms, &truth.common_residues(100.0), &s.ms),
            0.0
        );
    }

    #[test]
    fn empirical_noise_variance() {
        let ms = ModulusSet::uniform(100.0, vec![23, 29, 31, 37, 41], 3.0).unwrap();
        let (truth, _) = sample_instance(&InstanceSpec::new(20_000, ms, 5)).unwrap();
        let draws: Vec<f64> = truth.noises.into_iter().flatten().collect();
        let var = draws.iter().map(|d| d * d).sum::<f64>() / draws.len() as f64;
        assert!((var / 9.0 - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn wide_spread_breaks_assumption() {
        let truth = GroundTruth {
            ys: vec![10.0, 60.0],
            noises: vec![vec![-30.0, 25.0], vec![0.0, 1.0]],
            true_perms: Clustering::identity(2, 2),
        };
        assert!(!assumption1_holds(&truth, 100.0));
    }

    #[test]
    fn covering_arcs_break_assumption() {
        // four arcs of length 30 spaced 25 apart cover the circle
        let truth = GroundTruth {
            ys: vec![0.0, 25.0, 50.0, 75.0],
            noises: vec![vec![0.0, 30.0]; 4],
            true_perms: Clustering::identity(4, 2),
        };
        assert!(!assumption1_holds(&truth, 100.0));
        let sparse = GroundTruth {
            ys: vec![0.0, 50.0],
            ..truth
        };
        let sparse = GroundTruth {
            noises: vec![vec![0.0, 30.0]; 2],
            true_perms: Clustering::identity(2, 2),
            ..sparse
        };
        assert!(assumption1_holds(&sparse, 100.0));
    }

    #[test]
    fn assumption_matches_grid_search() {
        // Independent check: scan the circle for a point outside every arc.
        for seed in 0..300 {
            let (truth, _) = sample_instance(&spec(9.0, seed)).unwrap();
            let mu = truth.common_residues(100.0);
            let spreads = truth.spreads();
            let grid_free = (0..20_000).any(|k| {
                let x = k as f64 * 100.0 / 20_000.0;
                truth.noises.iter().zip(&mu).all(|(row, &m)| {
                    let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    // x not inside [m + lo, m + hi] on the circle
                    wrap(x - (m + lo), 100.0) > hi - lo
                })
            });
            let expected = grid_free && spreads.iter().all(|&s| s < 50.0);
            assert_eq!(assumption1_holds(&truth, 100.0), expected, "seed {seed}");
        }
    }

    #[test]
    fn separation_limits() {
        assert_eq!(separation_probability(0.0, 100.0, 3, 6), 1.0);
        assert!((separation_probability(1e-6, 100.0, 3, 6) - 1.0).abs() < 1e-7);
        assert_eq!(separation_bound(5.0, 100.0, 1, 1), 1.0);
        assert_eq!(separation_bound(5.0, 100.0, 4, 1), 1.0);
        assert_eq!(separation_probability(5.0, 100.0, 4, 1), 1.0);
    }

    #[test]
    fn two_moduli_closed_form() {
        // For L = 2 the spread is |X1 − X2| ~ |N(0, 2σ²)|.
        let (sigma, gamma, n) = (7.0, 100.0, 3);
        let delta = gamma / (2.0 * n as f64);
        let per = 2.0 * normal_cdf(delta / (sigma * 2f64.sqrt())) - 1.0;
        assert!((separation_probability(sigma, gamma, n, 2) - per.powi(3)).abs() < 1e-9);
    }

    #[test]
    fn bound_dominates_and_decays() {
        for &sigma in &[2.0, 5.0, 10.0, 20.0] {
            let mut prev = f64::INFINITY;
            for n in [2, 4, 6, 8, 10] {
                let p = separation_probability(sigma, 100.0, n, 2 * n);
                let b = separation_bound(sigma, 100.0, n, 2 * n);
                assert!(p <= b + 1e-12, "σ={sigma} n={n}: {p} > {b}");
                assert!(b < prev);
                prev = b;
            }
        }
    }

    #[test]
    fn separation_matches_simulation() {
        use rand_distr::{Distribution, Normal};
        let (sigma, gamma, n, l) = (6.0, 100.0, 3, 6);
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut rng = stream_rng(99, 0);
        let trials = 100_000;
        let delta = gamma / (2.0 * n as f64);
        let hits = (0..trials)
            .filter(|_| {
                (0..n).all(|_| {
                    let xs: Vec<f64> = (0..l).map(|_| normal.sample(&mut rng)).collect();
                    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
                    hi - lo < delta
                })
            })
            .count();
        let mc = hits as f64 / trials as f64;
        assert!((separation_probability(sigma, gamma, n, l) - mc).abs() < 0.01);
    }
}
