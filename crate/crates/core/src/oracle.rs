//! Brute-force references for small instances.
//!
//! Nothing here is fast. Each function enumerates the search space that the
//! closed forms in the rest of the crate claim to shortcut, and refuses inputs
//! beyond an explicit budget instead of running for hours.

use itertools::Itertools;

use crate::algo2::matching_cost;
use crate::error::{RcrtError, Result};
use crate::modular::{wrap, ModulusSet};
use crate::observation::{Clustering, Estimate};
use crate::single::{ClusterResidues, TIE_TOLERANCE};

/// Largest `∏ M_l` that [`exhaustive_reconstruct`] will walk.
pub const MAX_EXHAUSTIVE_QUOTIENTS: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest `N` for clustering enumeration; `(N!)^(L−1)` clusterings are scored.
    pub max_n: usize,
    pub max_l: usize,
    /// Largest `N` for matching enumeration (`N!` permutations).
    pub max_matching_n: usize,
    /// Wrap sums keep the terms `|j| ≤ wrap_terms`.
    pub wrap_terms: usize,
    /// Grid points of the periodic trapezoid rule over `[0, Γ)`.
    pub grid_points: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_n: 3,
            max_l: 3,
            max_matching_n: 6,
            wrap_terms: 5,
            grid_points: 2000,
        }
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let peak = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return peak;
    }
    peak + values.map(|v| (v - peak).exp()).sum::<f64>().ln()
}

/// Per-observation log wrap sums on the μ grid, indexed `[l][row][t]`.
struct LikelihoodTable {
    logs: Vec<Vec<Vec<f64>>>,
    log_step: f64,
}

impl LikelihoodTable {
    fn new(commons: &[Vec<f64>], ms: &ModulusSet, budget: &OracleBudget) -> Self {
        let gamma = ms.gamma();
        let step = gamma / budget.grid_points as f64;
        let j_max = budget.wrap_terms as i64;
        let logs = commons
            .iter()
            .zip(ms.weights())
            .map(|(col, &w)| {
                col.iter()
                    .map(|&r| {
                        (0..budget.grid_points)
                            .map(|t| {
                                let mu = t as f64 * step;
                                log_sum_exp((-j_max..=j_max).map(move |j| {
                                    let d = mu - r + j as f64 * gamma;
                                    -w * d * d
                                }))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        LikelihoodTable {
            logs,
            log_step: step.ln(),
        }
    }

    /// `log ∫_0^Γ ∏_l Σ_j exp(−w_l (μ − r_l + jΓ)²) dμ` for one group of rows.
    fn group(&self, rows: &[usize]) -> f64 {
        let points = self.logs[0][0].len();
        let sums = (0..points).map(|t| rows.iter().enumerate().map(|(l, &k)| self.logs[l][k][t]).sum::<f64>());
        self.log_step + log_sum_exp(sums.collect::<Vec<_>>().into_iter())
    }

    fn clustering(&self, clustering: &Clustering) -> f64 {
        (0..clustering.n())
            .map(|i| {
                let rows: Vec<usize> = (0..clustering.l()).map(|l| clustering.row(i, l)).collect();
                self.group(&rows)
            })
            .sum()
    }
}

fn check_clustering_budget(n: usize, l: usize, budget: &OracleBudget) -> Result<()> {
    if n > budget.max_n || l > budget.max_l {
        return Err(RcrtError::BudgetExceeded(format!(
            "N = {n}, L = {l} exceeds N ≤ {}, L ≤ {}",
            budget.max_n, budget.max_l
        )));
    }
    if budget.wrap_terms == 0 || budget.grid_points == 0 {
        return Err(RcrtError::invalid(
            "budget",
            "wrap terms and grid points must be positive",
        ));
    }
    Ok(())
}

fn check_commons(commons: &[Vec<f64>], ms: &ModulusSet) -> Result<usize> {
    if commons.len() != ms.len() {
        return Err(RcrtError::LengthMismatch {
            what: "common residue columns",
            expected: ms.len(),
            got: commons.len(),
        });
    }
    let n = commons.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(RcrtError::Empty("common residues"));
    }
    if let Some(col) = commons.iter().find(|c| c.len() != n) {
        return Err(RcrtError::LengthMismatch {
            what: "common residue column",
            expected: n,
            got: col.len(),
        });
    }
    Ok(n)
}

/// Log-likelihood of a clustering under the wrapped Gaussian model, up to a
/// clustering-independent constant.
///
/// Each number contributes `log ∫_0^Γ ∏_l Σ_{|j|≤J} exp(−w_l(μ − r_l + jΓ)²) dμ`.
/// The integrand is `Γ`-periodic, so the trapezoid rule on the uniform grid
/// converges geometrically.
pub fn evaluate_likelihood(
    clustering: &Clustering,
    commons: &[Vec<f64>],
    ms: &ModulusSet,
    budget: &OracleBudget,
) -> Result<f64> {
    let n = check_commons(commons, ms)?;
    check_clustering_budget(n, ms.len(), budget)?;
    if clustering.n() != n || clustering.l() != ms.len() {
        return Err(RcrtError::LengthMismatch {
            what: "clustering",
            expected: n,
            got: clustering.n(),
        });
    }
    Ok(LikelihoodTable::new(commons, ms, budget).clustering(clustering))
}

/// Every clustering with `K_1` fixed to the identity, in lexicographic order
/// of `(K_2, …, K_L)`.
pub fn all_clusterings(n: usize, l: usize) -> Vec<Clustering> {
    if l <= 1 {
        return vec![Clustering::identity(n, l)];
    }
    let identity: Vec<usize> = (0..n).collect();
    (1..l)
        .map(|_| (0..n).permutations(n).collect::<Vec<_>>())
        .multi_cartesian_product()
        .map(|rest| {
            let mut perms = vec![identity.clone()];
            perms.extend(rest);
            Clustering::new(perms).expect("permutations")
        })
        .collect()
}

/// Maximum-likelihood clustering by exhaustive enumeration.
///
/// Likelihoods within `1e−10` tie and the lexicographically first wins.
pub fn brute_force_map_clustering(commons: &[Vec<f64>], ms: &ModulusSet, budget: &OracleBudget) -> Result<Clustering> {
    let n = check_commons(commons, ms)?;
    check_clustering_budget(n, ms.len(), budget)?;
    let table = LikelihoodTable::new(commons, ms, budget);
    let mut best: Option<(Clustering, f64)> = None;
    for clustering in all_clusterings(n, ms.len()) {
        let value = table.clustering(&clustering);
        if best.as_ref().is_none_or(|b| value > b.1 + 1e-10) {
            best = Some((clustering, value));
        }
    }
    Ok(best.expect("at least one clustering").0)
}

/// Minimizer of `Σ_i d_Γ²(column[perm[i]], mu[i])` over all `N!` permutations.
///
/// Costs within `1e−9` tie and the lexicographically first wins.
pub fn brute_force_matching(column: &[f64], mu: &[f64], gamma: f64, budget: &OracleBudget) -> Result<Vec<usize>> {
    let n = column.len();
    if n != mu.len() {
        return Err(RcrtError::LengthMismatch {
            what: "centres",
            expected: n,
            got: mu.len(),
        });
    }
    if n == 0 {
        return Err(RcrtError::Empty("column"));
    }
    if n > budget.max_matching_n {
        return Err(RcrtError::BudgetExceeded(format!(
            "matching N = {n} exceeds {}",
            budget.max_matching_n
        )));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for perm in (0..n).permutations(n) {
        let cost = matching_cost(column, mu, &perm, gamma);
        if best.as_ref().is_none_or(|b| cost < b.1 - TIE_TOLERANCE) {
            best = Some((perm, cost));
        }
    }
    Ok(best.expect("at least one permutation").0)
}

/// `min_{μ ∈ [0, Γ]} Σ_l w_l·d_{m_l}(a_l, μ)²`, exact.
///
/// Each term is quadratic in `μ` except at the antipode of `a_l`, so the
/// objective is a sum of quadratics between consecutive antipodes and the
/// minimum is a clamped weighted mean on one of those pieces.
fn best_offset(offsets: &[f64], moduli: &[f64], weights: &[f64], gamma: f64) -> (f64, f64) {
    let mut cuts = vec![0.0, gamma];
    for (&a, &m) in offsets.iter().zip(moduli) {
        let anti = wrap(a + m / 2.0, m);
        if anti > 0.0 && anti < gamma {
            cuts.push(anti);
        }
    }
    cuts.sort_by(f64::total_cmp);

    let loss = |mu: f64| -> f64 {
        offsets
            .iter()
            .zip(moduli)
            .zip(weights)
            .map(|((&a, &m), &w)| {
                let d = wrap(mu - a, m).min(m - wrap(mu - a, m));
                w * d * d
            })
            .sum()
    };

    let mut best = (f64::NAN, f64::INFINITY);
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let mid = 0.5 * (lo + hi);
        // nearest lift of every offset to the piece's midpoint
        let (num, den) = offsets
            .iter()
            .zip(moduli)
            .zip(weights)
            .fold((0.0, 0.0), |(num, den), ((&a, &m), &w)| {
                let c = a + ((mid - a) / m).round() * m;
                (num + w * c, den + w)
            });
        let mu = (num / den).clamp(lo, hi);
        let value = loss(mu);
        if value < best.1 - TIE_TOLERANCE {
            best = (mu, value);
        }
    }
    best
}

/// Least-squares reconstruction by walking every quotient.
///
/// For each `k ∈ [0, ∏M)` the best `Y = kΓ + μ` with `μ ∈ [0, Γ]` is found
/// exactly; the quotient with the smallest `Σ_l w_l·d_{m_l}(R_l, Y)²` wins and
/// ties go to the smallest `k`.
pub fn exhaustive_reconstruct(cluster: &ClusterResidues, ms: &ModulusSet) -> Result<Estimate> {
    if cluster.raws().len() != ms.len() {
        return Err(RcrtError::LengthMismatch {
            what: "cluster residues",
            expected: ms.len(),
            got: cluster.raws().len(),
        });
    }
    if ms.quotient_range() > MAX_EXHAUSTIVE_QUOTIENTS {
        return Err(RcrtError::BudgetExceeded(format!(
            "{} quotients exceeds {MAX_EXHAUSTIVE_QUOTIENTS}",
            ms.quotient_range()
        )));
    }
    let gamma = ms.gamma();
    let moduli: Vec<f64> = (0..ms.len()).map(|l| ms.modulus(l)).collect();
    let mut best: Option<(u128, f64, f64)> = None;
    for k in 0..ms.quotient_range() {
        let base = k as f64 * gamma;
        let offsets: Vec<f64> = cluster
            .raws()
            .iter()
            .zip(&moduli)
            .map(|(&r, &m)| wrap(r - base, m))
            .collect();
        let (mu, value) = best_offset(&offsets, &moduli, ms.weights(), gamma);
        if best.is_none_or(|b| value < b.2 - TIE_TOLERANCE) {
            best = Some((k, mu, value));
        }
    }
    let (quotient, mu_hat, _) = best.expect("at least one quotient");
    Ok(Estimate {
        y_hat: quotient as f64 * gamma + mu_hat,
        quotient,
        mu_hat,
    })
}
