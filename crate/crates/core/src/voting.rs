//! Redundant moduli: majority voting over subsets and error-tolerant decoding.
//!
//! With `L` moduli and only `L₀` needed to cover the dynamic range, the spare
//! moduli can be spent two ways. Voting reruns a clustering algorithm on every
//! `k`-subset and keeps the `N` quotients that most subsets agree on.
//! Error-tolerant decoding clusters once with all `L` moduli and lets each
//! number's `L₀`-subsets outvote up to `⌊(L−L₀)/2⌋` misassigned residues.
//!
//! Two reconstructions of one number can disagree by one quotient when their
//! common residues straddle the wrap point, e.g. `(Q, Γ−ε)` and `(Q+1, ε)`.
//! Such pairs are merged into the smaller quotient before counting.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::algo1::{map_clustering, reconstruct_clustered};
use crate::algo2::{run_algo2, Algo2Options};
use crate::error::{RcrtError, Result};
use crate::modular::{signed_offset, wrap, wrapped_distance, ModulusSet};
use crate::observation::{Clustering, Estimate, ObservationMatrix};
use crate::single::{reconstruct_single, ClusterResidues};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VotingConfig {
    pub group_size: usize,
    /// Shortest prefix of the ascending co-prime factors whose product reaches
    /// `D/Γ`.
    pub l0: usize,
    /// `⌈D/Γ⌉`: every subset's `∏ M_l` must reach it.
    pub quotient_bound: u128,
}

impl VotingConfig {
    /// Configuration for numbers in `[0, dynamic_range)`.
    pub fn new(ms: &ModulusSet, dynamic_range: f64, group_size: usize) -> Result<Self> {
        if !(dynamic_range.is_finite() && dynamic_range > 0.0) {
            return Err(RcrtError::invalid("dynamic range", "must be finite and positive"));
        }
        let quotient_bound = (dynamic_range / ms.gamma()).ceil() as u128;
        let mut sorted = ms.coprimes().to_vec();
        sorted.sort_unstable();
        let mut product = 1u128;
        let mut l0 = None;
        for (k, &m) in sorted.iter().enumerate() {
            product = product.saturating_mul(m as u128);
            if product >= quotient_bound {
                l0 = Some(k + 1);
                break;
            }
        }
        let l0 = l0.ok_or_else(|| RcrtError::invalid("dynamic range", "exceeds the range of all moduli together"))?;
        if group_size < l0 || group_size > ms.len() {
            return Err(RcrtError::invalid(
                "group_size",
                format!("{group_size} outside [{l0}, {}]", ms.len()),
            ));
        }
        Ok(VotingConfig {
            group_size,
            l0,
            quotient_bound,
        })
    }

    /// Error-tolerance `⌊(L−L₀)/2⌋` of the decoder for `l` moduli.
    pub fn tolerable_errors(&self, l: usize) -> usize {
        l.saturating_sub(self.l0) / 2
    }
}

/// Every `group_size`-subset of the moduli that covers the dynamic range, in
/// lexicographic order.
pub fn regroup_moduli(ms: &ModulusSet, cfg: &VotingConfig) -> Vec<Vec<usize>> {
    (0..ms.len())
        .combinations(cfg.group_size)
        .filter(|subset| {
            subset
                .iter()
                .try_fold(1u128, |p, &l| p.checked_mul(ms.coprimes()[l] as u128))
                .is_none_or(|p| p >= cfg.quotient_bound)
        })
        .collect()
}

/// How each subset is clustered before voting.
#[derive(Debug, Clone, PartialEq)]
pub enum SubsetMethod {
    Algo1,
    Algo2(Algo2Options),
    /// A known clustering of all `L` moduli, restricted to each subset.
    Clustered(Clustering),
}

/// One voting unit: merged candidates sharing a quotient.
#[derive(Debug, Clone, PartialEq)]
struct Unit {
    quotient: u128,
    /// Mean common residue, lifted by `Γ` when a wrapped partner was merged.
    lifted_mu: f64,
    support: usize,
}

impl Unit {
    fn estimate(&self, gamma: f64) -> Estimate {
        let carry = (self.lifted_mu / gamma).floor();
        let quotient = (self.quotient as i128 + carry as i128).max(0) as u128;
        let mu_hat = wrap(self.lifted_mu, gamma);
        Estimate {
            y_hat: quotient as f64 * gamma + mu_hat,
            quotient,
            mu_hat,
        }
    }
}

/// Merges `(Q+1, μ₂)` into `(Q, μ₂+Γ)` when `Q` holds a `μ₁ ≥ Γ/2` within `Γ/4`
/// of `μ₂ < Γ/2`, then splits each quotient's lifted residues at gaps wider
/// than `Γ/4`. Units come back ranked by support, then quotient, then residue.
fn tally(candidates: &[(u128, f64)], gamma: f64) -> Vec<Unit> {
    let mut buckets: BTreeMap<u128, Vec<f64>> = BTreeMap::new();
    for &(q, mu) in candidates {
        buckets.entry(q).or_default().push(mu);
    }
    let mut merged: BTreeMap<u128, Vec<f64>> = BTreeMap::new();
    for (&q, mus) in &buckets {
        for &mu in mus {
            let partner = (q > 0 && mu < gamma / 2.0)
                .then(|| buckets.get(&(q - 1)))
                .flatten()
                .is_some_and(|below| {
                    below
                        .iter()
                        .any(|&m| m >= gamma / 2.0 && wrapped_distance(m, mu, gamma) < gamma / 4.0)
                });
            if partner {
                merged.entry(q - 1).or_default().push(mu + gamma);
            } else {
                merged.entry(q).or_default().push(mu);
            }
        }
    }

    let mut units = Vec::new();
    for (q, mut mus) in merged {
        mus.sort_by(f64::total_cmp);
        let mut start = 0;
        for k in 1..=mus.len() {
            if k == mus.len() || mus[k] - mus[k - 1] > gamma / 4.0 {
                let group = &mus[start..k];
                units.push(Unit {
                    quotient: q,
                    lifted_mu: group.iter().sum::<f64>() / group.len() as f64,
                    support: group.len(),
                });
                start = k;
            }
        }
    }
    units.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then(a.quotient.cmp(&b.quotient))
            .then(a.lifted_mu.total_cmp(&b.lifted_mu))
    });
    units
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoteOutcome {
    /// Winners in ascending order of `y_hat`.
    pub estimates: Vec<Estimate>,
    /// Number of candidates behind each winner.
    pub support: Vec<usize>,
    pub subsets: usize,
    /// Mean alternating-MAP matching rounds per subset; zero for other methods.
    pub mean_iterations: f64,
}

fn subset_estimates(
    observations: &ObservationMatrix,
    ms: &ModulusSet,
    subset: &[usize],
    method: &SubsetMethod,
) -> Result<(Vec<Estimate>, usize)> {
    let sub_obs = observations.select_columns(subset);
    let sub_ms = ms.subset(subset)?;
    match method {
        SubsetMethod::Algo1 => {
            let map = map_clustering(&sub_obs.commons(ms.gamma()), &sub_ms)?;
            Ok((reconstruct_clustered(&sub_obs, &map.clustering, &sub_ms), 0))
        }
        SubsetMethod::Algo2(opts) => {
            let out = run_algo2(&sub_obs, &sub_ms, opts)?;
            Ok((out.estimates, out.state.rounds()))
        }
        SubsetMethod::Clustered(clustering) => Ok((
            reconstruct_clustered(&sub_obs, &clustering.restrict(subset), &sub_ms),
            0,
        )),
    }
}

/// Majority vote on quotients over every subset from [`regroup_moduli`].
///
/// Candidates are counted in a canonical order, so the result does not depend
/// on the order subsets are evaluated in. Frequency ties go to the smaller
/// quotient. When fewer than `N` distinct quotients survive the error carries
/// the partial result.
pub fn vote_reconstruct(
    observations: &ObservationMatrix,
    ms: &ModulusSet,
    cfg: &VotingConfig,
    method: &SubsetMethod,
) -> Result<VoteOutcome> {
    observations.validate(ms)?;
    let subsets = regroup_moduli(ms, cfg);
    if subsets.is_empty() {
        return Err(RcrtError::Empty("modulus subsets"));
    }
    let mut candidates = Vec::with_capacity(subsets.len() * observations.n());
    let mut iterations = 0;
    for subset in &subsets {
        let (estimates, iters) = subset_estimates(observations, ms, subset, method)?;
        iterations += iters;
        candidates.extend(estimates.iter().map(|e| (e.quotient, e.mu_hat)));
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let n = observations.n();
    let units = tally(&candidates, ms.gamma());
    let mut winners: Vec<(Estimate, usize)> = units
        .iter()
        .take(n)
        .map(|u| (u.estimate(ms.gamma()), u.support))
        .collect();
    winners.sort_by(|a, b| a.0.y_hat.total_cmp(&b.0.y_hat));
    let (estimates, support): (Vec<Estimate>, Vec<usize>) = winners.into_iter().unzip();
    if estimates.len() < n {
        return Err(RcrtError::DegenerateVote {
            needed: n,
            found: estimates.len(),
            partial: estimates,
        });
    }
    Ok(VoteOutcome {
        estimates,
        support,
        subsets: subsets.len(),
        mean_iterations: iterations as f64 / subsets.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOutcome {
    pub estimate: Estimate,
    /// Fraction of `L₀`-subsets behind the winning quotient.
    pub confidence: f64,
    pub support: usize,
    pub subsets: usize,
    /// Set when no quotient won more than one subset.
    pub low_confidence: bool,
}

/// Single-number decoding that tolerates a few arbitrarily wrong residues.
///
/// Every `L₀`-subset of the residues votes for a quotient. Around the winner
/// `y_ref`, residues whose offset `⟨R_l − y_ref⟩` (reduced to
/// `[−m_l/2, m_l/2)`) is below `Γ/2` are kept and the final value is `y_ref`
/// plus their weighted mean offset.
pub fn decode_with_errors(cluster: &ClusterResidues, ms: &ModulusSet, l0: usize) -> Result<DecodeOutcome> {
    let l = ms.len();
    if cluster.raws().len() != l {
        return Err(RcrtError::LengthMismatch {
            what: "cluster residues",
            expected: l,
            got: cluster.raws().len(),
        });
    }
    if l0 == 0 || l0 > l {
        return Err(RcrtError::invalid("l0", format!("{l0} outside [1, {l}]")));
    }
    let gamma = ms.gamma();
    let mut candidates = Vec::new();
    for subset in (0..l).combinations(l0) {
        let est = reconstruct_single(&cluster.select(&subset), &ms.subset(&subset)?)?;
        candidates.push((est.quotient, est.mu_hat));
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let subsets = candidates.len();
    let winner = tally(&candidates, gamma).swap_remove(0);
    let y_ref = winner.quotient as f64 * gamma + winner.lifted_mu;

    let (num, den) = cluster
        .raws()
        .iter()
        .enumerate()
        .map(|(k, &r)| (signed_offset(r, y_ref, ms.modulus(k)), ms.weights()[k]))
        .filter(|(offset, _)| offset.abs() < gamma / 2.0)
        .fold((0.0, 0.0), |(num, den), (offset, w)| (num + w * offset, den + w));
    let y = if den > 0.0 { y_ref + num / den } else { y_ref };
    let y = wrap(y, ms.dynamic_range());
    let quotient = (y / gamma).floor() as u128;
    let estimate = Estimate {
        y_hat: y,
        quotient,
        mu_hat: y - quotient as f64 * gamma,
    };
    Ok(DecodeOutcome {
        estimate,
        confidence: winner.support as f64 / subsets as f64,
        support: winner.support,
        subsets,
        low_confidence: winner.support <= 1,
    })
}

/// Applies [`decode_with_errors`] to every cluster of a full-`L` clustering.
pub fn decode_clustered(
    observations: &ObservationMatrix,
    clustering: &Clustering,
    ms: &ModulusSet,
    l0: usize,
) -> Result<Vec<DecodeOutcome>> {
    (0..clustering.n())
        .map(|i| {
            let cluster = ClusterResidues::new(clustering.gather(observations.columns(), i), ms)?;
            decode_with_errors(&cluster, ms, l0)
        })
        .collect()
}
