//! Conditional MAP clustering by cutting-point enumeration.
//!
//! If some point `τ` of the small circle lies outside every number's noise
//! arc, cutting the circle at `τ` turns circular order into linear order and
//! the MAP clustering groups the `i`-th order statistics of every column.
//! Only the `N·L` observed common residues need to be tried as cutting points.

use crate::error::{RcrtError, Result};
use crate::modular::ModulusSet;
use crate::observation::{Clustering, Estimate, ObservationMatrix};
use crate::single::{estimate_with_mu, fit_unchecked, TIE_TOLERANCE};

/// Common residues after cutting the circle at `tau`, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedResidues {
    pub values: Vec<Vec<f64>>,
    pub tau: f64,
}

/// Cuts the circle at `tau`: residues above `tau` move down by `Γ`.
///
/// A cut at or outside the observed span leaves every residue in place.
pub fn shift_residues(commons: &[Vec<f64>], tau: f64, gamma: f64) -> ShiftedResidues {
    let (lo, hi) = commons
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        });
    let values = if tau <= lo || tau >= hi {
        commons.to_vec()
    } else {
        commons
            .iter()
            .map(|col| col.iter().map(|&r| if r <= tau { r } else { r - gamma }).collect())
            .collect()
    };
    ShiftedResidues { values, tau }
}

/// `Σ_i [(Σ_l w_l·x_il)² / Σ_l w_l − Σ_l w_l·x_il²]` over groups `x_i`.
///
/// This is the negated weighted within-group scatter, so it is never
/// positive and vanishes exactly when every group is constant.
pub fn cluster_score(groups: &[Vec<f64>], weights: &[f64]) -> f64 {
    let total_w: f64 = weights.iter().sum();
    groups
        .iter()
        .map(|g| {
            let lin: f64 = g.iter().zip(weights).map(|(x, w)| w * x).sum();
            let quad: f64 = g.iter().zip(weights).map(|(x, w)| w * x * x).sum();
            lin * lin / total_w - quad
        })
        .sum()
}

/// Groups the `i`-th smallest value of every column into estimand `i`.
///
/// Duplicate values keep their original row order.
pub fn order_statistic_clustering(values: &[Vec<f64>]) -> Clustering {
    let perms = values
        .iter()
        .map(|col| {
            let mut rows: Vec<usize> = (0..col.len()).collect();
            rows.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            rows
        })
        .collect();
    Clustering::new(perms).expect("sorted row indices form permutations")
}

fn groups_of(clustering: &Clustering, values: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..clustering.n()).map(|i| clustering.gather(values, i)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapClustering {
    pub clustering: Clustering,
    pub tau_star: f64,
    pub score: f64,
    /// Score reached at every candidate cutting point, in ascending `τ` order.
    pub candidates: Vec<(f64, f64)>,
}

/// MAP clustering over the `N·L` candidate cutting points.
///
/// Scores within `1e−9` of each other tie; ties go to the smallest `τ`.
/// The best-scoring cut is returned even when no valid cutting point exists.
pub fn map_clustering(commons: &[Vec<f64>], ms: &ModulusSet) -> Result<MapClustering> {
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

    let mut taus: Vec<f64> = commons.iter().flatten().copied().collect();
    taus.sort_by(f64::total_cmp);

    let mut best: Option<(Clustering, f64, f64)> = None;
    let mut candidates = Vec::with_capacity(taus.len());
    for tau in taus {
        let shifted = shift_residues(commons, tau, ms.gamma());
        let clustering = order_statistic_clustering(&shifted.values);
        let score = cluster_score(&groups_of(&clustering, &shifted.values), ms.weights());
        candidates.push((tau, score));
        if best.as_ref().is_none_or(|b| score > b.2 + TIE_TOLERANCE) {
            best = Some((clustering, tau, score));
        }
    }
    let (clustering, tau_star, score) = best.expect("at least one candidate");
    Ok(MapClustering {
        clustering,
        tau_star,
        score,
        candidates,
    })
}

/// Reconstructs each cluster with the single-number robust CRT.
pub fn reconstruct_clustered(
    observations: &ObservationMatrix,
    clustering: &Clustering,
    ms: &ModulusSet,
) -> Vec<Estimate> {
    let commons = observations.commons(ms.gamma());
    (0..clustering.n())
        .map(|i| {
            let raws = clustering.gather(observations.columns(), i);
            let fit = fit_unchecked(&clustering.gather(&commons, i), ms.weights(), ms.gamma());
            estimate_with_mu(&raws, fit.mu_hat, ms)
        })
        .collect()
}

/// Clustering by cutting-point enumeration, then single-number robust CRT.
pub fn reconstruct_algo1(observations: &ObservationMatrix, ms: &ModulusSet) -> Result<Vec<Estimate>> {
    observations.validate(ms)?;
    let map = map_clustering(&observations.commons(ms.gamma()), ms)?;
    Ok(reconstruct_clustered(observations, &map.clustering, ms))
}
