//! Robust reconstruction of one number from its `L` noisy residues.
//!
//! Once residues have been assigned to a number, the common residue is the
//! weighted circular least-squares point on `[0, Γ)`, and the quotient
//! `⌊Y/Γ⌋` follows exactly from classical CRT on the per-modulus folding
//! counts.

use crate::error::{RcrtError, Result};
use crate::modular::{crt_unchecked, project_common, wrap, wrapped_distance, ModulusSet};
use crate::observation::Estimate;

/// Losses closer than this are treated as equal when choosing among candidates.
pub(crate) const TIE_TOLERANCE: f64 = 1e-9;

/// Minimizer of the weighted circular squared distance and its loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularFit {
    pub mu_hat: f64,
    pub loss: f64,
}

/// `Σ_l w_l·d_Γ²(x, r_l)`.
pub fn circular_loss(x: f64, commons: &[f64], weights: &[f64], gamma: f64) -> f64 {
    commons
        .iter()
        .zip(weights)
        .map(|(&r, &w)| {
            let d = wrapped_distance(x, r, gamma);
            w * d * d
        })
        .sum()
}

/// Weighted circular mean of `commons` on `[0, Γ)`.
///
/// Sorting the residues as `γ_(1) ≤ … ≤ γ_(L)`, the optimum is one of the `L`
/// wrapped means in which the `j` smallest residues are lifted by `Γ`:
///
/// `candidate(j) = ⟨(Σ_l w_(l)·γ_(l) + Γ·Σ_{l≤j} w_(l)) / Σ_l w_l⟩_Γ`, `j = 0..L−1`.
///
/// Equal-loss candidates resolve to the smallest `j`.
pub fn estimate_common_residue(commons: &[f64], weights: &[f64], gamma: f64) -> Result<CircularFit> {
    if commons.is_empty() {
        return Err(RcrtError::Empty("common residues"));
    }
    if commons.len() != weights.len() {
        return Err(RcrtError::LengthMismatch {
            what: "weights",
            expected: commons.len(),
            got: weights.len(),
        });
    }
    Ok(fit_unchecked(commons, weights, gamma))
}

pub(crate) fn fit_unchecked(commons: &[f64], weights: &[f64], gamma: f64) -> CircularFit {
    let mut order: Vec<usize> = (0..commons.len()).collect();
    order.sort_by(|&a, &b| commons[a].total_cmp(&commons[b]).then(a.cmp(&b)));

    let total_w: f64 = weights.iter().sum();
    let base: f64 = commons.iter().zip(weights).map(|(r, w)| r * w).sum();

    let mut best = CircularFit {
        mu_hat: f64::NAN,
        loss: f64::INFINITY,
    };
    let mut lifted_w = 0.0;
    for &idx in &order {
        let candidate = wrap((base + gamma * lifted_w) / total_w, gamma);
        let loss = circular_loss(candidate, commons, weights, gamma);
        if loss < best.loss - TIE_TOLERANCE {
            best = CircularFit {
                mu_hat: candidate,
                loss,
            };
        }
        lifted_w += weights[idx];
    }
    best
}

/// The `L` residues assigned to one number.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResidues {
    raws: Vec<f64>,
    commons: Vec<f64>,
}

impl ClusterResidues {
    pub fn new(raws: Vec<f64>, ms: &ModulusSet) -> Result<Self> {
        if raws.len() != ms.len() {
            return Err(RcrtError::LengthMismatch {
                what: "cluster residues",
                expected: ms.len(),
                got: raws.len(),
            });
        }
        for (l, &x) in raws.iter().enumerate() {
            if !(0.0..ms.modulus(l)).contains(&x) {
                return Err(RcrtError::invalid(
                    "residue",
                    format!("{x} outside [0, {}) for modulus {l}", ms.modulus(l)),
                ));
            }
        }
        let commons = raws.iter().map(|&x| project_common(x, ms.gamma())).collect();
        Ok(ClusterResidues { raws, commons })
    }

    pub fn raws(&self) -> &[f64] {
        &self.raws
    }

    pub fn commons(&self) -> &[f64] {
        &self.commons
    }

    pub fn select(&self, indices: &[usize]) -> ClusterResidues {
        ClusterResidues {
            raws: indices.iter().map(|&l| self.raws[l]).collect(),
            commons: indices.iter().map(|&l| self.commons[l]).collect(),
        }
    }
}

/// Quotient `Q` consistent with common residue `mu`.
///
/// Each residue folds `j_l = round((R_l − μ)/Γ)` times (ties to even, possibly
/// negative when `R_l` sits just past a wrap point); `Q` is the CRT of
/// `j_l mod M_l`.
pub fn quotient_for(raws: &[f64], mu: f64, ms: &ModulusSet) -> u128 {
    let gamma = ms.gamma();
    let residues: Vec<u64> = raws
        .iter()
        .zip(ms.coprimes())
        .map(|(&r, &m)| {
            let j = ((r - mu) / gamma).round_ties_even() as i128;
            j.rem_euclid(m as i128) as u64
        })
        .collect();
    crt_unchecked(&residues, ms.coprimes())
}

/// Estimate for a cluster whose common residue is already known.
pub fn estimate_with_mu(raws: &[f64], mu: f64, ms: &ModulusSet) -> Estimate {
    let quotient = quotient_for(raws, mu, ms);
    Estimate {
        y_hat: quotient as f64 * ms.gamma() + mu,
        quotient,
        mu_hat: mu,
    }
}

/// Robust CRT for a single number.
pub fn reconstruct_single(cluster: &ClusterResidues, ms: &ModulusSet) -> Result<Estimate> {
    if cluster.raws.len() != ms.len() {
        return Err(RcrtError::LengthMismatch {
            what: "cluster residues",
            expected: ms.len(),
            got: cluster.raws.len(),
        });
    }
    let fit = fit_unchecked(&cluster.commons, ms.weights(), ms.gamma());
    Ok(estimate_with_mu(&cluster.raws, fit.mu_hat, ms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_min(commons: &[f64], weights: &[f64], gamma: f64, steps: usize) -> (f64, f64) {
        (0..steps)
            .map(|k| {
                let x = gamma * k as f64 / steps as f64;
                (x, circular_loss(x, commons, weights, gamma))
            })
            .fold((0.0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
    }

    #[test]
    fn worked_example_candidate() {
        let fit = estimate_common_residue(&[2.0, 3.0, 0.5], &[1.0; 3], 5.0).unwrap();
        assert!((fit.mu_hat - 5.5 / 3.0).abs() < 1e-12);
        for other in [10.5 / 3.0, wrap(15.5 / 3.0, 5.0)] {
            assert!(circular_loss(other, &[2.0, 3.0, 0.5], &[1.0; 3], 5.0) > fit.loss);
        }
    }

    #[test]
    fn single_residue_and_pair() {
        let fit = estimate_common_residue(&[3.25], &[7.0], 5.0).unwrap();
        assert_eq!((fit.mu_hat, fit.loss), (3.25, 0.0));

        let (x, loss) = grid_min(&[0.0, 1.0], &[1.0, 1.0], 5.0, 50_000);
        assert!((x - 0.5).abs() < 1e-4 && (loss - 0.5).abs() < 1e-6);
        let fit = estimate_common_residue(&[0.0, 1.0], &[1.0, 1.0], 5.0).unwrap();
        assert!((fit.mu_hat - 0.5).abs() < 1e-12);
        assert!((fit.loss - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_is_rejected() {
        assert_eq!(
            estimate_common_residue(&[], &[], 5.0),
            Err(RcrtError::Empty("common residues"))
        );
    }

    #[test]
    fn first_worked_cluster() {
        // Y = 11 observed as 1 (mod 10) and 10 (mod 15), Γ = 5.
        let ms = ModulusSet::uniform(5.0, vec![2, 3], 1.0).unwrap();
        let cluster = ClusterResidues::new(vec![1.0, 10.0], &ms).unwrap();
        let est = reconstruct_single(&cluster, &ms).unwrap();
        assert!((est.mu_hat - 0.5).abs() < 1e-12);
        assert_eq!(est.quotient, 2);
        assert!((est.y_hat - 10.5).abs() < 1e-12);
    }

    #[test]
    fn noiseless_reconstruction() {
        let ms = ModulusSet::uniform(5.0, vec![2, 3, 7], 0.0).unwrap();
        for y in [0.0, 64.0, 11.0, 209.75] {
            let raws = (0..3).map(|l| wrap(y, ms.modulus(l))).collect();
            let est = reconstruct_single(&ClusterResidues::new(raws, &ms).unwrap(), &ms).unwrap();
            assert_eq!(est.y_hat, y);
        }
    }

    #[test]
    fn wrap_point_uses_negative_fold() {
        // Y = 10 + ε with one residue pushed below the wrap at 10.
        let ms = ModulusSet::uniform(5.0, vec![2, 3], 1.0).unwrap();
        let cluster = ClusterResidues::new(vec![0.2, 9.9], &ms).unwrap();
        let est = reconstruct_single(&cluster, &ms).unwrap();
        assert!((est.y_hat - 10.05).abs() < 1e-9, "{est:?}");
    }
}
