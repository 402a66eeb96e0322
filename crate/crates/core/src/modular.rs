//! Exact residue arithmetic and geometry on the circle of circumference `Γ`.
//!
//! Every modulus used by the reconstruction schemes has the form `m_l = Γ·M_l`
//! with pairwise co-prime integers `M_l`. Real-valued residues live on the
//! small circle `[0, Γ)` once projected; quotients are handled exactly in
//! 128-bit integers.

use crate::error::{RcrtError, Result};

/// Reduces `x` into `[0, modulus)`.
///
/// `f64::rem_euclid` may return `modulus` itself for tiny negative inputs;
/// that value is mapped to `0`.
#[inline]
pub fn wrap(x: f64, modulus: f64) -> f64 {
    let r = x.rem_euclid(modulus);
    if r >= modulus {
        0.0
    } else {
        r
    }
}

/// Projects a residue onto the small circle, `R − ⌊R/Γ⌋·Γ`.
///
/// Because `⟨⟨Y⟩_{Γ·M}⟩_Γ = ⟨Y⟩_Γ`, every residue of the same number shares
/// this value, called its common residue.
#[inline]
pub fn project_common(residue: f64, gamma: f64) -> f64 {
    wrap(residue, gamma)
}

/// Distance on the circle of circumference `gamma`: `min_j |a − b + jΓ|`.
#[inline]
pub fn wrapped_distance(a: f64, b: f64, gamma: f64) -> f64 {
    let d = wrap(a - b, gamma);
    d.min(gamma - d).clamp(0.0, gamma / 2.0)
}

/// Signed offset `x − reference` reduced into `[−modulus/2, modulus/2)`.
#[inline]
pub(crate) fn signed_offset(x: f64, reference: f64, modulus: f64) -> f64 {
    wrap(x - reference + modulus / 2.0, modulus) - modulus / 2.0
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

fn check_pairwise_coprime(moduli: &[u64]) -> Result<()> {
    for (a_idx, &a) in moduli.iter().enumerate() {
        if a == 0 {
            return Err(RcrtError::invalid("modulus", "moduli must be positive"));
        }
        for &b in &moduli[a_idx + 1..] {
            if gcd(a, b) != 1 {
                return Err(RcrtError::NotCoprime { a, b });
            }
        }
    }
    Ok(())
}

fn checked_product(moduli: &[u64]) -> Result<u128> {
    moduli
        .iter()
        .try_fold(1u128, |acc, &m| acc.checked_mul(m as u128))
        .ok_or(RcrtError::Overflow)
}

/// Classical CRT: the unique `x ∈ [0, ∏moduli)` with `x ≡ residues[l] (mod moduli[l])`.
///
/// Uses Garner-style mixed-radix accumulation so intermediate values never
/// exceed the final product.
pub fn crt_reconstruct(residues: &[u64], moduli: &[u64]) -> Result<u128> {
    if residues.is_empty() || moduli.is_empty() {
        return Err(RcrtError::Empty("crt input"));
    }
    if residues.len() != moduli.len() {
        return Err(RcrtError::LengthMismatch {
            what: "residues",
            expected: moduli.len(),
            got: residues.len(),
        });
    }
    check_pairwise_coprime(moduli)?;
    checked_product(moduli)?;
    for (&r, &m) in residues.iter().zip(moduli) {
        if r >= m {
            return Err(RcrtError::invalid("residue", format!("{r} is not reduced modulo {m}")));
        }
    }
    Ok(crt_unchecked(residues, moduli))
}

/// CRT without validation; callers guarantee co-prime moduli with a
/// representable product and reduced residues.
pub(crate) fn crt_unchecked(residues: &[u64], moduli: &[u64]) -> u128 {
    let mut x: u128 = residues[0] as u128;
    let mut radix: u128 = moduli[0] as u128;
    for (&r, &m) in residues.iter().zip(moduli).skip(1) {
        let m128 = m as u128;
        let x_mod = (x % m128) as u64;
        let diff = (r as u128 + m128 - x_mod as u128) % m128;
        let inv = mod_inverse((radix % m128) as u64, m).expect("moduli are co-prime");
        let t = diff * inv as u128 % m128;
        x += radix * t;
        radix *= m128;
    }
    x
}

/// The moduli `Γ·M_l` together with per-modulus noise levels and weights.
///
/// Weights are `w_l = 1/(2σ_l²)`. A noiseless set (every `σ_l = 0`) uses unit
/// weights, which leaves every weighted estimator unchanged up to scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusSet {
    gamma: f64,
    coprimes: Vec<u64>,
    sigmas: Vec<f64>,
    weights: Vec<f64>,
    quotient_range: u128,
}

impl ModulusSet {
    pub fn new(gamma: f64, coprimes: Vec<u64>, sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.len() != coprimes.len() {
            return Err(RcrtError::LengthMismatch {
                what: "sigmas",
                expected: coprimes.len(),
                got: sigmas.len(),
            });
        }
        if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(RcrtError::invalid("sigma", "must be finite and non-negative"));
        }
        let noiseless = sigmas.iter().all(|&s| s == 0.0);
        if !noiseless && sigmas.contains(&0.0) {
            return Err(RcrtError::invalid(
                "sigma",
                "either all noise levels are zero or none is",
            ));
        }
        let weights = if noiseless {
            vec![1.0; sigmas.len()]
        } else {
            sigmas.iter().map(|s| 1.0 / (2.0 * s * s)).collect()
        };
        Self::build(gamma, coprimes, sigmas, weights)
    }

    /// Equal noise level on every modulus.
    pub fn uniform(gamma: f64, coprimes: Vec<u64>, sigma: f64) -> Result<Self> {
        let sigmas = vec![sigma; coprimes.len()];
        Self::new(gamma, coprimes, sigmas)
    }

    /// Noise variance `σ² = 10^(−snr_db/10)` on every modulus; `+∞` means noiseless.
    pub fn from_snr(gamma: f64, coprimes: Vec<u64>, snr_db: f64) -> Result<Self> {
        Self::uniform(gamma, coprimes, sigma_from_snr(snr_db))
    }

    /// Explicit weights; noise levels are derived as `σ_l = 1/sqrt(2·w_l)`.
    pub fn with_weights(gamma: f64, coprimes: Vec<u64>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != coprimes.len() {
            return Err(RcrtError::LengthMismatch {
                what: "weights",
                expected: coprimes.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(RcrtError::invalid("weight", "must be finite and positive"));
        }
        let sigmas = weights.iter().map(|w| (0.5 / w).sqrt()).collect();
        Self::build(gamma, coprimes, sigmas, weights)
    }

    fn build(gamma: f64, coprimes: Vec<u64>, sigmas: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if coprimes.is_empty() {
            return Err(RcrtError::Empty("moduli"));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(RcrtError::invalid("gamma", "must be finite and positive"));
        }
        check_pairwise_coprime(&coprimes)?;
        let quotient_range = checked_product(&coprimes)?;
        Ok(ModulusSet {
            gamma,
            coprimes,
            sigmas,
            weights,
            quotient_range,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn coprimes(&self) -> &[u64] {
        &self.coprimes
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of moduli `L`.
    pub fn len(&self) -> usize {
        self.coprimes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coprimes.is_empty()
    }

    /// The real modulus `m_l = Γ·M_l`.
    pub fn modulus(&self, l: usize) -> f64 {
        self.gamma * self.coprimes[l] as f64
    }

    /// `∏ M_l`, the number of distinct quotients.
    pub fn quotient_range(&self) -> u128 {
        self.quotient_range
    }

    /// Dynamic range `D = Γ·∏ M_l`.
    pub fn dynamic_range(&self) -> f64 {
        self.gamma * self.quotient_range as f64
    }

    /// The moduli at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<ModulusSet> {
        if indices.is_empty() {
            return Err(RcrtError::Empty("modulus subset"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(RcrtError::invalid(
                "modulus subset",
                format!("index {bad} out of range for {} moduli", self.len()),
            ));
        }
        let pick = |v: &[f64]| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let coprimes: Vec<u64> = indices.iter().map(|&i| self.coprimes[i]).collect();
        Self::build(self.gamma, coprimes, pick(&self.sigmas), pick(&self.weights))
    }
}

/// `σ = sqrt(10^(−snr_db/10))`; `+∞` dB maps to zero noise.
pub fn sigma_from_snr(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0).sqrt()
    }
}

/// The first `count` primes not smaller than `start`.
pub fn primes_from(start: u64, count: usize) -> Vec<u64> {
    fn is_prime(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }
    (start..).filter(|&n| is_prime(n)).take(count).collect()
}
