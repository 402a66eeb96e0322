#![allow(dead_code)]

use rcrt::modular::{primes_from, ModulusSet};
use rcrt::noise::{sample_instance, GroundTruth, InstanceSpec};
use rcrt::{Estimate, ObservationMatrix};

pub const GAMMA: f64 = 100.0;

pub fn instance(
    n: usize,
    l: usize,
    snr_db: f64,
    seed: u64,
    stream: u64,
) -> (ModulusSet, GroundTruth, ObservationMatrix) {
    let ms = ModulusSet::from_snr(GAMMA, primes_from(23, l), snr_db).unwrap();
    let spec = InstanceSpec::new(n, ms.clone(), seed).with_stream(stream);
    let (truth, obs) = sample_instance(&spec).unwrap();
    (ms, truth, obs)
}

/// Largest error after pairing sorted estimates with sorted truths.
pub fn worst_error(estimates: &[Estimate], ys: &[f64]) -> f64 {
    let mut a: Vec<f64> = estimates.iter().map(|e| e.y_hat).collect();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
