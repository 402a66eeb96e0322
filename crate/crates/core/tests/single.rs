use proptest::prelude::*;
use rand::Rng;
use rcrt::modular::{wrap, ModulusSet};
use rcrt::noise::stream_rng;
use rcrt::oracle::exhaustive_reconstruct;
use rcrt::single::circular_loss;
use rcrt::{estimate_common_residue, reconstruct_single, ClusterResidues};

fn grid_min(commons: &[f64], weights: &[f64], gamma: f64, steps: usize) -> f64 {
    (0..steps)
        .map(|k| circular_loss(gamma * k as f64 / steps as f64, commons, weights, gamma))
        .fold(f64::INFINITY, f64::min)
}

fn draw_cluster(rng: &mut impl Rng, ms: &ModulusSet, range: f64, sigma: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let y = rng.random_range(0.0..range);
    let noise: Vec<f64> = (0..ms.len()).map(|_| rng.random_range(-1.0..1.0) * sigma).collect();
    let raws = noise
        .iter()
        .enumerate()
        .map(|(l, d)| wrap(y + d, ms.modulus(l)))
        .collect();
    (y, noise, raws)
}

fn spread(noise: &[f64]) -> f64 {
    noise.iter().copied().fold(f64::NEG_INFINITY, f64::max) - noise.iter().copied().fold(f64::INFINITY, f64::min)
}

fn modular_error(a: f64, b: f64, range: f64) -> f64 {
    let d = wrap(a - b, range);
    d.min(range - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn candidate_is_grid_optimal(
        gamma in 1.0f64..100.0,
        pairs in prop::collection::vec((0.0f64..1.0, 0.05f64..5.0), 1..7),
    ) {
        let commons: Vec<f64> = pairs.iter().map(|p| p.0 * gamma).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let fit = estimate_common_residue(&commons, &weights, gamma).unwrap();
        prop_assert!((0.0..gamma).contains(&fit.mu_hat));
        let steps = 100_000;
        let grid = grid_min(&commons, &weights, gamma, steps);
        let step = gamma / steps as f64;
        let slack = weights.iter().sum::<f64>() * step * step;
        prop_assert!(fit.loss <= grid + 1e-8);
        prop_assert!(fit.loss >= grid - slack - 1e-8);
    }
}

#[test]
fn robust_within_half_gamma() {
    let ms = ModulusSet::uniform(100.0, vec![23, 29, 31, 37], 10.0).unwrap();
    let mut rng = stream_rng(42, 0);
    let range = ms.dynamic_range();
    let mut checked = 0;
    while checked < 2_000 {
        let (y, noise, raws) = draw_cluster(&mut rng, &ms, range, 30.0);
        if spread(&noise) >= 50.0 {
            continue;
        }
        checked += 1;
        let est = reconstruct_single(&ClusterResidues::new(raws, &ms).unwrap(), &ms).unwrap();
        assert!(
            modular_error(est.y_hat, y, range) < 50.0,
            "y = {y}, noise = {noise:?}, {est:?}"
        );
    }
}

#[test]
fn exact_without_noise() {
    let ms = ModulusSet::uniform(100.0, vec![23, 29, 31], 0.0).unwrap();
    let mut rng = stream_rng(3, 0);
    for _ in 0..2_000 {
        let (y, _, raws) = draw_cluster(&mut rng, &ms, ms.dynamic_range(), 0.0);
        let est = reconstruct_single(&ClusterResidues::new(raws, &ms).unwrap(), &ms).unwrap();
        assert!((est.y_hat - y).abs() <= 1e-9 * y.max(1.0), "{y} vs {}", est.y_hat);
    }
}

#[test]
fn agrees_with_exhaustive_search() {
    // With spread below Γ/2 the circular fit also minimizes the exact
    // least-squares objective over the whole dynamic range.
    let ms = ModulusSet::with_weights(10.0, vec![3, 5, 7], vec![1.0, 0.5, 2.0]).unwrap();
    let mut rng = stream_rng(8, 0);
    let range = ms.dynamic_range();
    let mut checked = 0;
    while checked < 300 {
        let (y, noise, raws) = draw_cluster(&mut rng, &ms, range, 3.0);
        if spread(&noise) >= 5.0 {
            continue;
        }
        checked += 1;
        let cluster = ClusterResidues::new(raws, &ms).unwrap();
        let fast = reconstruct_single(&cluster, &ms).unwrap();
        let slow = exhaustive_reconstruct(&cluster, &ms).unwrap();
        assert!(
            modular_error(fast.y_hat, slow.y_hat, range) < 1e-9,
            "{fast:?} vs {slow:?}"
        );
        assert!(modular_error(slow.y_hat, y, range) < 5.0);
    }
}
