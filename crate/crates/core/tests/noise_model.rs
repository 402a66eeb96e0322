mod common;

use common::{instance, GAMMA};
use proptest::prelude::*;
use rcrt::modular::wrap;
use rcrt::noise::{separation_bound, separation_probability};

#[test]
fn planted_permutations_undo_the_shuffle() {
    for stream in 0..50 {
        let (ms, truth, obs) = instance(4, 5, -5.0, 3, stream);
        for l in 0..5 {
            for i in 0..4 {
                let observed = obs.column(l)[truth.true_perms.row(i, l)];
                let clean = wrap(observed - truth.noises[i][l], ms.modulus(l));
                let expected = wrap(truth.ys[i], ms.modulus(l));
                let d = wrap(clean - expected, ms.modulus(l));
                assert!(d.min(ms.modulus(l) - d) < 1e-12 * ms.dynamic_range());
            }
        }
    }
}

#[test]
fn numbers_stay_in_range() {
    let (ms, truth, _) = instance(50, 3, 0.0, 1, 0);
    assert!(truth.ys.iter().all(|&y| (0.0..ms.dynamic_range()).contains(&y)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn probability_below_bound(sigma in 0.5f64..60.0, n in 1usize..8, l in 1usize..12) {
        let p = separation_probability(sigma, GAMMA, n, l);
        let b = separation_bound(sigma, GAMMA, n, l);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert!(p <= b + 1e-9);
    }
}
