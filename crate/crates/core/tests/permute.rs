use std::collections::HashMap;

use proptest::prelude::*;
use ringleader::{permute, RandomRange, Rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_is_a_permutation(
        items in proptest::collection::vec(any::<u16>(), 0..10_000),
        seed in any::<u64>(),
    ) {
        let mut got = permute(items.clone(), &mut Rng::seeded(seed));
        let mut want = items;
        got.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn equal_seeds_give_equal_outputs(len in 0usize..500, seed in any::<u64>()) {
        let items: Vec<usize> = (0..len).collect();
        prop_assert_eq!(
            permute(items.clone(), &mut Rng::seeded(seed)),
            permute(items, &mut Rng::seeded(seed))
        );
    }

    #[test]
    fn rand_range_is_inclusive(lo in 0usize..1000, width in 0usize..1000, seed in any::<u64>()) {
        let mut rng = Rng::seeded(seed);
        let x = rng.rand_range(lo, lo + width);
        prop_assert!((lo..=lo + width).contains(&x));
    }
}

#[test]
fn four_elements_are_roughly_uniform() {
    let mut rng = Rng::seeded(2024);
    let mut counts: HashMap<Vec<u8>, u32> = HashMap::new();
    for _ in 0..24_000 {
        *counts
            .entry(permute(vec![0, 1, 2, 3], &mut rng))
            .or_default() += 1;
    }
    assert_eq!(counts.len(), 24);
    for (perm, count) in counts {
        assert!((800..=1200).contains(&count), "{perm:?} seen {count} times");
    }
}

#[test]
fn different_seeds_usually_differ() {
    let items: Vec<u32> = (0..64).collect();
    let a = permute(items.clone(), &mut Rng::seeded(1));
    let b = permute(items, &mut Rng::seeded(2));
    assert_ne!(a, b);
}
