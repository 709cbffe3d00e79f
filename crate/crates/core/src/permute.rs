//! Seeded random permutation by repeated random pops.
//!
//! [`permute`] draws an index uniformly from the remaining pool, removes that
//! element (keeping the rest of the pool in order), and prepends it to the
//! output. The output is therefore the *reverse* of the pop order. Each
//! step draws from the generator exactly once, including the last step where
//! the pool has a single element.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `SeedableRng::seed_from_u64`. Ranges are drawn by rejection sampling on
//! 64-bit outputs: for a span `s = hi - lo + 1`, a draw `x` is accepted when
//! `x < 2^64 - (2^64 mod s)` and mapped to `lo + x mod s`.

use std::collections::hash_map::RandomState;
use std::hash::{BuildHasher, Hasher};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A source of uniform integers in an inclusive range.
pub trait RandomRange {
    /// Uniform integer in `[lo, hi]`. Always advances the generator.
    fn rand_range(&mut self, lo: usize, hi: usize) -> usize;
}

/// The deterministic generator used to order rings.
#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        Rng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

impl RandomRange for Rng {
    fn rand_range(&mut self, lo: usize, hi: usize) -> usize {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        let Some(span) = ((hi - lo) as u64).checked_add(1) else {
            return lo + self.inner.next_u64() as usize;
        };
        // 2^64 mod span; zero means every draw is acceptable.
        let excess = (u64::MAX % span + 1) % span;
        loop {
            let x = self.inner.next_u64();
            if excess == 0 || x < excess.wrapping_neg() {
                return lo + (x % span) as usize;
            }
        }
    }
}

/// A seed drawn from the process's hash-randomisation entropy.
pub fn entropy_seed() -> u64 {
    let mut hasher = RandomState::new().build_hasher();
    hasher.write_u128(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or_default(),
    );
    hasher.finish()
}

/// Returns `items` in a random order drawn from `rng`.
pub fn permute<T, R>(items: Vec<T>, rng: &mut R) -> Vec<T>
where
    R: RandomRange + ?Sized,
{
    let len = items.len();
    let mut pool: Vec<Option<T>> = items.into_iter().map(Some).collect();
    let mut remaining = Remaining::full(len);
    let mut popped = Vec::with_capacity(len);
    for left in (1..=len).rev() {
        let index = rng.rand_range(0, left - 1);
        let position = remaining.take_nth(index);
        let item = pool[position].take().expect("pop empty list");
        popped.push(item);
    }
    popped.reverse();
    popped
}

/// Which pool positions are still present, with k-th-present lookup.
/// A Fenwick tree over 0/1 presence flags.
struct Remaining {
    tree: Vec<usize>,
}

impl Remaining {
    fn full(len: usize) -> Self {
        // Fenwick tree of all ones: node i covers lowbit(i) positions.
        let tree = (0..=len).map(|i| i & i.wrapping_neg()).collect();
        Remaining { tree }
    }

    /// Removes and returns the position of the `nth` (0-based) present slot.
    fn take_nth(&mut self, nth: usize) -> usize {
        let len = self.tree.len() - 1;
        let mut node = 0;
        let mut rest = nth;
        let mut step = if len == 0 { 0 } else { 1 << len.ilog2() };
        while step > 0 {
            let next = node + step;
            if next <= len && self.tree[next] <= rest {
                node = next;
                rest -= self.tree[next];
            }
            step >>= 1;
        }
        // `node` is the count of slots before the target; the target is 1-based node + 1.
        let mut i = node + 1;
        assert!(i <= len, "pop empty list");
        while i <= len {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
        node
    }
}
