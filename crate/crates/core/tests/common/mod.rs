#![allow(dead_code)]

/// Number of `Nominate` messages a Chang-Roberts ring sends, by brute force:
/// each node's self-nomination travels until it reaches a node that is not
/// smaller than the nominee. The greatest travels all the way round.
pub fn nominations(ranks: &[usize]) -> u64 {
    let n = ranks.len();
    let mut total = 0;
    for start in 0..n {
        let mut hops = 1;
        while ranks[(start + hops) % n] < ranks[start] {
            hops += 1;
        }
        total += hops as u64;
    }
    total
}

/// Rank of each ring position among the ring's ids, 0 for the smallest.
pub fn ranks_of<T: Ord + Clone>(ring: &[T]) -> Vec<usize> {
    let mut sorted = ring.to_vec();
    sorted.sort();
    ring.iter()
        .map(|id| sorted.binary_search(id).unwrap())
        .collect()
}

/// Envelopes an extended election sends: one Init, one Start, and one Winner
/// hop per node, plus the nominations.
pub fn extended_messages(ranks: &[usize]) -> u64 {
    3 * ranks.len() as u64 + nominations(ranks)
}

/// Channel writes in the channel ring: one Start and one Winner hop per
/// node, plus the nominations. There is no Init.
pub fn channel_writes(ranks: &[usize]) -> u64 {
    2 * ranks.len() as u64 + nominations(ranks)
}

#[test]
fn oracle_hand_cases() {
    // Ascending: every nomination stops after one hop, except the greatest.
    assert_eq!(nominations(&[0, 1, 2, 3]), 1 + 1 + 1 + 4);
    // Descending: rank r passes r smaller nodes before meeting the greatest.
    assert_eq!(nominations(&[3, 2, 1, 0]), 4 + 3 + 2 + 1);
    assert_eq!(nominations(&[1, 0]), 2 + 1);
}
