//! Size-k pools by trying every depth.

use std::collections::BTreeSet;

/// Union of the top `depth` of every ranking plus the injected documents.
pub fn pool_at_depth(rankings: &[Vec<String>], injected: &[String], depth: usize) -> BTreeSet<String> {
    let mut pool: BTreeSet<String> = injected.iter().cloned().collect();
    for r in rankings {
        for d in r.iter().take(depth) {
            pool.insert(d.clone());
        }
    }
    pool
}

/// Smallest depth whose pool holds at least `k` documents, or the deepest
/// possible depth if none does.
pub fn size_k_depth(rankings: &[Vec<String>], injected: &[String], k: usize) -> usize {
    let longest = rankings.iter().map(Vec::len).max().unwrap_or(0);
    (0..=longest)
        .find(|&d| pool_at_depth(rankings, injected, d).len() >= k)
        .unwrap_or(longest)
}
