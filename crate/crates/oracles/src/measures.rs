//! Effectiveness measures from their textbook definitions.
//!
//! `qrels` maps documents to raw levels in `{-1, 0, 1, 2}`; `-1` and
//! unjudged documents count as level 0, and levels `>= 1` are relevant.

use std::collections::{BTreeMap, BTreeSet};

pub type Qrels = BTreeMap<String, i8>;

fn level(qrels: &Qrels, doc: &str) -> i8 {
    qrels.get(doc).copied().unwrap_or(0).max(0)
}

fn relevant(qrels: &Qrels, doc: &str) -> bool {
    level(qrels, doc) >= 1
}

fn total_relevant(qrels: &Qrels) -> usize {
    qrels.values().filter(|l| **l >= 1).count()
}

/// Relevant documents among the first `n` positions, counted from scratch.
fn hits_in_prefix(ranking: &[String], qrels: &Qrels, n: usize) -> usize {
    let mut hits = 0;
    for (i, d) in ranking.iter().enumerate() {
        if i < n && relevant(qrels, d) {
            hits += 1;
        }
    }
    hits
}

pub fn precision(ranking: &[String], qrels: &Qrels, k: usize) -> f64 {
    hits_in_prefix(ranking, qrels, k) as f64 / k as f64
}

/// 0 when the topic has no relevant documents.
pub fn recall(ranking: &[String], qrels: &Qrels, k: usize) -> f64 {
    let r = total_relevant(qrels);
    if r == 0 {
        return 0.0;
    }
    hits_in_prefix(ranking, qrels, k) as f64 / r as f64
}

/// AP@k over all relevant documents, or over `min(R, k)` when `capped`.
pub fn average_precision(ranking: &[String], qrels: &Qrels, k: usize, capped: bool) -> f64 {
    let r = total_relevant(qrels);
    if r == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for j in 1..=k.min(ranking.len()) {
        if relevant(qrels, &ranking[j - 1]) {
            sum += precision(ranking, qrels, j);
        }
    }
    let denom = if capped { r.min(k) } else { r };
    sum / denom as f64
}

pub fn reciprocal_rank(ranking: &[String], qrels: &Qrels, k: usize) -> f64 {
    for j in 1..=k.min(ranking.len()) {
        if relevant(qrels, &ranking[j - 1]) {
            return 1.0 / j as f64;
        }
    }
    0.0
}

fn gain(level: i8, exponential: bool) -> f64 {
    if exponential {
        2f64.powi(level as i32) - 1.0
    } else {
        level as f64
    }
}

fn dcg_of_levels(levels: &[i8], k: usize, exponential: bool) -> f64 {
    let mut dcg = 0.0;
    for (i, &l) in levels.iter().enumerate().take(k) {
        dcg += gain(l, exponential) / ((i + 2) as f64).log2();
    }
    dcg
}

/// Ideal DCG by placing every level-2 document first, then every level-1.
pub fn ideal_dcg_by_counts(qrels: &Qrels, k: usize, exponential: bool) -> f64 {
    let twos = qrels.values().filter(|l| **l == 2).count();
    let ones = qrels.values().filter(|l| **l == 1).count();
    let mut levels = vec![2i8; twos];
    levels.extend(std::iter::repeat_n(1i8, ones));
    dcg_of_levels(&levels, k, exponential)
}

/// Ideal DCG as the maximum over every ordering of the judged documents.
/// Exponential in the number of judged documents; keep it under 9.
pub fn ideal_dcg_by_permutation(qrels: &Qrels, k: usize, exponential: bool) -> f64 {
    let mut levels: Vec<i8> = qrels.values().map(|l| (*l).max(0)).collect();
    let mut best = 0f64;
    permute(&mut levels, 0, &mut |p| best = best.max(dcg_of_levels(p, k, exponential)));
    best
}

fn permute(v: &mut Vec<i8>, start: usize, visit: &mut dyn FnMut(&[i8])) {
    if start == v.len() {
        visit(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permute(v, start + 1, visit);
        v.swap(start, i);
    }
}

/// 0 when the ideal gain is 0.
pub fn ndcg(ranking: &[String], qrels: &Qrels, k: usize, exponential: bool) -> f64 {
    let ideal = ideal_dcg_by_counts(qrels, k, exponential);
    if ideal == 0.0 {
        return 0.0;
    }
    let levels: Vec<i8> = ranking.iter().map(|d| level(qrels, d)).collect();
    dcg_of_levels(&levels, k, exponential) / ideal
}

pub fn crawl_ratio(ranking: &[String], crawled: &BTreeSet<String>, k: usize) -> f64 {
    let mut n = 0;
    for d in ranking.iter().take(k) {
        if crawled.contains(d) {
            n += 1;
        }
    }
    n as f64 / k as f64
}
