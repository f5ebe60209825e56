use statrs::function::erf::erfc;

use crate::{Error, Result};

/// Largest number of non-zero differences tested with the exact null
/// distribution; larger samples use the normal approximation.
pub const EXACT_LIMIT: usize = 12;

/// Differences (and gaps between absolute differences) at most this large
/// are treated as zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonOutcome {
    /// Non-zero differences that were ranked.
    pub n: usize,
    /// Sum of ranks of positive differences.
    pub w_plus: f64,
    pub w_minus: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub method: WilcoxonMethod,
    /// Every difference was zero; `p_value` is 1.
    pub all_zero: bool,
}

impl WilcoxonOutcome {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Doubled average ranks of `|d|` (so tied ranks stay integral), plus the
/// sizes of the tie groups.
fn doubled_ranks(diffs: &[f64]) -> (Vec<u64>, Vec<u64>) {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&a, &b| diffs[a].abs().total_cmp(&diffs[b].abs()));
    let mut ranks = vec![0u64; diffs.len()];
    let mut groups = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && diffs[order[end]].abs() - diffs[order[start]].abs() <= ZERO_TOLERANCE
        {
            end += 1;
        }
        // positions start+1 ..= end, doubled average = start + end + 1
        let doubled = (start + end + 1) as u64;
        for &i in &order[start..end] {
            ranks[i] = doubled;
        }
        groups.push((end - start) as u64);
        start = end;
    }
    (ranks, groups)
}

/// Number of sign assignments giving each doubled `W+` total.
fn exact_counts(ranks: &[u64]) -> Vec<u64> {
    let max: u64 = ranks.iter().sum();
    let mut counts = vec![0u64; max as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// Two-sided Wilcoxon signed-rank test on paired differences.
///
/// Zero differences are dropped and tied absolute differences get average
/// ranks. Up to [`EXACT_LIMIT`] remaining differences the p-value comes from
/// the exact permutation distribution; above it from the tie-corrected
/// normal approximation. In both cases `p = min(1, 2 · smaller tail)`.
pub fn signed_rank_test(diffs: &[f64]) -> Result<WilcoxonOutcome> {
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::validation("differences must be finite"));
    }
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| d.abs() > ZERO_TOLERANCE).collect();
    let n = nonzero.len();
    if n == 0 {
        return Ok(WilcoxonOutcome {
            n: 0,
            w_plus: 0.0,
            w_minus: 0.0,
            p_value: 1.0,
            method: WilcoxonMethod::Exact,
            all_zero: true,
        });
    }
    let (ranks, groups) = doubled_ranks(&nonzero);
    let total: u64 = ranks.iter().sum();
    let w2: u64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let w_plus = w2 as f64 / 2.0;
    let w_minus = (total - w2) as f64 / 2.0;

    let (p, method) = if n <= EXACT_LIMIT {
        let counts = exact_counts(&ranks);
        let all = (1u64 << n) as f64;
        let lower: u64 = counts[..=w2 as usize].iter().sum();
        let upper: u64 = counts[w2 as usize..].iter().sum();
        let tail = lower.min(upper) as f64 / all;
        (tail * 2.0, WilcoxonMethod::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let ties: f64 = groups.iter().map(|&t| (t * t * t - t) as f64).sum();
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        let z = (w_plus - mean) / var.sqrt();
        (erfc(z.abs() / std::f64::consts::SQRT_2), WilcoxonMethod::NormalApproximation)
    };
    Ok(WilcoxonOutcome {
        n,
        w_plus,
        w_minus,
        p_value: p.min(1.0),
        method,
        all_zero: false,
    })
}

/// Tests paired per-topic scores of two systems.
pub fn paired_test(a: &[f64], b: &[f64]) -> Result<WilcoxonOutcome> {
    if a.len() != b.len() {
        return Err(Error::validation("paired scores differ in length"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    signed_rank_test(&diffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_positive_differences() {
        let w = signed_rank_test(&[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        assert_eq!(w.w_plus, 15.0);
        assert_eq!(w.method, WilcoxonMethod::Exact);
        assert!((w.p_value - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn identical_scores() {
        let a = [0.3, 0.5, 0.7];
        let w = paired_test(&a, &a).unwrap();
        assert!(w.all_zero);
        assert_eq!(w.p_value, 1.0);
    }

    #[test]
    fn antisymmetric() {
        let a = [0.3, 0.5, 0.7, 0.1, 0.9, 0.4];
        let b = [0.2, 0.6, 0.4, 0.1, 0.3, 0.35];
        let ab = paired_test(&a, &b).unwrap();
        let ba = paired_test(&b, &a).unwrap();
        assert_eq!(ab.p_value, ba.p_value);
        assert_eq!(ab.w_plus, ba.w_minus);
        assert_eq!(ab.n, 5);
    }

    #[test]
    fn ties_get_average_ranks() {
        let w = signed_rank_test(&[1.0, -1.0, 2.0]).unwrap();
        assert_eq!((w.w_plus, w.w_minus), (4.5, 1.5));
    }

    #[test]
    fn normal_approximation_above_limit() {
        let d: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let w = signed_rank_test(&d).unwrap();
        assert_eq!(w.method, WilcoxonMethod::NormalApproximation);
        // z = (210 - 105) / sqrt(717.5)
        let z: f64 = 105.0 / 717.5f64.sqrt();
        assert!((w.p_value - erfc(z / std::f64::consts::SQRT_2)).abs() < 1e-15);
        assert!(w.p_value < 1e-4);
        let mixed: Vec<f64> = (1..=20).map(|i| if i % 2 == 0 { i as f64 } else { -(i as f64) }).collect();
        assert!(signed_rank_test(&mixed).unwrap().p_value > 0.5);
    }
}
