use std::collections::HashMap;

use super::DistributionSummary;
use crate::{Error, Result};

/// Pair counts behind Kendall's tau-a.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TauCounts {
    pub n: usize,
    /// Concordant minus discordant pairs.
    pub balance: i64,
    /// Pairs tied in either variable; they count as neither.
    pub tied_pairs: u64,
}

impl TauCounts {
    pub fn pairs(&self) -> u64 {
        let n = self.n as u64;
        n * (n - 1) / 2
    }

    pub fn tau(&self) -> f64 {
        self.balance as f64 / self.pairs() as f64
    }
}

fn tied_pairs_in<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` and returns the number of inversions removed.
fn merge_count(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall's tau-a of paired observations in `O(n log n)` (Knight's method).
pub fn tau_counts(x: &[f64], y: &[f64]) -> Result<TauCounts> {
    if x.len() != y.len() {
        return Err(Error::validation("tau needs paired observations of equal length"));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData("tau needs at least 2 items".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::validation("tau observations must not be NaN"));
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tied_x = tied_pairs_in(&xs);
    let tied_xy = tied_pairs_in(&pairs);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = merge_count(&mut ys, &mut Vec::with_capacity(n));
    let tied_y = tied_pairs_in(&ys);
    let total = (n as u64) * (n as u64 - 1) / 2;
    let balance = total as i64 - tied_x as i64 - tied_y as i64 + tied_xy as i64 - 2 * swaps as i64;
    Ok(TauCounts {
        n,
        balance,
        tied_pairs: tied_x + tied_y - tied_xy,
    })
}

/// Kendall's tau between two orderings of the same items (best first).
pub fn kendall_tau<S: AsRef<str>>(ranking_a: &[S], ranking_b: &[S]) -> Result<f64> {
    if ranking_a.len() != ranking_b.len() {
        return Err(Error::validation("rankings hold different numbers of items"));
    }
    let mut pos: HashMap<&str, usize> = HashMap::with_capacity(ranking_a.len());
    for (i, s) in ranking_a.iter().enumerate() {
        if pos.insert(s.as_ref(), i).is_some() {
            return Err(Error::validation(format!("item {} ranked twice", s.as_ref())));
        }
    }
    let mut x = Vec::with_capacity(ranking_b.len());
    let mut y = Vec::with_capacity(ranking_b.len());
    let mut seen = std::collections::HashSet::new();
    for (j, s) in ranking_b.iter().enumerate() {
        let i = *pos
            .get(s.as_ref())
            .ok_or_else(|| Error::validation(format!("item {} missing from a ranking", s.as_ref())))?;
        if !seen.insert(i) {
            return Err(Error::validation(format!("item {} ranked twice", s.as_ref())));
        }
        x.push(i as f64);
        y.push(j as f64);
    }
    Ok(tau_counts(&x, &y)?.tau())
}

/// Tau values over many ranking pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSample {
    pub taus: Vec<f64>,
    pub summary: DistributionSummary,
    /// Score ties broken by tag across all rankings built for the sample.
    pub ties_broken: usize,
}

impl TauSample {
    pub fn new(taus: Vec<f64>, ties_broken: usize) -> Result<Self> {
        if let Some(t) = taus.iter().find(|t| !(-1.0..=1.0).contains(*t)) {
            return Err(Error::validation(format!("tau {t} outside [-1, 1]")));
        }
        let summary = DistributionSummary::from_values(&taus)?;
        Ok(Self {
            taus,
            summary,
            ties_broken,
        })
    }

    pub fn fraction_above(&self, threshold: f64) -> f64 {
        DistributionSummary::fraction_above(&self.taus, threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_examples() {
        let r = ["a", "b", "c", "d"];
        assert_eq!(kendall_tau(&r, &r).unwrap(), 1.0);
        let rev = ["d", "c", "b", "a"];
        assert_eq!(kendall_tau(&r, &rev).unwrap(), -1.0);
        assert!((kendall_tau(&["1", "2", "3"], &["2", "1", "3"]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(kendall_tau(&["a"], &["a"]).is_err());
        assert!(kendall_tau(&["a", "b"], &["a", "c"]).is_err());
        assert!(kendall_tau(&["a", "a"], &["a", "b"]).is_err());
    }

    #[test]
    fn ties_count_zero() {
        let c = tau_counts(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.balance, 2);
        assert_eq!(c.tied_pairs, 1);
        let c = tau_counts(&[1.0, 1.0], &[5.0, 5.0]).unwrap();
        assert_eq!((c.balance, c.tied_pairs), (0, 1));
    }

    #[test]
    fn sample_summary() {
        let s = TauSample::new(vec![1.0, 1.0 / 3.0], 0).unwrap();
        assert!((s.summary.mean - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.fraction_above(0.9), 0.5);
        assert!(TauSample::new(vec![1.5], 0).is_err());
    }
}
