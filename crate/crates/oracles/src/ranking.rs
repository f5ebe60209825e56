//! Kendall's tau by looking at every pair, and the Wilcoxon signed-rank
//! p-value by enumerating every sign assignment.

/// Tau-a: concordant minus discordant pairs over all pairs; ties count 0.
pub fn kendall_tau_a(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut balance = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (x[i] - x[j]).signum() * (y[i] - y[j]).signum();
            if x[i] != x[j] && y[i] != y[j] {
                balance += s as i64;
            }
        }
    }
    balance as f64 / (n * (n - 1) / 2) as f64
}

/// Zero differences are those with `|d| <= tol`; absolute differences
/// within `tol` of each other share their average rank.
pub fn wilcoxon_p_by_enumeration(diffs: &[f64], tol: f64) -> f64 {
    let d: Vec<f64> = diffs.iter().copied().filter(|v| v.abs() > tol).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    assert!(n <= 20, "enumeration over 2^{n} sign vectors");
    let ranks: Vec<f64> = d
        .iter()
        .map(|a| {
            let below = d.iter().filter(|b| b.abs() < a.abs() - tol).count();
            let tied = d.iter().filter(|b| (b.abs() - a.abs()).abs() <= tol).count();
            below as f64 + (tied as f64 + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let (mut low, mut high) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed + 1e-9 {
            low += 1;
        }
        if w >= observed - 1e-9 {
            high += 1;
        }
    }
    let tail = low.min(high) as f64 / (1u64 << n) as f64;
    (2.0 * tail).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(kendall_tau_a(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        assert_eq!(wilcoxon_p_by_enumeration(&[1.0, 2.0, 3.0], 1e-12), 0.25);
        assert_eq!(wilcoxon_p_by_enumeration(&[0.0, 0.0], 1e-12), 1.0);
    }
}
