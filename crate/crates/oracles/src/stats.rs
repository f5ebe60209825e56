//! Summary statistics by the two-pass definitions.

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation; 0 for a single value.
pub fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// `None` when the smaller score is 0.
pub fn percent_increment(small: f64, large: f64) -> Option<f64> {
    if small == 0.0 {
        return if large == 0.0 { Some(0.0) } else { None };
    }
    Some((large - small) / small * 100.0)
}
