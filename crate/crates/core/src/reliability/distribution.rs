use statrs::statistics::Statistics;

use crate::{Error, Result};

/// Mean, sample standard deviation and range of a set of observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); 0 for one value.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl DistributionSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("no observations to summarize".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("observations must be finite"));
        }
        let sd = if values.len() < 2 { 0.0 } else { values.std_dev() };
        Ok(Self {
            n: values.len(),
            mean: values.mean(),
            sd,
            min: values.min(),
            max: values.max(),
        })
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    /// `mean ± 2σ`
    pub fn ci95(&self) -> (f64, f64) {
        self.band(2.0)
    }

    /// `mean ± 2.6σ`
    pub fn ci99(&self) -> (f64, f64) {
        self.band(2.6)
    }

    fn band(&self, width: f64) -> (f64, f64) {
        (self.mean - width * self.sd, self.mean + width * self.sd)
    }

    /// Fraction of `values` strictly above `threshold`.
    pub fn fraction_above(values: &[f64], threshold: f64) -> f64 {
        if values.is_empty() {
            return 0.0;
        }
        values.iter().filter(|&&v| v > threshold).count() as f64 / values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_sample() {
        let s = DistributionSummary::from_values(&[0.5, 0.7]).unwrap();
        assert!((s.mean - 0.6).abs() < 1e-15);
        assert!((s.sd - 0.1414213562373095).abs() < 1e-12);
        assert!((s.range() - 0.2).abs() < 1e-15);
        let (lo, hi) = s.ci95();
        assert!((hi - lo - 4.0 * s.sd).abs() < 1e-12);
        let (lo, hi) = s.ci99();
        assert!((hi - lo - 5.2 * s.sd).abs() < 1e-12);
    }

    #[test]
    fn constant_and_single() {
        let s = DistributionSummary::from_values(&[0.3; 5]).unwrap();
        assert_eq!(s.sd, 0.0);
        assert_eq!(s.min, s.max);
        assert_eq!(DistributionSummary::from_values(&[0.4]).unwrap().sd, 0.0);
        assert!(DistributionSummary::from_values(&[]).is_err());
        assert!(DistributionSummary::from_values(&[f64::NAN]).is_err());
    }

    #[test]
    fn fraction() {
        assert_eq!(DistributionSummary::fraction_above(&[0.95, 0.9, 0.8, 0.99], 0.9), 0.5);
    }
}
