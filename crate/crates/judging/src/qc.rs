//! Checks that assessors do not find the injected noise documents relevant.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use trelkit_core::{CrawlManifest, JudgmentSet};

pub const DEFAULT_QC_THRESHOLD: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessorQc {
    pub assessor_id: String,
    pub noise_judged: usize,
    /// Noise documents judged at level 1 or 2.
    pub violations: usize,
    pub rate: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QcReport {
    pub threshold: f64,
    pub assessors: Vec<AssessorQc>,
    pub noise_judged: usize,
    pub violations: usize,
    /// No judged document came from a noise topic.
    pub empty: bool,
}

/// Per-assessor counts of noise-document judgments. An assessor is flagged
/// when their violation rate exceeds `threshold`.
pub fn noise_qc(sets: &[JudgmentSet], manifest: &CrawlManifest, threshold: f64) -> QcReport {
    let mut by_assessor: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for set in sets {
        for j in set.judgments() {
            if manifest.is_noise_doc(&j.doc_id) {
                let entry = by_assessor.entry(&set.assessor_id).or_default();
                entry.0 += 1;
                if j.level.is_relevant() {
                    entry.1 += 1;
                }
            }
        }
    }
    let assessors: Vec<AssessorQc> = by_assessor
        .into_iter()
        .map(|(a, (judged, violations))| {
            let rate = violations as f64 / judged as f64;
            AssessorQc {
                assessor_id: a.to_string(),
                noise_judged: judged,
                violations,
                rate,
                flagged: rate > threshold,
            }
        })
        .collect();
    let noise_judged = assessors.iter().map(|a| a.noise_judged).sum();
    QcReport {
        threshold,
        violations: assessors.iter().map(|a| a.violations).sum(),
        empty: noise_judged == 0,
        noise_judged,
        assessors,
    }
}

impl QcReport {
    pub fn flagged(&self) -> impl Iterator<Item = &AssessorQc> {
        self.assessors.iter().filter(|a| a.flagged)
    }

    pub fn rate(&self) -> f64 {
        if self.noise_judged == 0 {
            0.0
        } else {
            self.violations as f64 / self.noise_judged as f64
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# threshold {}\nassessor,noise_judged,violations,rate,flagged\n", self.threshold);
        for a in &self.assessors {
            let _ = writeln!(out, "{},{},{},{:.4},{}", a.assessor_id, a.noise_judged, a.violations, a.rate, a.flagged);
        }
        let _ = writeln!(out, "total,{},{},{:.4},{}", self.noise_judged, self.violations, self.rate(), self.flagged().count());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use trelkit_core::Level;

    fn setup(levels: &[i64]) -> (Vec<JudgmentSet>, CrawlManifest) {
        let mut m = CrawlManifest::new();
        let mut s = JudgmentSet::new("a");
        for (i, &l) in levels.iter().enumerate() {
            let d = format!("n{i}");
            m.add("099", &d);
            s.insert("001", &d, Level::new(l).unwrap()).unwrap();
        }
        m.add("001", "r");
        s.insert("001", "r", Level::HIGHLY).unwrap();
        m.mark_noise("099");
        (vec![s], m)
    }

    #[test]
    fn clean_assessor() {
        let (s, m) = setup(&[0; 10]);
        let r = noise_qc(&s, &m, DEFAULT_QC_THRESHOLD);
        assert_eq!((r.noise_judged, r.violations, r.empty), (10, 0, false));
        assert_eq!(r.flagged().count(), 0);
    }

    #[test]
    fn flagged_above_threshold() {
        let (s, m) = setup(&[1, 2, 1, 0, 0, 0, 0, 0, 0, -1]);
        let r = noise_qc(&s, &m, DEFAULT_QC_THRESHOLD);
        assert_eq!(r.assessors[0].violations, 3);
        assert!((r.assessors[0].rate - 0.3).abs() < 1e-15);
        assert!(r.assessors[0].flagged);
        assert!(r.to_csv().contains("a,10,3,0.3000,true"));
    }

    #[test]
    fn no_noise() {
        let (s, m) = setup(&[]);
        assert!(noise_qc(&s, &m, 0.1).empty);
    }
}
