use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::DistributionSummary;
use crate::collection::{JudgmentSet, Level};
use crate::seed::rng_for;
use crate::trels::trel_space;
use crate::{Error, Result};

/// How disagreements between levels are penalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaWeighting {
    /// Every disagreement costs the same.
    #[default]
    Unweighted,
    /// Disagreement weight proportional to the level distance.
    Linear,
}

impl KappaWeighting {
    /// Integer agreement weight of categories `i` and `j`, scaled by
    /// [`KappaWeighting::scale`].
    fn weight(self, i: usize, j: usize) -> i64 {
        match self {
            KappaWeighting::Unweighted => i64::from(i == j),
            KappaWeighting::Linear => 2 - (i as i64 - j as i64).abs(),
        }
    }

    fn scale(self) -> i64 {
        match self {
            KappaWeighting::Unweighted => 1,
            KappaWeighting::Linear => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaOutcome {
    pub kappa: f64,
    /// Observed agreement `p_o`.
    pub observed: f64,
    /// Chance agreement `p_e`.
    pub expected: f64,
    /// Documents judged by both assessors with levels in {0, 1, 2}.
    pub pairs: usize,
    /// Shared documents dropped because either assessor gave `-1`.
    pub excluded_unjudgeable: usize,
    /// Documents only one assessor judged.
    pub excluded_unshared: usize,
    /// Chance agreement was 1 (both assessors constant on the same level);
    /// kappa is reported as 1.
    pub degenerate: bool,
}

/// Kappa over explicit `(level_a, level_b)` pairs, levels in {0, 1, 2}.
///
/// Computed exactly in integers as `(n·O − E) / (S·n² − E)`, where `O` is the
/// weighted count of agreeing cells, `E` the weighted product of marginals
/// and `S` the weight scale.
pub fn kappa_from_pairs(pairs: &[(u8, u8)], weighting: KappaWeighting) -> Result<KappaOutcome> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "kappa needs at least 2 commonly judged documents, found {n}"
        )));
    }
    let mut rows = [0i64; 3];
    let mut cols = [0i64; 3];
    let mut observed = 0i64;
    for &(a, b) in pairs {
        let (a, b) = (a as usize, b as usize);
        if a > 2 || b > 2 {
            return Err(Error::validation("kappa categories are 0, 1 and 2"));
        }
        rows[a] += 1;
        cols[b] += 1;
        observed += weighting.weight(a, b);
    }
    let mut expected = 0i64;
    for (i, r) in rows.iter().enumerate() {
        for (j, c) in cols.iter().enumerate() {
            expected += weighting.weight(i, j) * r * c;
        }
    }
    let n = n as i64;
    let s = weighting.scale();
    let numerator = n * observed - expected;
    let denominator = s * n * n - expected;
    let p_o = observed as f64 / (s * n) as f64;
    let p_e = expected as f64 / (s * n * n) as f64;
    let (kappa, degenerate) = if denominator == 0 {
        (1.0, true)
    } else {
        (numerator as f64 / denominator as f64, false)
    };
    Ok(KappaOutcome {
        kappa,
        observed: p_o,
        expected: p_e,
        pairs: n as usize,
        excluded_unjudgeable: 0,
        excluded_unshared: 0,
        degenerate,
    })
}

fn topic_levels<'a>(set: &'a JudgmentSet, topic: &str) -> Result<&'a BTreeMap<String, Level>> {
    set.topic(topic).ok_or_else(|| {
        Error::validation(format!("assessor {} did not judge topic {topic}", set.assessor_id))
    })
}

/// Kappa between two assessors' judgments of one topic.
pub fn kappa_between(
    a: &BTreeMap<String, Level>,
    b: &BTreeMap<String, Level>,
    weighting: KappaWeighting,
) -> Result<KappaOutcome> {
    let mut pairs = Vec::new();
    let mut unjudgeable = 0;
    for (doc, la) in a {
        let Some(lb) = b.get(doc) else { continue };
        if la.is_unjudgeable() || lb.is_unjudgeable() {
            unjudgeable += 1;
        } else {
            pairs.push((la.value() as u8, lb.value() as u8));
        }
    }
    let shared = pairs.len() + unjudgeable;
    let mut out = kappa_from_pairs(&pairs, weighting)?;
    out.excluded_unjudgeable = unjudgeable;
    out.excluded_unshared = a.len() + b.len() - 2 * shared;
    Ok(out)
}

/// Unweighted Cohen's kappa over levels {0, 1, 2}. Documents judged `-1` by
/// either assessor, or judged by only one, are left out and counted.
pub fn cohen_kappa(a: &JudgmentSet, b: &JudgmentSet, topic: &str) -> Result<KappaOutcome> {
    cohen_kappa_weighted(a, b, topic, KappaWeighting::Unweighted)
}

pub fn cohen_kappa_weighted(
    a: &JudgmentSet,
    b: &JudgmentSet,
    topic: &str,
    weighting: KappaWeighting,
) -> Result<KappaOutcome> {
    kappa_between(topic_levels(a, topic)?, topic_levels(b, topic)?, weighting)
}

fn relevant_docs(levels: &BTreeMap<String, Level>) -> BTreeSet<&str> {
    levels
        .iter()
        .filter(|(_, l)| l.is_relevant())
        .map(|(d, _)| d.as_str())
        .collect()
}

/// A ratio that falls back to 1 when its denominator is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub value: f64,
    /// The denominator was zero.
    pub empty: bool,
}

impl Ratio {
    fn of(num: usize, den: usize) -> Self {
        if den == 0 {
            Ratio { value: 1.0, empty: true }
        } else {
            Ratio {
                value: num as f64 / den as f64,
                empty: false,
            }
        }
    }
}

/// `|Ra ∩ Rb| / |Ra ∪ Rb|` over relevant (level ≥ 1) documents.
pub fn overlap_between(a: &BTreeMap<String, Level>, b: &BTreeMap<String, Level>) -> Ratio {
    let (ra, rb) = (relevant_docs(a), relevant_docs(b));
    Ratio::of(ra.intersection(&rb).count(), ra.union(&rb).count())
}

pub fn relevant_overlap(a: &JudgmentSet, b: &JudgmentSet, topic: &str) -> Result<Ratio> {
    Ok(overlap_between(topic_levels(a, topic)?, topic_levels(b, topic)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    pub precision: Ratio,
    pub recall: Ratio,
}

/// Precision and recall of `a` taken as a run against `b` taken as truth.
pub fn precision_recall_between(
    a: &BTreeMap<String, Level>,
    b: &BTreeMap<String, Level>,
) -> PrecisionRecall {
    let (ra, rb) = (relevant_docs(a), relevant_docs(b));
    let both = ra.intersection(&rb).count();
    PrecisionRecall {
        precision: Ratio::of(both, ra.len()),
        recall: Ratio::of(both, rb.len()),
    }
}

pub fn assessor_precision_recall(
    a: &JudgmentSet,
    b: &JudgmentSet,
    topic: &str,
) -> Result<PrecisionRecall> {
    Ok(precision_recall_between(topic_levels(a, topic)?, topic_levels(b, topic)?))
}

/// Agreement between the two assessors of one topic.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementRecord {
    pub topic_id: String,
    pub assessor_a: String,
    pub assessor_b: String,
    pub kappa: f64,
    pub overlap: f64,
    /// Of `assessor_a` with respect to `assessor_b`.
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementAverages {
    pub kappa: f64,
    pub overlap: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Mean precision and recall when the "A" assessor of each topic is chosen
/// at random, summarized over repeated draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationSample {
    pub draws: usize,
    pub precision: DistributionSummary,
    pub recall: DistributionSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementTable {
    pub records: Vec<AgreementRecord>,
    pub averages: AgreementAverages,
}

/// Per-topic agreement for every topic judged by two assessors. Assessor A
/// is the one with the smaller id.
pub fn agreement_table(sets: &[JudgmentSet], weighting: KappaWeighting) -> Result<AgreementTable> {
    let space = trel_space(sets)?;
    let records = space
        .dual_topics
        .iter()
        .map(|dual| {
            let [a, b] = dual.raw();
            let kappa = kappa_between(a, b, weighting)?;
            let pr = precision_recall_between(a, b);
            Ok(AgreementRecord {
                topic_id: dual.topic_id.clone(),
                assessor_a: dual.assessors[0].clone(),
                assessor_b: dual.assessors[1].clone(),
                kappa: kappa.kappa,
                overlap: overlap_between(a, b).value,
                precision: pr.precision.value,
                recall: pr.recall.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    AgreementTable::from_records(records)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

impl AgreementTable {
    /// Builds a table (and its averages) from precomputed records.
    pub fn from_records(records: Vec<AgreementRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InsufficientData(
                "no topic was judged by two assessors".into(),
            ));
        }
        let averages = AgreementAverages {
            kappa: mean(records.iter().map(|r| r.kappa)),
            overlap: mean(records.iter().map(|r| r.overlap)),
            precision: mean(records.iter().map(|r| r.precision)),
            recall: mean(records.iter().map(|r| r.recall)),
        };
        Ok(Self { records, averages })
    }

    /// Draws `draws` random orientations. In each draw every topic's
    /// assessors are swapped with probability 1/2, which exchanges that
    /// topic's precision and recall.
    pub fn orientation_sample(&self, draws: usize, seed: u64) -> Result<OrientationSample> {
        if draws == 0 {
            return Err(Error::validation("orientation sample needs at least one draw"));
        }
        let mut rng = rng_for(seed, "orientation-sample");
        let mut precision = Vec::with_capacity(draws);
        let mut recall = Vec::with_capacity(draws);
        for _ in 0..draws {
            let (mut p, mut r) = (0.0, 0.0);
            for rec in &self.records {
                if rng.random_bool(0.5) {
                    p += rec.recall;
                    r += rec.precision;
                } else {
                    p += rec.precision;
                    r += rec.recall;
                }
            }
            precision.push(p / self.records.len() as f64);
            recall.push(r / self.records.len() as f64);
        }
        Ok(OrientationSample {
            draws,
            precision: DistributionSummary::from_values(&precision)?,
            recall: DistributionSummary::from_values(&recall)?,
        })
    }

    /// `topic_id,assessor_a,assessor_b,kappa,overlap,precision,recall` with a
    /// final average row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("topic_id,assessor_a,assessor_b,kappa,overlap,precision,recall\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{:.3},{:.3},{:.3},{:.3}\n",
                r.topic_id, r.assessor_a, r.assessor_b, r.kappa, r.overlap, r.precision, r.recall
            ));
        }
        let a = &self.averages;
        out.push_str(&format!(
            "average,,,{:.3},{:.3},{:.3},{:.3}\n",
            a.kappa, a.overlap, a.precision, a.recall
        ));
        out
    }
}

impl OrientationSample {
    pub fn to_csv(&self) -> String {
        let row = |name: &str, s: &DistributionSummary| {
            let (lo, hi) = s.ci95();
            format!(
                "{name},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
                self.draws, s.mean, s.sd, s.min, s.max, lo, hi
            )
        };
        let mut out = String::from("statistic,draws,mean,sd,min,max,ci95_lo,ci95_hi\n");
        out.push_str(&row("precision", &self.precision));
        out.push_str(&row("recall", &self.recall));
        out
    }
}
