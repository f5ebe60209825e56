//! Effectiveness measures over a ranked list and a topic's resolved judgments.
//!
//! Binary measures (P, R, AP, RR) conflate levels 1 and 2 into "relevant".
//! NDCG uses the graded levels with a configurable gain and a `log2(i + 1)`
//! discount at position `i >= 1`.

use std::collections::{BTreeMap, BTreeSet};

use crate::collection::{CrawlManifest, Level, RankedRun, RunEntry, TopicQrels, Trel};
use crate::{Error, Result};

pub const DEFAULT_RR_CUTOFF: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureKind {
    Ndcg(usize),
    AveragePrecision(usize),
    Precision(usize),
    ReciprocalRank(usize),
    Recall(usize),
    /// Fraction of the top k that was crawled for the topic.
    Crawl(usize),
}

impl MeasureKind {
    pub fn cutoff(&self) -> usize {
        match *self {
            MeasureKind::Ndcg(k)
            | MeasureKind::AveragePrecision(k)
            | MeasureKind::Precision(k)
            | MeasureKind::ReciprocalRank(k)
            | MeasureKind::Recall(k)
            | MeasureKind::Crawl(k) => k,
        }
    }

    pub fn needs_manifest(&self) -> bool {
        matches!(self, MeasureKind::Crawl(_))
    }

    /// NDCG@100, AP@100, P@10 and RR.
    pub fn headline() -> [MeasureKind; 4] {
        [
            MeasureKind::Ndcg(100),
            MeasureKind::AveragePrecision(100),
            MeasureKind::Precision(10),
            MeasureKind::ReciprocalRank(DEFAULT_RR_CUTOFF),
        ]
    }
}

impl std::fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            MeasureKind::Ndcg(k) => write!(f, "NDCG@{k}"),
            MeasureKind::AveragePrecision(k) => write!(f, "AP@{k}"),
            MeasureKind::Precision(k) => write!(f, "P@{k}"),
            MeasureKind::ReciprocalRank(DEFAULT_RR_CUTOFF) => f.write_str("RR"),
            MeasureKind::ReciprocalRank(k) => write!(f, "RR@{k}"),
            MeasureKind::Recall(k) => write!(f, "R@{k}"),
            MeasureKind::Crawl(k) => write!(f, "C@{k}"),
        }
    }
}

impl std::str::FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, cutoff) = match lower.split_once('@') {
            Some((n, k)) => {
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::validation(format!("bad cutoff in measure {s:?}")))?;
                (n.to_string(), Some(k))
            }
            None => (lower.clone(), None),
        };
        if cutoff == Some(0) {
            return Err(Error::validation(format!("measure {s:?}: cutoff must be at least 1")));
        }
        let need = |k: Option<usize>| {
            k.ok_or_else(|| Error::validation(format!("measure {s:?} needs a cutoff, e.g. {name}@10")))
        };
        Ok(match name.as_str() {
            "ndcg" => MeasureKind::Ndcg(need(cutoff)?),
            "ap" | "map" => MeasureKind::AveragePrecision(need(cutoff)?),
            "p" | "precision" => MeasureKind::Precision(need(cutoff)?),
            "rr" | "mrr" => MeasureKind::ReciprocalRank(cutoff.unwrap_or(DEFAULT_RR_CUTOFF)),
            "r" | "recall" => MeasureKind::Recall(need(cutoff)?),
            "c" | "crawl" => MeasureKind::Crawl(need(cutoff)?),
            _ => return Err(Error::validation(format!("unknown measure {s:?}"))),
        })
    }
}

/// Gain assigned to a graded level in DCG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gain {
    /// `g(l) = l`
    #[default]
    Linear,
    /// `g(l) = 2^l - 1`
    Exponential,
}

impl Gain {
    pub fn of(self, level: Level) -> f64 {
        let l = level.resolved().value() as i32;
        match self {
            Gain::Linear => l as f64,
            Gain::Exponential => ((1 << l) - 1) as f64,
        }
    }
}

/// Denominator of average precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApDenominator {
    /// Every relevant document in the judgments.
    #[default]
    AllRelevant,
    /// `min(R, k)`
    CappedAtCutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MeasureConfig {
    pub gain: Gain,
    pub ap_denominator: ApDenominator,
}

/// Why a score was forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreFlag {
    /// The judgments hold no relevant document for the topic.
    NoRelevant,
    /// The ideal DCG is zero.
    ZeroIdealGain,
    /// The run has no results for the topic.
    TopicNotRetrieved,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub value: f64,
    pub flag: Option<ScoreFlag>,
}

impl Score {
    fn ok(value: f64) -> Self {
        Self { value, flag: None }
    }

    fn zero(flag: ScoreFlag) -> Self {
        Self {
            value: 0.0,
            flag: Some(flag),
        }
    }
}

/// Binary relevance: 1 for levels 1 and 2, else 0.
pub fn conflate(level: Level) -> u8 {
    u8::from(level.is_relevant())
}

fn top_k(ranking: &[RunEntry], k: usize) -> &[RunEntry] {
    &ranking[..k.min(ranking.len())]
}

fn relevant_in_top(ranking: &[RunEntry], qrels: &TopicQrels, k: usize) -> usize {
    top_k(ranking, k)
        .iter()
        .filter(|e| qrels.is_relevant(&e.doc_id))
        .count()
}

/// Relevant documents in the top `k`, divided by `k`.
pub fn precision(ranking: &[RunEntry], qrels: &TopicQrels, k: usize) -> f64 {
    relevant_in_top(ranking, qrels, k) as f64 / k as f64
}

pub fn recall(ranking: &[RunEntry], qrels: &TopicQrels, k: usize) -> Score {
    let r = qrels.relevant_count();
    if r == 0 {
        return Score::zero(ScoreFlag::NoRelevant);
    }
    Score::ok(relevant_in_top(ranking, qrels, k) as f64 / r as f64)
}

pub fn average_precision(
    ranking: &[RunEntry],
    qrels: &TopicQrels,
    k: usize,
    denominator: ApDenominator,
) -> Score {
    let r = qrels.relevant_count();
    if r == 0 {
        return Score::zero(ScoreFlag::NoRelevant);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, e) in top_k(ranking, k).iter().enumerate() {
        if qrels.is_relevant(&e.doc_id) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    let denom = match denominator {
        ApDenominator::AllRelevant => r,
        ApDenominator::CappedAtCutoff => r.min(k),
    };
    Score::ok(sum / denom as f64)
}

pub fn reciprocal_rank(ranking: &[RunEntry], qrels: &TopicQrels, k: usize) -> f64 {
    top_k(ranking, k)
        .iter()
        .position(|e| qrels.is_relevant(&e.doc_id))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

fn discount(position: usize) -> f64 {
    1.0 / ((position + 1) as f64).log2()
}

pub fn ndcg(ranking: &[RunEntry], qrels: &TopicQrels, k: usize, gain: Gain) -> Score {
    let ideal: f64 = qrels
        .levels_descending()
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, l)| gain.of(l) * discount(i + 1))
        .sum();
    if ideal == 0.0 {
        return Score::zero(ScoreFlag::ZeroIdealGain);
    }
    let dcg: f64 = top_k(ranking, k)
        .iter()
        .enumerate()
        .map(|(i, e)| gain.of(qrels.level(&e.doc_id)) * discount(i + 1))
        .sum();
    Score::ok(dcg / ideal)
}

/// Fraction of the top `k` positions holding documents crawled for the topic.
pub fn crawl_ratio(ranking: &[RunEntry], crawled: &BTreeSet<String>, k: usize) -> f64 {
    top_k(ranking, k)
        .iter()
        .filter(|e| crawled.contains(&e.doc_id))
        .count() as f64
        / k as f64
}

/// Scores one ranking. `crawled` is required for [`MeasureKind::Crawl`].
pub fn evaluate_ranking(
    kind: MeasureKind,
    config: &MeasureConfig,
    ranking: &[RunEntry],
    qrels: &TopicQrels,
    crawled: Option<&BTreeSet<String>>,
) -> Result<Score> {
    if kind.cutoff() == 0 {
        return Err(Error::validation("measure cutoff must be at least 1"));
    }
    Ok(match kind {
        MeasureKind::Ndcg(k) => ndcg(ranking, qrels, k, config.gain),
        MeasureKind::AveragePrecision(k) => {
            average_precision(ranking, qrels, k, config.ap_denominator)
        }
        MeasureKind::Precision(k) => Score::ok(precision(ranking, qrels, k)),
        MeasureKind::ReciprocalRank(k) => Score::ok(reciprocal_rank(ranking, qrels, k)),
        MeasureKind::Recall(k) => recall(ranking, qrels, k),
        MeasureKind::Crawl(k) => {
            let crawled = crawled
                .ok_or_else(|| Error::validation("crawl ratio needs the crawl manifest"))?;
            Score::ok(crawl_ratio(ranking, crawled, k))
        }
    })
}

fn run_topic<'a>(run: &'a RankedRun, topic: &str) -> Option<&'a [RunEntry]> {
    run.topic(topic).filter(|l| !l.is_empty())
}

fn with_run(run: &RankedRun, topic: &str, f: impl FnOnce(&[RunEntry]) -> Score) -> Score {
    match run_topic(run, topic) {
        Some(list) => f(list),
        None => Score::zero(ScoreFlag::TopicNotRetrieved),
    }
}

fn qrels_of<'a>(trel: &'a Trel, topic: &str) -> std::borrow::Cow<'a, TopicQrels> {
    match trel.topic(topic) {
        Some(q) => std::borrow::Cow::Borrowed(q),
        None => std::borrow::Cow::Owned(TopicQrels::default()),
    }
}

pub fn precision_at(run: &RankedRun, trel: &Trel, topic: &str, k: usize) -> Score {
    let q = qrels_of(trel, topic);
    with_run(run, topic, |l| Score::ok(precision(l, &q, k)))
}

pub fn recall_at(run: &RankedRun, trel: &Trel, topic: &str, k: usize) -> Score {
    let q = qrels_of(trel, topic);
    if q.relevant_count() == 0 {
        return Score::zero(ScoreFlag::NoRelevant);
    }
    with_run(run, topic, |l| recall(l, &q, k))
}

pub fn average_precision_at(run: &RankedRun, trel: &Trel, topic: &str, k: usize) -> Score {
    let q = qrels_of(trel, topic);
    if q.relevant_count() == 0 {
        return Score::zero(ScoreFlag::NoRelevant);
    }
    with_run(run, topic, |l| average_precision(l, &q, k, ApDenominator::AllRelevant))
}

pub fn reciprocal_rank_at(run: &RankedRun, trel: &Trel, topic: &str, k: usize) -> Score {
    let q = qrels_of(trel, topic);
    with_run(run, topic, |l| Score::ok(reciprocal_rank(l, &q, k)))
}

pub fn ndcg_at(run: &RankedRun, trel: &Trel, topic: &str, k: usize) -> Score {
    let q = qrels_of(trel, topic);
    let probe = ndcg(&[], &q, k, Gain::Linear);
    if probe.flag.is_some() {
        return probe;
    }
    with_run(run, topic, |l| ndcg(l, &q, k, Gain::Linear))
}

pub fn crawl_ratio_at(run: &RankedRun, manifest: &CrawlManifest, topic: &str, k: usize) -> Result<Score> {
    let crawled = manifest
        .docs_for(topic)
        .ok_or_else(|| Error::validation(format!("topic {topic} is not in the crawl manifest")))?;
    Ok(with_run(run, topic, |l| Score::ok(crawl_ratio(l, crawled, k))))
}

/// Unweighted mean across topics.
pub fn mean_over_topics(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientData("no topics to average".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Per-(system, topic) scores for one measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub measure: MeasureKind,
    scores: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ScoreMatrix {
    pub fn new(measure: MeasureKind) -> Self {
        Self {
            measure,
            scores: BTreeMap::new(),
        }
    }

    /// Cells may arrive in any order.
    pub fn insert(&mut self, system: &str, topic: &str, score: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::validation(format!(
                "score {score} for {system}/{topic} outside [0, 1]"
            )));
        }
        self.scores
            .entry(system.to_string())
            .or_default()
            .insert(topic.to_string(), score);
        Ok(())
    }

    pub fn get(&self, system: &str, topic: &str) -> Option<f64> {
        self.scores.get(system)?.get(topic).copied()
    }

    pub fn topics(&self) -> BTreeSet<&str> {
        self.scores
            .values()
            .flat_map(|t| t.keys().map(String::as_str))
            .collect()
    }

    pub fn systems(&self) -> impl Iterator<Item = &str> {
        self.scores.keys().map(String::as_str)
    }

    pub fn system_mean(&self, system: &str) -> Result<f64> {
        let row = self
            .scores
            .get(system)
            .ok_or_else(|| Error::validation(format!("unknown system {system}")))?;
        mean_over_topics(&row.values().copied().collect::<Vec<_>>())
    }

    /// Systems by descending mean, ties broken by ascending tag.
    pub fn ranked_systems(&self) -> Result<Vec<(String, f64)>> {
        let mut rows: Vec<(String, f64)> = self
            .scores
            .keys()
            .map(|s| Ok((s.clone(), self.system_mean(s)?)))
            .collect::<Result<_>>()?;
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(rows)
    }

    /// `system,<topic...>,mean` with rows ordered by descending mean.
    pub fn to_csv(&self) -> Result<String> {
        let topics: Vec<&str> = self.topics().into_iter().collect();
        let mut out = format!("# measure {}\nsystem", self.measure);
        for t in &topics {
            out.push(',');
            out.push_str(t);
        }
        out.push_str(",mean\n");
        for (system, mean) in self.ranked_systems()? {
            out.push_str(&system);
            for t in &topics {
                match self.get(&system, t) {
                    Some(v) => out.push_str(&format!(",{v:.6}")),
                    None => out.push(','),
                }
            }
            out.push_str(&format!(",{mean:.6}\n"));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collection::TrelSource;
    use std::sync::Arc;

    fn ranking(docs: &[&str]) -> Vec<RunEntry> {
        docs.iter()
            .enumerate()
            .map(|(i, d)| RunEntry {
                doc_id: d.to_string(),
                score: -(i as f64),
            })
            .collect()
    }

    fn qrels(levels: &[(&str, i64)]) -> TopicQrels {
        TopicQrels::from_levels(levels.iter().map(|&(d, l)| (d, Level::new(l).unwrap())))
    }

    #[test]
    fn conflation() {
        assert_eq!(conflate(Level::HIGHLY), 1);
        assert_eq!(conflate(Level::SOMEWHAT), 1);
        assert_eq!(conflate(Level::NONRELEVANT), 0);
        assert_eq!(conflate(Level::UNJUDGEABLE), 0);
    }

    #[test]
    fn precision_examples() {
        let q = qrels(&[("a", 1), ("c", 2)]);
        assert!((precision(&ranking(&["a", "b", "c"]), &q, 3) - 2.0 / 3.0).abs() < 1e-15);
        let all: Vec<String> = (0..10).map(|i| format!("r{i}")).collect();
        let q_all = TopicQrels::from_levels(all.iter().map(|d| (d.clone(), Level::SOMEWHAT)));
        let refs: Vec<&str> = all.iter().map(String::as_str).collect();
        assert_eq!(precision(&ranking(&refs), &q_all, 10), 1.0);
        // five retrieved, two relevant, cutoff ten
        assert_eq!(precision(&ranking(&["a", "x", "c", "y", "z"]), &q, 10), 0.2);
    }

    #[test]
    fn recall_examples() {
        let q = qrels(&[("a", 1), ("b", 1), ("c", 2), ("d", 1)]);
        assert_eq!(recall(&ranking(&["a", "b", "c", "d"]), &q, 4).value, 1.0);
        assert_eq!(recall(&ranking(&["x", "a", "y"]), &q, 3).value, 0.25);
        let none = recall(&ranking(&["a"]), &qrels(&[("a", 0)]), 3);
        assert_eq!(none.value, 0.0);
        assert_eq!(none.flag, Some(ScoreFlag::NoRelevant));
    }

    #[test]
    fn ap_examples() {
        let q = qrels(&[("a", 1), ("b", 2)]);
        let ap = average_precision(&ranking(&["a", "x", "b"]), &q, 3, ApDenominator::AllRelevant);
        assert!((ap.value - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(average_precision(&ranking(&["b", "a", "x"]), &q, 10, ApDenominator::AllRelevant).value, 1.0);
        assert_eq!(average_precision(&ranking(&["x", "y"]), &q, 2, ApDenominator::AllRelevant).value, 0.0);
        // capped denominator: R = 2, k = 1
        assert_eq!(average_precision(&ranking(&["a"]), &q, 1, ApDenominator::CappedAtCutoff).value, 1.0);
    }

    #[test]
    fn rr_examples() {
        let q = qrels(&[("a", 1)]);
        assert_eq!(reciprocal_rank(&ranking(&["a"]), &q, 100), 1.0);
        assert_eq!(reciprocal_rank(&ranking(&["w", "x", "y", "a"]), &q, 100), 0.25);
        assert_eq!(reciprocal_rank(&ranking(&["w", "x", "y", "a"]), &q, 3), 0.0);
    }

    #[test]
    fn ndcg_examples() {
        let q = qrels(&[("x", 2), ("y", 0), ("z", 1)]);
        let s = ndcg(&ranking(&["x", "y", "z"]), &q, 10, Gain::Linear);
        let ideal = 2.0 + 1.0 / 3f64.log2();
        assert!((s.value - 2.5 / ideal).abs() < 1e-12);
        assert!((s.value - 0.9503).abs() < 1e-4);
        assert!((ndcg(&ranking(&["x", "z", "y"]), &q, 10, Gain::Linear).value - 1.0).abs() < 1e-15);
        assert_eq!(ndcg(&ranking(&["y", "q"]), &q, 10, Gain::Linear).value, 0.0);
        let empty = ndcg(&ranking(&["x"]), &qrels(&[("x", 0)]), 10, Gain::Linear);
        assert_eq!(empty.flag, Some(ScoreFlag::ZeroIdealGain));
    }

    #[test]
    fn exponential_gain() {
        assert_eq!(Gain::Exponential.of(Level::HIGHLY), 3.0);
        assert_eq!(Gain::Exponential.of(Level::SOMEWHAT), 1.0);
        assert_eq!(Gain::Linear.of(Level::UNJUDGEABLE), 0.0);
    }

    #[test]
    fn crawl_examples() {
        let crawled: BTreeSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(crawl_ratio(&ranking(&["a", "x", "b", "y"]), &crawled, 4), 0.5);
        assert_eq!(crawl_ratio(&ranking(&["a", "b"]), &crawled, 2), 1.0);
        assert_eq!(crawl_ratio(&ranking(&["x", "y"]), &crawled, 2), 0.0);
    }

    #[test]
    fn run_level_wrappers() {
        let run = RankedRun::from_ranked_docs("s", [("001".to_string(), vec!["a", "x", "b"])]).unwrap();
        let mut trel = Trel::new("t");
        trel.insert_topic("001", TrelSource::Union, Arc::new(qrels(&[("a", 1), ("b", 2)])));
        trel.insert_topic("002", TrelSource::Union, Arc::new(qrels(&[("c", 1)])));
        assert!((average_precision_at(&run, &trel, "001", 100).value - 5.0 / 6.0).abs() < 1e-15);
        let missing = precision_at(&run, &trel, "002", 10);
        assert_eq!(missing.value, 0.0);
        assert_eq!(missing.flag, Some(ScoreFlag::TopicNotRetrieved));
        assert_eq!(recall_at(&run, &trel, "003", 10).flag, Some(ScoreFlag::NoRelevant));
        assert_eq!(reciprocal_rank_at(&run, &trel, "001", 100).value, 1.0);
        let ideal = 2.0 + 1.0 / 3f64.log2();
        assert!((ndcg_at(&run, &trel, "001", 100).value - 2.0 / ideal).abs() < 1e-12);

        let mut m = CrawlManifest::new();
        m.add("001", "a");
        assert!((crawl_ratio_at(&run, &m, "001", 3).unwrap().value - 1.0 / 3.0).abs() < 1e-15);
        assert!(crawl_ratio_at(&run, &m, "009", 3).is_err());
    }

    #[test]
    fn means() {
        assert!((mean_over_topics(&[0.5, 0.7]).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(mean_over_topics(&[0.3]).unwrap(), 0.3);
        assert!(mean_over_topics(&[]).is_err());
    }

    #[test]
    fn measure_names() {
        for s in ["ndcg@100", "AP@100", "p@10", "rr", "r@50", "c@20", "rr@10"] {
            let m: MeasureKind = s.parse().unwrap();
            let again: MeasureKind = m.to_string().parse().unwrap();
            assert_eq!(m, again);
        }
        assert_eq!("rr".parse::<MeasureKind>().unwrap(), MeasureKind::ReciprocalRank(100));
        assert!("ndcg".parse::<MeasureKind>().is_err());
        assert!("p@0".parse::<MeasureKind>().is_err());
        assert!("bpref@10".parse::<MeasureKind>().is_err());
    }

    #[test]
    fn score_matrix_any_order() {
        let mut m = ScoreMatrix::new(MeasureKind::Precision(10));
        m.insert("b", "2", 0.4).unwrap();
        m.insert("a", "1", 0.2).unwrap();
        m.insert("b", "1", 0.6).unwrap();
        m.insert("a", "2", 0.2).unwrap();
        assert!(m.insert("a", "3", 1.5).is_err());
        let ranked = m.ranked_systems().unwrap();
        assert_eq!(ranked[0].0, "b");
        assert!((ranked[0].1 - 0.5).abs() < 1e-15);
        let csv = m.to_csv().unwrap();
        assert_eq!(csv.lines().nth(1), Some("system,1,2,mean"));
        assert!(csv.lines().nth(2).unwrap().starts_with("b,0.600000,0.400000,0.500000"));
    }
}
