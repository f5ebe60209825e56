//! Evaluating sets of system runs against one or many trels.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::collection::{CrawlManifest, RankedRun, TopicQrels, Trel};
use crate::measures::{self, MeasureConfig, MeasureKind, Score, ScoreFlag, ScoreMatrix};
use crate::{Checked, Error, Result, Warning};

/// Scores runs against trels. All methods are read-only and may be called
/// from several threads at once.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    runs: &'a [RankedRun],
    manifest: Option<&'a CrawlManifest>,
    config: MeasureConfig,
}

/// Per-system mean-over-topics scores under each of a list of trels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrelMeans {
    pub measure: MeasureKind,
    pub systems: Vec<String>,
    pub trels: Vec<String>,
    /// `means[system][trel]`
    pub means: Vec<Vec<f64>>,
}

impl TrelMeans {
    pub fn system_index(&self, system: &str) -> Option<usize> {
        self.systems.iter().position(|s| s == system)
    }

    /// Means of every system under trel `t`.
    pub fn column(&self, t: usize) -> Vec<f64> {
        self.means.iter().map(|row| row[t]).collect()
    }
}

/// Per-topic scores of every system under each of a list of trels, with
/// identical per-topic judgments scored once.
#[derive(Debug, Clone, PartialEq)]
pub struct TrelScores {
    pub measure: MeasureKind,
    pub systems: Vec<String>,
    pub trels: Vec<String>,
    /// `cells[system][distinct (topic, judgments)]`
    cells: Vec<Vec<f64>>,
    /// `layout[trel]` indexes the distinct cells in topic order.
    layout: Vec<Vec<usize>>,
}

impl TrelScores {
    /// Scores of `system` under `trel`, in ascending topic order.
    pub fn topic_scores(&self, system: usize, trel: usize) -> impl Iterator<Item = f64> + '_ {
        self.layout[trel].iter().map(move |&i| self.cells[system][i])
    }

    pub fn mean(&self, system: usize, trel: usize) -> f64 {
        self.topic_scores(system, trel).sum::<f64>() / self.layout[trel].len() as f64
    }

    pub fn means(&self) -> TrelMeans {
        TrelMeans {
            measure: self.measure,
            systems: self.systems.clone(),
            trels: self.trels.clone(),
            means: (0..self.systems.len())
                .map(|s| (0..self.trels.len()).map(|t| self.mean(s, t)).collect())
                .collect(),
        }
    }
}

impl<'a> Evaluator<'a> {
    pub fn new(runs: &'a [RankedRun]) -> Result<Self> {
        let mut tags = std::collections::BTreeSet::new();
        for run in runs {
            if !tags.insert(run.system_tag.as_str()) {
                return Err(Error::validation(format!(
                    "system tag {} appears in two runs",
                    run.system_tag
                )));
            }
        }
        Ok(Self {
            runs,
            manifest: None,
            config: MeasureConfig::default(),
        })
    }

    pub fn with_manifest(mut self, manifest: &'a CrawlManifest) -> Self {
        self.manifest = Some(manifest);
        self
    }

    pub fn with_config(mut self, config: MeasureConfig) -> Self {
        self.config = config;
        self
    }

    pub fn runs(&self) -> &[RankedRun] {
        self.runs
    }

    pub fn systems(&self) -> Vec<String> {
        self.runs.iter().map(|r| r.system_tag.clone()).collect()
    }

    fn crawled(&self, kind: MeasureKind, topic: &str) -> Result<Option<&std::collections::BTreeSet<String>>> {
        if !kind.needs_manifest() {
            return Ok(None);
        }
        let manifest = self
            .manifest
            .ok_or_else(|| Error::validation(format!("{kind} needs a crawl manifest")))?;
        manifest
            .docs_for(topic)
            .map(Some)
            .ok_or_else(|| Error::validation(format!("topic {topic} is not in the crawl manifest")))
    }

    /// Scores one (run, topic) cell against the given judgments.
    pub fn score_topic(
        &self,
        run: &RankedRun,
        kind: MeasureKind,
        topic: &str,
        qrels: &TopicQrels,
    ) -> Result<Score> {
        let crawled = self.crawled(kind, topic)?;
        match run.topic(topic).filter(|l| !l.is_empty()) {
            Some(list) => measures::evaluate_ranking(kind, &self.config, list, qrels, crawled),
            None => {
                let probe = measures::evaluate_ranking(kind, &self.config, &[], qrels, crawled)?;
                Ok(match probe.flag {
                    Some(flag) => Score { value: 0.0, flag: Some(flag) },
                    None => Score {
                        value: 0.0,
                        flag: Some(ScoreFlag::TopicNotRetrieved),
                    },
                })
            }
        }
    }

    /// Per-topic scores of one run over every topic of `trel`.
    pub fn topic_scores(
        &self,
        run: &RankedRun,
        kind: MeasureKind,
        trel: &Trel,
    ) -> Result<Checked<BTreeMap<String, f64>>> {
        let mut out = BTreeMap::new();
        let mut warnings = Vec::new();
        for (topic, _, qrels) in trel.topics() {
            let score = self.score_topic(run, kind, topic, qrels)?;
            if score.flag == Some(ScoreFlag::TopicNotRetrieved) {
                warnings.push(Warning::TopicNotRetrieved {
                    system: run.system_tag.clone(),
                    topic: topic.to_string(),
                });
            }
            out.insert(topic.to_string(), score.value);
        }
        Ok(Checked { value: out, warnings })
    }

    pub fn system_mean(&self, run: &RankedRun, kind: MeasureKind, trel: &Trel) -> Result<f64> {
        let scores = self.topic_scores(run, kind, trel)?.value;
        measures::mean_over_topics(&scores.into_values().collect::<Vec<_>>())
    }

    /// Every system over every topic of `trel`.
    pub fn score_matrix(&self, kind: MeasureKind, trel: &Trel) -> Result<Checked<ScoreMatrix>> {
        if trel.topic_count() == 0 {
            return Err(Error::InsufficientData(format!("trel {} has no topics", trel.name)));
        }
        let rows: Vec<Checked<BTreeMap<String, f64>>> = self
            .runs
            .par_iter()
            .map(|run| self.topic_scores(run, kind, trel))
            .collect::<Result<_>>()?;
        let mut matrix = ScoreMatrix::new(kind);
        let mut warnings = Vec::new();
        for (run, row) in self.runs.iter().zip(rows) {
            warnings.extend(row.warnings);
            for (topic, v) in row.value {
                matrix.insert(&run.system_tag, &topic, v)?;
            }
        }
        Ok(Checked { value: matrix, warnings })
    }

    /// Per-system means under each trel; see [`Evaluator::trel_scores`].
    pub fn means_over_trels(&self, kind: MeasureKind, trels: &[Trel]) -> Result<TrelMeans> {
        Ok(self.trel_scores(kind, trels)?.means())
    }

    /// Per-topic scores of every system under each trel.
    ///
    /// Trels that share per-topic judgments (the same `Arc`) are scored once
    /// per distinct judgment set, so thousands of sampled trels cost about as
    /// much as their distinct assessor choices.
    pub fn trel_scores(&self, kind: MeasureKind, trels: &[Trel]) -> Result<TrelScores> {
        if trels.is_empty() {
            return Err(Error::InsufficientData("no trels to evaluate".into()));
        }
        let mut distinct: Vec<(String, Arc<TopicQrels>)> = Vec::new();
        let mut index: HashMap<(String, *const TopicQrels), usize> = HashMap::new();
        let mut layout: Vec<Vec<usize>> = Vec::with_capacity(trels.len());
        for trel in trels {
            if trel.topic_count() == 0 {
                return Err(Error::InsufficientData(format!("trel {} has no topics", trel.name)));
            }
            let mut cells = Vec::with_capacity(trel.topic_count());
            for (topic, _, qrels) in trel.topics() {
                let key = (topic.to_string(), Arc::as_ptr(qrels));
                let i = *index.entry(key).or_insert_with(|| {
                    distinct.push((topic.to_string(), Arc::clone(qrels)));
                    distinct.len() - 1
                });
                cells.push(i);
            }
            layout.push(cells);
        }

        let cells = self
            .runs
            .par_iter()
            .map(|run| {
                distinct
                    .iter()
                    .map(|(topic, qrels)| Ok(self.score_topic(run, kind, topic, qrels)?.value))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(TrelScores {
            measure: kind,
            systems: self.systems(),
            trels: trels.iter().map(|t| t.name.clone()).collect(),
            cells,
            layout,
        })
    }

    /// Mean, minimum and maximum over systems of the system means at each
    /// cutoff, as `x,y,lo,hi` rows.
    pub fn cutoff_curve(
        &self,
        measure: impl Fn(usize) -> MeasureKind,
        cutoffs: &[usize],
        trel: &Trel,
    ) -> Result<String> {
        if self.runs.is_empty() {
            return Err(Error::InsufficientData("no systems to evaluate".into()));
        }
        let mut out = String::from("x,y,lo,hi\n");
        for &k in cutoffs {
            let kind = measure(k);
            let means: Vec<f64> = self
                .runs
                .par_iter()
                .map(|run| self.system_mean(run, kind, trel))
                .collect::<Result<_>>()?;
            let mean = means.iter().sum::<f64>() / means.len() as f64;
            let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            out.push_str(&format!("{k},{mean:.6},{lo:.6},{hi:.6}\n"));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collection::{Level, TrelSource};

    fn qrels(levels: &[(&str, i64)]) -> Arc<TopicQrels> {
        Arc::new(TopicQrels::from_levels(
            levels.iter().map(|&(d, l)| (d, Level::new(l).unwrap())),
        ))
    }

    fn runs() -> Vec<RankedRun> {
        vec![
            RankedRun::from_ranked_docs(
                "good",
                [("1".to_string(), vec!["a", "b", "x"]), ("2".to_string(), vec!["c", "y"])],
            )
            .unwrap(),
            RankedRun::from_ranked_docs("poor", [("1".to_string(), vec!["x", "y", "a"])]).unwrap(),
        ]
    }

    fn trel(name: &str, one: Arc<TopicQrels>, two: Arc<TopicQrels>) -> Trel {
        let mut t = Trel::new(name);
        t.insert_topic("1", TrelSource::Union, one);
        t.insert_topic("2", TrelSource::Union, two);
        t
    }

    #[test]
    fn missing_topic_scores_zero_with_warning() {
        let runs = runs();
        let ev = Evaluator::new(&runs).unwrap();
        let t = trel("t", qrels(&[("a", 1), ("b", 2)]), qrels(&[("c", 1)]));
        let scores = ev.topic_scores(&runs[1], MeasureKind::Precision(10), &t).unwrap();
        assert_eq!(scores.value["2"], 0.0);
        assert_eq!(
            scores.warnings,
            vec![Warning::TopicNotRetrieved {
                system: "poor".into(),
                topic: "2".into()
            }]
        );
    }

    #[test]
    fn matrix_and_means_agree() {
        let runs = runs();
        let ev = Evaluator::new(&runs).unwrap();
        let shared = qrels(&[("a", 1), ("b", 2)]);
        let trels = vec![
            trel("t1", Arc::clone(&shared), qrels(&[("c", 1)])),
            trel("t2", Arc::clone(&shared), qrels(&[("y", 2)])),
        ];
        let kind = MeasureKind::AveragePrecision(100);
        let table = ev.means_over_trels(kind, &trels).unwrap();
        for (t, trel) in trels.iter().enumerate() {
            let matrix = ev.score_matrix(kind, trel).unwrap().value;
            for (s, system) in table.systems.iter().enumerate() {
                let direct = matrix.system_mean(system).unwrap();
                assert!((table.means[s][t] - direct).abs() < 1e-15);
            }
        }
        assert!((table.means[0][0] - 1.0).abs() < 1e-15);
        assert!((table.means[0][1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn crawl_needs_manifest() {
        let runs = runs();
        let t = trel("t", qrels(&[("a", 1)]), qrels(&[]));
        let ev = Evaluator::new(&runs).unwrap();
        assert!(ev.system_mean(&runs[0], MeasureKind::Crawl(2), &t).is_err());
        let mut m = CrawlManifest::new();
        m.add("1", "a");
        m.add("2", "c");
        let ev = ev.with_manifest(&m);
        assert!((ev.system_mean(&runs[0], MeasureKind::Crawl(2), &t).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn duplicate_tags_rejected() {
        let mut r = runs();
        r[1].system_tag = "good".into();
        assert!(Evaluator::new(&r).is_err());
    }

    #[test]
    fn curve_rows() {
        let runs = runs();
        let ev = Evaluator::new(&runs).unwrap();
        let t = trel("t", qrels(&[("a", 1), ("b", 2)]), qrels(&[("c", 1)]));
        let curve = ev.cutoff_curve(MeasureKind::Recall, &[1, 3], &t).unwrap();
        let lines: Vec<&str> = curve.lines().collect();
        assert_eq!(lines[0], "x,y,lo,hi");
        assert_eq!(lines[2], "3,0.625000,0.250000,1.000000");
    }
}
