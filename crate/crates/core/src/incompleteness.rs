//! How scores change as pools grow.
//!
//! Every trel is restricted to the documents of each pool in a growth
//! series (documents outside the pool count as unjudged), systems are scored
//! under each restriction, and the percentage change between consecutive
//! pool sizes is summarized per step.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::collection::{Pool, TopicQrels, Trel};
use crate::eval::Evaluator;
use crate::measures::MeasureKind;
use crate::pooling::GrowthSeries;
use crate::reliability::DistributionSummary;
use crate::{Error, Result};

/// Keeps only the judgments of documents in `pool`.
pub fn restrict_topic(qrels: &TopicQrels, pool: &Pool) -> TopicQrels {
    qrels.restricted_to(|d| pool.contains(d))
}

/// Restricts every topic of `trel` to its pool. Topics without a pool lose
/// all judgments.
pub fn restrict_trel(trel: &Trel, pools: &[Pool]) -> Trel {
    let by_topic: BTreeMap<&str, &Pool> = pools.iter().map(|p| (p.topic_id.as_str(), p)).collect();
    let mut out = Trel::new(trel.name.clone());
    for (topic, source, qrels) in trel.topics() {
        let restricted = match by_topic.get(topic) {
            Some(pool) => restrict_topic(qrels, pool),
            None => TopicQrels::default(),
        };
        out.insert_topic(topic, source.clone(), Arc::new(restricted));
    }
    out
}

/// Relative change from a smaller to a larger pool, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Increment {
    Percent(f64),
    /// The smaller score was 0 and the larger was not.
    Undefined,
}

pub fn percent_increment(score_small: f64, score_large: f64) -> Result<Increment> {
    if score_small.is_nan() || score_small < 0.0 || !score_large.is_finite() {
        return Err(Error::validation(format!(
            "increment from {score_small} to {score_large} is not defined"
        )));
    }
    if score_small == 0.0 {
        return Ok(if score_large == 0.0 {
            Increment::Percent(0.0)
        } else {
            Increment::Undefined
        });
    }
    Ok(Increment::Percent(100.0 * (score_large - score_small) / score_small))
}

/// Increments for one pool-size step and one measure, over every
/// (system, trel) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub from: usize,
    pub to: usize,
    /// `None` when every cell was excluded.
    pub summary: Option<DistributionSummary>,
    /// Cells skipped because the smaller score was 0.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub targets: Vec<usize>,
    pub measures: Vec<MeasureKind>,
    /// `rows[measure index][step]`
    pub rows: Vec<Vec<StepRow>>,
}

/// Restricts each trel to the pools at every level of the series. Per-topic
/// restrictions are shared between trels that share judgments.
pub fn restricted_trels(series: &[GrowthSeries], trels: &[Trel]) -> Result<Vec<Vec<Trel>>> {
    let first = series
        .first()
        .ok_or_else(|| Error::InsufficientData("no growth series".into()))?;
    if let Some(s) = series.iter().find(|s| s.targets != first.targets) {
        return Err(Error::validation(format!(
            "growth series of topic {} uses different pool sizes",
            s.topic_id
        )));
    }
    let by_topic: BTreeMap<&str, &GrowthSeries> =
        series.iter().map(|s| (s.topic_id.as_str(), s)).collect();
    for trel in trels {
        if let Some(t) = trel.topic_ids().find(|t| !by_topic.contains_key(t)) {
            return Err(Error::validation(format!("topic {t} has no growth series")));
        }
    }
    Ok((0..first.targets.len())
        .map(|level| {
            let mut cache: HashMap<(*const TopicQrels, &str), Arc<TopicQrels>> = HashMap::new();
            trels
                .iter()
                .map(|trel| {
                    let mut out = Trel::new(trel.name.clone());
                    for (topic, source, qrels) in trel.topics() {
                        let pool = &by_topic[topic].pools[level];
                        let restricted = cache
                            .entry((Arc::as_ptr(qrels), topic))
                            .or_insert_with(|| Arc::new(restrict_topic(qrels, pool)));
                        out.insert_topic(topic, source.clone(), Arc::clone(restricted));
                    }
                    out
                })
                .collect()
        })
        .collect())
}

/// Builds the report for every measure. `series` holds one growth series per
/// topic, all with the same target sizes.
///
/// For each step, system and trel the increment is computed between the
/// system's mean-over-topics scores under the two restrictions; all cells of
/// a step are then summarized together.
pub fn growth_report(
    evaluator: &Evaluator<'_>,
    measures: &[MeasureKind],
    series: &[GrowthSeries],
    trels: &[Trel],
) -> Result<GrowthReport> {
    if trels.is_empty() {
        return Err(Error::InsufficientData("no trels for the growth report".into()));
    }
    let levels = restricted_trels(series, trels)?;
    let targets = series[0].targets.clone();
    let mut rows = Vec::with_capacity(measures.len());
    for &measure in measures {
        let means: Vec<Vec<Vec<f64>>> = levels
            .iter()
            .map(|l| Ok(evaluator.means_over_trels(measure, l)?.means))
            .collect::<Result<_>>()?;
        let mut steps = Vec::with_capacity(targets.len().saturating_sub(1));
        for i in 0..targets.len().saturating_sub(1) {
            let mut values = Vec::new();
            let mut excluded = 0;
            for (small, large) in means[i].iter().zip(&means[i + 1]) {
                for (&a, &b) in small.iter().zip(large) {
                    match percent_increment(a, b)? {
                        Increment::Percent(p) => values.push(p),
                        Increment::Undefined => excluded += 1,
                    }
                }
            }
            steps.push(StepRow {
                from: targets[i],
                to: targets[i + 1],
                summary: if values.is_empty() {
                    None
                } else {
                    Some(DistributionSummary::from_values(&values)?)
                },
                excluded,
            });
        }
        rows.push(steps);
    }
    Ok(GrowthReport {
        targets,
        measures: measures.to_vec(),
        rows,
    })
}

impl GrowthReport {
    pub fn steps(&self) -> usize {
        self.targets.len().saturating_sub(1)
    }

    pub fn measure_rows(&self, measure: MeasureKind) -> Option<&[StepRow]> {
        let i = self.measures.iter().position(|&m| m == measure)?;
        Some(&self.rows[i])
    }

    /// Mean increment (percent) of `step` for `measure`.
    pub fn mean_increment(&self, measure: MeasureKind, step: usize) -> Option<f64> {
        self.measure_rows(measure)?.get(step)?.summary.map(|s| s.mean)
    }

    /// `step,<measure>_mean,<measure>_sd,<measure>_max,<measure>_excluded...`
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "# increment = 100 * (score_large - score_small) / score_small per system and trel\n\
             # cells with score_small = 0 < score_large are excluded and counted\n\
             step",
        );
        for m in &self.measures {
            out.push_str(&format!(",{m}_mean,{m}_sd,{m}_max,{m}_excluded"));
        }
        out.push('\n');
        for step in 0..self.steps() {
            let first = &self.rows[0][step];
            out.push_str(&format!("{}-{}", first.from, first.to));
            for rows in &self.rows {
                let row = &rows[step];
                match row.summary {
                    Some(s) => out.push_str(&format!(",{:.2},{:.2},{:.2}", s.mean, s.sd, s.max)),
                    None => out.push_str(",,,"),
                }
                out.push_str(&format!(",{}", row.excluded));
            }
            out.push('\n');
        }
        out
    }

    /// Plot data for one measure: pool size of the larger pool, mean, range
    /// and the 2σ and 2.6σ bands.
    pub fn plot(&self, measure: MeasureKind) -> Option<String> {
        let rows = self.measure_rows(measure)?;
        let mut out = String::from("x,y,lo,hi,lo95,hi95,lo99,hi99\n");
        for row in rows {
            if let Some(s) = row.summary {
                let (l95, h95) = s.ci95();
                let (l99, h99) = s.ci99();
                out.push_str(&format!(
                    "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
                    row.to, s.mean, s.min, s.max, l95, h95, l99, h99
                ));
            }
        }
        Some(out)
    }
}
