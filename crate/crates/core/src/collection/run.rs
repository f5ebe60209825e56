use std::collections::{BTreeMap, HashSet};

use super::data_lines;
use crate::{Checked, Error, Result, Warning};

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub score: f64,
}

/// One system's ranked results. Rank is the 1-based position in each list.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRun {
    pub system_tag: String,
    topics: BTreeMap<String, Vec<RunEntry>>,
}

fn score_order(a: &RunEntry, b: &RunEntry) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.doc_id.cmp(&b.doc_id))
}

impl RankedRun {
    /// Builds a run, sorting every list by descending score with ties broken
    /// by ascending doc id.
    pub fn new(
        system_tag: impl Into<String>,
        topics: BTreeMap<String, Vec<RunEntry>>,
    ) -> Result<Self> {
        Ok(Self::build(system_tag.into(), topics)?.value)
    }

    fn build(system_tag: String, mut topics: BTreeMap<String, Vec<RunEntry>>) -> Result<Checked<Self>> {
        let mut warnings = Vec::new();
        for (topic, entries) in topics.iter_mut() {
            let mut seen = HashSet::with_capacity(entries.len());
            for e in entries.iter() {
                if !e.score.is_finite() {
                    return Err(Error::validation(format!(
                        "topic {topic}: score of {} is not finite",
                        e.doc_id
                    )));
                }
                if !seen.insert(e.doc_id.as_str()) {
                    return Err(Error::validation(format!(
                        "topic {topic}: document {} appears twice",
                        e.doc_id
                    )));
                }
            }
            if !entries.windows(2).all(|w| score_order(&w[0], &w[1]).is_le()) {
                entries.sort_by(score_order);
                warnings.push(Warning::ReorderedByScore {
                    topic: topic.clone(),
                });
            }
        }
        Ok(Checked {
            value: RankedRun { system_tag, topics },
            warnings,
        })
    }

    /// Convenience constructor from ranked doc ids; scores descend from `n` to 1.
    pub fn from_ranked_docs<S: AsRef<str>>(
        system_tag: impl Into<String>,
        topics: impl IntoIterator<Item = (String, Vec<S>)>,
    ) -> Result<Self> {
        let topics = topics
            .into_iter()
            .map(|(topic, docs)| {
                let n = docs.len();
                let entries = docs
                    .iter()
                    .enumerate()
                    .map(|(i, d)| RunEntry {
                        doc_id: d.as_ref().to_string(),
                        score: (n - i) as f64,
                    })
                    .collect();
                (topic, entries)
            })
            .collect();
        Self::new(system_tag, topics)
    }

    pub fn topic(&self, topic: &str) -> Option<&[RunEntry]> {
        self.topics.get(topic).map(Vec::as_slice)
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn topics(&self) -> &BTreeMap<String, Vec<RunEntry>> {
        &self.topics
    }
}

/// Parses a six-column run: `topic_id Q0 doc_id rank score system_tag`.
///
/// Positions after sorting are authoritative; a rank column that disagrees
/// produces a [`Warning::RankMismatch`].
pub fn parse_run(input: &str) -> Result<Checked<RankedRun>> {
    let mut tag: Option<String> = None;
    let mut topics: BTreeMap<String, Vec<RunEntry>> = BTreeMap::new();
    let mut file_ranks: BTreeMap<(String, String), i64> = BTreeMap::new();

    for (line, fields) in data_lines(input) {
        if fields.len() != 6 {
            return Err(Error::parse(
                line,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let rank: i64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(line, format!("rank {:?} is not an integer", fields[3])))?;
        let score: f64 = fields[4]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(line, format!("score {:?} is not a number", fields[4])))?;
        match &tag {
            None => tag = Some(fields[5].to_string()),
            Some(t) if t != fields[5] => {
                return Err(Error::parse(
                    line,
                    format!("system tag {} differs from {}", fields[5], t),
                ))
            }
            _ => {}
        }
        let key = (fields[0].to_string(), fields[2].to_string());
        if file_ranks.insert(key, rank).is_some() {
            return Err(Error::parse(
                line,
                format!("document {} repeated for topic {}", fields[2], fields[0]),
            ));
        }
        topics.entry(fields[0].to_string()).or_default().push(RunEntry {
            doc_id: fields[2].to_string(),
            score,
        });
    }

    let tag = tag.ok_or_else(|| Error::validation("run file contains no result lines"))?;
    let Checked {
        value: run,
        mut warnings,
    } = RankedRun::build(tag, topics)?;
    for (topic, entries) in &run.topics {
        for (i, e) in entries.iter().enumerate() {
            let file_rank = file_ranks[&(topic.clone(), e.doc_id.clone())];
            if file_rank != (i + 1) as i64 {
                warnings.push(Warning::RankMismatch {
                    topic: topic.clone(),
                    doc: e.doc_id.clone(),
                    file_rank,
                    position: i + 1,
                });
            }
        }
    }
    Ok(Checked {
        value: run,
        warnings,
    })
}

pub fn write_run(run: &RankedRun) -> String {
    let mut out = String::new();
    for (topic, entries) in &run.topics {
        for (i, e) in entries.iter().enumerate() {
            out.push_str(&format!(
                "{} Q0 {} {} {} {}\n",
                topic,
                e.doc_id,
                i + 1,
                e.score,
                run.system_tag
            ));
        }
    }
    out
}
