use std::collections::BTreeMap;
use std::sync::Arc;

use super::{data_lines, Level};
use crate::{Error, Result};

/// Resolved judgments for a single topic. Levels are always in {0, 1, 2};
/// unjudged documents count as nonrelevant.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TopicQrels {
    levels: BTreeMap<String, Level>,
    relevant: usize,
}

impl TopicQrels {
    pub fn from_levels<I, S>(levels: I) -> Self
    where
        I: IntoIterator<Item = (S, Level)>,
        S: Into<String>,
    {
        let levels: BTreeMap<String, Level> = levels
            .into_iter()
            .map(|(d, l)| (d.into(), l.resolved()))
            .collect();
        let relevant = levels.values().filter(|l| l.is_relevant()).count();
        Self { levels, relevant }
    }

    pub fn level(&self, doc: &str) -> Level {
        self.levels.get(doc).copied().unwrap_or(Level::NONRELEVANT)
    }

    pub fn is_relevant(&self, doc: &str) -> bool {
        self.level(doc).is_relevant()
    }

    pub fn is_judged(&self, doc: &str) -> bool {
        self.levels.contains_key(doc)
    }

    /// Number of documents at level 1 or 2.
    pub fn relevant_count(&self) -> usize {
        self.relevant
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Level)> {
        self.levels.iter().map(|(d, &l)| (d.as_str(), l))
    }

    /// Judged levels, highest first.
    pub fn levels_descending(&self) -> Vec<Level> {
        let mut v: Vec<Level> = self.levels.values().copied().collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    /// Keeps only the documents accepted by `keep`.
    pub fn restricted_to(&self, mut keep: impl FnMut(&str) -> bool) -> TopicQrels {
        TopicQrels::from_levels(
            self.levels
                .iter()
                .filter(|(d, _)| keep(d))
                .map(|(d, &l)| (d.clone(), l)),
        )
    }
}

/// Which judgments a trel took for a topic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrelSource {
    Assessor(String),
    Union,
    Intersection,
}

impl std::fmt::Display for TrelSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrelSource::Assessor(a) => write!(f, "assessor {a}"),
            TrelSource::Union => f.write_str("union"),
            TrelSource::Intersection => f.write_str("intersection"),
        }
    }
}

/// A resolved ground truth: one level per (topic, document).
///
/// Per-topic judgments are shared behind `Arc`, so trels drawn from the same
/// assessor choices share memory and evaluation caches can key on identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trel {
    pub name: String,
    topics: BTreeMap<String, (TrelSource, Arc<TopicQrels>)>,
}

impl Trel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            topics: BTreeMap::new(),
        }
    }

    pub fn insert_topic(&mut self, topic: &str, source: TrelSource, qrels: Arc<TopicQrels>) {
        self.topics.insert(topic.to_string(), (source, qrels));
    }

    pub fn topic(&self, topic: &str) -> Option<&TopicQrels> {
        self.topics.get(topic).map(|(_, q)| q.as_ref())
    }

    pub fn topic_shared(&self, topic: &str) -> Option<&Arc<TopicQrels>> {
        self.topics.get(topic).map(|(_, q)| q)
    }

    pub fn source(&self, topic: &str) -> Option<&TrelSource> {
        self.topics.get(topic).map(|(s, _)| s)
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn topics(&self) -> impl Iterator<Item = (&str, &TrelSource, &Arc<TopicQrels>)> {
        self.topics.iter().map(|(t, (s, q))| (t.as_str(), s, q))
    }

    pub fn level(&self, topic: &str, doc: &str) -> Level {
        self.topic(topic)
            .map(|q| q.level(doc))
            .unwrap_or(Level::NONRELEVANT)
    }

    pub fn topic_count(&self) -> usize {
        self.topics.len()
    }
}

/// Writes a trel: a header naming the source of every topic, then
/// `topic_id doc_id level` lines.
pub fn write_trel(trel: &Trel) -> String {
    let mut out = format!("# trel {}\n", trel.name);
    for (topic, (source, _)) in &trel.topics {
        match source {
            TrelSource::Assessor(a) => out.push_str(&format!("# source {topic} assessor {a}\n")),
            TrelSource::Union => out.push_str(&format!("# source {topic} union\n")),
            TrelSource::Intersection => out.push_str(&format!("# source {topic} intersection\n")),
        }
    }
    for (topic, (_, qrels)) in &trel.topics {
        for (doc, level) in qrels.iter() {
            out.push_str(&format!("{topic} {doc} {level}\n"));
        }
    }
    out
}

pub fn parse_trel(input: &str) -> Result<Trel> {
    let mut name: Option<String> = None;
    let mut sources: BTreeMap<String, TrelSource> = BTreeMap::new();
    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if let Some(rest) = raw.strip_prefix("# trel ") {
            name = Some(rest.trim().to_string());
        } else if let Some(rest) = raw.strip_prefix("# source ") {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            let source = match fields.as_slice() {
                [_, "assessor", a] => TrelSource::Assessor(a.to_string()),
                [_, "union"] => TrelSource::Union,
                [_, "intersection"] => TrelSource::Intersection,
                _ => return Err(Error::parse(line, format!("malformed source line {raw:?}"))),
            };
            if sources.insert(fields[0].to_string(), source).is_some() {
                return Err(Error::parse(line, format!("topic {} has two sources", fields[0])));
            }
        }
    }
    let name = name.ok_or_else(|| Error::parse(1, "missing '# trel <name>' header"))?;

    let mut levels: BTreeMap<String, Vec<(String, Level)>> =
        sources.keys().map(|t| (t.clone(), Vec::new())).collect();
    for (line, fields) in data_lines(input) {
        let [topic, doc, level] = fields.as_slice() else {
            return Err(Error::parse(
                line,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        };
        let level: Level = level
            .parse()
            .map_err(|e: Error| Error::parse(line, e.to_string()))?;
        if level.is_unjudgeable() {
            return Err(Error::parse(line, "trel levels must be 0, 1 or 2"));
        }
        let docs = levels
            .get_mut(*topic)
            .ok_or_else(|| Error::parse(line, format!("topic {topic} has no source header")))?;
        if docs.iter().any(|(d, _)| d == doc) {
            return Err(Error::parse(line, format!("document {doc} repeated")));
        }
        docs.push((doc.to_string(), level));
    }

    let mut trel = Trel::new(name);
    for (topic, source) in sources {
        let qrels = TopicQrels::from_levels(levels.remove(&topic).unwrap_or_default());
        trel.insert_topic(&topic, source, Arc::new(qrels));
    }
    Ok(trel)
}
