use std::collections::BTreeMap;

use super::{data_lines, Level};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub topic_id: String,
    pub assessor_id: String,
    pub doc_id: String,
    pub level: Level,
}

/// All judgments made by one assessor, at most one per (topic, document).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JudgmentSet {
    pub assessor_id: String,
    topics: BTreeMap<String, BTreeMap<String, Level>>,
}

impl JudgmentSet {
    pub fn new(assessor_id: impl Into<String>) -> Self {
        Self {
            assessor_id: assessor_id.into(),
            topics: BTreeMap::new(),
        }
    }

    /// Records a judgment; a second judgment of the same document is an error.
    pub fn insert(&mut self, topic: &str, doc: &str, level: Level) -> Result<()> {
        let docs = self.topics.entry(topic.to_string()).or_default();
        if docs.contains_key(doc) {
            return Err(Error::validation(format!(
                "assessor {} judged {doc} twice for topic {topic}",
                self.assessor_id
            )));
        }
        docs.insert(doc.to_string(), level);
        Ok(())
    }

    pub fn get(&self, topic: &str, doc: &str) -> Option<Level> {
        self.topics.get(topic)?.get(doc).copied()
    }

    pub fn topic(&self, topic: &str) -> Option<&BTreeMap<String, Level>> {
        self.topics.get(topic)
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn judges(&self, topic: &str) -> bool {
        self.topics.get(topic).is_some_and(|d| !d.is_empty())
    }

    pub fn len(&self) -> usize {
        self.topics.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn judgments(&self) -> impl Iterator<Item = Judgment> + '_ {
        self.topics.iter().flat_map(move |(topic, docs)| {
            docs.iter().map(move |(doc, &level)| Judgment {
                topic_id: topic.clone(),
                assessor_id: self.assessor_id.clone(),
                doc_id: doc.clone(),
                level,
            })
        })
    }
}

/// Parses `topic_id assessor_id doc_id level` lines into one set per
/// assessor, ordered by assessor id.
pub fn parse_judgments(input: &str) -> Result<Vec<JudgmentSet>> {
    let mut sets: BTreeMap<String, JudgmentSet> = BTreeMap::new();
    for (line, fields) in data_lines(input) {
        if fields.len() != 4 {
            return Err(Error::parse(
                line,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let level: Level = fields[3]
            .parse()
            .map_err(|e: Error| Error::parse(line, e.to_string()))?;
        let set = sets
            .entry(fields[1].to_string())
            .or_insert_with(|| JudgmentSet::new(fields[1]));
        set.insert(fields[0], fields[2], level)
            .map_err(|e| Error::parse(line, e.to_string()))?;
    }
    Ok(sets.into_values().collect())
}

/// Writes judgments ordered by topic, then assessor, then document.
pub fn write_judgments(sets: &[JudgmentSet]) -> String {
    let mut all: Vec<Judgment> = sets.iter().flat_map(JudgmentSet::judgments).collect();
    all.sort_by(|a, b| {
        (&a.topic_id, &a.assessor_id, &a.doc_id).cmp(&(&b.topic_id, &b.assessor_id, &b.doc_id))
    });
    let mut out = String::new();
    for j in all {
        out.push_str(&format!(
            "{} {} {} {}\n",
            j.topic_id, j.assessor_id, j.doc_id, j.level
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_judgment() {
        let sets = parse_judgments("001 a1 d1 2\n").unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].assessor_id, "a1");
        assert_eq!(sets[0].get("001", "d1"), Some(Level::HIGHLY));
    }

    #[test]
    fn out_of_range_level() {
        assert!(matches!(parse_judgments("001 a1 d1 3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_judgments("001 a1 d1 x\n").is_err());
    }

    #[test]
    fn two_assessors() {
        let sets = parse_judgments("001 a2 d1 0\n001 a1 d1 1\n001 a1 d2 -1\n").unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0].assessor_id, "a1");
        assert_eq!(sets[0].len(), 2);
        assert_eq!(sets[0].get("001", "d2"), Some(Level::UNJUDGEABLE));
        assert_eq!(sets[1].len(), 1);
    }

    #[test]
    fn duplicate_rejected() {
        assert!(parse_judgments("001 a1 d1 1\n001 a1 d1 0\n").is_err());
        // same document judged by two assessors is fine
        assert!(parse_judgments("001 a1 d1 1\n001 a2 d1 0\n").is_ok());
    }

    #[test]
    fn writer_orders_topic_assessor_doc() {
        let sets = parse_judgments("002 a1 d1 1\n001 b d2 0\n001 a d9 2\n001 a d3 -1\n").unwrap();
        assert_eq!(
            write_judgments(&sets),
            "001 a d3 -1\n001 a d9 2\n001 b d2 0\n002 a1 d1 1\n"
        );
    }
}
