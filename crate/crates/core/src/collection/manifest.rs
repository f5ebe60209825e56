use std::collections::{BTreeMap, BTreeSet};

use crate::{Error, Result};

/// Which documents were crawled for which topic, and which topics are decoys.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrawlManifest {
    topics: BTreeMap<String, BTreeSet<String>>,
    noise_topics: BTreeSet<String>,
}

impl CrawlManifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, topic: &str, doc: &str) {
        self.topics
            .entry(topic.to_string())
            .or_default()
            .insert(doc.to_string());
    }

    pub fn mark_noise(&mut self, topic: &str) {
        self.noise_topics.insert(topic.to_string());
    }

    pub fn docs_for(&self, topic: &str) -> Option<&BTreeSet<String>> {
        self.topics.get(topic)
    }

    pub fn crawled_for(&self, topic: &str, doc: &str) -> bool {
        self.topics.get(topic).is_some_and(|d| d.contains(doc))
    }

    pub fn is_noise_topic(&self, topic: &str) -> bool {
        self.noise_topics.contains(topic)
    }

    pub fn noise_topics(&self) -> &BTreeSet<String> {
        &self.noise_topics
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    /// Documents crawled for any noise topic.
    pub fn noise_docs(&self) -> BTreeSet<&str> {
        self.noise_topics
            .iter()
            .filter_map(|t| self.topics.get(t))
            .flatten()
            .map(String::as_str)
            .collect()
    }

    /// Whether the document came from a noise topic and was not crawled for
    /// any regular topic.
    pub fn is_noise_doc(&self, doc: &str) -> bool {
        let mut from_noise = false;
        for (topic, docs) in &self.topics {
            if docs.contains(doc) {
                if self.noise_topics.contains(topic) {
                    from_noise = true;
                } else {
                    return false;
                }
            }
        }
        from_noise
    }

    /// Number of distinct documents across every topic.
    pub fn unique_docs(&self) -> usize {
        self.topics
            .values()
            .flatten()
            .collect::<BTreeSet<_>>()
            .len()
    }
}

/// Parses `topic_id,doc_id[,noise]` lines. Any line carrying the `noise`
/// flag marks its topic as a noise topic. A leading `topic_id,...` header is
/// skipped.
pub fn parse_manifest(input: &str) -> Result<CrawlManifest> {
    let mut manifest = CrawlManifest::new();
    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') || (line == 1 && raw.starts_with("topic_id,")) {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        let (topic, doc) = match fields.as_slice() {
            [t, d] | [t, d, _] => (*t, *d),
            _ => {
                return Err(Error::parse(
                    line,
                    format!("expected 2 or 3 fields, found {}", fields.len()),
                ))
            }
        };
        if topic.is_empty() || doc.is_empty() {
            return Err(Error::parse(line, "empty topic or document id"));
        }
        match fields.get(2) {
            None | Some(&"") => {}
            Some(&"noise") => manifest.mark_noise(topic),
            Some(other) => {
                return Err(Error::parse(line, format!("unknown flag {other:?}")));
            }
        }
        manifest.add(topic, doc);
    }
    Ok(manifest)
}

pub fn write_manifest(manifest: &CrawlManifest) -> String {
    let mut out = String::from("topic_id,doc_id,noise\n");
    for (topic, docs) in &manifest.topics {
        let flag = if manifest.is_noise_topic(topic) { ",noise" } else { "" };
        for doc in docs {
            out.push_str(&format!("{topic},{doc}{flag}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_noise_flag_and_shared_docs() {
        let m = parse_manifest("topic_id,doc_id,noise\n001,a\n001,b\n002,b\n021,n1,noise\n").unwrap();
        assert!(m.crawled_for("001", "a"));
        assert!(m.crawled_for("002", "b"));
        assert!(m.is_noise_topic("021"));
        assert!(!m.is_noise_topic("001"));
        assert_eq!(m.noise_docs().into_iter().collect::<Vec<_>>(), ["n1"]);
        assert!(m.is_noise_doc("n1"));
        assert!(!m.is_noise_doc("a"));
        assert_eq!(m.unique_docs(), 3);
    }

    #[test]
    fn bad_lines_rejected() {
        assert!(parse_manifest("001\n").is_err());
        assert!(parse_manifest("001,a,decoy\n").is_err());
        assert!(parse_manifest("001,a,noise,x\n").is_err());
    }

    #[test]
    fn round_trip() {
        let m = parse_manifest("001,a\n001,b\n021,n1,noise\n").unwrap();
        assert_eq!(parse_manifest(&write_manifest(&m)).unwrap(), m);
    }
}
