use std::collections::BTreeMap;

use crate::{Error, Result};

/// Where a pooled document came from.
///
/// Assessors must never see this; the judging service strips it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    /// Best (smallest) rank at which any pooling run retrieved the document.
    PoolingRun { rank: usize },
    /// Rank in the search engine's result list.
    SearchEngine { rank: usize },
    /// Sampled from a noise topic's crawl.
    Noise,
}

impl Provenance {
    pub fn token(&self) -> &'static str {
        match self {
            Provenance::PoolingRun { .. } => "pooling_run",
            Provenance::SearchEngine { .. } => "search_engine",
            Provenance::Noise => "noise",
        }
    }

    pub fn is_injection(&self) -> bool {
        !matches!(self, Provenance::PoolingRun { .. })
    }
}

/// Target size `k` and injection counts for a size-k pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolSpec {
    pub target_size: usize,
    pub search_count: usize,
    pub noise_count: usize,
}

impl PoolSpec {
    pub fn new(target_size: usize, search_count: usize, noise_count: usize) -> Result<Self> {
        if target_size == 0 {
            return Err(Error::validation("pool target size must be positive"));
        }
        if target_size < search_count + noise_count {
            return Err(Error::validation(format!(
                "pool target size {target_size} is below the {} injected documents",
                search_count + noise_count
            )));
        }
        Ok(Self {
            target_size,
            search_count,
            noise_count,
        })
    }

    pub fn injections(&self) -> usize {
        self.search_count + self.noise_count
    }
}

impl Default for PoolSpec {
    fn default() -> Self {
        Self {
            target_size: 100,
            search_count: 10,
            noise_count: 10,
        }
    }
}

/// The documents selected for judgment for one topic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pool {
    pub topic_id: String,
    /// Deepest rank taken from the pooling runs.
    pub depth: usize,
    entries: BTreeMap<String, Provenance>,
}

impl Pool {
    pub fn new(topic_id: impl Into<String>) -> Self {
        Self {
            topic_id: topic_id.into(),
            depth: 0,
            entries: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, doc: &str) -> bool {
        self.entries.contains_key(doc)
    }

    pub fn provenance(&self, doc: &str) -> Option<Provenance> {
        self.entries.get(doc).copied()
    }

    pub fn entries(&self) -> &BTreeMap<String, Provenance> {
        &self.entries
    }

    pub fn docs(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Adds a document. Injection labels win over pooling-run labels, and
    /// among pooling-run labels the smallest rank is kept. Returns whether
    /// the document was new.
    pub fn insert(&mut self, doc: &str, provenance: Provenance) -> bool {
        match self.entries.get_mut(doc) {
            None => {
                self.entries.insert(doc.to_string(), provenance);
                true
            }
            Some(existing) => {
                match (*existing, provenance) {
                    (Provenance::PoolingRun { rank: old }, Provenance::PoolingRun { rank }) => {
                        if rank < old {
                            *existing = provenance;
                        }
                    }
                    (Provenance::PoolingRun { .. }, _) => *existing = provenance,
                    _ => {}
                }
                false
            }
        }
    }

    /// Whether every document of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &Pool) -> bool {
        self.entries.keys().all(|d| other.contains(d))
    }
}

const COLUMNS: &str = "topic_id,doc_id,provenance,rank";

pub fn write_pool(pool: &Pool) -> String {
    let mut out = format!(
        "# pool topic_id={} depth={} size={}\n{COLUMNS}\n",
        pool.topic_id,
        pool.depth,
        pool.size()
    );
    for (doc, prov) in &pool.entries {
        let rank = match prov {
            Provenance::PoolingRun { rank } | Provenance::SearchEngine { rank } => rank.to_string(),
            Provenance::Noise => String::new(),
        };
        out.push_str(&format!("{},{},{},{}\n", pool.topic_id, doc, prov.token(), rank));
    }
    out
}

pub fn write_pools(pools: &[Pool]) -> String {
    pools.iter().map(write_pool).collect()
}

fn header_field<'a>(line: usize, header: &'a str, key: &str) -> Result<&'a str> {
    header
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .ok_or_else(|| Error::parse(line, format!("pool header lacks {key}=")))
}

/// Parses every pool block in a file.
pub fn parse_pools(input: &str) -> Result<Vec<Pool>> {
    let mut pools: Vec<(Pool, usize, usize)> = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        if let Some(header) = raw.strip_prefix("# pool") {
            let topic = header_field(line, header, "topic_id")?;
            let depth = header_field(line, header, "depth")?
                .parse()
                .map_err(|_| Error::parse(line, "depth is not an integer"))?;
            let size: usize = header_field(line, header, "size")?
                .parse()
                .map_err(|_| Error::parse(line, "size is not an integer"))?;
            let mut pool = Pool::new(topic);
            pool.depth = depth;
            pools.push((pool, size, line));
            continue;
        }
        if raw.starts_with('#') || raw == COLUMNS {
            continue;
        }
        let Some((pool, _, _)) = pools.last_mut() else {
            return Err(Error::parse(line, "pool entry before any pool header"));
        };
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        let [topic, doc, token, rank] = fields.as_slice() else {
            return Err(Error::parse(
                line,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        };
        if *topic != pool.topic_id {
            return Err(Error::parse(
                line,
                format!("entry for topic {topic} inside pool of {}", pool.topic_id),
            ));
        }
        let parse_rank = || -> Result<usize> {
            rank.parse()
                .map_err(|_| Error::parse(line, format!("rank {rank:?} is not an integer")))
        };
        let provenance = match *token {
            "pooling_run" => Provenance::PoolingRun { rank: parse_rank()? },
            "search_engine" => Provenance::SearchEngine { rank: parse_rank()? },
            "noise" => Provenance::Noise,
            other => {
                return Err(Error::parse(line, format!("unknown provenance {other:?}")));
            }
        };
        if pool.entries.insert(doc.to_string(), provenance).is_some() {
            return Err(Error::parse(line, format!("document {doc} repeated in pool")));
        }
    }
    pools
        .into_iter()
        .map(|(pool, size, line)| {
            if pool.size() != size {
                Err(Error::parse(
                    line,
                    format!("header size {size} but {} entries", pool.size()),
                ))
            } else {
                Ok(pool)
            }
        })
        .collect()
}

/// Parses a file holding exactly one pool.
pub fn parse_pool(input: &str) -> Result<Pool> {
    let mut pools = parse_pools(input)?;
    if pools.len() != 1 {
        return Err(Error::validation(format!(
            "expected a single pool, found {}",
            pools.len()
        )));
    }
    Ok(pools.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_entry_round_trips() {
        let mut pool = Pool::new("001");
        pool.insert("n1", Provenance::Noise);
        let text = write_pool(&pool);
        assert!(text.contains("001,n1,noise,"));
        assert_eq!(parse_pool(&text).unwrap(), pool);
    }

    #[test]
    fn empty_pool_is_header_only() {
        let pool = Pool::new("007");
        let text = write_pool(&pool);
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().all(|l| l.starts_with('#') || l == COLUMNS));
        assert_eq!(parse_pool(&text).unwrap(), pool);
    }

    #[test]
    fn entry_count_matches_size_field() {
        let mut pool = Pool::new("001");
        for i in 0..102 {
            pool.insert(&format!("d{i:03}"), Provenance::PoolingRun { rank: i / 4 + 1 });
        }
        pool.depth = 26;
        let text = write_pool(&pool);
        assert!(text.starts_with("# pool topic_id=001 depth=26 size=102\n"));
        assert_eq!(text.lines().count(), 2 + 102);
        assert_eq!(parse_pool(&text).unwrap(), pool);
    }

    #[test]
    fn unknown_provenance_rejected() {
        let text = "# pool topic_id=001 depth=1 size=1\n001,d1,google,1\n";
        assert!(matches!(parse_pool(text), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn size_mismatch_rejected() {
        let text = "# pool topic_id=001 depth=1 size=2\n001,d1,pooling_run,1\n";
        assert!(parse_pool(text).is_err());
    }

    #[test]
    fn injection_label_wins() {
        let mut pool = Pool::new("t");
        pool.insert("d", Provenance::PoolingRun { rank: 3 });
        pool.insert("d", Provenance::PoolingRun { rank: 1 });
        assert_eq!(pool.provenance("d"), Some(Provenance::PoolingRun { rank: 1 }));
        pool.insert("d", Provenance::SearchEngine { rank: 4 });
        pool.insert("d", Provenance::PoolingRun { rank: 1 });
        assert_eq!(pool.provenance("d"), Some(Provenance::SearchEngine { rank: 4 }));
    }

    #[test]
    fn spec_requires_room_for_injections() {
        assert!(PoolSpec::new(19, 10, 10).is_err());
        assert!(PoolSpec::new(20, 10, 10).is_ok());
        assert!(PoolSpec::new(0, 0, 0).is_err());
    }
}
