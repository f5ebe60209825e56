//! Domain types and the plain-text file formats exchanged between pipeline
//! stages.
//!
//! | file        | layout                                          |
//! |-------------|-------------------------------------------------|
//! | topics      | `<topic id=..><title/><relevance><level value=../>` |
//! | run         | `topic_id Q0 doc_id rank score system_tag`      |
//! | judgments   | `topic_id assessor_id doc_id level`             |
//! | manifest    | `topic_id,doc_id[,noise]`                       |
//! | pool        | `topic_id,doc_id,provenance,rank` after a header |
//! | trel        | `topic_id doc_id level` after a source header   |

mod judgments;
mod manifest;
mod pool;
mod run;
mod topics;
mod trel;

pub use judgments::{parse_judgments, write_judgments, Judgment, JudgmentSet};
pub use manifest::{parse_manifest, write_manifest, CrawlManifest};
pub use pool::{parse_pool, parse_pools, write_pool, write_pools, Pool, PoolSpec, Provenance};
pub use run::{parse_run, write_run, RankedRun, RunEntry};
pub use topics::{parse_topics, write_topics, RelevanceLevel, Topic};
pub use trel::{parse_trel, write_trel, TopicQrels, Trel, TrelSource};

use crate::{Error, Result};

/// A graded relevance judgment.
///
/// `2` is highly relevant, `1` somewhat relevant, `0` nonrelevant and `-1`
/// marks a document that could not be rendered and therefore not judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(i8);

impl Level {
    pub const UNJUDGEABLE: Level = Level(-1);
    pub const NONRELEVANT: Level = Level(0);
    pub const SOMEWHAT: Level = Level(1);
    pub const HIGHLY: Level = Level(2);

    pub fn new(value: i64) -> Result<Level> {
        match value {
            -1..=2 => Ok(Level(value as i8)),
            _ => Err(Error::validation(format!(
                "relevance level {value} outside {{-1, 0, 1, 2}}"
            ))),
        }
    }

    pub fn value(self) -> i8 {
        self.0
    }

    /// Maps the unjudgeable level to nonrelevant; all others unchanged.
    pub fn resolved(self) -> Level {
        if self.0 < 0 {
            Level::NONRELEVANT
        } else {
            self
        }
    }

    /// Binary relevance after conflating the somewhat and highly relevant levels.
    pub fn is_relevant(self) -> bool {
        self.0 >= 1
    }

    pub fn is_unjudgeable(self) -> bool {
        self.0 < 0
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Level> {
        let value: i64 = s
            .parse()
            .map_err(|_| Error::validation(format!("relevance level {s:?} is not an integer")))?;
        Level::new(value)
    }
}

/// Splits non-empty, non-comment lines into whitespace-separated fields,
/// yielding the 1-based line number alongside.
pub(crate) fn data_lines(input: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    input.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_bounds() {
        assert!(Level::new(-2).is_err());
        assert!(Level::new(3).is_err());
        for v in -1..=2 {
            assert_eq!(Level::new(v).unwrap().value() as i64, v);
        }
    }

    #[test]
    fn unjudgeable_resolves_to_nonrelevant() {
        assert_eq!(Level::UNJUDGEABLE.resolved(), Level::NONRELEVANT);
        assert_eq!(Level::HIGHLY.resolved(), Level::HIGHLY);
        assert!(!Level::UNJUDGEABLE.is_relevant());
        assert!(Level::SOMEWHAT.is_relevant());
    }
}
