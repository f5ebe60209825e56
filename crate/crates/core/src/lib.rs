//! Building blocks for small-scale IR test collections and for checking how
//! much their verdicts can be trusted.
//!
//! The crate covers the whole offline pipeline:
//!
//! * [`collection`]: domain types and every on-disk format (topics, runs,
//!   manifests, judgments, pools, trels).
//! * [`pooling`]: depth-k and size-k pools with search-engine and noise
//!   injection, pool statistics and nested pool-growth series.
//! * [`measures`]: NDCG@k, AP@k, P@k, RR, R@k and C@k plus score matrices.
//! * [`trels`]: resolving multi-assessor judgments into trels by sampling
//!   assessor combinations, or by union and intersection.
//! * [`reliability`]: assessor agreement, score distributions across trels,
//!   Kendall's tau ranking stability and Wilcoxon swap tests.
//! * [`incompleteness`]: effect of pool growth on scores.
//! * [`synth`]: seeded synthetic collections for reproducible experiments.

pub mod collection;
mod error;
pub mod eval;
pub mod incompleteness;
pub mod measures;
pub mod pooling;
pub mod reliability;
pub mod seed;
pub mod synth;
pub mod trels;

pub use collection::{
    CrawlManifest, Judgment, JudgmentSet, Level, Pool, PoolSpec, Provenance, RankedRun, RunEntry,
    Topic, TopicQrels, Trel, TrelSource,
};
pub use error::{Error, Result};
pub use eval::Evaluator;
pub use measures::{MeasureConfig, MeasureKind};

/// A non-fatal condition reported alongside a result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// A run line's rank column disagrees with its position after parsing.
    RankMismatch {
        topic: String,
        doc: String,
        file_rank: i64,
        position: usize,
    },
    /// Lines of a run were not in score order and have been re-sorted.
    ReorderedByScore { topic: String },
    /// No run retrieved anything for the topic.
    TopicNotInRuns { topic: String },
    /// The runs ran out before the pool reached its target size.
    PoolShortfall {
        topic: String,
        target: usize,
        size: usize,
    },
    /// A system run has no results for a topic that is being evaluated.
    TopicNotRetrieved { system: String, topic: String },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::RankMismatch {
                topic,
                doc,
                file_rank,
                position,
            } => write!(
                f,
                "topic {topic}: document {doc} has rank {file_rank} in the file but position {position}"
            ),
            Warning::ReorderedByScore { topic } => {
                write!(f, "topic {topic}: lines re-sorted by descending score")
            }
            Warning::TopicNotInRuns { topic } => write!(f, "topic {topic}: absent from every run"),
            Warning::PoolShortfall {
                topic,
                target,
                size,
            } => write!(
                f,
                "topic {topic}: runs exhausted at {size} documents, below the target of {target}"
            ),
            Warning::TopicNotRetrieved { system, topic } => {
                write!(f, "system {system} retrieved nothing for topic {topic}")
            }
        }
    }
}

/// A value together with the warnings raised while producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checked<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Checked<T> {
    pub fn clean(value: T) -> Self {
        Self {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn into_value(self) -> T {
        self.value
    }
}
