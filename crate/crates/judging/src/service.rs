//! Judging operations over the durable store.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use trelkit_core::collection::{parse_judgments, parse_manifest, parse_topics, write_judgments};
use trelkit_core::{CrawlManifest, Level, Pool, Topic};

use crate::assign::assign_pool;
use crate::clean::{clean_document, search_offsets, CleanDocument};
use crate::config::ServiceConfig;
use crate::qc::{noise_qc, QcReport};
use crate::store::{AuditEntry, Record, Store};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelDescription {
    pub value: i32,
    pub description: String,
}

/// One topic as listed for its assessor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicProgress {
    pub topic_id: String,
    pub title: String,
    pub levels: Vec<LevelDescription>,
    pub judged_count: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentView {
    pub doc_id: String,
    pub title: String,
    pub body: String,
    pub judged_count: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Next {
    Document(DocumentView),
    Done {
        done: bool,
        judged_count: usize,
        total: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub doc_id: String,
    pub level: i8,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Submission {
    pub assessor_id: String,
    pub topic_id: String,
    pub doc_id: String,
    pub level: i64,
    /// Client-side count of submissions for this document, including this
    /// one. A submission whose revision is already recorded is acknowledged
    /// again without being stored twice.
    #[serde(default)]
    pub revision: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ack {
    pub doc_id: String,
    pub level: i8,
    pub revision: usize,
    pub judged_count: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub doc_id: String,
    pub query: String,
    /// Character offsets into the document's visible text.
    pub offsets: Vec<usize>,
}

pub struct JudgingService {
    store: Store,
    documents_dir: Option<PathBuf>,
    manifest: Option<CrawlManifest>,
    topics: BTreeMap<String, Topic>,
    seed: u64,
    qc_threshold: f64,
    cleaned: Mutex<HashMap<String, Arc<CleanDocument>>>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.contains(['/', '\\']) && id != "." && id != ".."
}

impl JudgingService {
    pub fn open(config: &ServiceConfig) -> Result<Self> {
        let manifest = match &config.manifest {
            Some(p) => Some(parse_manifest(&std::fs::read_to_string(p)?)?),
            None => None,
        };
        let topics = match &config.topics {
            Some(p) => parse_topics(&std::fs::read_to_string(p)?)?
                .into_iter()
                .map(|t| (t.id.clone(), t))
                .collect(),
            None => BTreeMap::new(),
        };
        Ok(Self {
            store: Store::open(&config.data_dir, config.compact_every)?,
            documents_dir: config.documents_dir.clone(),
            manifest,
            topics,
            seed: config.shuffle_seed,
            qc_threshold: config.qc_threshold,
            cleaned: Mutex::new(HashMap::new()),
        })
    }

    /// Stores pools and creates the requested assignments, keyed by topic.
    /// Re-uploading an identical pool is allowed; changing a pool that
    /// already has assignments is not.
    pub fn upload_pools(
        &mut self,
        pools: Vec<Pool>,
        assessors: &BTreeMap<String, Vec<String>>,
    ) -> Result<usize> {
        let state = self.store.state();
        for pool in &pools {
            if !valid_id(&pool.topic_id) || pool.docs().any(|d| !valid_id(d)) {
                return Err(Error::Invalid(format!("pool {} holds an unusable id", pool.topic_id)));
            }
            let assigned = state.assignments.keys().any(|(_, t)| *t == pool.topic_id);
            if assigned && state.pools.get(&pool.topic_id).is_some_and(|p| p.entries() != pool.entries()) {
                return Err(Error::Conflict(format!(
                    "topic {} already has assignments on a different pool",
                    pool.topic_id
                )));
            }
        }
        let uploaded: BTreeMap<&str, &Pool> = pools.iter().map(|p| (p.topic_id.as_str(), p)).collect();
        for (topic, list) in assessors {
            if !uploaded.contains_key(topic.as_str()) && !state.pools.contains_key(topic) {
                return Err(Error::NotFound(format!("no pool for topic {topic}")));
            }
            let mut seen = std::collections::BTreeSet::new();
            for a in list {
                if !seen.insert(a) {
                    return Err(Error::Invalid(format!("{a} listed twice for topic {topic}")));
                }
                if !valid_id(a) {
                    return Err(Error::Invalid(format!("unusable assessor id {a:?}")));
                }
                if state.assignments.contains_key(&(a.clone(), topic.clone())) {
                    return Err(Error::Conflict(format!("{a} is already assigned topic {topic}")));
                }
            }
        }
        for pool in &pools {
            if self.store.state().pools.get(&pool.topic_id) != Some(pool) {
                self.store.append(Record::Pool {
                    pool: trelkit_core::collection::write_pool(pool),
                })?;
            }
        }
        let mut created = 0;
        for (topic, list) in assessors {
            for a in list {
                let pool = &self.store.state().pools[topic];
                let assignment = assign_pool(pool, a, self.seed);
                self.store.append(Record::Assign {
                    assessor_id: assignment.assessor_id,
                    topic_id: assignment.topic_id,
                    worklist: assignment.worklist,
                })?;
                created += 1;
            }
        }
        Ok(created)
    }

    fn assignment(&self, assessor: &str, topic: &str) -> Result<&crate::Assignment> {
        self.store
            .state()
            .assignments
            .get(&(assessor.to_string(), topic.to_string()))
            .ok_or_else(|| Error::NotFound(format!("{assessor} has no assignment for topic {topic}")))
    }

    fn judged_count(&self, assessor: &str, topic: &str) -> Result<(usize, usize)> {
        let a = self.assignment(assessor, topic)?;
        let state = self.store.state();
        let judged = a
            .worklist
            .iter()
            .filter(|d| state.is_judged(assessor, topic, d))
            .count();
        Ok((judged, a.worklist.len()))
    }

    pub fn topics_for(&self, assessor: &str) -> Result<Vec<TopicProgress>> {
        let mut out = Vec::new();
        for (a, topic) in self.store.state().assignments.keys() {
            if a != assessor {
                continue;
            }
            let (judged_count, total) = self.judged_count(assessor, topic)?;
            let meta = self.topics.get(topic);
            out.push(TopicProgress {
                topic_id: topic.clone(),
                title: meta.map(|t| t.title.clone()).unwrap_or_default(),
                levels: meta
                    .map(|t| {
                        t.relevance_levels
                            .iter()
                            .map(|l| LevelDescription {
                                value: l.value,
                                description: l.description.clone(),
                            })
                            .collect()
                    })
                    .unwrap_or_default(),
                judged_count,
                total,
            });
        }
        if out.is_empty() {
            return Err(Error::NotFound(format!("no assignments for {assessor}")));
        }
        Ok(out)
    }

    /// Cleaned document; a missing page yields an empty document the
    /// assessor can mark as unjudgeable.
    pub fn cleaned(&self, doc: &str) -> Result<Arc<CleanDocument>> {
        if let Some(d) = self.cleaned.lock().get(doc) {
            return Ok(Arc::clone(d));
        }
        let raw = match &self.documents_dir {
            Some(dir) if valid_id(doc) => match std::fs::read(dir.join(format!("{doc}.html"))) {
                Ok(bytes) => bytes,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
                Err(e) => return Err(e.into()),
            },
            _ => Vec::new(),
        };
        let cleaned = Arc::new(clean_document(doc, &raw));
        self.cleaned.lock().insert(doc.to_string(), Arc::clone(&cleaned));
        Ok(cleaned)
    }

    fn view(&self, assessor: &str, topic: &str, doc: &str) -> Result<DocumentView> {
        let (judged_count, total) = self.judged_count(assessor, topic)?;
        let cleaned = self.cleaned(doc)?;
        Ok(DocumentView {
            doc_id: doc.to_string(),
            title: cleaned.title.clone(),
            body: cleaned.body.clone(),
            judged_count,
            total,
        })
    }

    pub fn next(&self, assessor: &str, topic: &str) -> Result<Next> {
        let a = self.assignment(assessor, topic)?;
        match a.current() {
            Some(doc) => Ok(Next::Document(self.view(assessor, topic, doc)?)),
            None => {
                let (judged_count, total) = self.judged_count(assessor, topic)?;
                Ok(Next::Done {
                    done: true,
                    judged_count,
                    total,
                })
            }
        }
    }

    /// A document already judged by the assessor, for revision.
    pub fn judged_document(&self, assessor: &str, topic: &str, doc: &str) -> Result<DocumentView> {
        self.assignment(assessor, topic)?;
        if !self.store.state().is_judged(assessor, topic, doc) {
            return Err(Error::NotFound(format!("{assessor} has not judged {doc}")));
        }
        self.view(assessor, topic, doc)
    }

    /// The assessor's own judgments in worklist order.
    pub fn history(&self, assessor: &str, topic: &str) -> Result<Vec<HistoryEntry>> {
        let a = self.assignment(assessor, topic)?;
        let state = self.store.state();
        Ok(a.worklist
            .iter()
            .filter_map(|d| {
                state
                    .judgments
                    .get(&(topic.to_string(), assessor.to_string(), d.clone()))
                    .map(|l| HistoryEntry {
                        doc_id: d.clone(),
                        level: l.value(),
                    })
            })
            .collect())
    }

    pub fn submit(&mut self, s: &Submission) -> Result<Ack> {
        let level = Level::new(s.level)
            .map_err(|_| Error::Invalid(format!("level {} is not one of -1, 0, 1, 2", s.level)))?;
        let a = self.assignment(&s.assessor_id, &s.topic_id)?;
        if !a.worklist.contains(&s.doc_id) {
            return Err(Error::Invalid(format!(
                "{} is not in the worklist of topic {}",
                s.doc_id, s.topic_id
            )));
        }
        let state = self.store.state();
        let judged = state.is_judged(&s.assessor_id, &s.topic_id, &s.doc_id);
        if !judged && a.current() != Some(&s.doc_id) {
            return Err(Error::Conflict(format!("{} is not the current document", s.doc_id)));
        }
        let recorded = state.revisions(&s.assessor_id, &s.topic_id, &s.doc_id);
        let duplicate = s.revision.is_some_and(|r| r >= 1 && r <= recorded);
        if s.revision == Some(0) {
            return Err(Error::Invalid("revisions count from 1".into()));
        }
        if !duplicate {
            let seq = state.next_seq();
            self.store.append(Record::Judge {
                seq,
                assessor_id: s.assessor_id.clone(),
                topic_id: s.topic_id.clone(),
                doc_id: s.doc_id.clone(),
                level: level.value(),
            })?;
        }
        let state = self.store.state();
        let (judged_count, total) = self.judged_count(&s.assessor_id, &s.topic_id)?;
        Ok(Ack {
            doc_id: s.doc_id.clone(),
            level: state.judgments[&(s.topic_id.clone(), s.assessor_id.clone(), s.doc_id.clone())].value(),
            revision: state.revisions(&s.assessor_id, &s.topic_id, &s.doc_id),
            judged_count,
            total,
        })
    }

    pub fn search(&self, doc: &str, query: &str) -> Result<SearchResult> {
        if !self.store.state().pools.values().any(|p| p.contains(doc)) {
            return Err(Error::NotFound(format!("document {doc}")));
        }
        let cleaned = self.cleaned(doc)?;
        Ok(SearchResult {
            doc_id: doc.to_string(),
            query: query.to_string(),
            offsets: search_offsets(&cleaned.body, query),
        })
    }

    /// Judgment file ordered by topic, assessor and document.
    pub fn export(&self, topic: Option<&str>) -> String {
        write_judgments(&self.store.state().judgment_sets(topic))
    }

    /// Loads a judgment file. Judged documents must be in their topic's
    /// pool; assessors without an assignment for the topic get one.
    pub fn ingest(&mut self, text: &str) -> Result<usize> {
        let sets = parse_judgments(text)?;
        for set in &sets {
            for j in set.judgments() {
                let pool = self.store.state().pools.get(&j.topic_id).ok_or_else(|| {
                    Error::NotFound(format!("no pool for topic {}", j.topic_id))
                })?;
                if !pool.contains(&j.doc_id) {
                    return Err(Error::Invalid(format!(
                        "{} is not in the pool of topic {}",
                        j.doc_id, j.topic_id
                    )));
                }
            }
        }
        let state = self.store.state();
        let mut records = Vec::new();
        let mut new_assignments = std::collections::BTreeSet::new();
        let mut seq = state.next_seq();
        for set in &sets {
            for j in set.judgments() {
                let key = (j.assessor_id.clone(), j.topic_id.clone());
                if !state.assignments.contains_key(&key) && new_assignments.insert(key) {
                    let a = assign_pool(&state.pools[&j.topic_id], &j.assessor_id, self.seed);
                    records.push(Record::Assign {
                        assessor_id: a.assessor_id,
                        topic_id: a.topic_id,
                        worklist: a.worklist,
                    });
                }
                records.push(Record::Judge {
                    seq,
                    assessor_id: j.assessor_id,
                    topic_id: j.topic_id,
                    doc_id: j.doc_id,
                    level: j.level.value(),
                });
                seq += 1;
            }
        }
        let count = records.iter().filter(|r| matches!(r, Record::Judge { .. })).count();
        self.store.append_all(records)?;
        Ok(count)
    }

    pub fn qc(&self) -> Result<QcReport> {
        let manifest = self
            .manifest
            .as_ref()
            .ok_or_else(|| Error::Config("noise QC needs a crawl manifest".into()))?;
        Ok(noise_qc(&self.store.state().judgment_sets(None), manifest, self.qc_threshold))
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.store.state().audit
    }

    pub fn compact(&mut self) -> Result<()> {
        self.store.compact()
    }
}
