//! Durable judging state: an append-only JSON-lines log plus a snapshot.
//!
//! Every mutation is one log line, written and synced to disk before the
//! caller acknowledges it. A crash can leave at most a partial final line,
//! which was never acknowledged and is dropped on reopening. Compaction
//! writes the whole state to a new snapshot, renames it into place and
//! then empties the log; replay skips records the snapshot already holds,
//! so a crash between those two steps is harmless.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trelkit_core::collection::{parse_pool, write_pool};
use trelkit_core::{JudgmentSet, Level, Pool};

use crate::assign::Assignment;
use crate::{Error, Result};

const LOG: &str = "judgments.log";
const SNAPSHOT: &str = "snapshot.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Record {
    Pool {
        pool: String,
    },
    Assign {
        assessor_id: String,
        topic_id: String,
        worklist: Vec<String>,
    },
    Judge {
        seq: u64,
        assessor_id: String,
        topic_id: String,
        doc_id: String,
        level: i8,
    },
}

/// One accepted submission; re-judging a document adds another entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub assessor_id: String,
    pub topic_id: String,
    pub doc_id: String,
    pub level: i8,
}

/// (topic, assessor, doc)
pub type JudgmentKey = (String, String, String);

#[derive(Debug, Default)]
pub struct State {
    pub pools: BTreeMap<String, Pool>,
    /// Keyed by (assessor, topic).
    pub assignments: BTreeMap<(String, String), Assignment>,
    pub judgments: BTreeMap<JudgmentKey, Level>,
    pub audit: Vec<AuditEntry>,
    next_seq: u64,
}

impl State {
    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn is_judged(&self, assessor: &str, topic: &str, doc: &str) -> bool {
        self.judgments
            .contains_key(&(topic.to_string(), assessor.to_string(), doc.to_string()))
    }

    /// Times this assessor has submitted a level for the document.
    pub fn revisions(&self, assessor: &str, topic: &str, doc: &str) -> usize {
        self.audit
            .iter()
            .filter(|e| e.assessor_id == assessor && e.topic_id == topic && e.doc_id == doc)
            .count()
    }

    pub fn judgment_sets(&self, topic: Option<&str>) -> Vec<JudgmentSet> {
        let mut sets: BTreeMap<&str, JudgmentSet> = BTreeMap::new();
        for ((t, a, d), level) in &self.judgments {
            if topic.is_some_and(|want| want != t) {
                continue;
            }
            sets.entry(a)
                .or_insert_with(|| JudgmentSet::new(a.clone()))
                .insert(t, d, *level)
                .expect("judgment keys are unique");
        }
        sets.into_values().collect()
    }

    fn advance_cursor(&mut self, assessor: &str, topic: &str) {
        let key = (assessor.to_string(), topic.to_string());
        let Some(a) = self.assignments.get(&key) else { return };
        let mut cursor = a.cursor;
        while cursor < a.worklist.len() && self.is_judged(assessor, topic, &a.worklist[cursor]) {
            cursor += 1;
        }
        self.assignments.get_mut(&key).expect("present").cursor = cursor;
    }

    fn apply(&mut self, record: Record) -> Result<()> {
        match record {
            Record::Pool { pool } => {
                let pool = parse_pool(&pool)?;
                self.pools.insert(pool.topic_id.clone(), pool);
            }
            Record::Assign {
                assessor_id,
                topic_id,
                worklist,
            } => {
                let key = (assessor_id.clone(), topic_id.clone());
                self.assignments.entry(key).or_insert(Assignment {
                    assessor_id: assessor_id.clone(),
                    topic_id: topic_id.clone(),
                    worklist,
                    cursor: 0,
                });
                self.advance_cursor(&assessor_id, &topic_id);
            }
            Record::Judge {
                seq,
                assessor_id,
                topic_id,
                doc_id,
                level,
            } => {
                if seq < self.next_seq {
                    return Ok(());
                }
                let parsed = Level::new(level as i64)?;
                self.next_seq = seq + 1;
                self.judgments
                    .insert((topic_id.clone(), assessor_id.clone(), doc_id.clone()), parsed);
                self.audit.push(AuditEntry {
                    seq,
                    assessor_id: assessor_id.clone(),
                    topic_id: topic_id.clone(),
                    doc_id,
                    level,
                });
                self.advance_cursor(&assessor_id, &topic_id);
            }
        }
        Ok(())
    }

    fn records(&self) -> Vec<Record> {
        let mut out: Vec<Record> = self
            .pools
            .values()
            .map(|p| Record::Pool { pool: write_pool(p) })
            .collect();
        out.extend(self.assignments.values().map(|a| Record::Assign {
            assessor_id: a.assessor_id.clone(),
            topic_id: a.topic_id.clone(),
            worklist: a.worklist.clone(),
        }));
        out.extend(self.audit.iter().map(|e| Record::Judge {
            seq: e.seq,
            assessor_id: e.assessor_id.clone(),
            topic_id: e.topic_id.clone(),
            doc_id: e.doc_id.clone(),
            level: e.level,
        }));
        out
    }
}

pub struct Store {
    dir: PathBuf,
    log: File,
    state: State,
    appended: usize,
    compact_every: usize,
}

fn line_of(record: &Record) -> Vec<u8> {
    let mut line = serde_json::to_vec(record).expect("records serialize");
    line.push(b'\n');
    line
}

fn replay(state: &mut State, text: &str, source: &Path) -> Result<()> {
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line).map_err(|e| {
            Error::Corrupt(format!("{} line {}: {e}", source.display(), i + 1))
        })?;
        state.apply(record)?;
    }
    Ok(())
}

impl Store {
    /// Opens or creates the store in `dir`, replaying the snapshot and the
    /// log. `compact_every` appended records trigger a compaction; 0 never
    /// compacts automatically.
    pub fn open(dir: impl Into<PathBuf>, compact_every: usize) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let mut state = State::default();
        let snapshot = dir.join(SNAPSHOT);
        if snapshot.exists() {
            replay(&mut state, &std::fs::read_to_string(&snapshot)?, &snapshot)?;
        }
        let log_path = dir.join(LOG);
        let mut log = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&log_path)?;
        let mut bytes = Vec::new();
        log.read_to_end(&mut bytes)?;
        let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        if complete < bytes.len() {
            log.set_len(complete as u64)?;
            log.sync_all()?;
        }
        let text = std::str::from_utf8(&bytes[..complete])
            .map_err(|e| Error::Corrupt(format!("{}: {e}", log_path.display())))?;
        replay(&mut state, text, &log_path)?;
        log.seek(SeekFrom::End(0))?;
        Ok(Self {
            dir,
            log,
            state,
            appended: 0,
            compact_every,
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    /// Writes `record` durably, then applies it.
    pub fn append(&mut self, record: Record) -> Result<()> {
        self.log.write_all(&line_of(&record))?;
        self.log.sync_data()?;
        self.state.apply(record)?;
        self.appended += 1;
        if self.compact_every > 0 && self.appended >= self.compact_every {
            self.compact()?;
        }
        Ok(())
    }

    /// Writes several records with a single sync, then applies them in order.
    pub fn append_all(&mut self, records: Vec<Record>) -> Result<()> {
        let bytes: Vec<u8> = records.iter().flat_map(line_of).collect();
        self.log.write_all(&bytes)?;
        self.log.sync_data()?;
        self.appended += records.len();
        for r in records {
            self.state.apply(r)?;
        }
        if self.compact_every > 0 && self.appended >= self.compact_every {
            self.compact()?;
        }
        Ok(())
    }

    pub fn compact(&mut self) -> Result<()> {
        let tmp = self.dir.join(format!("{SNAPSHOT}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            for r in self.state.records() {
                f.write_all(&line_of(&r))?;
            }
            f.sync_all()?;
        }
        std::fs::rename(&tmp, self.dir.join(SNAPSHOT))?;
        if let Ok(d) = File::open(&self.dir) {
            let _ = d.sync_all();
        }
        self.log.set_len(0)?;
        self.log.sync_all()?;
        self.appended = 0;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use trelkit_core::Provenance;

    fn judge(seq: u64, doc: &str, level: i8) -> Record {
        Record::Judge {
            seq,
            assessor_id: "a".into(),
            topic_id: "001".into(),
            doc_id: doc.into(),
            level,
        }
    }

    fn setup(store: &mut Store) {
        let mut pool = Pool::new("001");
        pool.insert("d1", Provenance::Noise);
        pool.insert("d2", Provenance::SearchEngine { rank: 1 });
        store.append(Record::Pool { pool: write_pool(&pool) }).unwrap();
        store
            .append(Record::Assign {
                assessor_id: "a".into(),
                topic_id: "001".into(),
                worklist: vec!["d2".into(), "d1".into()],
            })
            .unwrap();
    }

    #[test]
    fn reopen_replays_and_drops_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut s = Store::open(dir.path(), 0).unwrap();
            setup(&mut s);
            s.append(judge(0, "d2", 1)).unwrap();
        }
        let mut f = OpenOptions::new().append(true).open(dir.path().join(LOG)).unwrap();
        f.write_all(br#"{"op":"judge","seq":1,"asse"#).unwrap();
        drop(f);
        let mut s = Store::open(dir.path(), 0).unwrap();
        assert_eq!(s.state().judgments.len(), 1);
        assert_eq!(s.state().assignments[&("a".into(), "001".into())].cursor, 1);
        s.append(judge(1, "d1", 0)).unwrap();
        drop(s);
        let s = Store::open(dir.path(), 0).unwrap();
        assert_eq!(s.state().judgments.len(), 2);
        assert_eq!(s.state().next_seq(), 2);
    }

    #[test]
    fn compaction_keeps_audit() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(dir.path(), 3).unwrap();
        setup(&mut s);
        s.append(judge(0, "d2", 1)).unwrap();
        s.append(judge(1, "d2", 2)).unwrap();
        let log = std::fs::read_to_string(dir.path().join(LOG)).unwrap();
        assert_eq!(log.lines().count(), 1);
        drop(s);
        let s = Store::open(dir.path(), 3).unwrap();
        assert_eq!(s.state().audit.len(), 2);
        assert_eq!(s.state().revisions("a", "001", "d2"), 2);
        assert_eq!(
            s.state().judgments[&("001".into(), "a".into(), "d2".into())],
            Level::HIGHLY
        );
    }

    #[test]
    fn replay_after_interrupted_compaction_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(dir.path(), 0).unwrap();
        setup(&mut s);
        s.append(judge(0, "d2", 1)).unwrap();
        let log = std::fs::read(dir.path().join(LOG)).unwrap();
        s.compact().unwrap();
        drop(s);
        std::fs::write(dir.path().join(LOG), log).unwrap();
        let s = Store::open(dir.path(), 0).unwrap();
        assert_eq!(s.state().audit.len(), 1);
        assert_eq!(s.state().pools.len(), 1);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(LOG), "garbage\n").unwrap();
        assert!(matches!(Store::open(dir.path(), 0), Err(Error::Corrupt(_))));
    }
}
