//! Resolving multi-assessor judgments into trels.
//!
//! A topic judged by two assessors contributes one binary choice to every
//! trel, so `m` dual topics span `2^m` assessor combinations. Per-topic
//! judgments are built once and shared by every trel that picks them.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng;

use crate::collection::{JudgmentSet, Level, TopicQrels, Trel, TrelSource};
use crate::seed::rng_for;
use crate::{Error, Result};

/// Largest number of dual topics a space may hold.
pub const MAX_DUAL_TOPICS: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualTopic {
    pub topic_id: String,
    /// Assessor ids in ascending order.
    pub assessors: [String; 2],
    pub qrels: [Arc<TopicQrels>; 2],
    raw: [BTreeMap<String, Level>; 2],
}

impl DualTopic {
    /// Raw (unresolved) judgments of the two assessors.
    pub fn raw(&self) -> &[BTreeMap<String, Level>; 2] {
        &self.raw
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleTopic {
    pub topic_id: String,
    pub assessor: String,
    pub qrels: Arc<TopicQrels>,
}

/// Assessor choices for every dual topic: bit `i` set means the second
/// assessor of dual topic `i` was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssessorChoice(pub u64);

impl AssessorChoice {
    pub fn picks_second(self, dual_index: usize) -> bool {
        (self.0 >> dual_index) & 1 == 1
    }

    /// Dual topics on which two choices differ.
    pub fn differences(self, other: AssessorChoice) -> u32 {
        (self.0 ^ other.0).count_ones()
    }
}

/// The topics of a judgment collection split by number of assessors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrelSpace {
    pub dual_topics: Vec<DualTopic>,
    pub single_topics: Vec<SingleTopic>,
}

/// Classifies every judged topic as single or dual.
pub fn trel_space(sets: &[JudgmentSet]) -> Result<TrelSpace> {
    let topics: BTreeSet<&str> = sets
        .iter()
        .flat_map(|s| s.topic_ids().filter(|t| s.judges(t)))
        .collect();
    trel_space_for_topics(sets, topics)
}

/// As [`trel_space`], restricted to the given topics. A listed topic nobody
/// judged is an error.
pub fn trel_space_for_topics<'t>(
    sets: &[JudgmentSet],
    topics: impl IntoIterator<Item = &'t str>,
) -> Result<TrelSpace> {
    let mut ids = BTreeSet::new();
    for s in sets {
        if !ids.insert(s.assessor_id.as_str()) {
            return Err(Error::validation(format!(
                "assessor {} has two judgment sets",
                s.assessor_id
            )));
        }
    }
    let mut dual_topics = Vec::new();
    let mut single_topics = Vec::new();
    for topic in topics.into_iter().collect::<BTreeSet<_>>() {
        let mut judges: Vec<&JudgmentSet> = sets.iter().filter(|s| s.judges(topic)).collect();
        judges.sort_by(|a, b| a.assessor_id.cmp(&b.assessor_id));
        let qrels_of = |s: &JudgmentSet| {
            Arc::new(TopicQrels::from_levels(
                s.topic(topic).into_iter().flatten().map(|(d, &l)| (d.clone(), l)),
            ))
        };
        match judges.as_slice() {
            [] => return Err(Error::validation(format!("topic {topic} has no assessor"))),
            [a] => single_topics.push(SingleTopic {
                topic_id: topic.to_string(),
                assessor: a.assessor_id.clone(),
                qrels: qrels_of(a),
            }),
            [a, b] => dual_topics.push(DualTopic {
                topic_id: topic.to_string(),
                assessors: [a.assessor_id.clone(), b.assessor_id.clone()],
                qrels: [qrels_of(a), qrels_of(b)],
                raw: [
                    a.topic(topic).cloned().unwrap_or_default(),
                    b.topic(topic).cloned().unwrap_or_default(),
                ],
            }),
            more => {
                return Err(Error::validation(format!(
                    "topic {topic} has {} assessors; at most 2 are supported",
                    more.len()
                )))
            }
        }
    }
    if dual_topics.len() > MAX_DUAL_TOPICS {
        return Err(Error::validation(format!(
            "{} dual topics exceed the supported {MAX_DUAL_TOPICS}",
            dual_topics.len()
        )));
    }
    Ok(TrelSpace {
        dual_topics,
        single_topics,
    })
}

impl TrelSpace {
    /// `2^m` for `m` dual topics.
    pub fn total_combinations(&self) -> u64 {
        1u64 << self.dual_topics.len()
    }

    pub fn topic_count(&self) -> usize {
        self.dual_topics.len() + self.single_topics.len()
    }

    /// Builds the trel for one assessor choice.
    pub fn trel(&self, choice: AssessorChoice, name: impl Into<String>) -> Trel {
        let mut trel = Trel::new(name);
        for (i, dual) in self.dual_topics.iter().enumerate() {
            let pick = usize::from(choice.picks_second(i));
            trel.insert_topic(
                &dual.topic_id,
                TrelSource::Assessor(dual.assessors[pick].clone()),
                Arc::clone(&dual.qrels[pick]),
            );
        }
        for single in &self.single_topics {
            trel.insert_topic(
                &single.topic_id,
                TrelSource::Assessor(single.assessor.clone()),
                Arc::clone(&single.qrels),
            );
        }
        trel
    }

    /// Every combination, in ascending choice order.
    pub fn enumerate(&self) -> impl Iterator<Item = AssessorChoice> {
        (0..self.total_combinations()).map(AssessorChoice)
    }
}

/// `n` distinct assessor choices, uniform without replacement. When `n`
/// equals the number of combinations the full enumeration is returned in
/// ascending order.
pub fn sample_choices(space: &TrelSpace, n: usize, seed: u64) -> Result<Vec<AssessorChoice>> {
    let total = space.total_combinations();
    if n == 0 {
        return Err(Error::validation("trel sample size must be at least 1"));
    }
    if n as u64 > total {
        return Err(Error::validation(format!(
            "cannot draw {n} distinct trels from {total} combinations"
        )));
    }
    if n as u64 == total {
        return Ok(space.enumerate().collect());
    }
    let mut rng = rng_for(seed, "trel-sample");
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let c = AssessorChoice(rng.random_range(0..total));
        if seen.insert(c) {
            out.push(c);
        }
    }
    Ok(out)
}

fn sample_name(i: usize) -> String {
    format!("sample-{:04}", i + 1)
}

/// Samples `n` distinct trels; see [`sample_choices`].
pub fn sample_trels(space: &TrelSpace, n: usize, seed: u64) -> Result<Vec<Trel>> {
    Ok(sample_choices(space, n, seed)?
        .into_iter()
        .enumerate()
        .map(|(i, c)| space.trel(c, sample_name(i)))
        .collect())
}

/// All `2^m` trels.
pub fn enumerate_trels(space: &TrelSpace) -> Vec<Trel> {
    space
        .enumerate()
        .map(|c| space.trel(c, format!("combination-{:0w$b}", c.0, w = space.dual_topics.len().max(1))))
        .collect()
}

fn combine(
    sets: &[JudgmentSet],
    name: &str,
    source: TrelSource,
    pick: impl Fn(Level, Level) -> Level,
) -> Result<Trel> {
    let space = trel_space(sets)?;
    let mut trel = Trel::new(name);
    for dual in &space.dual_topics {
        let docs: BTreeSet<&String> = dual.raw[0].keys().chain(dual.raw[1].keys()).collect();
        let levels = docs.into_iter().map(|d| {
            let l = |i: usize| dual.raw[i].get(d).copied().unwrap_or(Level::NONRELEVANT).resolved();
            (d.clone(), pick(l(0), l(1)))
        });
        trel.insert_topic(&dual.topic_id, source.clone(), Arc::new(TopicQrels::from_levels(levels)));
    }
    for single in &space.single_topics {
        trel.insert_topic(
            &single.topic_id,
            TrelSource::Assessor(single.assessor.clone()),
            Arc::clone(&single.qrels),
        );
    }
    Ok(trel)
}

/// The most lenient trel: the highest level given by either assessor.
///
/// Levels are resolved (`-1` becomes `0`) before combining, and a document
/// only one assessor judged counts as `0` for the other.
pub fn union_trel(sets: &[JudgmentSet]) -> Result<Trel> {
    combine(sets, "union", TrelSource::Union, Level::max)
}

/// The strictest trel: the lowest level given by either assessor.
pub fn intersection_trel(sets: &[JudgmentSet]) -> Result<Trel> {
    combine(sets, "intersection", TrelSource::Intersection, Level::min)
}

/// `n_pairs` pairs of distinct choices, uniform over unordered pairs and
/// drawn with replacement across pairs. Each pair is returned in ascending
/// order.
pub fn trel_pairs(
    space: &TrelSpace,
    n_pairs: usize,
    seed: u64,
) -> Result<Vec<(AssessorChoice, AssessorChoice)>> {
    let total = space.total_combinations();
    if total < 2 {
        return Err(Error::validation(
            "trel pairs need at least one topic judged by two assessors",
        ));
    }
    let mut rng = rng_for(seed, "trel-pairs");
    Ok((0..n_pairs)
        .map(|_| {
            let a = rng.random_range(0..total);
            let mut b = rng.random_range(0..total - 1);
            if b >= a {
                b += 1;
            }
            (AssessorChoice(a.min(b)), AssessorChoice(a.max(b)))
        })
        .collect())
}

/// Builds the trels of each pair; see [`trel_pairs`].
pub fn trel_pair_trels(
    space: &TrelSpace,
    pairs: &[(AssessorChoice, AssessorChoice)],
) -> Vec<(Trel, Trel)> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            (
                space.trel(a, format!("pair-{:04}a", i + 1)),
                space.trel(b, format!("pair-{:04}b", i + 1)),
            )
        })
        .collect()
}
