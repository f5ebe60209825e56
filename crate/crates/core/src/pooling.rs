//! Judgment pools built from pooling-system runs.
//!
//! A depth-k pool joins the top `k` results of every run. A size-k pool is
//! the shallowest depth-d pool that, together with the injected search-engine
//! and noise documents, holds at least `k` distinct documents. Depth grows in
//! whole ranks, so a pool can overshoot `k` by up to one rank tier.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::Rng;

use crate::collection::{CrawlManifest, Pool, PoolSpec, Provenance, RankedRun, RunEntry};
use crate::{Checked, Error, Result, Warning};

fn topic_lists<'a>(runs: &'a [RankedRun], topic: &str) -> Vec<&'a [RunEntry]> {
    runs.iter().filter_map(|r| r.topic(topic)).collect()
}

/// Adds every run's document at 1-based `rank`; returns how many were new.
fn add_rank(pool: &mut Pool, lists: &[&[RunEntry]], rank: usize) -> usize {
    lists
        .iter()
        .filter_map(|l| l.get(rank - 1))
        .filter(|e| pool.insert(&e.doc_id, Provenance::PoolingRun { rank }))
        .count()
}

/// Union of the top `depth` documents of every run.
pub fn depth_k_pool(runs: &[RankedRun], topic: &str, depth: usize) -> Checked<Pool> {
    let lists = topic_lists(runs, topic);
    let mut pool = Pool::new(topic);
    let mut warnings = Vec::new();
    if lists.iter().all(|l| l.is_empty()) {
        warnings.push(Warning::TopicNotInRuns {
            topic: topic.to_string(),
        });
        return Checked {
            value: pool,
            warnings,
        };
    }
    let longest = lists.iter().map(|l| l.len()).max().unwrap_or(0);
    let depth = depth.min(longest);
    for rank in 1..=depth {
        add_rank(&mut pool, &lists, rank);
    }
    pool.depth = depth;
    Checked {
        value: pool,
        warnings,
    }
}

fn inject(
    topic: &str,
    spec: &PoolSpec,
    search_top: &[String],
    noise_docs: &[String],
    manifest: Option<&CrawlManifest>,
) -> Result<Pool> {
    if search_top.len() != spec.search_count {
        return Err(Error::validation(format!(
            "topic {topic}: {} search-engine documents supplied, pool spec asks for {}",
            search_top.len(),
            spec.search_count
        )));
    }
    if noise_docs.len() != spec.noise_count {
        return Err(Error::validation(format!(
            "topic {topic}: {} noise documents supplied, pool spec asks for {}",
            noise_docs.len(),
            spec.noise_count
        )));
    }
    if let Some(m) = manifest {
        if let Some(doc) = noise_docs.iter().find(|d| m.crawled_for(topic, d)) {
            return Err(Error::validation(format!(
                "topic {topic}: noise document {doc} was crawled for the topic itself"
            )));
        }
    }
    let mut pool = Pool::new(topic);
    for doc in noise_docs {
        pool.insert(doc, Provenance::Noise);
    }
    for (i, doc) in search_top.iter().enumerate() {
        pool.insert(doc, Provenance::SearchEngine { rank: i + 1 });
    }
    Ok(pool)
}

/// Size-k pool: injected documents plus the shallowest depth-d union of the
/// runs that brings the pool to at least `spec.target_size` documents.
///
/// If the runs are exhausted first, the largest reachable pool is returned
/// with a [`Warning::PoolShortfall`]. When a manifest is given, a noise
/// document that was also crawled for the topic is rejected.
pub fn size_k_pool(
    runs: &[RankedRun],
    topic: &str,
    spec: &PoolSpec,
    search_top: &[String],
    noise_docs: &[String],
    manifest: Option<&CrawlManifest>,
) -> Result<Checked<Pool>> {
    let mut pool = inject(topic, spec, search_top, noise_docs, manifest)?;
    let lists = topic_lists(runs, topic);
    let longest = lists.iter().map(|l| l.len()).max().unwrap_or(0);
    let mut warnings = Vec::new();
    if longest == 0 {
        warnings.push(Warning::TopicNotInRuns {
            topic: topic.to_string(),
        });
    }
    let mut depth = 0;
    while pool.size() < spec.target_size && depth < longest {
        depth += 1;
        add_rank(&mut pool, &lists, depth);
    }
    pool.depth = depth;
    if pool.size() < spec.target_size {
        warnings.push(Warning::PoolShortfall {
            topic: topic.to_string(),
            target: spec.target_size,
            size: pool.size(),
        });
    }
    Ok(Checked {
        value: pool,
        warnings,
    })
}

/// Nested size-k pools, one per target size, sharing the same injections.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSeries {
    pub topic_id: String,
    pub search_count: usize,
    pub noise_count: usize,
    /// Requested minimum size of each pool.
    pub targets: Vec<usize>,
    pub pools: Vec<Pool>,
}

impl GrowthSeries {
    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.pools.iter().map(Pool::size)
    }
}

/// Builds one size-k pool per entry of `sizes` (strictly increasing, the
/// first no smaller than the number of injected documents).
pub fn pool_growth_series(
    runs: &[RankedRun],
    topic: &str,
    sizes: &[usize],
    search_top: &[String],
    noise_docs: &[String],
    manifest: Option<&CrawlManifest>,
) -> Result<Checked<GrowthSeries>> {
    if sizes.is_empty() {
        return Err(Error::validation("growth series needs at least one size"));
    }
    if !sizes.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::validation("growth sizes must be strictly increasing"));
    }
    let mut pools = Vec::with_capacity(sizes.len());
    let mut warnings = Vec::new();
    for &size in sizes {
        let spec = PoolSpec::new(size, search_top.len(), noise_docs.len())?;
        let built = size_k_pool(runs, topic, &spec, search_top, noise_docs, manifest)?;
        for w in built.warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        pools.push(built.value);
    }
    Ok(Checked {
        value: GrowthSeries {
            topic_id: topic.to_string(),
            search_count: search_top.len(),
            noise_count: noise_docs.len(),
            targets: sizes.to_vec(),
            pools,
        },
        warnings,
    })
}

/// Draws `count` noise documents uniformly without replacement from every
/// noise topic's crawl, skipping documents crawled for `topic`.
pub fn sample_noise_docs<R: Rng + ?Sized>(
    manifest: &CrawlManifest,
    topic: &str,
    count: usize,
    rng: &mut R,
) -> Result<Vec<String>> {
    let candidates: Vec<&str> = manifest
        .noise_docs()
        .into_iter()
        .filter(|d| !manifest.crawled_for(topic, d))
        .collect();
    if candidates.len() < count {
        return Err(Error::validation(format!(
            "topic {topic}: {count} noise documents requested but only {} available",
            candidates.len()
        )));
    }
    let mut picked: Vec<String> = index::sample(rng, candidates.len(), count)
        .into_iter()
        .map(|i| candidates[i].to_string())
        .collect();
    picked.sort();
    Ok(picked)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolStatsRow {
    pub topic_id: String,
    pub downloaded: Option<usize>,
    pub size: usize,
    pub depth: usize,
}

/// Per-topic pool sizes and depths with their means, plus documents pooled
/// for more than one topic.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolStats {
    pub rows: Vec<PoolStatsRow>,
    pub mean_size: f64,
    pub mean_depth: f64,
    pub mean_downloaded: Option<f64>,
    pub total_size: usize,
    pub unique_docs: usize,
    /// Document → number of topics whose pool contains it (only counts ≥ 2).
    pub duplicates: BTreeMap<String, usize>,
}

impl PoolStats {
    /// Number of documents shared by exactly `n` topics, keyed by `n`.
    pub fn duplicate_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for &n in self.duplicates.values() {
            *hist.entry(n).or_insert(0) += 1;
        }
        hist
    }

    pub fn to_csv(&self) -> String {
        let with_downloads = self.mean_downloaded.is_some();
        let mut out = String::from(if with_downloads {
            "topic,downloaded,pool_size,pool_depth\n"
        } else {
            "topic,pool_size,pool_depth\n"
        });
        for r in &self.rows {
            match r.downloaded {
                Some(d) if with_downloads => {
                    out.push_str(&format!("{},{},{},{}\n", r.topic_id, d, r.size, r.depth))
                }
                _ if with_downloads => {
                    out.push_str(&format!("{},,{},{}\n", r.topic_id, r.size, r.depth))
                }
                _ => out.push_str(&format!("{},{},{}\n", r.topic_id, r.size, r.depth)),
            }
        }
        match self.mean_downloaded {
            Some(d) => out.push_str(&format!(
                "average,{d:.2},{:.2},{:.2}\n",
                self.mean_size, self.mean_depth
            )),
            None => out.push_str(&format!(
                "average,{:.2},{:.2}\n",
                self.mean_size, self.mean_depth
            )),
        }
        out
    }
}

pub fn pool_stats(pools: &[Pool], manifest: Option<&CrawlManifest>) -> Result<PoolStats> {
    if pools.is_empty() {
        return Err(Error::InsufficientData("no pools".into()));
    }
    let n = pools.len() as f64;
    let rows: Vec<PoolStatsRow> = pools
        .iter()
        .map(|p| PoolStatsRow {
            topic_id: p.topic_id.clone(),
            downloaded: manifest.and_then(|m| m.docs_for(&p.topic_id)).map(|d| d.len()),
            size: p.size(),
            depth: p.depth,
        })
        .collect();
    let mut topics_per_doc: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for p in pools {
        for d in p.docs() {
            topics_per_doc.entry(d).or_default().insert(&p.topic_id);
        }
    }
    let mean_downloaded = manifest.map(|_| {
        rows.iter().filter_map(|r| r.downloaded).sum::<usize>() as f64 / n
    });
    Ok(PoolStats {
        mean_size: rows.iter().map(|r| r.size as f64).sum::<f64>() / n,
        mean_depth: rows.iter().map(|r| r.depth as f64).sum::<f64>() / n,
        mean_downloaded,
        total_size: rows.iter().map(|r| r.size).sum(),
        unique_docs: topics_per_doc.len(),
        duplicates: topics_per_doc
            .into_iter()
            .filter(|(_, t)| t.len() > 1)
            .map(|(d, t)| (d.to_string(), t.len()))
            .collect(),
        rows,
    })
}
