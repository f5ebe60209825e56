//! Seeded synthetic collections: topics, crawl manifest, pooling and system
//! runs, pools and dual-assessor judgments with a controlled disagreement
//! model.
//!
//! Every stage draws from its own stream derived from the configured seed,
//! so the same configuration always yields byte-identical output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::collection::{
    write_judgments, write_manifest, write_pools, write_run, write_topics, write_trel,
    CrawlManifest, JudgmentSet, Level, Pool, PoolSpec, RankedRun, RelevanceLevel, RunEntry,
    Topic, TopicQrels, Trel, TrelSource,
};
use crate::pooling::{sample_noise_docs, size_k_pool};
use crate::seed::rng_for;
use crate::{Error, Result, Warning};

/// Shape of a synthetic collection. The defaults follow a 20-topic student
/// track: 17 topics judged twice, 2 noise topics, 12 pooling runs and 24
/// systems in 8 quality tiers, pooled to 100 documents with 10 search-engine
/// and 10 noise documents.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureConfig {
    pub seed: u64,
    pub n_topics: usize,
    pub n_dual_topics: usize,
    pub n_noise_topics: usize,
    pub docs_per_topic: usize,
    /// Fraction of a topic's crawl that is also crawled for the next topic.
    pub shared_doc_rate: f64,
    pub n_pooling_runs: usize,
    /// Runs in the same family share part of their ranking noise.
    pub pooling_families: usize,
    /// Per-run displacement noise, in ranks of the consensus ordering.
    pub pooling_run_noise: f64,
    pub pooling_family_noise: f64,
    pub n_systems: usize,
    pub system_tiers: usize,
    /// Quality of the worst and best tier. A system scores a document as
    /// `quality · level + N(0, 1)`.
    pub quality_range: (f64, f64),
    pub run_length: usize,
    /// Documents crawled for other topics that every system run also scores.
    pub foreign_docs_per_run: usize,
    /// Probability that the second assessor replaces the true level with a
    /// uniformly chosen different one.
    pub flip_rate: f64,
    /// Probabilities of levels 0, 1 and 2 among crawled documents.
    pub relevance_prior: [f64; 3],
    /// Probability that a pooled document cannot be rendered; both
    /// assessors then record `-1`.
    pub unjudgeable_rate: f64,
    /// Noise-document judgments forced to level 1.
    pub planted_noise_violations: usize,
    pub pool: PoolSpec,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            seed: 2010,
            n_topics: 20,
            n_dual_topics: 17,
            n_noise_topics: 2,
            docs_per_topic: 450,
            shared_doc_rate: 0.025,
            n_pooling_runs: 12,
            pooling_families: 4,
            pooling_run_noise: 30.0,
            pooling_family_noise: 20.0,
            n_systems: 24,
            system_tiers: 8,
            quality_range: (0.3, 3.0),
            run_length: 100,
            foreign_docs_per_run: 20,
            flip_rate: 0.15,
            relevance_prior: [0.6, 0.25, 0.15],
            unjudgeable_rate: 0.01,
            planted_noise_violations: 0,
            pool: PoolSpec::default(),
        }
    }
}

impl FixtureConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::validation(format!("fixture config: {m}")));
        if self.n_topics == 0 || self.n_pooling_runs == 0 || self.n_systems == 0 {
            return fail("topic, pooling-run and system counts must be at least 1".into());
        }
        if self.docs_per_topic == 0 || self.run_length == 0 || self.pooling_families == 0 {
            return fail("document, run-length and family counts must be at least 1".into());
        }
        if self.n_dual_topics > self.n_topics {
            return fail(format!(
                "{} dual topics but only {} topics",
                self.n_dual_topics, self.n_topics
            ));
        }
        if self.system_tiers == 0 || self.system_tiers > self.n_systems {
            return fail("system tiers must be between 1 and the number of systems".into());
        }
        if !(0.0..=1.0).contains(&self.flip_rate)
            || !(0.0..=1.0).contains(&self.unjudgeable_rate)
            || !(0.0..=1.0).contains(&self.shared_doc_rate)
        {
            return fail("rates must lie in [0, 1]".into());
        }
        let prior_sum: f64 = self.relevance_prior.iter().sum();
        if self.relevance_prior.iter().any(|p| *p < 0.0) || (prior_sum - 1.0).abs() > 1e-9 {
            return fail("relevance prior must be a probability vector".into());
        }
        if self.pooling_run_noise < 0.0 || self.pooling_family_noise < 0.0 {
            return fail("pooling noise must be non-negative".into());
        }
        if self.docs_per_topic < self.pool.search_count
            || self.docs_per_topic + self.pool.noise_count < self.pool.target_size
        {
            return fail(format!(
                "{} documents per topic cannot fill pools of {}",
                self.docs_per_topic, self.pool.target_size
            ));
        }
        if self.pool.noise_count > 0 && self.n_noise_topics * self.docs_per_topic < self.pool.noise_count {
            return fail("not enough noise documents for the requested injections".into());
        }
        let noise_judgments = self.pool.noise_count * (self.n_topics + self.n_dual_topics);
        if self.planted_noise_violations > noise_judgments {
            return fail(format!(
                "{} planted violations exceed the {noise_judgments} noise judgments",
                self.planted_noise_violations
            ));
        }
        Ok(())
    }

    /// Quality of every system, indexed like the generated system runs.
    fn qualities(&self) -> Vec<(String, usize, f64)> {
        let per_tier = self.n_systems.div_ceil(self.system_tiers);
        (0..self.n_systems)
            .map(|i| {
                let tier = (i / per_tier).min(self.system_tiers - 1);
                let (lo, hi) = self.quality_range;
                let q = if self.system_tiers == 1 {
                    hi
                } else {
                    lo + (hi - lo) * tier as f64 / (self.system_tiers - 1) as f64
                };
                (format!("q{:02}-{}", tier + 1, i % per_tier + 1), tier, q)
            })
            .collect()
    }
}

/// A generated collection.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub config: FixtureConfig,
    pub topics: Vec<Topic>,
    pub manifest: CrawlManifest,
    pub pooling_runs: Vec<RankedRun>,
    /// Search-engine ranking of each topic's crawl.
    pub search_run: RankedRun,
    pub system_runs: Vec<RankedRun>,
    /// Tier (0 = worst) and quality per system tag.
    pub system_quality: BTreeMap<String, (usize, f64)>,
    pub search_top: BTreeMap<String, Vec<String>>,
    pub noise_injections: BTreeMap<String, Vec<String>>,
    pub pools: Vec<Pool>,
    pub judgments: Vec<JudgmentSet>,
    /// Latent level of every crawled document of every judged topic.
    pub truth: Trel,
    /// Warnings raised while pooling.
    pub warnings: Vec<Warning>,
}

const WORDS: &[&str] = &[
    "river", "energy", "museum", "protocol", "garden", "satellite", "history", "market",
    "vaccine", "network", "climate", "festival", "library", "engine", "harbor", "language",
    "mineral", "orchestra", "planet", "recipe", "stadium", "theory", "volcano", "weather",
];

fn topic_id(i: usize) -> String {
    format!("{:03}", i + 1)
}

fn pick_words<R: Rng>(rng: &mut R, n: usize) -> Vec<&'static str> {
    (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect()
}

fn ranked(tag: &str, topics: BTreeMap<String, Vec<RunEntry>>) -> Result<RankedRun> {
    RankedRun::new(tag, topics)
}

/// Generates a collection; see [`FixtureConfig`].
pub fn generate_fixture(config: &FixtureConfig) -> Result<Fixture> {
    config.validate()?;
    let seed = config.seed;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    // Topics and the crawl.
    let mut rng = rng_for(seed, "topics");
    let judged: Vec<String> = (0..config.n_topics).map(topic_id).collect();
    let noise: Vec<String> = (config.n_topics..config.n_topics + config.n_noise_topics)
        .map(topic_id)
        .collect();
    let topics: Vec<Topic> = judged
        .iter()
        .map(|id| {
            let words = pick_words(&mut rng, 3);
            Topic {
                id: id.clone(),
                title: format!("{} of the {} {}", words[0], words[1], words[2]),
                relevance_levels: vec![
                    RelevanceLevel {
                        value: 2,
                        description: "The document satisfies the information need.".into(),
                    },
                    RelevanceLevel {
                        value: 1,
                        description: "The document is related but does not satisfy the need.".into(),
                    },
                    RelevanceLevel {
                        value: 0,
                        description: "The document is not related to the topic.".into(),
                    },
                ],
            }
        })
        .collect();

    let mut rng = rng_for(seed, "crawl");
    let mut manifest = CrawlManifest::new();
    let mut next_doc = 0usize;
    let mut fresh = || {
        next_doc += 1;
        format!("d{next_doc:05}")
    };
    let mut own: Vec<Vec<String>> = Vec::new();
    for t in judged.iter().chain(&noise) {
        let docs: Vec<String> = (0..config.docs_per_topic).map(|_| fresh()).collect();
        for d in &docs {
            manifest.add(t, d);
        }
        own.push(docs);
    }
    for t in &noise {
        manifest.mark_noise(t);
    }
    if config.n_topics > 1 {
        let shared = (config.shared_doc_rate * config.docs_per_topic as f64).round() as usize;
        for i in 0..config.n_topics {
            let target = &judged[(i + 1) % config.n_topics];
            for d in own[i].choose_multiple(&mut rng, shared) {
                manifest.add(target, d);
            }
        }
    }

    // Latent truth for every crawled document of every judged topic.
    let mut rng = rng_for(seed, "truth");
    let prior = WeightedIndex::new(config.relevance_prior).map_err(|e| Error::validation(e.to_string()))?;
    let mut truth_levels: BTreeMap<String, BTreeMap<String, Level>> = BTreeMap::new();
    for t in &judged {
        let levels = manifest
            .docs_for(t)
            .into_iter()
            .flatten()
            .map(|d| (d.clone(), Level::new(prior.sample(&mut rng) as i64).expect("level")))
            .collect();
        truth_levels.insert(t.clone(), levels);
    }
    let level_of = |t: &str, d: &str| -> f64 {
        truth_levels[t].get(d).map_or(0.0, |l| l.value() as f64)
    };

    // Pooling runs: noisy copies of a relevance-correlated consensus order.
    let mut rng = rng_for(seed, "pooling-runs");
    let mut pooling: Vec<BTreeMap<String, Vec<RunEntry>>> = vec![BTreeMap::new(); config.n_pooling_runs];
    let run_noise = Normal::new(0.0, config.pooling_run_noise).expect("finite sd");
    let family_noise = Normal::new(0.0, config.pooling_family_noise).expect("finite sd");
    for t in &judged {
        let mut docs: Vec<(String, f64)> = truth_levels[t]
            .iter()
            .map(|(d, l)| (d.clone(), 1.2 * l.value() as f64 + std_normal.sample(&mut rng)))
            .collect();
        docs.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let n = docs.len() as f64;
        let families: Vec<Vec<f64>> = (0..config.pooling_families)
            .map(|_| docs.iter().map(|_| family_noise.sample(&mut rng)).collect())
            .collect();
        for (r, run) in pooling.iter_mut().enumerate() {
            let fam = &families[r % config.pooling_families];
            let entries = docs
                .iter()
                .enumerate()
                .map(|(pos, (d, _))| RunEntry {
                    doc_id: d.clone(),
                    score: n - (pos as f64 + fam[pos] + run_noise.sample(&mut rng)),
                })
                .collect();
            run.insert(t.clone(), entries);
        }
    }
    let pooling_runs: Vec<RankedRun> = pooling
        .into_iter()
        .enumerate()
        .map(|(r, topics)| ranked(&format!("p{:04}", r + 1), topics))
        .collect::<Result<_>>()?;

    // Search engine.
    let mut rng = rng_for(seed, "search");
    let mut search = BTreeMap::new();
    for t in &judged {
        let entries = truth_levels[t]
            .iter()
            .map(|(d, l)| RunEntry {
                doc_id: d.clone(),
                score: 1.5 * l.value() as f64 + std_normal.sample(&mut rng),
            })
            .collect();
        search.insert(t.clone(), entries);
    }
    let search_run = ranked("google", search)?;
    let search_top: BTreeMap<String, Vec<String>> = judged
        .iter()
        .map(|t| {
            let top = search_run
                .topic(t)
                .unwrap_or_default()
                .iter()
                .take(config.pool.search_count)
                .map(|e| e.doc_id.clone())
                .collect();
            (t.clone(), top)
        })
        .collect();

    // Student systems.
    let mut rng = rng_for(seed, "systems");
    let qualities = config.qualities();
    let judged_docs: Vec<&String> = judged.iter().flat_map(|t| own[judged.iter().position(|x| x == t).unwrap()].iter()).collect();
    let mut system_runs = Vec::with_capacity(config.n_systems);
    for (tag, _, q) in &qualities {
        let mut topics_map = BTreeMap::new();
        for t in &judged {
            let crawl = manifest.docs_for(t).expect("judged topic crawled");
            let mut candidates: BTreeSet<&String> = crawl.iter().collect();
            let mut guard = 0;
            while candidates.len() < crawl.len() + config.foreign_docs_per_run
                && guard < 10 * config.foreign_docs_per_run
                && judged_docs.len() > crawl.len()
            {
                guard += 1;
                let d = judged_docs[rng.random_range(0..judged_docs.len())];
                if !crawl.contains(d) {
                    candidates.insert(d);
                }
            }
            let mut entries: Vec<RunEntry> = candidates
                .into_iter()
                .map(|d| RunEntry {
                    doc_id: d.clone(),
                    score: q * level_of(t, d) + std_normal.sample(&mut rng),
                })
                .collect();
            entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));
            entries.truncate(config.run_length);
            topics_map.insert(t.clone(), entries);
        }
        system_runs.push(ranked(tag, topics_map)?);
    }
    let system_quality = qualities.iter().map(|(t, tier, q)| (t.clone(), (*tier, *q))).collect();

    // Pools.
    let mut rng = rng_for(seed, "noise-injection");
    let mut noise_injections = BTreeMap::new();
    let mut pools = Vec::with_capacity(judged.len());
    let mut warnings = Vec::new();
    for t in &judged {
        let noise_docs = if config.pool.noise_count == 0 {
            Vec::new()
        } else {
            sample_noise_docs(&manifest, t, config.pool.noise_count, &mut rng)?
        };
        let built = size_k_pool(
            &pooling_runs,
            t,
            &config.pool,
            &search_top[t],
            &noise_docs,
            Some(&manifest),
        )?;
        warnings.extend(built.warnings);
        pools.push(built.value);
        noise_injections.insert(t.clone(), noise_docs);
    }

    // Judgments.
    let dual: BTreeSet<usize> = spread(config.n_topics, config.n_dual_topics);
    let mut rng = rng_for(seed, "assessors");
    let mut sets: BTreeMap<String, JudgmentSet> = BTreeMap::new();
    let mut noise_cells: Vec<(String, String, String)> = Vec::new();
    for (i, pool) in pools.iter().enumerate() {
        let t = &pool.topic_id;
        let first = format!("s{t}a");
        let second = format!("s{t}b");
        let assessors: Vec<&String> = if dual.contains(&i) { vec![&first, &second] } else { vec![&first] };
        for doc in pool.docs() {
            let is_noise = manifest.is_noise_doc(doc);
            let unjudgeable = rng.random_bool(config.unjudgeable_rate);
            let true_level = truth_levels[t].get(doc).copied().unwrap_or(Level::NONRELEVANT);
            for (a, assessor) in assessors.iter().enumerate() {
                let flip = rng.random_bool(config.flip_rate);
                let other = rng.random_range(1..3);
                let level = if unjudgeable {
                    Level::UNJUDGEABLE
                } else if is_noise {
                    Level::NONRELEVANT
                } else if a == 1 && flip {
                    Level::new(((true_level.value() as i64) + other) % 3).expect("level")
                } else {
                    true_level
                };
                if is_noise && !unjudgeable {
                    noise_cells.push(((*assessor).clone(), t.clone(), doc.to_string()));
                }
                sets.entry((*assessor).clone())
                    .or_insert_with(|| JudgmentSet::new((*assessor).clone()))
                    .insert(t, doc, level)?;
            }
        }
    }
    if config.planted_noise_violations > noise_cells.len() {
        return Err(Error::validation(format!(
            "only {} judgeable noise judgments for {} planted violations",
            noise_cells.len(),
            config.planted_noise_violations
        )));
    }
    let mut rng = rng_for(seed, "violations");
    for (assessor, t, doc) in noise_cells.choose_multiple(&mut rng, config.planted_noise_violations) {
        let set = sets.get_mut(assessor).expect("assessor exists");
        replace_level(set, t, doc, Level::SOMEWHAT)?;
    }

    let mut truth = Trel::new("truth");
    for (t, levels) in &truth_levels {
        truth.insert_topic(
            t,
            TrelSource::Assessor("truth".into()),
            Arc::new(TopicQrels::from_levels(levels.iter().map(|(d, l)| (d.clone(), *l)))),
        );
    }

    Ok(Fixture {
        config: config.clone(),
        topics,
        manifest,
        pooling_runs,
        search_run,
        system_runs,
        system_quality,
        search_top,
        noise_injections,
        pools,
        judgments: sets.into_values().collect(),
        truth,
        warnings,
    })
}

fn replace_level(set: &mut JudgmentSet, topic: &str, doc: &str, level: Level) -> Result<()> {
    let mut rebuilt = JudgmentSet::new(set.assessor_id.clone());
    for j in set.judgments() {
        let l = if j.topic_id == topic && j.doc_id == doc { level } else { j.level };
        rebuilt.insert(&j.topic_id, &j.doc_id, l)?;
    }
    *set = rebuilt;
    Ok(())
}

/// `count` indices out of `0..n`, spread evenly with the excluded ones
/// away from both ends.
fn spread(n: usize, count: usize) -> BTreeSet<usize> {
    let excluded = n - count;
    let skip: BTreeSet<usize> = (1..=excluded).map(|i| i * n / (excluded + 1)).collect();
    (0..n).filter(|i| !skip.contains(i)).collect()
}

impl Fixture {
    /// Deterministic placeholder markup for a document, with the kinds of
    /// clutter a crawled page carries.
    pub fn document_html(&self, doc_id: &str) -> String {
        let mut rng = rng_for(self.config.seed, doc_id);
        let heading = pick_words(&mut rng, 3).join(" ");
        let mut html = String::new();
        let _ = write!(
            html,
            "<!DOCTYPE html>\n<html><head><title>{doc_id} {heading}</title>\
             <style>body {{ color: #336; background: url(bg.png) }}</style>\
             <script>track('{doc_id}');</script></head>\n\
             <body bgcolor=\"#ffeecc\" onload=\"init()\">\n<h1 style=\"color:red\">{heading}</h1>\n"
        );
        for p in 0..3 {
            let words = pick_words(&mut rng, 12).join(" ");
            let _ = writeln!(html, "<p class=\"c{p}\">{words}.</p>");
            if p == 1 {
                let _ = writeln!(
                    html,
                    "<div><img src=\"banner.gif\"><object data=\"movie.swf\"><embed src=\"movie.swf\"></object></div>"
                );
            }
        }
        let items = pick_words(&mut rng, 3);
        let _ = writeln!(
            html,
            "<ul><li>{}</li><li>{}</li><li>{}</li></ul>\n<iframe src=\"ads.html\"></iframe>\n</body></html>",
            items[0], items[1], items[2]
        );
        html
    }

    /// Writes the collection as plain files:
    ///
    /// ```text
    /// topics.xml  manifest.csv  pools.txt  judgments.txt  truth.trel
    /// systems.csv  runs/pooling/*.run  runs/systems/*.run  runs/search.run
    /// docs/<doc_id>.html   (pooled documents only)
    /// ```
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let pooling_dir = dir.join("runs").join("pooling");
        let systems_dir = dir.join("runs").join("systems");
        let docs_dir = dir.join("docs");
        for d in [&pooling_dir, &systems_dir, &docs_dir] {
            std::fs::create_dir_all(d)?;
        }
        std::fs::write(dir.join("topics.xml"), write_topics(&self.topics))?;
        std::fs::write(dir.join("manifest.csv"), write_manifest(&self.manifest))?;
        std::fs::write(dir.join("pools.txt"), write_pools(&self.pools))?;
        std::fs::write(dir.join("judgments.txt"), write_judgments(&self.judgments))?;
        std::fs::write(dir.join("truth.trel"), write_trel(&self.truth))?;
        std::fs::write(dir.join("runs").join("search.run"), write_run(&self.search_run))?;
        for run in &self.pooling_runs {
            std::fs::write(pooling_dir.join(format!("{}.run", run.system_tag)), write_run(run))?;
        }
        for run in &self.system_runs {
            std::fs::write(systems_dir.join(format!("{}.run", run.system_tag)), write_run(run))?;
        }
        let mut systems = String::from("system,tier,quality\n");
        for (tag, (tier, q)) in &self.system_quality {
            let _ = writeln!(systems, "{tag},{},{q}", tier + 1);
        }
        std::fs::write(dir.join("systems.csv"), systems)?;
        let pooled: BTreeSet<&str> = self.pools.iter().flat_map(Pool::docs).collect();
        for doc in pooled {
            std::fs::write(docs_dir.join(format!("{doc}.html")), self.document_html(doc))?;
        }
        Ok(())
    }

    pub fn dual_topics(&self) -> Vec<&str> {
        let counts = self.judgments.iter().flat_map(|s| s.topic_ids()).fold(
            BTreeMap::<&str, usize>::new(),
            |mut m, t| {
                *m.entry(t).or_default() += 1;
                m
            },
        );
        counts.into_iter().filter(|(_, c)| *c == 2).map(|(t, _)| t).collect()
    }
}
