//! Run configuration: a TOML file whose every setting has a default.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use trelkit_core::synth::FixtureConfig;
use trelkit_core::PoolSpec;

pub const DEFAULT_SEED: u64 = 2010;

/// File locations. Unset entries fall back to the standard collection
/// layout under `root`:
///
/// ```text
/// topics.xml  manifest.csv  judgments.txt  pools.txt  docs/
/// runs/systems/*.run  runs/pooling/*.run  runs/search.run
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub root: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub runs: Option<PathBuf>,
    pub pooling_runs: Option<PathBuf>,
    pub search_run: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub judgments: Option<PathBuf>,
    pub pools: Option<PathBuf>,
    pub docs: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Input {
    Topics,
    Runs,
    PoolingRuns,
    SearchRun,
    Manifest,
    Judgments,
    Pools,
    Docs,
}

impl Input {
    pub fn flag(self) -> &'static str {
        match self {
            Input::Topics => "--topics",
            Input::Runs => "--runs",
            Input::PoolingRuns => "--pooling-runs",
            Input::SearchRun => "--search-run",
            Input::Manifest => "--manifest",
            Input::Judgments => "--judgments",
            Input::Pools => "--pools",
            Input::Docs => "--docs",
        }
    }

    fn standard(self) -> &'static str {
        match self {
            Input::Topics => "topics.xml",
            Input::Runs => "runs/systems",
            Input::PoolingRuns => "runs/pooling",
            Input::SearchRun => "runs/search.run",
            Input::Manifest => "manifest.csv",
            Input::Judgments => "judgments.txt",
            Input::Pools => "pools.txt",
            Input::Docs => "docs",
        }
    }
}

impl Paths {
    fn configured(&self, input: Input) -> Option<&PathBuf> {
        match input {
            Input::Topics => self.topics.as_ref(),
            Input::Runs => self.runs.as_ref(),
            Input::PoolingRuns => self.pooling_runs.as_ref(),
            Input::SearchRun => self.search_run.as_ref(),
            Input::Manifest => self.manifest.as_ref(),
            Input::Judgments => self.judgments.as_ref(),
            Input::Pools => self.pools.as_ref(),
            Input::Docs => self.docs.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoolSection {
    pub k: usize,
    pub search: usize,
    pub noise: usize,
}

impl Default for PoolSection {
    fn default() -> Self {
        Self { k: 100, search: 10, noise: 10 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthSection {
    pub from: usize,
    pub to: usize,
    pub step: usize,
}

impl Default for GrowthSection {
    fn default() -> Self {
        Self { from: 20, to: 100, step: 5 }
    }
}

impl GrowthSection {
    pub fn sizes(&self) -> Result<Vec<usize>> {
        if self.step == 0 || self.from > self.to {
            bail!("growth sizes {}..{} step {} are empty", self.from, self.to, self.step);
        }
        Ok((self.from..=self.to).step_by(self.step).collect())
    }
}

/// Overrides for the synthetic collection; unset fields keep the defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSection {
    pub n_topics: Option<usize>,
    pub n_dual_topics: Option<usize>,
    pub n_noise_topics: Option<usize>,
    pub docs_per_topic: Option<usize>,
    pub shared_doc_rate: Option<f64>,
    pub n_pooling_runs: Option<usize>,
    pub pooling_families: Option<usize>,
    pub pooling_run_noise: Option<f64>,
    pub pooling_family_noise: Option<f64>,
    pub n_systems: Option<usize>,
    pub system_tiers: Option<usize>,
    pub quality_range: Option<(f64, f64)>,
    pub run_length: Option<usize>,
    pub foreign_docs_per_run: Option<usize>,
    pub flip_rate: Option<f64>,
    pub relevance_prior: Option<[f64; 3]>,
    pub unjudgeable_rate: Option<f64>,
    pub planted_noise_violations: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub paths: Paths,
    pub measures: Vec<String>,
    pub trel_sample: usize,
    pub tau_pairs: usize,
    pub alpha: f64,
    pub tau_threshold: f64,
    pub orientation_draws: usize,
    /// "unweighted" or "linear".
    pub kappa_weighting: String,
    pub qc_threshold: f64,
    pub pool: PoolSection,
    pub growth: GrowthSection,
    pub fixture: FixtureSection,
    /// Judging-service settings, as accepted by `serve`.
    pub service: Option<toml::Table>,
    #[serde(skip)]
    pub base: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            jobs: None,
            paths: Paths::default(),
            measures: vec!["ndcg@100".into(), "ap@100".into(), "p@10".into(), "rr".into()],
            trel_sample: 1000,
            tau_pairs: 5000,
            alpha: 0.05,
            tau_threshold: 0.9,
            orientation_draws: 1000,
            kappa_weighting: "unweighted".into(),
            qc_threshold: 0.10,
            pool: PoolSection::default(),
            growth: GrowthSection::default(),
            fixture: FixtureSection::default(),
            service: None,
            base: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut c: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        c.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_relative() {
            self.base.join(p)
        } else {
            p.to_path_buf()
        }
    }

    /// Explicit flag, then configured path, then the standard layout under
    /// the collection root.
    pub fn input(&self, flag: Option<&PathBuf>, input: Input, root: Option<&PathBuf>) -> Result<PathBuf> {
        let path = if let Some(p) = flag {
            p.clone()
        } else if let Some(p) = self.paths.configured(input) {
            self.resolve(p)
        } else if let Some(r) = root {
            r.join(input.standard())
        } else if let Some(r) = &self.paths.root {
            self.resolve(r).join(input.standard())
        } else {
            bail!("missing input: pass {} or --input, or set paths in the config", input.flag());
        };
        if !path.exists() {
            bail!("{} {}: no such file or directory", input.flag(), path.display());
        }
        Ok(path)
    }

    /// Like [`input`](Self::input) but `None` when nothing is configured or
    /// the standard file is absent.
    pub fn optional_input(&self, flag: Option<&PathBuf>, input: Input, root: Option<&PathBuf>) -> Result<Option<PathBuf>> {
        if flag.is_some() || self.paths.configured(input).is_some() {
            return self.input(flag, input, root).map(Some);
        }
        Ok(self.input(None, input, root).ok())
    }

    pub fn output(&self, flag: Option<&PathBuf>) -> PathBuf {
        match (flag, &self.paths.output) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => self.resolve(p),
            (None, None) => PathBuf::from("trelkit-out"),
        }
    }

    pub fn pool_spec(&self) -> Result<PoolSpec> {
        Ok(PoolSpec::new(self.pool.k, self.pool.search, self.pool.noise)?)
    }

    pub fn fixture(&self, seed: u64) -> Result<FixtureConfig> {
        let f = &self.fixture;
        let d = FixtureConfig::default();
        Ok(FixtureConfig {
            seed,
            n_topics: f.n_topics.unwrap_or(d.n_topics),
            n_dual_topics: f.n_dual_topics.unwrap_or(d.n_dual_topics),
            n_noise_topics: f.n_noise_topics.unwrap_or(d.n_noise_topics),
            docs_per_topic: f.docs_per_topic.unwrap_or(d.docs_per_topic),
            shared_doc_rate: f.shared_doc_rate.unwrap_or(d.shared_doc_rate),
            n_pooling_runs: f.n_pooling_runs.unwrap_or(d.n_pooling_runs),
            pooling_families: f.pooling_families.unwrap_or(d.pooling_families),
            pooling_run_noise: f.pooling_run_noise.unwrap_or(d.pooling_run_noise),
            pooling_family_noise: f.pooling_family_noise.unwrap_or(d.pooling_family_noise),
            n_systems: f.n_systems.unwrap_or(d.n_systems),
            system_tiers: f.system_tiers.unwrap_or(d.system_tiers),
            quality_range: f.quality_range.unwrap_or(d.quality_range),
            run_length: f.run_length.unwrap_or(d.run_length),
            foreign_docs_per_run: f.foreign_docs_per_run.unwrap_or(d.foreign_docs_per_run),
            flip_rate: f.flip_rate.unwrap_or(d.flip_rate),
            relevance_prior: f.relevance_prior.unwrap_or(d.relevance_prior),
            unjudgeable_rate: f.unjudgeable_rate.unwrap_or(d.unjudgeable_rate),
            planted_noise_violations: f.planted_noise_violations.unwrap_or(d.planted_noise_violations),
            pool: self.pool_spec()?,
        })
    }

    pub fn service(&self) -> Result<Option<trelkit_judging::ServiceConfig>> {
        let Some(table) = &self.service else { return Ok(None) };
        let text = toml::to_string(table)?;
        Ok(Some(trelkit_judging::ServiceConfig::from_toml(&text, &self.base)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_track_settings() {
        let c = RunConfig::default();
        assert_eq!((c.trel_sample, c.tau_pairs, c.alpha), (1000, 5000, 0.05));
        assert_eq!((c.pool.k, c.pool.search, c.pool.noise), (100, 10, 10));
        assert_eq!(c.growth.sizes().unwrap().len(), 17);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("trel_sampel = 3").is_err());
        let c: RunConfig = toml::from_str("[pool]\nk = 50\n[fixture]\nflip_rate = 0.2").unwrap();
        assert_eq!(c.pool.k, 50);
        assert_eq!(c.fixture(1).unwrap().flip_rate, 0.2);
    }
}
