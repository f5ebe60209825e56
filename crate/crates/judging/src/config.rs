use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::qc::DEFAULT_QC_THRESHOLD;
use crate::{Error, Result};

/// Service settings, read from a TOML file. Relative paths are resolved
/// against the file's directory.
///
/// ```toml
/// listen = "127.0.0.1:8080"
/// data_dir = "judging-data"
/// documents_dir = "docs"
/// manifest = "manifest.csv"
/// topics = "topics.xml"
/// ui_dir = "ui/dist"
/// shuffle_seed = 2010
/// qc_threshold = 0.1
/// assessor_token = "classroom"
/// operator_token = "teacher"
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    pub data_dir: PathBuf,
    /// Raw pages, one `<doc_id>.html` file per document.
    pub documents_dir: Option<PathBuf>,
    /// Needed by the noise QC report.
    pub manifest: Option<PathBuf>,
    /// Topic titles and level descriptions shown to assessors.
    pub topics: Option<PathBuf>,
    /// Static files served under `/`.
    pub ui_dir: Option<PathBuf>,
    #[serde(default)]
    pub shuffle_seed: u64,
    #[serde(default = "default_threshold")]
    pub qc_threshold: f64,
    pub assessor_token: Option<String>,
    pub operator_token: Option<String>,
    /// Log records between snapshots; 0 disables automatic compaction.
    #[serde(default = "default_compact_every")]
    pub compact_every: usize,
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_threshold() -> f64 {
    DEFAULT_QC_THRESHOLD
}

fn default_compact_every() -> usize {
    1000
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            listen: default_listen(),
            data_dir: data_dir.into(),
            documents_dir: None,
            manifest: None,
            topics: None,
            ui_dir: None,
            shuffle_seed: 0,
            qc_threshold: DEFAULT_QC_THRESHOLD,
            assessor_token: None,
            operator_token: None,
            compact_every: default_compact_every(),
        }
    }

    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut c: ServiceConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut c.data_dir);
        for p in [&mut c.documents_dir, &mut c.manifest, &mut c.topics, &mut c.ui_dir]
            .into_iter()
            .flatten()
        {
            resolve(p);
        }
        if !(0.0..=1.0).contains(&c.qc_threshold) {
            return Err(Error::Config(format!("qc_threshold {} outside [0, 1]", c.qc_threshold)));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }
}
