//! Reading collection files from disk.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use trelkit_core::collection::{
    parse_judgments, parse_manifest, parse_pools, parse_run, parse_topics, parse_trel,
};
use trelkit_core::{CrawlManifest, JudgmentSet, Pool, RankedRun, Topic, Trel, Warning};

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn report_warnings(source: &Path, warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning: {}: {w}", source.display());
    }
}

/// Files with the given extension directly inside `dir`, sorted by name.
pub fn files_in(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == extension));
    files.sort();
    Ok(files)
}

/// One run per file; a directory contributes all of its `*.run` files.
pub fn runs(path: &Path) -> Result<Vec<RankedRun>> {
    let files = if path.is_dir() { files_in(path, "run")? } else { vec![path.to_path_buf()] };
    if files.is_empty() {
        bail!("no .run files in {}", path.display());
    }
    let mut runs = Vec::with_capacity(files.len());
    for f in files {
        let parsed = parse_run(&read(&f)?).with_context(|| format!("parsing run {}", f.display()))?;
        report_warnings(&f, &parsed.warnings);
        runs.push(parsed.value);
    }
    let mut tags: Vec<&str> = runs.iter().map(|r| r.system_tag.as_str()).collect();
    tags.sort_unstable();
    if let Some(w) = tags.windows(2).find(|w| w[0] == w[1]) {
        bail!("system tag {} appears in more than one run file", w[0]);
    }
    Ok(runs)
}

pub fn run(path: &Path) -> Result<RankedRun> {
    let parsed = parse_run(&read(path)?).with_context(|| format!("parsing run {}", path.display()))?;
    report_warnings(path, &parsed.warnings);
    Ok(parsed.value)
}

pub fn judgments(path: &Path) -> Result<Vec<JudgmentSet>> {
    parse_judgments(&read(path)?).with_context(|| format!("parsing judgments {}", path.display()))
}

pub fn manifest(path: &Path) -> Result<CrawlManifest> {
    parse_manifest(&read(path)?).with_context(|| format!("parsing manifest {}", path.display()))
}

pub fn pools(path: &Path) -> Result<Vec<Pool>> {
    parse_pools(&read(path)?).with_context(|| format!("parsing pools {}", path.display()))
}

pub fn topics(path: &Path) -> Result<Vec<Topic>> {
    parse_topics(&read(path)?).with_context(|| format!("parsing topics {}", path.display()))
}

pub fn trel(path: &Path) -> Result<Trel> {
    parse_trel(&read(path)?).with_context(|| format!("parsing trel {}", path.display()))
}

/// `from:to:step`, inclusive of `to` when the steps land on it.
pub fn range(spec: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [from, to, step] = parts[..] else {
        bail!("range {spec:?} is not from:to:step");
    };
    let (from, to, step): (usize, usize, usize) = (
        from.trim().parse().with_context(|| format!("range {spec:?}"))?,
        to.trim().parse().with_context(|| format!("range {spec:?}"))?,
        step.trim().parse().with_context(|| format!("range {spec:?}"))?,
    );
    if step == 0 || from > to {
        bail!("range {spec:?} is empty");
    }
    Ok((from..=to).step_by(step).collect())
}
