use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use trelkit_core::collection::{write_pools, write_trel};
use trelkit_core::incompleteness::growth_report;
use trelkit_core::pooling::{pool_growth_series, pool_stats, sample_noise_docs, size_k_pool, GrowthSeries};
use trelkit_core::reliability::{
    agreement_table, distribution_plot, differences_csv, largest_differences_from_means, ranking_swaps,
    score_summary_csv, tau_csv, tau_distribution, KappaWeighting, SwapReport, TauSample,
};
use trelkit_core::seed::rng_for;
use trelkit_core::synth::generate_fixture;
use trelkit_core::trels::{
    intersection_trel, sample_trels, trel_pair_trels, trel_pairs, trel_space, union_trel, TrelSpace,
};
use trelkit_core::eval::TrelMeans;
use trelkit_core::{CrawlManifest, Evaluator, JudgmentSet, MeasureKind, Pool, PoolSpec, Provenance, RankedRun, Trel};
use trelkit_judging::ServiceConfig;

use crate::args::*;
use crate::config::{Input, RunConfig};
use crate::load;

pub struct Ctx {
    pub cfg: RunConfig,
    pub seed: u64,
    pub output: PathBuf,
    pub root: Option<PathBuf>,
}

impl Ctx {
    fn path(&self, flag: Option<&PathBuf>, input: Input) -> Result<PathBuf> {
        self.cfg.input(flag, input, self.root.as_ref())
    }

    fn optional(&self, flag: Option<&PathBuf>, input: Input) -> Result<Option<PathBuf>> {
        self.cfg.optional_input(flag, input, self.root.as_ref())
    }

    fn manifest(&self, flag: &ManifestArg) -> Result<Option<CrawlManifest>> {
        self.optional(flag.manifest.as_ref(), Input::Manifest)?
            .map(|p| load::manifest(&p))
            .transpose()
    }

    fn judgments(&self, flag: &JudgmentsArg) -> Result<Vec<JudgmentSet>> {
        load::judgments(&self.path(flag.judgments.as_ref(), Input::Judgments)?)
    }

    fn runs(&self, flag: &RunsArg) -> Result<Vec<RankedRun>> {
        load::runs(&self.path(flag.runs.as_ref(), Input::Runs)?)
    }

    fn measures(&self, flag: &MeasureArg) -> Result<Vec<MeasureKind>> {
        let names = if flag.measures.is_empty() { &self.cfg.measures } else { &flag.measures };
        if names.is_empty() {
            bail!("no measures selected");
        }
        let mut out: Vec<MeasureKind> = Vec::new();
        for n in names {
            let m: MeasureKind = n.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }

    fn sizes(&self, flag: Option<&String>) -> Result<Vec<usize>> {
        match flag {
            Some(s) => load::range(s),
            None => self.cfg.growth.sizes(),
        }
    }

    pub fn write(&self, name: &str, content: &str) -> Result<PathBuf> {
        let path = self.output.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(path)
    }
}

fn evaluator<'a>(runs: &'a [RankedRun], manifest: Option<&'a CrawlManifest>, measures: &[MeasureKind]) -> Result<Evaluator<'a>> {
    let ev = Evaluator::new(runs)?;
    match manifest {
        Some(m) => Ok(ev.with_manifest(m)),
        None => {
            if let Some(m) = measures.iter().find(|m| m.needs_manifest()) {
                bail!("{m} needs a crawl manifest (--manifest)");
            }
            Ok(ev)
        }
    }
}

/// File-name form of a measure: `NDCG@100` becomes `ndcg100`.
pub fn slug(m: MeasureKind) -> String {
    m.to_string().to_ascii_lowercase().replace('@', "")
}

fn weighting(flag: Option<Weighting>, cfg: &RunConfig) -> Result<KappaWeighting> {
    Ok(match flag {
        Some(Weighting::Unweighted) => KappaWeighting::Unweighted,
        Some(Weighting::Linear) => KappaWeighting::Linear,
        None => match cfg.kappa_weighting.as_str() {
            "unweighted" => KappaWeighting::Unweighted,
            "linear" => KappaWeighting::Linear,
            other => bail!("kappa_weighting {other:?}: expected \"unweighted\" or \"linear\""),
        },
    })
}

pub fn synth(ctx: &Ctx) -> Result<()> {
    let config = ctx.cfg.fixture(ctx.seed)?;
    let fixture = generate_fixture(&config)?;
    for w in &fixture.warnings {
        eprintln!("warning: {w}");
    }
    fixture.write_to(&ctx.output).with_context(|| format!("writing collection to {}", ctx.output.display()))?;
    println!(
        "synthetic collection: {} topics ({} judged twice), {} pooling runs, {} systems, {} judgments -> {}",
        fixture.topics.len(),
        fixture.dual_topics().len(),
        fixture.pooling_runs.len(),
        fixture.system_runs.len(),
        fixture.judgments.iter().map(JudgmentSet::len).sum::<usize>(),
        ctx.output.display()
    );
    Ok(())
}

pub fn pool_make(ctx: &Ctx, a: &PoolMakeArgs) -> Result<()> {
    let pooling = load::runs(&ctx.path(a.pooling_runs.as_ref(), Input::PoolingRuns)?)?;
    let spec = PoolSpec::new(
        a.k.unwrap_or(ctx.cfg.pool.k),
        a.search.unwrap_or(ctx.cfg.pool.search),
        a.noise.unwrap_or(ctx.cfg.pool.noise),
    )?;
    let search = if spec.search_count > 0 {
        Some(load::run(&ctx.path(a.search_run.as_ref(), Input::SearchRun)?)?)
    } else {
        None
    };
    let manifest = ctx.manifest(&a.manifest)?;
    if spec.noise_count > 0 && manifest.is_none() {
        bail!("noise injection needs a crawl manifest (--manifest), or pass --noise 0");
    }
    let topics: Vec<String> = match ctx.optional(a.topics.as_ref(), Input::Topics)? {
        Some(p) => load::topics(&p)?.into_iter().map(|t| t.id).collect(),
        None => {
            let mut ids: Vec<String> = pooling
                .iter()
                .chain(&search)
                .flat_map(|r| r.topic_ids().map(str::to_string))
                .collect();
            ids.sort();
            ids.dedup();
            ids
        }
    };
    let topics: Vec<String> = match &manifest {
        Some(m) => topics.into_iter().filter(|t| !m.is_noise_topic(t)).collect(),
        None => topics,
    };
    let mut rng = rng_for(ctx.seed, "noise-injection");
    let mut pools = Vec::with_capacity(topics.len());
    for t in &topics {
        let search_top: Vec<String> = search
            .as_ref()
            .and_then(|s| s.topic(t))
            .unwrap_or_default()
            .iter()
            .take(spec.search_count)
            .map(|e| e.doc_id.clone())
            .collect();
        let noise = match &manifest {
            Some(m) if spec.noise_count > 0 => sample_noise_docs(m, t, spec.noise_count, &mut rng)?,
            _ => Vec::new(),
        };
        let built = size_k_pool(&pooling, t, &spec, &search_top, &noise, manifest.as_ref())?;
        for w in &built.warnings {
            eprintln!("warning: {w}");
        }
        pools.push(built.value);
    }
    ctx.write("pools.txt", &write_pools(&pools))?;
    ctx.write("pool_stats.csv", &pool_stats(&pools, manifest.as_ref())?.to_csv())?;
    Ok(())
}

/// The injected documents of a pool: search results in rank order, then
/// noise documents.
fn injections(pool: &Pool) -> (Vec<String>, Vec<String>) {
    let mut search: Vec<(usize, &str)> = Vec::new();
    let mut noise = Vec::new();
    for (doc, p) in pool.entries() {
        match p {
            Provenance::SearchEngine { rank } => search.push((*rank, doc)),
            Provenance::Noise => noise.push(doc.clone()),
            Provenance::PoolingRun { .. } => {}
        }
    }
    search.sort();
    (search.into_iter().map(|(_, d)| d.to_string()).collect(), noise)
}

fn growth_series(
    pooling: &[RankedRun],
    pools: &[Pool],
    sizes: &[usize],
    manifest: Option<&CrawlManifest>,
) -> Result<Vec<GrowthSeries>> {
    pools
        .iter()
        .map(|p| {
            let (search, noise) = injections(p);
            let built = pool_growth_series(pooling, &p.topic_id, sizes, &search, &noise, manifest)?;
            for w in &built.warnings {
                eprintln!("warning: {w}");
            }
            Ok(built.value)
        })
        .collect()
}

pub fn pool_growth(ctx: &Ctx, a: &PoolGrowthArgs) -> Result<()> {
    let pooling = load::runs(&ctx.path(a.pooling_runs.as_ref(), Input::PoolingRuns)?)?;
    let pools = load::pools(&ctx.path(a.pools.as_ref(), Input::Pools)?)?;
    let manifest = ctx.manifest(&a.manifest)?;
    let sizes = ctx.sizes(a.sizes.as_ref())?;
    let series = growth_series(&pooling, &pools, &sizes, manifest.as_ref())?;
    let mut summary = String::from("topic,target,size,depth\n");
    for s in &series {
        for (target, p) in s.targets.iter().zip(&s.pools) {
            let _ = writeln!(summary, "{},{target},{},{}", s.topic_id, p.size(), p.depth);
        }
    }
    for (i, size) in sizes.iter().enumerate() {
        let level: Vec<Pool> = series.iter().map(|s| s.pools[i].clone()).collect();
        ctx.write(&format!("growth_pools/pools-{size:03}.txt"), &write_pools(&level))?;
    }
    ctx.write("growth_pools.csv", &summary)?;
    Ok(())
}

fn sampled(ctx: &Ctx, space: &TrelSpace, n: Option<usize>) -> Result<Vec<Trel>> {
    let n = n.unwrap_or(ctx.cfg.trel_sample);
    let total = space.total_combinations();
    if n as u64 > total {
        bail!("{n} trels requested but the judgments only allow {total} assessor combinations");
    }
    Ok(sample_trels(space, n, ctx.seed)?)
}

fn score_summary(ctx: &Ctx, ev: &Evaluator<'_>, measures: &[MeasureKind], trels: &[Trel]) -> Result<Vec<TrelMeans>> {
    let tables: Vec<TrelMeans> = measures
        .iter()
        .map(|&m| ev.means_over_trels(m, trels))
        .collect::<trelkit_core::Result<_>>()?;
    ctx.write("score_summary.csv", &score_summary_csv(&tables)?)?;
    Ok(tables)
}

fn curve(ctx: &Ctx, ev: &Evaluator<'_>, kind: Curve, cutoffs: &[usize], trel: &Trel) -> Result<()> {
    let (name, text) = match kind {
        Curve::Recall => ("curve_recall.txt", ev.cutoff_curve(MeasureKind::Recall, cutoffs, trel)?),
        Curve::Crawl => ("curve_crawl.txt", ev.cutoff_curve(MeasureKind::Crawl, cutoffs, trel)?),
    };
    ctx.write(name, &text)?;
    Ok(())
}

pub fn eval(ctx: &Ctx, a: &EvalArgs) -> Result<()> {
    let runs = ctx.runs(&a.runs)?;
    let measures = ctx.measures(&a.measure)?;
    let needs_manifest = matches!(a.curve, Some(Curve::Crawl));
    let manifest = ctx.manifest(&a.manifest)?;
    if needs_manifest && manifest.is_none() {
        bail!("the crawl curve needs a crawl manifest (--manifest)");
    }
    let ev = evaluator(&runs, manifest.as_ref(), &measures)?;
    let trel = if let Some(path) = &a.trel {
        let trel = load::trel(path)?;
        for &m in &measures {
            let matrix = ev.score_matrix(m, &trel)?;
            for w in &matrix.warnings {
                eprintln!("warning: {w}");
            }
            ctx.write(&format!("scores_{}.csv", slug(m)), &matrix.value.to_csv()?)?;
        }
        trel
    } else {
        let sets = ctx.judgments(&a.judgments)?;
        let space = trel_space(&sets)?;
        let trels = sampled(ctx, &space, a.trels)?;
        score_summary(ctx, &ev, &measures, &trels)?;
        union_trel(&sets)?
    };
    if let Some(kind) = a.curve {
        curve(ctx, &ev, kind, &load::range(&a.cutoffs)?, &trel)?;
    }
    Ok(())
}

pub fn trel(ctx: &Ctx, c: &TrelCommand) -> Result<()> {
    match c {
        TrelCommand::Sample(a) => {
            let sets = ctx.judgments(&a.judgments)?;
            let space = trel_space(&sets)?;
            let trels = sampled(ctx, &space, a.count)?;
            let dir = ctx.output.join("trels");
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            for t in &trels {
                let path = dir.join(format!("{}.trel", t.name));
                std::fs::write(&path, write_trel(t)).with_context(|| format!("writing {}", path.display()))?;
            }
            println!("wrote {} trels to {} ({} combinations possible)", trels.len(), dir.display(), space.total_combinations());
        }
        TrelCommand::Union(j) => {
            ctx.write("union.trel", &write_trel(&union_trel(&ctx.judgments(j)?)?))?;
        }
        TrelCommand::Intersect(j) => {
            ctx.write("intersection.trel", &write_trel(&intersection_trel(&ctx.judgments(j)?)?))?;
        }
    }
    Ok(())
}

fn agreement(ctx: &Ctx, sets: &[JudgmentSet], w: KappaWeighting, draws: usize) -> Result<()> {
    let table = agreement_table(sets, w)?;
    ctx.write("agreement.csv", &table.to_csv())?;
    let orientation = table.orientation_sample(draws, ctx.seed)?;
    ctx.write("orientation.csv", &orientation.to_csv())?;
    let avg = table.averages;
    println!(
        "{} topics: kappa {:.3}, overlap {:.3}, precision {:.3}, recall {:.3}",
        table.records.len(),
        avg.kappa,
        avg.overlap,
        avg.precision,
        avg.recall
    );
    println!(
        "over {draws} random orientations: precision {:.3} (sd {:.3}), recall {:.3} (sd {:.3})",
        orientation.precision.mean, orientation.precision.sd, orientation.recall.mean, orientation.recall.sd
    );
    Ok(())
}

pub fn agree(ctx: &Ctx, a: &AgreeArgs) -> Result<()> {
    let sets = ctx.judgments(&a.judgments)?;
    agreement(ctx, &sets, weighting(a.weighting, &ctx.cfg)?, a.draws.unwrap_or(ctx.cfg.orientation_draws))
}

/// Per-measure distribution plots and the largest-differences table.
fn score_stability(ctx: &Ctx, ev: &Evaluator<'_>, tables: &[TrelMeans], union: &Trel, inter: &Trel) -> Result<()> {
    let by_tag: BTreeMap<&str, &RankedRun> = ev.runs().iter().map(|r| (r.system_tag.as_str(), r)).collect();
    let mut rows = Vec::with_capacity(tables.len());
    for table in tables {
        ctx.write(&format!("plot_scores_{}.txt", slug(table.measure)), &distribution_plot(table)?)?;
        let ui: Vec<(f64, f64)> = table
            .systems
            .iter()
            .map(|s| {
                let run = by_tag[s.as_str()];
                Ok((ev.system_mean(run, table.measure, union)?, ev.system_mean(run, table.measure, inter)?))
            })
            .collect::<trelkit_core::Result<_>>()?;
        rows.push(largest_differences_from_means(table, Some(&ui))?);
    }
    ctx.write("differences.csv", &differences_csv(&rows))?;
    Ok(())
}

pub fn stability_scores(ctx: &Ctx, a: &StabilityArgs) -> Result<()> {
    let runs = ctx.runs(&a.runs)?;
    let measures = ctx.measures(&a.measure)?;
    let manifest = ctx.manifest(&a.manifest)?;
    let ev = evaluator(&runs, manifest.as_ref(), &measures)?;
    let sets = ctx.judgments(&a.judgments)?;
    let space = trel_space(&sets)?;
    let trels = sampled(ctx, &space, a.trels)?;
    let tables = score_summary(ctx, &ev, &measures, &trels)?;
    score_stability(ctx, &ev, &tables, &union_trel(&sets)?, &intersection_trel(&sets)?)
}

fn pair_reports(
    ctx: &Ctx,
    ev: &Evaluator<'_>,
    measures: &[MeasureKind],
    space: &TrelSpace,
    n_pairs: usize,
    alpha: f64,
    with_tau: bool,
) -> Result<Vec<(Option<TauSample>, SwapReport)>> {
    let pairs = trel_pair_trels(space, &trel_pairs(space, n_pairs, ctx.seed)?);
    measures
        .iter()
        .map(|&m| {
            let tau = if with_tau { Some(tau_distribution(ev, m, &pairs)?) } else { None };
            Ok((tau, ranking_swaps(ev, m, &pairs, alpha)?))
        })
        .collect()
}

fn swaps_csv(reports: &[SwapReport]) -> String {
    let mut out = String::from("measure,trel_pairs,swaps,significant,alpha\n");
    for r in reports {
        let _ = writeln!(out, "{},{},{},{},{}", r.measure, r.trel_pairs, r.swaps, r.significant, r.alpha);
    }
    out
}

fn write_pair_reports(ctx: &Ctx, reports: Vec<(Option<TauSample>, SwapReport)>) -> Result<()> {
    let swaps: Vec<SwapReport> = reports.iter().map(|r| r.1).collect();
    let taus: Vec<(TauSample, SwapReport)> = reports.into_iter().filter_map(|(t, s)| t.map(|t| (t, s))).collect();
    if !taus.is_empty() {
        ctx.write("tau.csv", &tau_csv(&taus, ctx.cfg.tau_threshold))?;
        for (t, s) in &taus {
            println!(
                "{}: tau mean {:.4} (sd {:.4}), {:.1}% above {}, {} swaps, {} significant",
                s.measure,
                t.summary.mean,
                t.summary.sd,
                100.0 * t.fraction_above(ctx.cfg.tau_threshold),
                ctx.cfg.tau_threshold,
                s.swaps,
                s.significant
            );
        }
    }
    ctx.write("swaps.csv", &swaps_csv(&swaps))?;
    Ok(())
}

fn stability_pairs(ctx: &Ctx, a: &TauArgs, with_tau: bool) -> Result<()> {
    let runs = ctx.runs(&a.runs)?;
    let measures = ctx.measures(&a.measure)?;
    let manifest = ctx.manifest(&a.manifest)?;
    let ev = evaluator(&runs, manifest.as_ref(), &measures)?;
    let sets = ctx.judgments(&a.judgments)?;
    let space = trel_space(&sets)?;
    let reports = pair_reports(
        ctx,
        &ev,
        &measures,
        &space,
        a.pairs.unwrap_or(ctx.cfg.tau_pairs),
        a.alpha.unwrap_or(ctx.cfg.alpha),
        with_tau,
    )?;
    write_pair_reports(ctx, reports)
}

pub fn stability(ctx: &Ctx, c: &StabilityCommand) -> Result<()> {
    match c {
        StabilityCommand::Scores(a) => stability_scores(ctx, a),
        StabilityCommand::Tau(a) => stability_pairs(ctx, a, true),
        StabilityCommand::Swaps(a) => stability_pairs(ctx, a, false),
    }
}

fn growth(ctx: &Ctx, ev: &Evaluator<'_>, measures: &[MeasureKind], series: &[GrowthSeries], trels: &[Trel]) -> Result<()> {
    let report = growth_report(ev, measures, series, trels)?;
    ctx.write("growth.csv", &report.to_csv())?;
    for &m in measures {
        if let Some(plot) = report.plot(m) {
            ctx.write(&format!("plot_growth_{}.txt", slug(m)), &plot)?;
        }
        if report.steps() > 0 {
            let first = report.mean_increment(m, 0);
            let last = report.mean_increment(m, report.steps() - 1);
            if let (Some(f), Some(l)) = (first, last) {
                println!("{m}: mean increment {f:.2}% at the first step, {l:.2}% at the last");
            }
        }
    }
    Ok(())
}

pub fn incomplete(ctx: &Ctx, a: &IncompleteArgs) -> Result<()> {
    let runs = ctx.runs(&a.runs)?;
    let measures = ctx.measures(&a.measure)?;
    let manifest = ctx.manifest(&a.manifest)?;
    let ev = evaluator(&runs, manifest.as_ref(), &measures)?;
    let pooling = load::runs(&ctx.path(a.pooling_runs.as_ref(), Input::PoolingRuns)?)?;
    let pools = load::pools(&ctx.path(a.pools.as_ref(), Input::Pools)?)?;
    let series = growth_series(&pooling, &pools, &ctx.sizes(a.sizes.as_ref())?, manifest.as_ref())?;
    let sets = ctx.judgments(&a.judgments)?;
    let trels = sampled(ctx, &trel_space(&sets)?, a.trels)?;
    growth(ctx, &ev, &measures, &series, &trels)
}

fn noise_qc(ctx: &Ctx, sets: &[JudgmentSet], manifest: &CrawlManifest, threshold: f64) -> Result<()> {
    let report = trelkit_judging::noise_qc(sets, manifest, threshold);
    ctx.write("qc.csv", &report.to_csv())?;
    println!(
        "noise qc: {} noise judgments, {} violations ({:.1}%), threshold {:.0}%",
        report.noise_judged,
        report.violations,
        100.0 * report.rate(),
        100.0 * threshold
    );
    for a in report.flagged() {
        println!("flagged: {} ({} of {} noise documents judged relevant)", a.assessor_id, a.violations, a.noise_judged);
    }
    Ok(())
}

pub fn qc(ctx: &Ctx, c: &QcCommand) -> Result<()> {
    let QcCommand::Noise(a) = c;
    let sets = ctx.judgments(&a.judgments)?;
    let manifest = ctx
        .manifest(&a.manifest)?
        .ok_or_else(|| anyhow!("noise qc needs a crawl manifest (--manifest)"))?;
    noise_qc(ctx, &sets, &manifest, a.threshold.unwrap_or(ctx.cfg.qc_threshold))
}

pub fn clean(ctx: &Ctx, a: &CleanArgs) -> Result<()> {
    let mut files = Vec::new();
    for p in &a.paths {
        if p.is_dir() {
            let mut found = load::files_in(p, "html")?;
            found.extend(load::files_in(p, "htm")?);
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    files.sort();
    let mut report = String::from("doc_id,title,bytes,lossy\n");
    let dir = ctx.output.join("clean");
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for f in &files {
        let doc_id = f
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| anyhow!("{}: file name is not a document id", f.display()))?;
        let raw = std::fs::read(f).with_context(|| format!("reading {}", f.display()))?;
        let doc = trelkit_judging::clean_document(doc_id, &raw);
        if doc.lossy {
            eprintln!("warning: {}: not valid UTF-8, invalid bytes replaced", f.display());
        }
        let title = doc.title.replace(['"', '\n'], " ");
        let _ = writeln!(report, "{},\"{title}\",{},{}", doc.doc_id, doc.byte_size, doc.lossy);
        std::fs::write(dir.join(format!("{doc_id}.html")), &doc.body)?;
    }
    println!("cleaned {} documents into {}", files.len(), dir.display());
    ctx.write("clean_report.csv", &report)?;
    Ok(())
}

pub fn serve(ctx: &Ctx, a: &ServeArgs) -> Result<()> {
    let mut config = if let Some(p) = &a.service_config {
        ServiceConfig::load(p)?
    } else if let Some(c) = ctx.cfg.service()? {
        c
    } else if let Some(d) = &a.data_dir {
        let mut c = ServiceConfig::new(d);
        c.documents_dir = ctx.optional(None, Input::Docs)?;
        c.manifest = ctx.optional(None, Input::Manifest)?;
        c.topics = ctx.optional(None, Input::Topics)?;
        c
    } else {
        bail!("serve needs --service-config, a [service] table in --config, or --data-dir");
    };
    if let Some(l) = &a.listen {
        config.listen = l.clone();
    }
    if let Some(d) = &a.data_dir {
        config.data_dir = d.clone();
    }
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(trelkit_judging::http::serve(&config))?;
    Ok(())
}

fn step(name: &str, start: Instant) {
    println!("-- {name} done in {:.1?}", start.elapsed());
}

pub fn pipeline(ctx: &mut Ctx, a: &PipelineArgs) -> Result<()> {
    let total = Instant::now();
    if a.synth || (ctx.root.is_none() && ctx.cfg.paths.root.is_none() && ctx.cfg.paths.judgments.is_none()) {
        let dir = ctx.output.join("collection");
        let sub = Ctx { cfg: ctx.cfg.clone(), seed: ctx.seed, output: dir.clone(), root: None };
        synth(&sub)?;
        ctx.root = Some(dir);
    }
    let t = Instant::now();
    let runs = ctx.runs(&RunsArg::default())?;
    let pooling = load::runs(&ctx.path(None, Input::PoolingRuns)?)?;
    let pools = load::pools(&ctx.path(None, Input::Pools)?)?;
    let sets = ctx.judgments(&JudgmentsArg::default())?;
    let manifest = ctx.manifest(&ManifestArg::default())?;
    let measures = ctx.measures(&MeasureArg::default())?;
    let ev = evaluator(&runs, manifest.as_ref(), &measures)?;
    step("loading", t);

    let t = Instant::now();
    ctx.write("pool_stats.csv", &pool_stats(&pools, manifest.as_ref())?.to_csv())?;
    agreement(ctx, &sets, weighting(None, &ctx.cfg)?, ctx.cfg.orientation_draws)?;
    step("pools and agreement", t);

    let t = Instant::now();
    let space = trel_space(&sets)?;
    let trels = sampled(ctx, &space, None)?;
    let union = union_trel(&sets)?;
    let inter = intersection_trel(&sets)?;
    ctx.write("union.trel", &write_trel(&union))?;
    ctx.write("intersection.trel", &write_trel(&inter))?;
    let tables = score_summary(ctx, &ev, &measures, &trels)?;
    score_stability(ctx, &ev, &tables, &union, &inter)?;
    curve(ctx, &ev, Curve::Recall, &load::range("1:100:1")?, &union)?;
    if manifest.is_some() {
        curve(ctx, &ev, Curve::Crawl, &load::range("1:100:1")?, &union)?;
    }
    step("score distributions", t);

    let t = Instant::now();
    let reports = pair_reports(ctx, &ev, &measures, &space, ctx.cfg.tau_pairs, ctx.cfg.alpha, true)?;
    write_pair_reports(ctx, reports)?;
    step("ranking stability", t);

    let t = Instant::now();
    let series = growth_series(&pooling, &pools, &ctx.cfg.growth.sizes()?, manifest.as_ref())?;
    growth(ctx, &ev, &measures, &series, &trels)?;
    step("pool growth", t);

    if let Some(m) = &manifest {
        noise_qc(ctx, &sets, m, ctx.cfg.qc_threshold)?;
    }
    println!("pipeline finished in {:.1?}; reports in {}", total.elapsed(), ctx.output.display());
    Ok(())
}
