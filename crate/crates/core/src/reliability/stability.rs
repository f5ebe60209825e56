//! How much system scores and rankings move when the trel changes.

use rayon::prelude::*;

use super::tau::tau_counts;
use super::wilcoxon::{paired_test, WilcoxonOutcome};
use super::{DistributionSummary, TauSample};
use crate::collection::{RankedRun, Trel};
use crate::eval::{Evaluator, TrelMeans, TrelScores};
use crate::measures::MeasureKind;
use crate::{Error, Result};

/// Systems ordered by descending mean score, ties broken by ascending tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedSystems {
    /// Indices into the input systems, best first.
    pub order: Vec<usize>,
    /// Pairs of systems whose means were exactly equal.
    pub ties_broken: usize,
}

impl RankedSystems {
    /// Position of every system (0 = best), indexed like the input.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &s) in self.order.iter().enumerate() {
            pos[s] = p;
        }
        pos
    }
}

pub fn rank_systems(systems: &[String], means: &[f64]) -> RankedSystems {
    let mut order: Vec<usize> = (0..systems.len()).collect();
    order.sort_by(|&a, &b| {
        means[b]
            .total_cmp(&means[a])
            .then_with(|| systems[a].cmp(&systems[b]))
    });
    let mut ties_broken = 0;
    let mut run = 1;
    for w in order.windows(2) {
        if means[w[0]] == means[w[1]] {
            run += 1;
        } else {
            ties_broken += run * (run - 1) / 2;
            run = 1;
        }
    }
    ties_broken += run * (run - 1) / 2;
    RankedSystems { order, ties_broken }
}

fn system_row<'t>(table: &'t TrelMeans, system: &str) -> Result<&'t [f64]> {
    table
        .system_index(system)
        .map(|i| table.means[i].as_slice())
        .ok_or_else(|| Error::validation(format!("unknown system {system}")))
}

/// Summary of one system's mean-over-topics scores across `trels`.
pub fn score_distribution(
    evaluator: &Evaluator<'_>,
    system: &str,
    measure: MeasureKind,
    trels: &[Trel],
) -> Result<DistributionSummary> {
    let run = evaluator
        .runs()
        .iter()
        .find(|r| r.system_tag == system)
        .ok_or_else(|| Error::validation(format!("unknown system {system}")))?;
    let solo = Evaluator::new(std::slice::from_ref(run))?;
    let table = solo.means_over_trels(measure, trels)?;
    DistributionSummary::from_values(system_row(&table, system)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemDistribution {
    pub system: String,
    pub summary: DistributionSummary,
}

/// One summary per system, ordered by descending mean (ties by tag).
pub fn system_distributions(table: &TrelMeans) -> Result<Vec<SystemDistribution>> {
    let mut rows = table
        .systems
        .iter()
        .zip(&table.means)
        .map(|(s, m)| {
            Ok(SystemDistribution {
                system: s.clone(),
                summary: DistributionSummary::from_values(m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        b.summary
            .mean
            .total_cmp(&a.summary.mean)
            .then_with(|| a.system.cmp(&b.system))
    });
    Ok(rows)
}

/// Mean and standard deviation per system and measure, rows ordered by the
/// mean of the first table's measure.
pub fn score_summary_csv(tables: &[TrelMeans]) -> Result<String> {
    if tables.is_empty() {
        return Err(Error::InsufficientData("no measures to report".into()));
    }
    let per_measure: Vec<Vec<SystemDistribution>> =
        tables.iter().map(system_distributions).collect::<Result<_>>()?;
    let mut out = String::from("system");
    for t in tables {
        out.push_str(&format!(",{m}_mean,{m}_sd", m = t.measure));
    }
    out.push('\n');
    for row in &per_measure[0] {
        out.push_str(&row.system);
        for dists in &per_measure {
            let d = dists
                .iter()
                .find(|d| d.system == row.system)
                .ok_or_else(|| Error::validation(format!("system {} missing from a measure", row.system)))?;
            out.push_str(&format!(",{:.4},{:.4}", d.summary.mean, d.summary.sd));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Plot data: per system (best first) the mean, observed range and the
/// 2σ and 2.6σ bands.
pub fn distribution_plot(table: &TrelMeans) -> Result<String> {
    let mut out = String::from("x,y,lo,hi,lo95,hi95,lo99,hi99,system\n");
    for (x, row) in system_distributions(table)?.iter().enumerate() {
        let s = &row.summary;
        let (l95, h95) = s.ci95();
        let (l99, h99) = s.ci99();
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
            x + 1,
            s.mean,
            s.min,
            s.max,
            l95,
            h95,
            l99,
            h99,
            row.system
        ));
    }
    Ok(out)
}

/// Smallest and largest per-system score spread for one measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargestDifferences {
    pub measure: MeasureKind,
    /// Width of the `mean ± 2σ` band (4σ) across trels.
    pub band: (f64, f64),
    /// `max − min` of the system's scores across trels.
    pub all_trels: (f64, f64),
    /// `|union − intersection|` of the system's scores.
    pub union_intersection: Option<(f64, f64)>,
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Computes the table from per-system means. `union_intersection` holds
/// every system's (union, intersection) scores, indexed like `table`.
pub fn largest_differences_from_means(
    table: &TrelMeans,
    union_intersection: Option<&[(f64, f64)]>,
) -> Result<LargestDifferences> {
    if table.systems.is_empty() {
        return Err(Error::InsufficientData("no systems to compare".into()));
    }
    let summaries: Vec<DistributionSummary> = table
        .means
        .iter()
        .map(|m| DistributionSummary::from_values(m))
        .collect::<Result<_>>()?;
    let ui = match union_intersection {
        Some(pairs) if pairs.len() != table.systems.len() => {
            return Err(Error::validation("union/intersection scores do not cover every system"))
        }
        Some(pairs) => Some(min_max(pairs.iter().map(|(u, i)| (u - i).abs()))),
        None => None,
    };
    Ok(LargestDifferences {
        measure: table.measure,
        band: min_max(summaries.iter().map(|s| 4.0 * s.sd)),
        all_trels: min_max(summaries.iter().map(DistributionSummary::range)),
        union_intersection: ui,
    })
}

pub fn largest_differences(
    evaluator: &Evaluator<'_>,
    measure: MeasureKind,
    trels: &[Trel],
    union_and_intersection: Option<(&Trel, &Trel)>,
) -> Result<LargestDifferences> {
    let table = evaluator.means_over_trels(measure, trels)?;
    let ui = match union_and_intersection {
        Some((u, i)) => {
            let both = evaluator.means_over_trels(measure, &[u.clone(), i.clone()])?;
            Some(both.means.iter().map(|row| (row[0], row[1])).collect::<Vec<_>>())
        }
        None => None,
    };
    largest_differences_from_means(&table, ui.as_deref())
}

/// Rows: 2σ band, all trels, union vs intersection; `min` and `max` column
/// per measure.
pub fn differences_csv(rows: &[LargestDifferences]) -> String {
    let mut out = String::from("comparison");
    for r in rows {
        out.push_str(&format!(",{m}_min,{m}_max", m = r.measure));
    }
    out.push('\n');
    let line = |name: &str, pick: &dyn Fn(&LargestDifferences) -> Option<(f64, f64)>| {
        let mut l = name.to_string();
        for r in rows {
            match pick(r) {
                Some((lo, hi)) => l.push_str(&format!(",{lo:.3},{hi:.3}")),
                None => l.push_str(",,"),
            }
        }
        l.push('\n');
        l
    };
    out.push_str(&line("band_4sd", &|r| Some(r.band)));
    out.push_str(&line("all_trels", &|r| Some(r.all_trels)));
    out.push_str(&line("union_intersection", &|r| r.union_intersection));
    out
}

fn pair_scores(
    evaluator: &Evaluator<'_>,
    measure: MeasureKind,
    pairs: &[(Trel, Trel)],
) -> Result<TrelScores> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData("no trel pairs".into()));
    }
    let trels: Vec<Trel> = pairs
        .iter()
        .map(|p| p.0.clone())
        .chain(pairs.iter().map(|p| p.1.clone()))
        .collect();
    evaluator.trel_scores(measure, &trels)
}

fn rankings(scores: &TrelScores, trel: usize) -> RankedSystems {
    let means: Vec<f64> = (0..scores.systems.len()).map(|s| scores.mean(s, trel)).collect();
    rank_systems(&scores.systems, &means)
}

/// Kendall's tau between the system rankings produced by each trel pair.
pub fn tau_distribution(
    evaluator: &Evaluator<'_>,
    measure: MeasureKind,
    pairs: &[(Trel, Trel)],
) -> Result<TauSample> {
    let scores = pair_scores(evaluator, measure, pairs)?;
    let n = pairs.len();
    let per_pair: Vec<(f64, usize)> = (0..n)
        .into_par_iter()
        .map(|p| {
            let a = rankings(&scores, p);
            let b = rankings(&scores, n + p);
            let x: Vec<f64> = a.positions().into_iter().map(|v| v as f64).collect();
            let y: Vec<f64> = b.positions().into_iter().map(|v| v as f64).collect();
            Ok((tau_counts(&x, &y)?.tau(), a.ties_broken + b.ties_broken))
        })
        .collect::<Result<_>>()?;
    let ties = per_pair.iter().map(|p| p.1).sum();
    TauSample::new(per_pair.into_iter().map(|p| p.0).collect(), ties)
}

/// Signed-rank test of two systems' per-topic scores under one trel.
pub fn wilcoxon_swap_test(
    evaluator: &Evaluator<'_>,
    system_a: &RankedRun,
    system_b: &RankedRun,
    measure: MeasureKind,
    trel: &Trel,
    alpha: f64,
) -> Result<(WilcoxonOutcome, bool)> {
    let a: Vec<f64> = evaluator.topic_scores(system_a, measure, trel)?.value.into_values().collect();
    let b: Vec<f64> = evaluator.topic_scores(system_b, measure, trel)?.value.into_values().collect();
    let w = paired_test(&a, &b)?;
    Ok((w, w.significant(alpha)))
}

/// Ranking swaps across trel pairs and how many were significant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapReport {
    pub measure: MeasureKind,
    pub trel_pairs: usize,
    /// System pairs whose relative order differs between the two trels.
    pub swaps: usize,
    /// Swaps where the signed-rank test rejects equality under either trel.
    pub significant: usize,
    pub alpha: f64,
}

pub fn ranking_swaps(
    evaluator: &Evaluator<'_>,
    measure: MeasureKind,
    pairs: &[(Trel, Trel)],
    alpha: f64,
) -> Result<SwapReport> {
    let scores = pair_scores(evaluator, measure, pairs)?;
    let n = pairs.len();
    let systems = scores.systems.len();
    let counts: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .map(|p| {
            let pa = rankings(&scores, p).positions();
            let pb = rankings(&scores, n + p).positions();
            let (mut swaps, mut significant) = (0, 0);
            for i in 0..systems {
                for j in i + 1..systems {
                    if (pa[i] < pa[j]) == (pb[i] < pb[j]) {
                        continue;
                    }
                    swaps += 1;
                    let sig = [p, n + p].iter().try_fold(false, |acc, &t| {
                        let a: Vec<f64> = scores.topic_scores(i, t).collect();
                        let b: Vec<f64> = scores.topic_scores(j, t).collect();
                        Ok::<_, Error>(acc || paired_test(&a, &b)?.significant(alpha))
                    })?;
                    if sig {
                        significant += 1;
                    }
                }
            }
            Ok((swaps, significant))
        })
        .collect::<Result<_>>()?;
    Ok(SwapReport {
        measure,
        trel_pairs: n,
        swaps: counts.iter().map(|c| c.0).sum(),
        significant: counts.iter().map(|c| c.1).sum(),
        alpha,
    })
}

/// One row per measure: tau summary, fraction above `threshold` and swaps.
pub fn tau_csv(rows: &[(TauSample, SwapReport)], threshold: f64) -> String {
    let mut out = format!(
        "measure,pairs,mean,sd,min,max,above_{threshold},ties_broken,swaps,significant_swaps\n"
    );
    for (tau, swaps) in rows {
        let s = &tau.summary;
        out.push_str(&format!(
            "{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{},{},{}\n",
            swaps.measure,
            s.n,
            s.mean,
            s.sd,
            s.min,
            s.max,
            tau.fraction_above(threshold),
            tau.ties_broken,
            swaps.swaps,
            swaps.significant
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collection::{Level, TopicQrels, TrelSource};
    use std::sync::Arc;

    fn tags(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn ranking_breaks_ties_by_tag() {
        let r = rank_systems(&tags(4), &[0.5, 0.7, 0.5, 0.5]);
        assert_eq!(r.order, vec![1, 0, 2, 3]);
        assert_eq!(r.ties_broken, 3);
        assert_eq!(r.positions(), vec![1, 0, 2, 3]);
    }

    fn means(rows: Vec<Vec<f64>>) -> TrelMeans {
        TrelMeans {
            measure: MeasureKind::Ndcg(100),
            systems: tags(rows.len()),
            trels: (0..rows[0].len()).map(|t| format!("t{t}")).collect(),
            means: rows,
        }
    }

    #[test]
    fn single_trel_has_no_spread() {
        let d = largest_differences_from_means(&means(vec![vec![0.4], vec![0.6]]), None).unwrap();
        assert_eq!(d.all_trels, (0.0, 0.0));
        assert_eq!(d.band, (0.0, 0.0));
    }

    #[test]
    fn spread_arithmetic() {
        let table = means(vec![vec![0.6, 0.75], vec![0.5, 0.52]]);
        let d = largest_differences_from_means(&table, Some(&[(0.8, 0.5), (0.6, 0.55)])).unwrap();
        assert!((d.all_trels.1 - 0.15).abs() < 1e-12);
        assert!((d.all_trels.0 - 0.02).abs() < 1e-12);
        let (lo, hi) = d.union_intersection.unwrap();
        assert!((lo - 0.05).abs() < 1e-12 && (hi - 0.3).abs() < 1e-12);
        let csv = differences_csv(&[d]);
        assert!(csv.starts_with("comparison,NDCG@100_min,NDCG@100_max\n"));
        assert!(csv.contains("all_trels,0.020,0.150\n"));
    }

    #[test]
    fn distributions_ordered_by_mean() {
        let table = means(vec![vec![0.2, 0.4], vec![0.5, 0.7]]);
        let d = system_distributions(&table).unwrap();
        assert_eq!(d[0].system, "s1");
        let plot = distribution_plot(&table).unwrap();
        assert!(plot.lines().nth(1).unwrap().starts_with("1,0.600000,0.500000,0.700000,"));
        let csv = score_summary_csv(&[table]).unwrap();
        assert_eq!(csv.lines().nth(1), Some("s1,0.6000,0.1414"));
    }

    fn pair_fixture() -> (Vec<RankedRun>, Vec<(Trel, Trel)>) {
        let docs = ["a", "b", "c", "d"];
        let runs: Vec<RankedRun> = (0..3)
            .map(|s| {
                let mut order = docs.to_vec();
                order.rotate_left(s);
                RankedRun::from_ranked_docs(
                    format!("s{s}"),
                    (0..3).map(|t| (format!("{t}"), order.clone())),
                )
                .unwrap()
            })
            .collect();
        let trel = |rel: &str| {
            let mut t = Trel::new(rel);
            for topic in 0..3 {
                t.insert_topic(
                    &topic.to_string(),
                    TrelSource::Union,
                    Arc::new(TopicQrels::from_levels([(rel, Level::HIGHLY)])),
                );
            }
            t
        };
        let pairs = vec![(trel("a"), trel("a")), (trel("a"), trel("b"))];
        (runs, pairs)
    }

    #[test]
    fn tau_over_pairs() {
        let (runs, pairs) = pair_fixture();
        let ev = Evaluator::new(&runs).unwrap();
        let sample = tau_distribution(&ev, MeasureKind::ReciprocalRank(100), &pairs).unwrap();
        assert_eq!(sample.taus[0], 1.0);
        // under "a": s0 > s2 > s1; under "b": s1 > s0 > s2
        assert!((sample.taus[1] - (-1.0 / 3.0)).abs() < 1e-15);
        let swaps = ranking_swaps(&ev, MeasureKind::ReciprocalRank(100), &pairs, 0.05).unwrap();
        assert_eq!(swaps.swaps, 2);
        assert_eq!(swaps.significant, 0);
    }

    #[test]
    fn swap_test_is_symmetric() {
        let (runs, pairs) = pair_fixture();
        let ev = Evaluator::new(&runs).unwrap();
        let (ab, _) = wilcoxon_swap_test(&ev, &runs[0], &runs[1], MeasureKind::ReciprocalRank(100), &pairs[0].0, 0.05).unwrap();
        let (ba, _) = wilcoxon_swap_test(&ev, &runs[1], &runs[0], MeasureKind::ReciprocalRank(100), &pairs[0].0, 0.05).unwrap();
        assert_eq!(ab.p_value, ba.p_value);
        assert_eq!(ab.n, 3);
        assert!((ab.p_value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn distribution_of_one_system() {
        let (runs, pairs) = pair_fixture();
        let ev = Evaluator::new(&runs).unwrap();
        let trels = vec![pairs[1].0.clone(), pairs[1].1.clone()];
        let d = score_distribution(&ev, "s0", MeasureKind::ReciprocalRank(100), &trels).unwrap();
        assert_eq!((d.min, d.max), (0.5, 1.0));
        assert!(score_distribution(&ev, "zz", MeasureKind::ReciprocalRank(100), &trels).is_err());
    }
}
