use std::time::Instant;

use trelkit_core::incompleteness::{growth_report, restrict_trel};
use trelkit_core::pooling::pool_growth_series;
use trelkit_core::reliability::{tau_distribution, ranking_swaps};
use trelkit_core::synth::{generate_fixture, FixtureConfig};
use trelkit_core::trels::{sample_trels, trel_pair_trels, trel_pairs, trel_space};
use trelkit_core::{Evaluator, MeasureKind};

#[test]
fn fixture_pipeline_shape() {
    let start = Instant::now();
    let f = generate_fixture(&FixtureConfig::default()).unwrap();
    let space = trel_space(&f.judgments).unwrap();
    assert_eq!(space.total_combinations(), 131_072);
    let trels = sample_trels(&space, 1000, 2010).unwrap();
    let ev = Evaluator::new(&f.system_runs).unwrap();

    let mut means = Vec::new();
    for seed in [1u64, 2] {
        let pairs = trel_pair_trels(&space, &trel_pairs(&space, 5000, seed).unwrap());
        let tau = tau_distribution(&ev, MeasureKind::Ndcg(100), &pairs).unwrap();
        means.push(tau.summary.mean);
        let swaps = ranking_swaps(&ev, MeasureKind::Ndcg(100), &pairs, 0.05).unwrap();
        eprintln!("tau {:?} swaps {} significant {}", tau.summary, swaps.swaps, swaps.significant);
    }
    assert!((means[0] - means[1]).abs() < 0.02);

    let sizes: Vec<usize> = (20..=100).step_by(5).collect();
    let series: Vec<_> = f
        .pools
        .iter()
        .map(|p| {
            pool_growth_series(
                &f.pooling_runs,
                &p.topic_id,
                &sizes,
                &f.search_top[&p.topic_id],
                &f.noise_injections[&p.topic_id],
                Some(&f.manifest),
            )
            .unwrap()
            .value
        })
        .collect();
    let measures = [MeasureKind::Ndcg(100), MeasureKind::AveragePrecision(100)];
    let report = growth_report(&ev, &measures, &series, &trels).unwrap();
    assert_eq!(report.steps(), 16);
    for m in measures {
        let first = report.mean_increment(m, 0).unwrap();
        let last = report.mean_increment(m, 15).unwrap();
        eprintln!("{m}: {first:.3} -> {last:.3}");
        assert!(first > last);
    }
    let full = restrict_trel(&trels[0], &f.pools);
    for run in &f.system_runs {
        assert_eq!(
            ev.system_mean(run, MeasureKind::Ndcg(100), &full).unwrap(),
            ev.system_mean(run, MeasureKind::Ndcg(100), &trels[0]).unwrap()
        );
    }
    eprintln!("{:?}", start.elapsed());
}
