use std::collections::BTreeSet;

use proptest::prelude::*;
use trelkit_core::trels::{
    intersection_trel, sample_choices, sample_trels, trel_pairs, trel_space, union_trel,
};
use trelkit_core::{JudgmentSet, Level};

fn sets(levels: &[(Vec<i8>, Option<Vec<i8>>)]) -> Vec<JudgmentSet> {
    let mut out = Vec::new();
    for (t, (a, b)) in levels.iter().enumerate() {
        let topic = format!("{:03}", t + 1);
        let mut first = JudgmentSet::new(format!("a{topic}"));
        for (d, &l) in a.iter().enumerate() {
            first.insert(&topic, &format!("d{d}"), Level::new(l as i64).unwrap()).unwrap();
        }
        out.push(first);
        if let Some(b) = b {
            let mut second = JudgmentSet::new(format!("b{topic}"));
            for (d, &l) in b.iter().enumerate() {
                // the second assessor skips every fourth document
                if d % 4 != 3 {
                    second.insert(&topic, &format!("d{d}"), Level::new(l as i64).unwrap()).unwrap();
                }
            }
            out.push(second);
        }
    }
    out
}

fn judgments() -> impl Strategy<Value = Vec<(Vec<i8>, Option<Vec<i8>>)>> {
    proptest::collection::vec(
        (
            proptest::collection::vec(-1i8..=2, 1..12),
            proptest::option::of(proptest::collection::vec(-1i8..=2, 1..12)),
        ),
        1..7,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn union_dominates_intersection(levels in judgments()) {
        let sets = sets(&levels);
        let union = union_trel(&sets).unwrap();
        let inter = intersection_trel(&sets).unwrap();
        let space = trel_space(&sets).unwrap();
        let all: Vec<_> = space.enumerate().map(|c| space.trel(c, "x")).collect();
        for (topic, _, qrels) in union.topics() {
            let docs: BTreeSet<&str> = qrels.iter().map(|(d, _)| d).collect();
            for doc in docs {
                let u = union.level(topic, doc);
                let i = inter.level(topic, doc);
                prop_assert!(i <= u);
                for t in &all {
                    let l = t.level(topic, doc);
                    prop_assert!(i <= l && l <= u);
                }
            }
        }
    }

    #[test]
    fn sampled_choices_are_distinct(levels in judgments(), n in 1usize..80, seed in 0u64..1000) {
        let space = trel_space(&sets(&levels)).unwrap();
        let total = space.total_combinations();
        prop_assert_eq!(total, 1u64 << space.dual_topics.len());
        match sample_choices(&space, n, seed) {
            Ok(choices) => {
                prop_assert!(n as u64 <= total);
                let distinct: BTreeSet<u64> = choices.iter().map(|c| c.0).collect();
                prop_assert_eq!(distinct.len(), n);
                prop_assert!(choices.iter().all(|c| c.0 < total));
                prop_assert_eq!(sample_choices(&space, n, seed).unwrap(), choices);
            }
            Err(_) => prop_assert!(n as u64 > total),
        }
        if total >= 2 {
            for (a, b) in trel_pairs(&space, 50, seed).unwrap() {
                prop_assert!(a.0 < b.0 && b.0 < total);
            }
        }
    }
}

#[test]
fn full_enumeration_when_sample_covers_space() {
    let levels: Vec<(Vec<i8>, Option<Vec<i8>>)> = (0..3).map(|_| (vec![1, 0], Some(vec![0, 1]))).collect();
    let space = trel_space(&sets(&levels)).unwrap();
    let trels = sample_trels(&space, 8, 1).unwrap();
    assert_eq!(trels.len(), 8);
    let distinct: BTreeSet<String> = trels.iter().map(|t| trelkit_core::collection::write_trel(t).replace(&t.name, "")).collect();
    assert_eq!(distinct.len(), 8);
}
