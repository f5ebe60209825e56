use proptest::prelude::*;
use trelkit_core::reliability::{kendall_tau, signed_rank_test, tau_counts, WilcoxonMethod, ZERO_TOLERANCE};
use trelkit_oracles::ranking;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tau_matches_pair_counting(xy in proptest::collection::vec((0u8..6, 0u8..6), 2..40)) {
        let x: Vec<f64> = xy.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = xy.iter().map(|p| p.1 as f64).collect();
        prop_assert_eq!(tau_counts(&x, &y).unwrap().tau(), ranking::kendall_tau_a(&x, &y));
    }

    #[test]
    fn tau_of_permutations(perm in Just((0..24).collect::<Vec<usize>>()).prop_shuffle()) {
        let ids: Vec<String> = (0..24).map(|i| format!("s{i:02}")).collect();
        let other: Vec<String> = perm.iter().map(|&i| ids[i].clone()).collect();
        let x: Vec<f64> = (0..24).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..24).map(|i| other.iter().position(|s| *s == ids[i]).unwrap() as f64).collect();
        let tau = kendall_tau(&ids, &other).unwrap();
        prop_assert_eq!(tau, ranking::kendall_tau_a(&x, &y));
        prop_assert_eq!(kendall_tau(&other, &ids).unwrap(), tau);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_wilcoxon_matches_enumeration(units in proptest::collection::vec(-8i32..=8, 1..=12)) {
        let diffs: Vec<f64> = units.iter().map(|&u| u as f64 * 0.125).collect();
        let got = signed_rank_test(&diffs).unwrap();
        prop_assert_eq!(got.method, WilcoxonMethod::Exact);
        prop_assert_eq!(got.p_value, ranking::wilcoxon_p_by_enumeration(&diffs, ZERO_TOLERANCE));
        let flipped: Vec<f64> = diffs.iter().map(|d| -d).collect();
        prop_assert_eq!(signed_rank_test(&flipped).unwrap().p_value, got.p_value);
    }

    #[test]
    fn exact_wilcoxon_on_continuous_differences(diffs in proptest::collection::vec(-1.0f64..1.0, 1..=12)) {
        let got = signed_rank_test(&diffs).unwrap();
        prop_assert_eq!(got.p_value, ranking::wilcoxon_p_by_enumeration(&diffs, ZERO_TOLERANCE));
        prop_assert!((0.0..=1.0).contains(&got.p_value));
    }
}
