use std::collections::BTreeSet;

use proptest::prelude::*;

use rwt::estimator::{
    empirical_coefficient, retained_set_reference, rwt_estimate, weight_direct, weight_indirect,
    DirectSwitch, QueuePolicy, ThresholdSchedule, TraversalConfig, TraversalStats,
};
use rwt::fwht::{fwht, DenseVector};
use rwt::io;
use rwt::model::{Dataset, SparseDensity};
use rwt::BitVector;

fn dataset(max_dim: usize, max_n: usize) -> impl Strategy<Value = Dataset> {
    (2..=max_dim).prop_flat_map(move |d| {
        prop::collection::vec(0..(1u64 << d), 1..=max_n)
            .prop_map(move |xs| Dataset::from_indices(d, xs).unwrap())
    })
}

fn with_prefix(max_dim: usize) -> impl Strategy<Value = (Dataset, BitVector)> {
    dataset(max_dim, 60).prop_flat_map(|data| {
        let d = data.dim();
        (0..d, any::<u64>()).prop_map(move |(k, bits)| {
            let u = BitVector::new(bits & ((1u64 << k) - 1), k).unwrap();
            (data.clone(), u)
        })
    })
}

/// Nonincreasing α sequences, occasionally with repeated values.
fn schedule(d: usize) -> impl Strategy<Value = ThresholdSchedule> {
    prop::collection::vec(0u32..6, d).prop_map(|mut steps| {
        steps.sort_unstable_by(|a, b| b.cmp(a));
        ThresholdSchedule::custom(
            steps
                .iter()
                .map(|&s| s as f64 * 0.25 / (1u64 << 6) as f64)
                .collect(),
        )
    })
}

fn keys(est: &SparseDensity) -> BTreeSet<u64> {
    est.as_map().keys().copied().collect()
}

fn balanced(stats: &TraversalStats) -> bool {
    stats.weight_evaluations + 1
        == stats.recursive_calls + stats.pruned_by_threshold + stats.pruned_by_top_q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weight_is_sum_of_child_weights((data, u) in with_prefix(10)) {
        let parent = weight_indirect(&data, &u).unwrap();
        let children = weight_indirect(&data, &u.push(false).unwrap()).unwrap()
            + weight_indirect(&data, &u.push(true).unwrap()).unwrap();
        prop_assert!((parent - children).abs() <= 1e-12 * parent.max(1e-300));
    }

    #[test]
    fn weight_routes_agree((data, u) in with_prefix(10)) {
        let a = weight_indirect(&data, &u).unwrap();
        let b = weight_direct(&data, &u).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(b));
    }

    #[test]
    fn traversal_matches_level_by_level_reference(
        (data, sched) in dataset(9, 80).prop_flat_map(|data| { let d = data.dim(); (Just(data), schedule(d)) })
    ) {
        let (est, stats) = rwt_estimate(&data, &sched, &TraversalConfig::default()).unwrap();
        // exact zeros pass a zero threshold but are never stored
        let reference: BTreeSet<u64> = retained_set_reference(&data, &sched, &TraversalConfig::default())
            .unwrap()
            .into_iter()
            .filter(|&s| empirical_coefficient(&data, &BitVector::new(s, data.dim()).unwrap()).unwrap() != 0.0)
            .collect();
        prop_assert_eq!(keys(&est), reference);
        prop_assert!(balanced(&stats));
    }

    #[test]
    fn raising_thresholds_never_adds_coefficients(data in dataset(10, 120), lo in 0.0f64..3.0, extra in 0.0f64..3.0) {
        let low = ThresholdSchedule::logarithmic().with_scale(lo);
        let high = ThresholdSchedule::logarithmic().with_scale(lo + extra);
        let config = TraversalConfig::default();
        let (a, _) = rwt_estimate(&data, &low, &config).unwrap();
        let (b, _) = rwt_estimate(&data, &high, &config).unwrap();
        prop_assert!(keys(&b).is_subset(&keys(&a)));
    }

    #[test]
    fn traversal_options_do_not_change_output(
        data in dataset(10, 100),
        bits in 1usize..=4,
        policy in prop_oneof![Just(QueuePolicy::DepthFirst), Just(QueuePolicy::BreadthFirst), Just(QueuePolicy::MaxWeight)],
        direct in prop_oneof![Just(DirectSwitch::Never), Just(DirectSwitch::Auto), Just(DirectSwitch::FromDepth(1))],
    ) {
        let sched = ThresholdSchedule::linear();
        let (base, _) = rwt_estimate(&data, &sched, &TraversalConfig::default()).unwrap();
        let config = TraversalConfig::default()
            .with_branching(1 << bits.min(data.dim()))
            .with_queue_policy(policy)
            .with_direct_switch(direct);
        let (est, stats) = rwt_estimate(&data, &sched, &config).unwrap();
        prop_assert_eq!(est.as_map(), base.as_map());
        prop_assert!(balanced(&stats));
    }

    #[test]
    fn estimates_are_deterministic(data in dataset(12, 100), q in 1usize..6, m in 1usize..4) {
        let sched = ThresholdSchedule::constant();
        let config = TraversalConfig::default().with_top_q(q).with_max_order(m.min(data.dim()));
        let (a, sa) = rwt_estimate(&data, &sched, &config).unwrap();
        let (b, sb) = rwt_estimate(&data, &sched, &config).unwrap();
        prop_assert_eq!(a.as_map(), b.as_map());
        prop_assert!(sa.same_counts(&sb));
        prop_assert!(balanced(&sa));
        prop_assert!(a.keys().all(|s| s.hamming_weight() as usize <= m));
    }

    #[test]
    fn dataset_text_round_trips(data in dataset(20, 50)) {
        let text = io::format_dataset(&data);
        let back = io::parse_dataset(&text).unwrap();
        prop_assert_eq!(back.indices(), data.indices());
        prop_assert_eq!(io::format_dataset(&back), text);
    }

    #[test]
    fn coefficient_text_round_trips(
        d in 1usize..12,
        entries in prop::collection::btree_map(any::<u64>(), any::<f64>().prop_filter("finite nonzero", |v| v.is_finite() && *v != 0.0), 0..40),
    ) {
        let mask = (1u64 << d) - 1;
        let mut est = SparseDensity::new(d).unwrap();
        for (s, v) in entries {
            est.insert(BitVector::new(s & mask, d).unwrap(), v).unwrap();
        }
        let back = io::parse_coefficients(&io::format_coefficients(&est), d).unwrap();
        prop_assert_eq!(back.as_map(), est.as_map());
    }

    #[test]
    fn walsh_transform_is_an_involution(d in 1usize..10, seed in any::<u64>()) {
        let values: Vec<f64> = (0..1u64 << d)
            .map(|i| ((i.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ seed) >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
            .collect();
        let v = DenseVector::new(d, values).unwrap();
        let back = fwht(&fwht(&v).unwrap()).unwrap();
        for (a, b) in v.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
