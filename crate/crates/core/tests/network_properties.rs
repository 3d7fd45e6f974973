mod common;

use bmn_core::{Dataset, DiscreteNetwork, NodeSpec, Structure};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_distribution_sums_to_one(net in arb_network()) {
        let cards = net.structure().cardinalities();
        let total: f64 = all_states(&cards)
            .iter()
            .map(|st| net.log_prob(st).unwrap().exp())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_prob_matches_direct_product(net in arb_network()) {
        for st in all_states(&net.structure().cardinalities()) {
            let ll = net.log_prob(&st).unwrap();
            prop_assert!((ll - joint_prob(&net, &st).ln()).abs() < 1e-12);
        }
    }
}

fn chain() -> DiscreteNetwork<f64> {
    let s = Structure::new(vec![NodeSpec::new("A", 2, vec![]), NodeSpec::new("B", 2, vec![0])])
        .unwrap();
    DiscreteNetwork::from_rows(
        s,
        vec![vec![vec![0.6, 0.4]], vec![vec![0.8, 0.2], vec![0.3, 0.7]]],
    )
    .unwrap()
}

#[test]
fn chain_score_by_hand_enumeration() {
    let data = Dataset::new(
        vec!["A".into(), "B".into()],
        vec![
            vec![Some(0), Some(0)],
            vec![Some(0), Some(1)],
            vec![Some(1), Some(0)],
            vec![Some(1), Some(1)],
        ],
    )
    .unwrap();
    let expected = ((0.6f64 * 0.8).ln()
        + (0.6f64 * 0.2).ln()
        + (0.4f64 * 0.3).ln()
        + (0.4f64 * 0.7).ln())
        / 4.0;
    let score = chain().dataset_score(&data).unwrap();
    assert!((score - expected).abs() < 1e-14);
}

#[test]
fn uniform_binary_score_is_log_half() {
    let net = DiscreteNetwork::<f64>::uniform(Structure::empty(&["X"], &[2]).unwrap());
    let data = net.sample(37, 1);
    assert!((net.dataset_score(&data).unwrap() - 0.5f64.ln()).abs() < 1e-14);
}

#[test]
fn empty_dataset_cannot_be_scored() {
    let data = Dataset::new(vec!["A".into(), "B".into()], vec![]).unwrap();
    assert!(chain().dataset_score(&data).is_err());
}

#[test]
fn sampled_frequency_of_fair_node() {
    // binomial sd at n = 1e5 is 0.00158; 0.01 is > 6 sd
    let net = DiscreteNetwork::<f64>::uniform(Structure::empty(&["X"], &[2]).unwrap());
    let data = net.sample(100_000, 2024);
    let zeros = data.cases().iter().filter(|c| c[0] == Some(0)).count();
    let freq = zeros as f64 / 1e5;
    assert!((freq - 0.5).abs() <= 0.01, "frequency {freq}");
}

#[test]
fn score_converges_to_negative_entropy() {
    for seed in 0..3 {
        let net = random_network(4, 3, seed);
        let cards = net.structure().cardinalities();
        let neg_entropy: f64 = all_states(&cards)
            .iter()
            .map(|st| {
                let p = joint_prob(&net, st);
                if p > 0.0 { p * p.ln() } else { 0.0 }
            })
            .sum();
        let data = net.sample(100_000, seed + 100);
        let score = net.dataset_score(&data).unwrap();
        assert!(
            (score - neg_entropy).abs() <= 0.02,
            "seed {seed}: score {score} vs {neg_entropy}"
        );
    }
}

#[test]
fn sampled_cases_are_complete_and_in_range() {
    let net = random_network(5, 2, 77);
    let data = net.sample(500, 3);
    assert!(data.is_complete());
    data.check_aligned(net.structure()).unwrap();
}
