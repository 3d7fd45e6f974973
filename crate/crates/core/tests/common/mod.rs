#![allow(dead_code)]

use bmn_core::{DiscreteNetwork, MixtureNetwork, NodeSpec, Observation, Structure};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every joint assignment over `cards`, last variable fastest.
pub fn all_states(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &c in cards {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..c).map(move |s| {
                    let mut v = prefix.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

/// Row index of a parent tuple, first parent most significant, computed by hand.
pub fn config_index(cards: &[usize], parents: &[usize], states: &[usize]) -> usize {
    parents.iter().fold(0, |acc, &p| acc * cards[p] + states[p])
}

/// Joint probability by direct product over nodes.
pub fn joint_prob(net: &DiscreteNetwork<f64>, states: &[usize]) -> f64 {
    let s = net.structure();
    let cards = s.cardinalities();
    (0..s.len())
        .map(|i| {
            let k = config_index(&cards, s.parents(i), states);
            net.cpt(i)[k * cards[i] + states[i]]
        })
        .product()
}

/// Complete assignments consistent with a partially observed case.
pub fn completions(cards: &[usize], case: &[Observation]) -> Vec<Vec<usize>> {
    all_states(cards)
        .into_iter()
        .filter(|st| case.iter().zip(st).all(|(o, &s)| o.is_none_or(|v| v == s)))
        .collect()
}

/// Family posterior table (entry `k * Q + j`) by full-joint enumeration.
pub fn brute_family_posterior(net: &DiscreteNetwork<f64>, case: &[Observation], node: usize) -> Vec<f64> {
    let s = net.structure();
    let cards = s.cardinalities();
    let r: usize = s.parents(node).iter().map(|&p| cards[p]).product();
    let mut table = vec![0.0; r * cards[node]];
    let mut z = 0.0;
    for st in completions(&cards, case) {
        let p = joint_prob(net, &st);
        let k = config_index(&cards, s.parents(node), &st);
        table[k * cards[node] + st[node]] += p;
        z += p;
    }
    table.iter().map(|v| v / z).collect()
}

/// Mixture likelihood by explicit per-node sums over submodels.
pub fn brute_mixture_log_likelihood(mix: &MixtureNetwork<f64>, states: &[usize]) -> f64 {
    let s = mix.structure();
    let cards = s.cardinalities();
    (0..s.len())
        .map(|i| {
            let mut p = 0.0;
            for sub in mix.submodels(i) {
                let k = config_index(&cards, sub.parents(), states);
                p += sub.weight() * sub.cpt()[k * cards[i] + states[i]];
            }
            p.ln()
        })
        .sum()
}

/// Random structure: `v` nodes, cards in 2..=3, each earlier node a parent with probability 1/2,
/// at most `max_parents` parents per node.
pub fn random_structure(v: usize, max_parents: usize, seed: u64) -> Structure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = (0..v)
        .map(|i| {
            let card = rng.gen_range(2..=3);
            let mut parents: Vec<usize> = (0..i).filter(|_| rng.gen_bool(0.5)).collect();
            parents.truncate(max_parents);
            NodeSpec::new(format!("X{i}"), card, parents)
        })
        .collect();
    Structure::new(nodes).unwrap()
}

pub fn random_network(v: usize, max_parents: usize, seed: u64) -> DiscreteNetwork<f64> {
    DiscreteNetwork::random_cpts(random_structure(v, max_parents, seed), seed ^ 0xA5A5)
}

pub fn arb_network() -> impl Strategy<Value = DiscreteNetwork<f64>> {
    (1usize..=5, 0usize..=3, any::<u64>()).prop_map(|(v, mp, seed)| random_network(v, mp, seed))
}

/// Mask out each entry with probability `p`.
pub fn hide<R: Rng>(states: &[usize], p: f64, rng: &mut R) -> Vec<Observation> {
    states
        .iter()
        .map(|&s| if rng.gen_bool(p) { None } else { Some(s) })
        .collect()
}
