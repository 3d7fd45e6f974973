//! Checks that a random mixture network and its single-ordering mixture of
//! global networks assign the same likelihood to sampled complete cases.

use bmn_core::{Error, Mixture, Result, Structure};
use serde::Serialize;

/// Largest node count accepted by [`verify_mbn_equivalence`].
pub const MAX_VERIFY_NODES: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MbnReport {
    pub nodes: usize,
    pub cardinalities: Vec<usize>,
    pub seed: u64,
    pub local_components: usize,
    pub global_structures: u128,
    pub cases: usize,
    pub max_abs_deviation: f64,
}

pub fn verify_mbn_equivalence(cards: &[usize], cases: usize, seed: u64) -> Result<MbnReport> {
    let v = cards.len();
    if v == 0 || v > MAX_VERIFY_NODES {
        return Err(Error::GuardExceeded {
            what: "verification nodes",
            value: v as u128,
            limit: MAX_VERIFY_NODES as u128,
        });
    }
    let names: Vec<String> = (1..=v).map(|i| format!("X{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let full = Structure::full(&refs, cards)?;
    let caps: Vec<usize> = (0..v).collect();
    let mix = Mixture::random_capped(full, &caps, seed)?;
    let mbn = mix.build_restricted_mbn()?;
    let data = mix.collapse().sample(cases, seed.wrapping_add(1));
    let mut max_dev: f64 = 0.0;
    for case in data.cases() {
        let a = mix.bmn_log_likelihood(case)?;
        let b = mbn.mbn_log_likelihood(case)?;
        max_dev = max_dev.max((a - b).abs());
    }
    Ok(MbnReport {
        nodes: v,
        cardinalities: cards.to_vec(),
        seed,
        local_components: mix.local_component_count(),
        global_structures: mbn.len() as u128,
        cases,
        max_abs_deviation: max_dev,
    })
}
