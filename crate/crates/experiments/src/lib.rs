//! Experiment harness: exhaustive structure sweeps, mixture-network fits with
//! per-node parent caps, and the single-ordering mixture equivalence check.

pub mod bmn_exp;
pub mod models;
pub mod sweep;
pub mod verify;

use bmn_core::{Dataset, Network, NodeSpec, Result, Structure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use bmn_exp::{run_bmn_experiment, BmnExperiment, BmnExperimentConfig, TracePoint};
pub use models::{enumerate_models, ModelSpec, MAX_SWEEP_NODES};
pub use sweep::{run_sweep, sweep_on_data, SweepConfig, SweepOutcome, SweepRecord, SweepSummary};
pub use verify::{verify_mbn_equivalence, MbnReport};

/// Node names of the stand-in true model.
pub const DEFAULT_NAMES: [&str; 4] = ["One", "Two", "Three", "Four"];
/// State counts of the stand-in true model.
pub const DEFAULT_CARDS: [usize; 4] = [3, 2, 2, 3];

/// Stand-in true structure: One→Three, Two→Three, Three→Four.
pub fn default_structure() -> Structure {
    Structure::new(vec![
        NodeSpec::new("One", 3, vec![]),
        NodeSpec::new("Two", 2, vec![]),
        NodeSpec::new("Three", 2, vec![0, 1]),
        NodeSpec::new("Four", 3, vec![2]),
    ])
    .expect("default structure is valid")
}

/// Default structure with CPT rows drawn uniformly from the simplex.
pub fn default_true_network(seed: u64) -> Network {
    Network::random_cpts(default_structure(), seed)
}

/// Seed of the train/test stream paired with a true network drawn from `seed`.
pub fn data_seed(seed: u64) -> u64 {
    seed.wrapping_add(1000)
}

/// Train and test sets drawn from one seeded stream, train first.
pub fn sample_train_test(net: &Network, n_train: usize, n_test: usize, seed: u64) -> (Dataset, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train = net.sample_with(n_train, &mut rng);
    let test = net.sample_with(n_test, &mut rng);
    (train, test)
}

/// Copy of `base` with nodes re-listed in `ordering` and the given parents
/// (indices into the new order).
pub fn reorder(base: &Structure, ordering: &[usize], parents: impl Fn(usize) -> Vec<usize>) -> Result<Structure> {
    Structure::new(
        ordering
            .iter()
            .enumerate()
            .map(|(pos, &orig)| {
                let n = base.node(orig);
                NodeSpec::new(n.name.clone(), n.cardinality, parents(pos))
            })
            .collect(),
    )
}

/// Parses an ordering given as node names.
pub fn ordering_from_names(base: &Structure, names: &[String]) -> Result<Vec<usize>> {
    let ordering = names
        .iter()
        .map(|n| {
            base.index_of(n)
                .ok_or_else(|| bmn_core::Error::Format(format!("unknown node `{n}` in ordering")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = ordering.clone();
    sorted.sort_unstable();
    if sorted != (0..base.len()).collect::<Vec<_>>() {
        return Err(bmn_core::Error::Format(
            "ordering must list every node exactly once".into(),
        ));
    }
    Ok(ordering)
}
