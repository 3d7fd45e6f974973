//! Conventional discrete Bayesian networks.
//!
//! Node order is the network's node ordering: every parent of node `i` has an
//! index strictly below `i`, so acyclicity holds by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::codec::ParentConfigCodec;
use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shape of a single node: name, number of states and ordered parent indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSpec {
    pub name: String,
    pub cardinality: usize,
    pub parents: Vec<usize>,
}

impl NodeSpec {
    pub fn new(name: impl Into<String>, cardinality: usize, parents: Vec<usize>) -> Self {
        NodeSpec {
            name: name.into(),
            cardinality,
            parents,
        }
    }
}

/// A validated network skeleton without parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    nodes: Vec<NodeSpec>,
    codecs: Vec<ParentConfigCodec>,
}

impl Structure {
    pub fn new(nodes: Vec<NodeSpec>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidStructure("network has no nodes".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.cardinality < 2 {
                return Err(Error::InvalidStructure(format!(
                    "node `{}` needs at least 2 states, has {}",
                    node.name, node.cardinality
                )));
            }
            if nodes[..i].iter().any(|other| other.name == node.name) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate node name `{}`",
                    node.name
                )));
            }
            for (pos, &p) in node.parents.iter().enumerate() {
                if p >= i {
                    return Err(Error::InvalidStructure(format!(
                        "parent {p} of node `{}` (index {i}) does not precede it",
                        node.name
                    )));
                }
                if node.parents[..pos].contains(&p) {
                    return Err(Error::InvalidStructure(format!(
                        "node `{}` lists parent {p} twice",
                        node.name
                    )));
                }
            }
        }
        let codecs = nodes
            .iter()
            .map(|node| {
                ParentConfigCodec::new(node.parents.iter().map(|&p| nodes[p].cardinality).collect())
            })
            .collect();
        Ok(Structure { nodes, codecs })
    }

    /// Every node takes all earlier nodes as parents.
    pub fn full(names: &[&str], cards: &[usize]) -> Result<Self> {
        Self::from_parent_fn(names, cards, |i| (0..i).collect())
    }

    /// No arcs at all.
    pub fn empty(names: &[&str], cards: &[usize]) -> Result<Self> {
        Self::from_parent_fn(names, cards, |_| Vec::new())
    }

    pub fn from_parent_fn(
        names: &[&str],
        cards: &[usize],
        parents: impl Fn(usize) -> Vec<usize>,
    ) -> Result<Self> {
        if names.len() != cards.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                actual: cards.len(),
            });
        }
        Self::new(
            names
                .iter()
                .zip(cards)
                .enumerate()
                .map(|(i, (name, &card))| NodeSpec::new(*name, card, parents(i)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeSpec {
        &self.nodes[i]
    }

    pub fn codec(&self, i: usize) -> &ParentConfigCodec {
        &self.codecs[i]
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.nodes[i].cardinality
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.nodes[i].parents
    }

    /// Number of parent configurations `R_i`.
    pub fn parent_configs(&self, i: usize) -> usize {
        self.codecs[i].len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.cardinality).collect()
    }

    /// Size of the joint state space.
    pub fn joint_states(&self) -> u128 {
        self.nodes.iter().map(|n| n.cardinality as u128).product()
    }

    /// Flat parent configuration of node `i` in a complete assignment.
    pub fn parent_config(&self, i: usize, states: &[usize]) -> usize {
        self.codecs[i].encode_iter(self.nodes[i].parents.iter().map(|&p| states[p]))
    }

    /// Directed arcs `(parent, child)` as index pairs.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.parents.iter().map(move |&p| (p, i)))
            .collect()
    }

    pub(crate) fn check_states(&self, states: &[usize]) -> Result<()> {
        if states.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: states.len(),
            });
        }
        for (node, &s) in self.nodes.iter().zip(states) {
            if s >= node.cardinality {
                return Err(Error::StateOutOfRange {
                    node: node.name.clone(),
                    state: s,
                    cardinality: node.cardinality,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn check_case(&self, case: &[Observation]) -> Result<()> {
        if case.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: case.len(),
            });
        }
        for (node, s) in self.nodes.iter().zip(case) {
            if let Some(s) = *s {
                if s >= node.cardinality {
                    return Err(Error::StateOutOfRange {
                        node: node.name.clone(),
                        state: s,
                        cardinality: node.cardinality,
                    });
                }
            }
        }
        Ok(())
    }

    /// Complete the case or report the first missing node.
    pub(crate) fn complete_states(&self, case: &[Observation]) -> Result<Vec<usize>> {
        self.check_case(case)?;
        case.iter()
            .zip(self.nodes.iter())
            .map(|(s, node)| s.ok_or_else(|| Error::MissingEntry(node.name.clone())))
            .collect()
    }
}

/// A discrete Bayesian network: a [`Structure`] plus one CPT per node.
///
/// CPTs are stored flat, row `k` (parent configuration) holding the `Q_i`
/// state probabilities, i.e. entry `(j, k)` lives at `k * Q_i + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteNetwork<T> {
    structure: Structure,
    cpts: Vec<Vec<T>>,
}

impl<T: Scalar> DiscreteNetwork<T> {
    pub fn new(structure: Structure, cpts: Vec<Vec<T>>) -> Result<Self> {
        if cpts.len() != structure.len() {
            return Err(Error::DimensionMismatch {
                expected: structure.len(),
                actual: cpts.len(),
            });
        }
        for (i, cpt) in cpts.iter().enumerate() {
            check_cpt(
                &structure.node(i).name,
                cpt,
                structure.cardinality(i),
                structure.parent_configs(i),
            )?;
        }
        Ok(DiscreteNetwork { structure, cpts })
    }

    /// Builds from nested rows: `rows[i][k][j]`.
    pub fn from_rows(structure: Structure, rows: Vec<Vec<Vec<T>>>) -> Result<Self> {
        let cpts = rows.into_iter().map(|r| r.concat()).collect();
        Self::new(structure, cpts)
    }

    pub(crate) fn from_parts_unchecked(structure: Structure, cpts: Vec<Vec<T>>) -> Self {
        DiscreteNetwork { structure, cpts }
    }

    pub fn uniform(structure: Structure) -> Self {
        let cpts = (0..structure.len())
            .map(|i| {
                let q = structure.cardinality(i);
                vec![T::one() / T::of_usize(q); q * structure.parent_configs(i)]
            })
            .collect();
        DiscreteNetwork { structure, cpts }
    }

    /// Draws every CPT row uniformly from the simplex (symmetric Dirichlet, concentration 1).
    pub fn random_cpts(structure: Structure, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_cpts_with(structure, &mut rng)
    }

    pub fn random_cpts_with<R: Rng + ?Sized>(structure: Structure, rng: &mut R) -> Self {
        let cpts = (0..structure.len())
            .map(|i| {
                let q = structure.cardinality(i);
                let mut cpt = Vec::with_capacity(q * structure.parent_configs(i));
                for _ in 0..structure.parent_configs(i) {
                    cpt.extend(random_simplex_point::<T, R>(q, rng));
                }
                cpt
            })
            .collect();
        DiscreteNetwork { structure, cpts }
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn len(&self) -> usize {
        self.structure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structure.is_empty()
    }

    pub fn cpt(&self, i: usize) -> &[T] {
        &self.cpts[i]
    }

    pub fn cpts(&self) -> &[Vec<T>] {
        &self.cpts
    }

    pub fn row(&self, i: usize, k: usize) -> &[T] {
        let q = self.structure.cardinality(i);
        &self.cpts[i][k * q..(k + 1) * q]
    }

    /// `θ_ijk`: probability of state `j` of node `i` under parent configuration `k`.
    pub fn prob(&self, i: usize, j: usize, k: usize) -> T {
        self.cpts[i][k * self.structure.cardinality(i) + j]
    }

    /// Natural-log probability of a complete assignment; `-inf` if any factor is zero.
    pub fn log_prob(&self, states: &[usize]) -> Result<T> {
        self.structure.check_states(states)?;
        Ok(self.log_prob_unchecked(states))
    }

    pub(crate) fn log_prob_unchecked(&self, states: &[usize]) -> T {
        (0..self.len())
            .map(|i| {
                self.prob(i, states[i], self.structure.parent_config(i, states))
                    .ln()
            })
            .sum()
    }

    /// Joint log-likelihood of a complete case.
    pub fn joint_log_likelihood(&self, case: &[Observation]) -> Result<T> {
        let states = self.structure.complete_states(case)?;
        Ok(self.log_prob_unchecked(&states))
    }

    /// Mean joint log-likelihood over a complete dataset (nats per case).
    pub fn dataset_score(&self, data: &Dataset) -> Result<T> {
        data.check_aligned(&self.structure)?;
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut total = T::zero();
        for case in data.cases() {
            total = total + self.joint_log_likelihood(case)?;
        }
        Ok(total / T::of_usize(data.len()))
    }

    /// Ancestral sampling of `n` complete cases.
    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Dataset {
        let mut states = vec![0usize; self.len()];
        let cases = (0..n)
            .map(|_| {
                for i in 0..self.len() {
                    let k = self.structure.parent_config(i, &states);
                    states[i] = draw_state(self.row(i, k), rng);
                }
                states.iter().map(|&s| Some(s)).collect()
            })
            .collect();
        Dataset::from_cases_unchecked(self.structure.names().map(String::from).collect(), cases)
    }

    /// Converts the parameters to another scalar type.
    pub fn cast<U: Scalar>(&self) -> DiscreteNetwork<U> {
        DiscreteNetwork {
            structure: self.structure.clone(),
            cpts: self
                .cpts
                .iter()
                .map(|c| c.iter().map(|&v| U::of(v.as_f64())).collect())
                .collect(),
        }
    }
}

pub(crate) fn check_cpt<T: Scalar>(name: &str, cpt: &[T], q: usize, r: usize) -> Result<()> {
    let bad = |reason: String| Error::InvalidCpt {
        node: name.to_string(),
        reason,
    };
    if cpt.len() != q * r {
        return Err(bad(format!("expected {} entries, got {}", q * r, cpt.len())));
    }
    for (k, row) in cpt.chunks(q).enumerate() {
        if row.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
            return Err(bad(format!("row {k} has a negative or non-finite entry")));
        }
        let sum: T = row.iter().copied().sum();
        if (sum - T::one()).abs() > T::normalization_tolerance() {
            return Err(bad(format!("row {k} sums to {sum}")));
        }
    }
    Ok(())
}

pub(crate) fn random_simplex_point<T: Scalar, R: Rng + ?Sized>(q: usize, rng: &mut R) -> Vec<T> {
    let draws: Vec<T> = (0..q)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            T::of(e.max(f64::MIN_POSITIVE))
        })
        .collect();
    let total: T = draws.iter().copied().sum();
    draws.into_iter().map(|d| d / total).collect()
}

fn draw_state<T: Scalar, R: Rng + ?Sized>(row: &[T], rng: &mut R) -> usize {
    let u = T::of(rng.gen::<f64>());
    let mut acc = T::zero();
    for (j, &p) in row.iter().enumerate() {
        acc = acc + p;
        if u < acc {
            return j;
        }
    }
    // rounding left u above the cumulative sum; take the last state with mass
    row.iter().rposition(|&p| p > T::zero()).unwrap_or(0)
}
