//! Mixture networks: each node's CPD is a weighted mixture of CPTs over
//! subsets of its candidate parents.
//!
//! A submodel stores its CPT over the configurations of its own parent
//! subset; [`SubsetProjection`] maps a full candidate configuration onto the
//! subset's configuration by dropping the excluded parents.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::ParentConfigCodec;
use crate::dataset::Observation;
use crate::error::{Error, Result};
use crate::network::{check_cpt, random_simplex_point, DiscreteNetwork, NodeSpec, Structure};
use crate::scalar::{log_sum_exp, Scalar};

/// Largest number of global structures [`MixtureNetwork::build_restricted_mbn`] will materialise.
pub const MBN_GUARD: u128 = 100_000;

/// All subsets of `candidates` with at most `cap` members, ordered by size and
/// then lexicographically by position in `candidates`.
pub fn enumerate_substructures(candidates: &[usize], cap: usize) -> Result<Vec<Vec<usize>>> {
    if cap > candidates.len() {
        return Err(Error::CapOutOfRange {
            cap,
            candidates: candidates.len(),
        });
    }
    Ok((0..=cap)
        .flat_map(|size| candidates.iter().copied().combinations(size))
        .collect())
}

/// Maps full candidate-parent configurations onto a subset's configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetProjection {
    subset_codec: ParentConfigCodec,
    map: Vec<usize>,
    fiber: usize,
}

impl SubsetProjection {
    /// `subset` must list node indices drawn from `candidates`, in candidate order.
    pub fn new(candidates: &[usize], candidate_cards: &[usize], subset: &[usize]) -> Result<Self> {
        let positions = subset_positions(candidates, subset)?;
        let full = ParentConfigCodec::new(candidate_cards.to_vec());
        let subset_codec =
            ParentConfigCodec::new(positions.iter().map(|&p| candidate_cards[p]).collect());
        let mut states = vec![0usize; candidates.len()];
        let map = (0..full.len())
            .map(|k| {
                full.decode_into(k, &mut states);
                subset_codec.encode_iter(positions.iter().map(|&p| states[p]))
            })
            .collect();
        let fiber = full.len() / subset_codec.len();
        Ok(SubsetProjection {
            subset_codec,
            map,
            fiber,
        })
    }

    /// Subset configuration for full configuration `k`.
    pub fn project(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn full_len(&self) -> usize {
        self.map.len()
    }

    pub fn subset_len(&self) -> usize {
        self.subset_codec.len()
    }

    /// Number of full configurations mapping onto each subset configuration.
    pub fn fiber_size(&self) -> usize {
        self.fiber
    }

    pub fn subset_codec(&self) -> &ParentConfigCodec {
        &self.subset_codec
    }
}

/// Positions of `subset` members within `candidates`; rejects foreign,
/// repeated or out-of-order members.
fn subset_positions(candidates: &[usize], subset: &[usize]) -> Result<Vec<usize>> {
    let positions = subset
        .iter()
        .map(|v| candidates.iter().position(|c| c == v))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::NotASubset(subset.to_vec()))?;
    if positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NotASubset(subset.to_vec()));
    }
    Ok(positions)
}

/// Canonical order key: size first, then candidate positions.
fn order_key(candidates: &[usize], subset: &[usize]) -> (usize, Vec<usize>) {
    (
        subset.len(),
        subset
            .iter()
            .map(|v| candidates.iter().position(|c| c == v).unwrap_or(usize::MAX))
            .collect(),
    )
}

/// One component of a node's mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct Submodel<T> {
    parents: Vec<usize>,
    cpt: Vec<T>,
    weight: T,
    projection: SubsetProjection,
}

impl<T: Scalar> Submodel<T> {
    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    /// CPT over the subset's configurations, entry `(j, k')` at `k' * Q + j`.
    pub fn cpt(&self) -> &[T] {
        &self.cpt
    }

    pub fn weight(&self) -> T {
        self.weight
    }

    pub fn projection(&self) -> &SubsetProjection {
        &self.projection
    }

    /// `θ_{i, j, proj(k), m}` for a full candidate configuration `k`.
    pub fn prob(&self, q: usize, j: usize, full_k: usize) -> T {
        self.cpt[self.projection.project(full_k) * q + j]
    }
}

/// Submodel description used to build a [`MixtureNetwork`]: parent subset, CPT, weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmodelSpec<T> {
    pub parents: Vec<usize>,
    pub cpt: Vec<T>,
    pub weight: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureNetwork<T> {
    structure: Structure,
    submodels: Vec<Vec<Submodel<T>>>,
}

impl<T: Scalar> MixtureNetwork<T> {
    /// `structure` carries the full candidate parent sets; `specs[i]` lists node
    /// `i`'s submodels in canonical order (size, then candidate position).
    pub fn new(structure: Structure, specs: Vec<Vec<SubmodelSpec<T>>>) -> Result<Self> {
        if specs.len() != structure.len() {
            return Err(Error::DimensionMismatch {
                expected: structure.len(),
                actual: specs.len(),
            });
        }
        let mut submodels = Vec::with_capacity(specs.len());
        for (i, node_specs) in specs.into_iter().enumerate() {
            let name = &structure.node(i).name;
            let bad = |reason: String| Error::InvalidMixture {
                node: name.clone(),
                reason,
            };
            if node_specs.is_empty() {
                return Err(bad("no submodels".into()));
            }
            let candidates = structure.parents(i);
            let keys: Vec<_> = node_specs
                .iter()
                .map(|s| order_key(candidates, &s.parents))
                .collect();
            if keys.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad(
                    "submodels must be distinct and ordered by size, then candidate position"
                        .into(),
                ));
            }
            let weight_sum: T = node_specs.iter().map(|s| s.weight).sum();
            if node_specs.iter().any(|s| !(s.weight >= T::zero()))
                || (weight_sum - T::one()).abs() > T::normalization_tolerance()
            {
                return Err(bad(format!("weights sum to {weight_sum}")));
            }
            let node_models = node_specs
                .into_iter()
                .map(|spec| {
                    let projection = projection_for(&structure, i, &spec.parents)?;
                    check_cpt(
                        name,
                        &spec.cpt,
                        structure.cardinality(i),
                        projection.subset_len(),
                    )?;
                    Ok(Submodel {
                        parents: spec.parents,
                        cpt: spec.cpt,
                        weight: spec.weight,
                        projection,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            submodels.push(node_models);
        }
        Ok(MixtureNetwork {
            structure,
            submodels,
        })
    }

    /// Uniform CPTs and weights over the given parent subsets.
    pub fn uniform(structure: Structure, subsets: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let specs = subsets
            .into_iter()
            .enumerate()
            .map(|(i, node_subsets)| {
                let q = structure.cardinality(i);
                let m = node_subsets.len().max(1);
                node_subsets
                    .into_iter()
                    .map(|parents| {
                        let r: usize = parents.iter().map(|&p| structure.cardinality(p)).product();
                        SubmodelSpec {
                            parents,
                            cpt: vec![T::one() / T::of_usize(q); q * r],
                            weight: T::one() / T::of_usize(m),
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(structure, specs)
    }

    /// Uniform mixture over the size-capped subset family of every node.
    pub fn uniform_capped(structure: Structure, caps: &[usize]) -> Result<Self> {
        let subsets = capped_subsets(&structure, caps)?;
        Self::uniform(structure, subsets)
    }

    /// Random CPTs (uniform on the simplex) and random weights over the capped subset family.
    pub fn random_capped(structure: Structure, caps: &[usize], seed: u64) -> Result<Self> {
        let subsets = capped_subsets(&structure, caps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(structure, subsets, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(
        structure: Structure,
        subsets: Vec<Vec<Vec<usize>>>,
        rng: &mut R,
    ) -> Result<Self> {
        let specs = subsets
            .into_iter()
            .enumerate()
            .map(|(i, node_subsets)| {
                let q = structure.cardinality(i);
                let weights: Vec<T> = random_simplex_point(node_subsets.len(), rng);
                node_subsets
                    .into_iter()
                    .zip(weights)
                    .map(|(parents, weight)| {
                        let r: usize = parents.iter().map(|&p| structure.cardinality(p)).product();
                        let cpt = (0..r).flat_map(|_| random_simplex_point::<T, R>(q, rng)).collect();
                        SubmodelSpec {
                            parents,
                            cpt,
                            weight,
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(structure, specs)
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

    pub fn submodels(&self, i: usize) -> &[Submodel<T>] {
        &self.submodels[i]
    }

    pub fn weights(&self, i: usize) -> Vec<T> {
        self.submodels[i].iter().map(|s| s.weight).collect()
    }

    /// `M_i` for every node.
    pub fn submodel_counts(&self) -> Vec<usize> {
        self.submodels.iter().map(Vec::len).collect()
    }

    /// `Σ_i M_i`.
    pub fn local_component_count(&self) -> usize {
        self.submodels.iter().map(Vec::len).sum()
    }

    /// `Π_i M_i`, the number of global structures spanned.
    pub fn global_structure_count(&self) -> u128 {
        self.submodels.iter().map(|s| s.len() as u128).product()
    }

    /// Replaces node `i`'s weights; they must be non-negative and sum to one.
    pub fn set_weights(&mut self, i: usize, weights: &[T]) -> Result<()> {
        let bad = |reason: String| Error::InvalidMixture {
            node: self.structure.node(i).name.clone(),
            reason,
        };
        if weights.len() != self.submodels[i].len() {
            return Err(bad(format!(
                "{} weights for {} submodels",
                weights.len(),
                self.submodels[i].len()
            )));
        }
        let sum: T = weights.iter().copied().sum();
        if weights.iter().any(|w| !(*w >= T::zero()))
            || (sum - T::one()).abs() > T::normalization_tolerance()
        {
            return Err(bad(format!("weights sum to {sum}")));
        }
        for (s, &w) in self.submodels[i].iter_mut().zip(weights) {
            s.weight = w;
        }
        Ok(())
    }

    /// Replaces the CPT of submodel `m` of node `i`.
    pub fn set_cpt(&mut self, i: usize, m: usize, cpt: Vec<T>) -> Result<()> {
        let q = self.structure.cardinality(i);
        let sub = &mut self.submodels[i][m];
        check_cpt(
            &self.structure.node(i).name,
            &cpt,
            q,
            sub.projection.subset_len(),
        )?;
        sub.cpt = cpt;
        Ok(())
    }

    /// Probability of node `i`'s state under the mixture, `Σ_m ψ_m θ_{i,j,proj_m(k),m}`.
    pub fn mixture_prob(&self, i: usize, j: usize, full_k: usize) -> T {
        let q = self.structure.cardinality(i);
        self.submodels[i]
            .iter()
            .fold(T::zero(), |acc, s| acc + s.weight * s.prob(q, j, full_k))
    }

    /// `Σ_i ln Σ_m ψ_{i,m} θ_{i,ν_i,π_i,m}` for a complete case.
    pub fn bmn_log_likelihood(&self, case: &[Observation]) -> Result<T> {
        let states = self.structure.complete_states(case)?;
        Ok((0..self.len())
            .map(|i| {
                self.mixture_prob(i, states[i], self.structure.parent_config(i, &states))
                    .ln()
            })
            .sum())
    }

    /// Conventional network over the full candidate parents with
    /// `θ̄_ijk = Σ_m ψ_m θ_{i,j,proj_m(k),m}`.
    pub fn collapse(&self) -> DiscreteNetwork<T> {
        let cpts = (0..self.len())
            .map(|i| {
                let q = self.structure.cardinality(i);
                let r = self.structure.parent_configs(i);
                let mut cpt = vec![T::zero(); q * r];
                for k in 0..r {
                    for j in 0..q {
                        cpt[k * q + j] = self.mixture_prob(i, j, k);
                    }
                }
                cpt
            })
            .collect();
        DiscreteNetwork::from_parts_unchecked(self.structure.clone(), cpts)
    }

    /// Materialises the single-ordering mixture of global networks: one
    /// component per choice of submodel at every node, weighted by the product
    /// of the chosen local weights.
    pub fn build_restricted_mbn(&self) -> Result<RestrictedMbn<T>> {
        let count = self.global_structure_count();
        if count > MBN_GUARD {
            return Err(Error::GuardExceeded {
                what: "global structures",
                value: count,
                limit: MBN_GUARD,
            });
        }
        let components = self
            .submodels
            .iter()
            .map(|node| 0..node.len())
            .multi_cartesian_product()
            .map(|choice| self.global_component(choice))
            .collect::<Result<Vec<_>>>()?;
        // multi_cartesian_product yields nothing for zero iterators; V >= 1 always
        Ok(RestrictedMbn { components })
    }

    fn global_component(&self, choice: Vec<usize>) -> Result<MbnComponent<T>> {
        let nodes = choice
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let n = self.structure.node(i);
                NodeSpec::new(n.name.clone(), n.cardinality, self.submodels[i][m].parents.clone())
            })
            .collect();
        let structure = Structure::new(nodes)?;
        let cpts = choice
            .iter()
            .enumerate()
            .map(|(i, &m)| self.submodels[i][m].cpt.clone())
            .collect();
        let weight = choice
            .iter()
            .enumerate()
            .fold(T::one(), |acc, (i, &m)| acc * self.submodels[i][m].weight);
        Ok(MbnComponent {
            choice,
            weight,
            network: DiscreteNetwork::from_parts_unchecked(structure, cpts),
        })
    }
}

/// Capped subset families for every node of `structure`.
pub fn capped_subsets(structure: &Structure, caps: &[usize]) -> Result<Vec<Vec<Vec<usize>>>> {
    if caps.len() != structure.len() {
        return Err(Error::DimensionMismatch {
            expected: structure.len(),
            actual: caps.len(),
        });
    }
    (0..structure.len())
        .map(|i| enumerate_substructures(structure.parents(i), caps[i]))
        .collect()
}

pub(crate) fn projection_for(
    structure: &Structure,
    i: usize,
    subset: &[usize],
) -> Result<SubsetProjection> {
    SubsetProjection::new(
        structure.parents(i),
        structure.codec(i).cardinalities(),
        subset,
    )
}

/// One global network of a [`RestrictedMbn`].
#[derive(Clone, Debug, PartialEq)]
pub struct MbnComponent<T> {
    /// Submodel index chosen at each node.
    pub choice: Vec<usize>,
    /// `Ψ_m = Π_i ψ_{i, choice_i}`.
    pub weight: T,
    pub network: DiscreteNetwork<T>,
}

/// Mixture of global networks sharing one node ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedMbn<T> {
    components: Vec<MbnComponent<T>>,
}

impl<T: Scalar> RestrictedMbn<T> {
    pub fn components(&self) -> &[MbnComponent<T>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_weight(&self) -> T {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// `ln Σ_m Ψ_m Π_i θ_{m,i,ν_i,π_i}` for a complete case.
    pub fn mbn_log_likelihood(&self, case: &[Observation]) -> Result<T> {
        let terms = self
            .components
            .iter()
            .map(|c| Ok(c.weight.ln() + c.network.joint_log_likelihood(case)?))
            .collect::<Result<Vec<T>>>()?;
        Ok(log_sum_exp(&terms))
    }
}
