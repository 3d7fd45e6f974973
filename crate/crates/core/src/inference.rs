//! Exact inference: family posteriors and expected family counts.
//!
//! Queries are answered by variable elimination restricted to the ancestral
//! closure of the query and evidence variables; everything outside that set
//! sums to one and is dropped.

use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::factor::{eliminate, Factor};
use crate::network::{DiscreteNetwork, Structure};
use crate::scalar::Scalar;

/// A table over (state `j`, parent configuration `k`) for one node, laid out
/// like a CPT: entry `(j, k)` at `k * cardinality + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyTable<T> {
    cardinality: usize,
    parent_cards: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> FamilyTable<T> {
    pub fn zeros(cardinality: usize, parent_cards: Vec<usize>) -> Self {
        let r: usize = parent_cards.iter().product();
        FamilyTable {
            cardinality,
            parent_cards,
            values: vec![T::zero(); cardinality * r],
        }
    }

    pub fn filled(cardinality: usize, parent_cards: Vec<usize>, value: T) -> Self {
        let mut t = Self::zeros(cardinality, parent_cards);
        t.values.iter_mut().for_each(|v| *v = value);
        t
    }

    pub fn from_values(cardinality: usize, parent_cards: Vec<usize>, values: Vec<T>) -> Result<Self> {
        let r: usize = parent_cards.iter().product();
        if values.len() != cardinality * r {
            return Err(Error::DimensionMismatch {
                expected: cardinality * r,
                actual: values.len(),
            });
        }
        Ok(FamilyTable {
            cardinality,
            parent_cards,
            values,
        })
    }

    /// Table shaped like node `i`'s CPT in `structure`.
    pub fn for_node(structure: &Structure, i: usize) -> Self {
        Self::zeros(
            structure.cardinality(i),
            structure.codec(i).cardinalities().to_vec(),
        )
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn parent_configs(&self) -> usize {
        self.values.len() / self.cardinality
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, j: usize, k: usize) -> T {
        self.values[k * self.cardinality + j]
    }

    pub fn add(&mut self, j: usize, k: usize, amount: T) {
        let idx = k * self.cardinality + j;
        self.values[idx] = self.values[idx] + amount;
    }

    pub fn add_table(&mut self, other: &FamilyTable<T>) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a = *a + b;
        }
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// Sum over states for each parent configuration (`N_i·k`).
    pub fn column_totals(&self) -> Vec<T> {
        self.values
            .chunks(self.cardinality)
            .map(|c| c.iter().copied().sum())
            .collect()
    }

    /// Sum over parent configurations for each state.
    pub fn state_totals(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cardinality];
        for chunk in self.values.chunks(self.cardinality) {
            for (o, &v) in out.iter_mut().zip(chunk) {
                *o = *o + v;
            }
        }
        out
    }

    pub(crate) fn same_shape(&self, other: &FamilyTable<T>) -> bool {
        self.cardinality == other.cardinality && self.parent_cards == other.parent_cards
    }
}

/// Per-node (expected) family counts `N_ijk`, shaped like the network's CPTs.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyCountTable<T> {
    tables: Vec<FamilyTable<T>>,
}

impl<T: Scalar> FamilyCountTable<T> {
    pub fn zeros(structure: &Structure) -> Self {
        FamilyCountTable {
            tables: (0..structure.len())
                .map(|i| FamilyTable::for_node(structure, i))
                .collect(),
        }
    }

    /// Every cell set to `value`; the usual form of a symmetric prior.
    pub fn filled(structure: &Structure, value: T) -> Self {
        FamilyCountTable {
            tables: (0..structure.len())
                .map(|i| {
                    FamilyTable::filled(
                        structure.cardinality(i),
                        structure.codec(i).cardinalities().to_vec(),
                        value,
                    )
                })
                .collect(),
        }
    }

    pub fn from_tables(structure: &Structure, tables: Vec<FamilyTable<T>>) -> Result<Self> {
        if tables.len() != structure.len() {
            return Err(Error::DimensionMismatch {
                expected: structure.len(),
                actual: tables.len(),
            });
        }
        for (i, t) in tables.iter().enumerate() {
            if !t.same_shape(&FamilyTable::for_node(structure, i)) {
                return Err(Error::InvalidStructure(format!(
                    "count table for node `{}` has the wrong shape",
                    structure.node(i).name
                )));
            }
        }
        Ok(FamilyCountTable { tables })
    }

    pub fn node(&self, i: usize) -> &FamilyTable<T> {
        &self.tables[i]
    }

    pub fn tables(&self) -> &[FamilyTable<T>] {
        &self.tables
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

/// Ancestral closure of `seeds`, as a membership mask.
fn ancestral_mask(structure: &Structure, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut mask = vec![false; structure.len()];
    for s in seeds {
        mask[s] = true;
    }
    // parents precede children, so one reverse sweep closes the set
    for i in (0..structure.len()).rev() {
        if mask[i] {
            for &p in structure.parents(i) {
                mask[p] = true;
            }
        }
    }
    mask
}

fn reduced_factors<T: Scalar>(
    net: &DiscreteNetwork<T>,
    case: &[Observation],
    mask: &[bool],
) -> Vec<Factor<T>> {
    (0..net.len())
        .filter(|&i| mask[i])
        .map(|i| Factor::from_cpt(net, i, case))
        .collect()
}

/// Posterior `P(ν_i = j, π_i = k | case)` as a normalised family table.
pub fn family_posterior<T: Scalar>(
    net: &DiscreteNetwork<T>,
    case: &[Observation],
    node: usize,
) -> Result<FamilyTable<T>> {
    let s = net.structure();
    s.check_case(case)?;
    if node >= s.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            actual: node + 1,
        });
    }
    let mut table = FamilyTable::for_node(s, node);
    let codec = s.codec(node);
    let parents = s.parents(node);

    if case[node].is_some() && parents.iter().all(|&p| case[p].is_some()) {
        let k = codec.encode_iter(parents.iter().map(|&p| case[p].unwrap_or(0)));
        table.add(case[node].unwrap_or(0), k, T::one());
        return Ok(table);
    }

    let family: Vec<usize> = parents.iter().copied().chain([node]).collect();
    let observed = (0..s.len()).filter(|&v| case[v].is_some());
    let mask = ancestral_mask(s, family.iter().copied().chain(observed));
    let hidden: Vec<usize> = (0..s.len())
        .filter(|&v| mask[v] && case[v].is_none() && !family.contains(&v))
        .collect();
    let joint = eliminate(reduced_factors(net, case, &mask), &hidden);
    let evidence = joint.total();
    if !(evidence > T::zero()) {
        return Err(Error::ImpossibleEvidence);
    }

    let mut full: Vec<usize> = case.iter().map(|o| o.unwrap_or(0)).collect();
    let mut pstates = vec![0usize; parents.len()];
    for k in 0..codec.len() {
        codec.decode_into(k, &mut pstates);
        if parents
            .iter()
            .zip(&pstates)
            .any(|(&p, &st)| case[p].is_some_and(|obs| obs != st))
        {
            continue;
        }
        for (&p, &st) in parents.iter().zip(&pstates) {
            full[p] = st;
        }
        for j in 0..s.cardinality(node) {
            if case[node].is_some_and(|obs| obs != j) {
                continue;
            }
            full[node] = j;
            table.add(j, k, joint.value_at(&full) / evidence);
        }
    }
    Ok(table)
}

/// Family posteriors of every node for one case.
pub fn case_family_posteriors<T: Scalar>(
    net: &DiscreteNetwork<T>,
    case: &[Observation],
) -> Result<Vec<FamilyTable<T>>> {
    (0..net.len())
        .map(|i| family_posterior(net, case, i))
        .collect()
}

/// `log P(observed entries of case)`, marginalising the missing ones.
pub fn evidence_log_likelihood<T: Scalar>(
    net: &DiscreteNetwork<T>,
    case: &[Observation],
) -> Result<T> {
    let s = net.structure();
    s.check_case(case)?;
    if case.iter().all(Option::is_some) {
        let states: Vec<usize> = case.iter().map(|o| o.unwrap_or(0)).collect();
        return Ok(net.log_prob_unchecked(&states));
    }
    let mask = ancestral_mask(s, (0..s.len()).filter(|&v| case[v].is_some()));
    let hidden: Vec<usize> = (0..s.len())
        .filter(|&v| mask[v] && case[v].is_none())
        .collect();
    Ok(eliminate(reduced_factors(net, case, &mask), &hidden)
        .total()
        .ln())
}

/// Mean observed-data log-likelihood per case; equals
/// [`DiscreteNetwork::dataset_score`] when the data are complete.
pub fn observed_data_score<T: Scalar>(net: &DiscreteNetwork<T>, data: &Dataset) -> Result<T> {
    data.check_aligned(net.structure())?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = T::zero();
    for case in data.cases() {
        total = total + evidence_log_likelihood(net, case)?;
    }
    Ok(total / T::of_usize(data.len()))
}

/// `N_ijk = Σ_d P(ν_i = j, π_i = k | x_d)` for every node.
pub fn expected_family_counts<T: Scalar>(
    net: &DiscreteNetwork<T>,
    data: &Dataset,
) -> Result<FamilyCountTable<T>> {
    let s = net.structure();
    data.check_aligned(s)?;
    let mut counts = FamilyCountTable::zeros(s);
    let mut states = vec![0usize; s.len()];
    for case in data.cases() {
        if case.iter().all(Option::is_some) {
            for (slot, o) in states.iter_mut().zip(case) {
                *slot = o.unwrap_or(0);
            }
            for i in 0..s.len() {
                counts.tables[i].add(states[i], s.parent_config(i, &states), T::one());
            }
        } else {
            for i in 0..s.len() {
                let post = family_posterior(net, case, i)?;
                counts.tables[i].add_table(&post);
            }
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NodeSpec;

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
    fn complete_case_is_point_mass() {
        let post = family_posterior(&chain(), &[Some(1), Some(0)], 1).unwrap();
        assert_eq!(post.values(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn fully_missing_parentless_node_gives_marginal() {
        let post = family_posterior(&chain(), &[None, None], 0).unwrap();
        assert_eq!(post.values(), &[0.6, 0.4]);
    }

    #[test]
    fn hidden_parent_posterior_by_hand() {
        // P(A | B=1) ∝ (0.6*0.2, 0.4*0.7)
        let post = family_posterior(&chain(), &[None, Some(1)], 1).unwrap();
        let z = 0.6 * 0.2 + 0.4 * 0.7;
        assert!((post.get(1, 0) - 0.12 / z).abs() < 1e-15);
        assert!((post.get(1, 1) - 0.28 / z).abs() < 1e-15);
        assert_eq!(post.get(0, 0), 0.0);
    }

    #[test]
    fn out_of_range_state_is_an_error() {
        assert!(matches!(
            family_posterior(&chain(), &[Some(2), None], 1),
            Err(Error::StateOutOfRange { .. })
        ));
    }

    #[test]
    fn evidence_likelihood_marginalises() {
        let ll = evidence_log_likelihood(&chain(), &[None, Some(1)]).unwrap();
        assert!((ll - (0.12f64 + 0.28).ln()).abs() < 1e-15);
        assert_eq!(evidence_log_likelihood(&chain(), &[None, None]).unwrap(), 0.0);
    }

    #[test]
    fn impossible_evidence_detected() {
        let s = Structure::new(vec![NodeSpec::new("A", 2, vec![]), NodeSpec::new("B", 2, vec![0])])
            .unwrap();
        let net = DiscreteNetwork::from_rows(
            s,
            vec![vec![vec![1.0, 0.0]], vec![vec![1.0, 0.0], vec![0.5, 0.5]]],
        )
        .unwrap();
        assert!(matches!(
            family_posterior(&net, &[None, Some(1)], 0),
            Err(Error::ImpossibleEvidence)
        ));
    }

    #[test]
    fn one_missing_case_counts_sum_to_one() {
        let data = Dataset::new(vec!["A".into(), "B".into()], vec![vec![None, None]]).unwrap();
        let counts = expected_family_counts(&chain(), &data).unwrap();
        assert_eq!(counts.node(0).values(), &[0.6, 0.4]);
        let b = counts.node(1).values();
        let expected = [0.6 * 0.8, 0.6 * 0.2, 0.4 * 0.3, 0.4 * 0.7];
        for (x, y) in b.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
