//! MAP estimation of mixture networks by EM.
//!
//! Every submodel of a node reads its counts from the same family table,
//! computed under the collapsed network and marginalised onto the submodel's
//! parent subset. Responsibilities only drive the weight update.
//!
//! One EM step:
//!
//! 1. collapse the current mixture to a conventional network;
//! 2. compute expected family counts under it (and, for incomplete data, the
//!    per-case family posteriors);
//! 3. compute responsibilities under the current parameters and sum them;
//! 4. replace every submodel CPT by the ratio of marginalised prior-plus-data counts;
//! 5. replace the weights by the ratio of prior-plus-responsibility sums;
//! 6. record the observed-data score of the new collapsed network.

use log::warn;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::inference::{
    case_family_posteriors, expected_family_counts, observed_data_score, FamilyCountTable,
    FamilyTable,
};
use crate::mixture::{capped_subsets, projection_for, MixtureNetwork, SubsetProjection};
use crate::network::{DiscreteNetwork, Structure};
use crate::scalar::{entropy, xlogy, Scalar};

/// Dirichlet-form priors: family pseudocounts `N⁰_ijk` and weight pseudocounts `α_{i,m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorSpec<T> {
    pub family: FamilyPrior<T>,
    pub weights: WeightPrior<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyPrior<T> {
    /// The same pseudocount in every cell of every full family table.
    Uniform(T),
    /// Explicit full-family tables, one per node.
    Tables(FamilyCountTable<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightPrior<T> {
    /// The same pseudocount for every submodel.
    Uniform(T),
    /// `α[i][m]` for node `i`, submodel `m`.
    PerSubmodel(Vec<Vec<T>>),
}

impl<T: Scalar> Default for PriorSpec<T> {
    fn default() -> Self {
        PriorSpec::uniform(T::of(0.5), T::one())
    }
}

impl<T: Scalar> PriorSpec<T> {
    pub fn uniform(family_pseudocount: T, weight_pseudocount: T) -> Self {
        PriorSpec {
            family: FamilyPrior::Uniform(family_pseudocount),
            weights: WeightPrior::Uniform(weight_pseudocount),
        }
    }

    /// All pseudocounts zero: plain maximum likelihood.
    pub fn zero() -> Self {
        Self::uniform(T::zero(), T::zero())
    }

    pub fn family_tables(&self, structure: &Structure) -> Result<FamilyCountTable<T>> {
        let tables = match &self.family {
            FamilyPrior::Uniform(c) => {
                check_pseudocount(*c)?;
                FamilyCountTable::filled(structure, *c)
            }
            FamilyPrior::Tables(t) => {
                let t = FamilyCountTable::from_tables(structure, t.tables().to_vec())?;
                for table in t.tables() {
                    for &v in table.values() {
                        check_pseudocount(v)?;
                    }
                }
                t
            }
        };
        Ok(tables)
    }

    pub fn weight_pseudocounts(&self, node: usize, submodels: usize) -> Result<Vec<T>> {
        let alpha = match &self.weights {
            WeightPrior::Uniform(a) => vec![*a; submodels],
            WeightPrior::PerSubmodel(all) => {
                let row = all.get(node).ok_or_else(|| {
                    Error::InvalidPrior(format!("no weight pseudocounts for node {node}"))
                })?;
                if row.len() != submodels {
                    return Err(Error::InvalidPrior(format!(
                        "node {node}: {} weight pseudocounts for {submodels} submodels",
                        row.len()
                    )));
                }
                row.clone()
            }
        };
        for &a in &alpha {
            check_pseudocount(a)?;
        }
        Ok(alpha)
    }
}

fn check_pseudocount<T: Scalar>(v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPrior(format!("pseudocount {v} is negative or non-finite")))
    }
}

/// Which parent subsets each node mixes over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubstructurePlan {
    /// A single submodel holding all candidate parents: the conventional network.
    Conventional,
    /// Every subset of at most `caps[i]` candidate parents.
    Capped(Vec<usize>),
    /// Explicit subsets per node, in canonical order.
    Explicit(Vec<Vec<Vec<usize>>>),
}

impl SubstructurePlan {
    /// Caps equal to each node's candidate count (all subsets).
    pub fn all_subsets(structure: &Structure) -> Self {
        SubstructurePlan::Capped((0..structure.len()).map(|i| structure.parents(i).len()).collect())
    }

    pub fn subsets(&self, structure: &Structure) -> Result<Vec<Vec<Vec<usize>>>> {
        match self {
            SubstructurePlan::Conventional => Ok((0..structure.len())
                .map(|i| vec![structure.parents(i).to_vec()])
                .collect()),
            SubstructurePlan::Capped(caps) => capped_subsets(structure, caps),
            SubstructurePlan::Explicit(subsets) => Ok(subsets.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmConfig {
    pub max_iters: usize,
    /// Stop once `|s_t - s_{t-1}| < rel_tol * |s_{t-1}|` for the observed-data score `s`.
    pub rel_tol: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iters: 200,
            rel_tol: 1e-6,
        }
    }
}

/// Marginalises a full family table onto a parent subset:
/// `N_{ijk'} = Σ_{k : proj(k) = k'} N_ijk`.
pub fn marginalize_counts<T: Scalar>(
    full: &FamilyTable<T>,
    candidates: &[usize],
    subset: &[usize],
) -> Result<FamilyTable<T>> {
    if candidates.len() != full.parent_cards().len() {
        return Err(Error::DimensionMismatch {
            expected: full.parent_cards().len(),
            actual: candidates.len(),
        });
    }
    let proj = SubsetProjection::new(candidates, full.parent_cards(), subset)?;
    Ok(marginalize_with(full, &proj))
}

pub(crate) fn marginalize_with<T: Scalar>(
    full: &FamilyTable<T>,
    proj: &SubsetProjection,
) -> FamilyTable<T> {
    let q = full.cardinality();
    let mut out = FamilyTable::zeros(q, proj.subset_codec().cardinalities().to_vec());
    for k in 0..full.parent_configs() {
        let kp = proj.project(k);
        for j in 0..q {
            out.add(j, kp, full.get(j, k));
        }
    }
    out
}

/// Result of a CPT update; `uniform_columns` lists configurations whose
/// prior-plus-data total was zero and which therefore fell back to uniform.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaUpdate<T> {
    pub cpt: Vec<T>,
    pub uniform_columns: Vec<usize>,
}

/// `θ_jk = (N⁰_jk + N_jk) / (N⁰_·k + N_·k)`.
pub fn theta_update<T: Scalar>(
    counts: &FamilyTable<T>,
    priors: &FamilyTable<T>,
) -> Result<ThetaUpdate<T>> {
    if !counts.same_shape(priors) {
        return Err(Error::DimensionMismatch {
            expected: priors.values().len(),
            actual: counts.values().len(),
        });
    }
    if counts
        .values()
        .iter()
        .chain(priors.values())
        .any(|v| !(*v >= T::zero()))
    {
        return Err(Error::NegativeCount);
    }
    let q = counts.cardinality();
    let data_totals = counts.column_totals();
    let prior_totals = priors.column_totals();
    let mut cpt = Vec::with_capacity(counts.values().len());
    let mut uniform_columns = Vec::new();
    for k in 0..counts.parent_configs() {
        let denom = prior_totals[k] + data_totals[k];
        if denom > T::zero() {
            cpt.extend((0..q).map(|j| (priors.get(j, k) + counts.get(j, k)) / denom));
        } else {
            uniform_columns.push(k);
            cpt.extend((0..q).map(|_| T::one() / T::of_usize(q)));
        }
    }
    Ok(ThetaUpdate {
        cpt,
        uniform_columns,
    })
}

/// `ψ_m = (α_m + A_m) / (α_· + N)`.
pub fn psi_update<T: Scalar>(resp_sums: &[T], alpha: &[T], n: T) -> Result<Vec<T>> {
    if resp_sums.len() != alpha.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.len(),
            actual: resp_sums.len(),
        });
    }
    if resp_sums.iter().any(|a| !(*a >= T::zero())) {
        return Err(Error::NegativeCount);
    }
    if alpha.iter().any(|a| !(*a >= T::zero())) {
        return Err(Error::InvalidPrior("negative weight pseudocount".into()));
    }
    let denom = alpha.iter().copied().sum::<T>() + n;
    if !(denom > T::zero()) {
        return Err(Error::ZeroDenominator);
    }
    Ok(resp_sums
        .iter()
        .zip(alpha)
        .map(|(&a, &al)| (al + a) / denom)
        .collect())
}

/// Per-node responsibilities of one case and whether any node needed the uniform fallback.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseResponsibilities<T> {
    pub per_node: Vec<Vec<T>>,
    pub fallback: bool,
}

/// `r_m ∝ ψ_m Σ_{j,k} P(j, k | case) θ_{j, proj_m(k), m}` for every node, given
/// the case's family posteriors under the collapsed network.
pub fn responsibilities<T: Scalar>(
    mix: &MixtureNetwork<T>,
    posteriors: &[FamilyTable<T>],
) -> Result<CaseResponsibilities<T>> {
    if posteriors.len() != mix.len() {
        return Err(Error::DimensionMismatch {
            expected: mix.len(),
            actual: posteriors.len(),
        });
    }
    let mut fallback = false;
    let per_node = posteriors
        .iter()
        .enumerate()
        .map(|(i, post)| {
            let (r, fb) = node_responsibilities(mix, i, post);
            fallback |= fb;
            r
        })
        .collect();
    Ok(CaseResponsibilities { per_node, fallback })
}

/// Unnormalised responsibilities weighted by `table`, normalised over submodels.
fn node_responsibilities<T: Scalar>(
    mix: &MixtureNetwork<T>,
    i: usize,
    post: &FamilyTable<T>,
) -> (Vec<T>, bool) {
    let q = mix.structure().cardinality(i);
    let subs = mix.submodels(i);
    let mut r: Vec<T> = subs
        .iter()
        .map(|s| {
            let mut pred = T::zero();
            for (idx, &p) in post.values().iter().enumerate() {
                if p > T::zero() {
                    pred = pred + p * s.prob(q, idx % q, idx / q);
                }
            }
            s.weight() * pred
        })
        .collect();
    normalize_or_uniform(&mut r)
}

fn normalize_or_uniform<T: Scalar>(r: &mut [T]) -> (Vec<T>, bool) {
    let total: T = r.iter().copied().sum();
    if total > T::zero() {
        (r.iter().map(|&v| v / total).collect(), false)
    } else {
        (vec![T::one() / T::of_usize(r.len()); r.len()], true)
    }
}

/// Expected sufficient statistics of one E-step.
#[derive(Clone, Debug, PartialEq)]
pub struct SufficientStats<T> {
    /// Family counts `N_ijk` under the collapsed network.
    pub counts: FamilyCountTable<T>,
    /// `A_{i,m}`: responsibilities summed over cases.
    pub resp_sums: Vec<Vec<T>>,
    pub cases: usize,
    /// Number of (case, node) pairs that used the uniform responsibility fallback.
    pub fallbacks: usize,
}

/// E-step under the current mixture: counts from its collapse, responsibilities
/// from its weights and submodel CPTs.
pub fn sufficient_stats<T: Scalar>(
    mix: &MixtureNetwork<T>,
    data: &Dataset,
) -> Result<SufficientStats<T>> {
    let collapsed = mix.collapse();
    sufficient_stats_under(mix, &collapsed, data)
}

fn sufficient_stats_under<T: Scalar>(
    mix: &MixtureNetwork<T>,
    collapsed: &DiscreteNetwork<T>,
    data: &Dataset,
) -> Result<SufficientStats<T>> {
    let s = mix.structure();
    data.check_aligned(s)?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut resp_sums: Vec<Vec<T>> = (0..s.len())
        .map(|i| vec![T::zero(); mix.submodels(i).len()])
        .collect();
    let mut fallbacks = 0;
    let counts = if data.is_complete() {
        // responsibilities depend on the case only through its family state
        let counts = expected_family_counts(collapsed, data)?;
        for (i, sums) in resp_sums.iter_mut().enumerate() {
            let table = counts.node(i);
            let q = table.cardinality();
            let mut point = FamilyTable::zeros(q, table.parent_cards().to_vec());
            for (idx, &n) in table.values().iter().enumerate() {
                if n > T::zero() {
                    point.add(idx % q, idx / q, T::one());
                    let (r, fb) = node_responsibilities(mix, i, &point);
                    point.add(idx % q, idx / q, -T::one());
                    if fb {
                        fallbacks += 1;
                    }
                    for (acc, rm) in sums.iter_mut().zip(r) {
                        *acc = *acc + n * rm;
                    }
                }
            }
        }
        counts
    } else {
        let mut counts = FamilyCountTable::zeros(s);
        let mut tables: Vec<FamilyTable<T>> = counts.tables().to_vec();
        for case in data.cases() {
            let posts = case_family_posteriors(collapsed, case)?;
            let resp = responsibilities(mix, &posts)?;
            if resp.fallback {
                fallbacks += 1;
            }
            for (i, post) in posts.iter().enumerate() {
                tables[i].add_table(post);
                for (acc, &rm) in resp_sums[i].iter_mut().zip(&resp.per_node[i]) {
                    *acc = *acc + rm;
                }
            }
        }
        counts = FamilyCountTable::from_tables(s, tables)?;
        counts
    };
    if fallbacks > 0 {
        warn!("{fallbacks} responsibility vectors were all zero; used uniform fallback");
    }
    Ok(SufficientStats {
        counts,
        resp_sums,
        cases: data.len(),
        fallbacks,
    })
}

/// `Σ (N⁰ + N) ln θ + Σ (α + A) ln ψ` at the mixture's parameters for fixed statistics.
/// Zero parameters with positive weight give `-inf`.
pub fn objective_with_stats<T: Scalar>(
    mix: &MixtureNetwork<T>,
    stats: &SufficientStats<T>,
    priors: &PriorSpec<T>,
) -> Result<T> {
    let s = mix.structure();
    let prior_tables = priors.family_tables(s)?;
    let mut total = T::zero();
    for i in 0..s.len() {
        let q = s.cardinality(i);
        let alpha = priors.weight_pseudocounts(i, mix.submodels(i).len())?;
        for (m, sub) in mix.submodels(i).iter().enumerate() {
            let n = marginalize_with(stats.counts.node(i), sub.projection());
            let n0 = marginalize_with(prior_tables.node(i), sub.projection());
            for (idx, &theta) in sub.cpt().iter().enumerate() {
                let (j, k) = (idx % q, idx / q);
                total = total + xlogy(n0.get(j, k) + n.get(j, k), theta);
            }
            total = total + xlogy(alpha[m] + stats.resp_sums[i][m], sub.weight());
        }
    }
    Ok(total)
}

/// Objective at the mixture's own E-step statistics.
pub fn objective_value<T: Scalar>(
    mix: &MixtureNetwork<T>,
    data: &Dataset,
    priors: &PriorSpec<T>,
) -> Result<T> {
    let stats = sufficient_stats(mix, data)?;
    objective_with_stats(mix, &stats, priors)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord<T> {
    /// 0 is the initial model, `t` the model after `t` EM steps.
    pub iteration: usize,
    /// Observed-data log-likelihood of the collapsed network divided by N.
    pub score: T,
    /// Objective at this iteration's parameters and statistics.
    pub objective: T,
    /// Entropy (nats) of each node's weight vector.
    pub weight_entropy: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport<T> {
    pub iterations: Vec<IterationRecord<T>>,
    pub converged: bool,
    pub mixture: MixtureNetwork<T>,
    pub collapsed: DiscreteNetwork<T>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> FitReport<T> {
    /// Number of EM steps taken.
    pub fn steps(&self) -> usize {
        self.iterations.len().saturating_sub(1)
    }

    pub fn final_score(&self) -> T {
        self.iterations.last().map_or(T::nan(), |r| r.score)
    }

    /// Submodels of node `i` sorted by descending weight, as (parents, weight).
    pub fn ranked_submodels(&self, i: usize) -> Vec<(Vec<usize>, T)> {
        let mut ranked: Vec<(Vec<usize>, T)> = self
            .mixture
            .submodels(i)
            .iter()
            .map(|s| (s.parents().to_vec(), s.weight()))
            .collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        ranked
    }
}

/// Fits a mixture network by EM; see the module docs for the step order.
pub fn em_fit<T: Scalar>(
    structure: &Structure,
    plan: &SubstructurePlan,
    data: &Dataset,
    priors: &PriorSpec<T>,
    config: &EmConfig,
) -> Result<FitReport<T>> {
    em_fit_with(structure, plan, data, priors, config, |_, _, _| {})
}

/// [`em_fit`] with an observer called after the initial model and after every step.
pub fn em_fit_with<T, F>(
    structure: &Structure,
    plan: &SubstructurePlan,
    data: &Dataset,
    priors: &PriorSpec<T>,
    config: &EmConfig,
    mut observer: F,
) -> Result<FitReport<T>>
where
    T: Scalar,
    F: FnMut(&IterationRecord<T>, &MixtureNetwork<T>, &DiscreteNetwork<T>),
{
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    data.check_aligned(structure)?;
    if !(config.rel_tol >= 0.0) {
        return Err(Error::InvalidPrior(format!("rel_tol {} is negative", config.rel_tol)));
    }
    let prior_tables = priors.family_tables(structure)?;
    let subsets = plan.subsets(structure)?;
    let alphas = subsets
        .iter()
        .enumerate()
        .map(|(i, s)| priors.weight_pseudocounts(i, s.len()))
        .collect::<Result<Vec<_>>>()?;
    let n = T::of_usize(data.len());
    if let Some(i) = alphas
        .iter()
        .position(|a| !(a.iter().copied().sum::<T>() + n > T::zero()))
    {
        return Err(Error::InvalidPrior(format!("node {i}: alpha total plus N is zero")));
    }
    let mut warnings = Vec::new();

    // initial submodel CPTs from tabulated counts, or expected counts under a
    // uniform bootstrap network when data are missing
    let mut mix = MixtureNetwork::uniform(structure.clone(), subsets)?;
    let init_counts = if data.is_complete() {
        expected_family_counts(&mix.collapse(), data)?
    } else {
        expected_family_counts(&DiscreteNetwork::uniform(structure.clone()), data)?
    };
    update_thetas(&mut mix, &init_counts, &prior_tables, &mut warnings)?;

    let complete = data.is_complete();
    let mut collapsed = mix.collapse();
    let mut stats = sufficient_stats_under(&mix, &collapsed, data)?;
    let mut record = IterationRecord {
        iteration: 0,
        score: score_of(&collapsed, &stats, data, complete)?,
        objective: objective_with_stats(&mix, &stats, priors)?,
        weight_entropy: weight_entropies(&mix),
    };
    observer(&record, &mix, &collapsed);
    let mut iterations = vec![record.clone()];
    let mut converged = false;

    for iteration in 1..=config.max_iters {
        // M-step from the E-step statistics of the current parameters
        update_thetas(&mut mix, &stats.counts, &prior_tables, &mut warnings)?;
        for (i, alpha) in alphas.iter().enumerate() {
            let psi = psi_update(&stats.resp_sums[i], alpha, n)?;
            mix.set_weights(i, &psi)?;
        }
        if stats.fallbacks > 0 {
            warnings.push(format!(
                "iteration {iteration}: {} uniform responsibility fallbacks",
                stats.fallbacks
            ));
        }

        collapsed = mix.collapse();
        stats = sufficient_stats_under(&mix, &collapsed, data)?;
        let previous = record.score;
        record = IterationRecord {
            iteration,
            score: score_of(&collapsed, &stats, data, complete)?,
            objective: objective_with_stats(&mix, &stats, priors)?,
            weight_entropy: weight_entropies(&mix),
        };
        let last_objective = iterations.last().map_or(T::neg_infinity(), |r| r.objective);
        if record.objective < last_objective - T::of(1e-6) {
            let msg = format!(
                "iteration {iteration}: objective decreased from {last_objective} to {}",
                record.objective
            );
            warn!("{msg}");
            warnings.push(msg);
        }
        observer(&record, &mix, &collapsed);
        iterations.push(record.clone());

        let change = (record.score - previous).abs().as_f64();
        let scale = previous.abs().as_f64();
        if record.score == previous || change < config.rel_tol * scale {
            converged = true;
            break;
        }
    }

    Ok(FitReport {
        iterations,
        converged,
        mixture: mix,
        collapsed,
        warnings,
    })
}

/// Conventional MAP network: `θ_ijk = (N⁰_ijk + N_ijk) / (N⁰_i·k + N_i·k)`.
///
/// Complete data are tabulated directly; incomplete data go through
/// [`em_fit`] with [`SubstructurePlan::Conventional`] and `config`.
pub fn conventional_map<T: Scalar>(
    structure: &Structure,
    data: &Dataset,
    priors: &PriorSpec<T>,
    config: &EmConfig,
) -> Result<DiscreteNetwork<T>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !data.is_complete() {
        return Ok(em_fit(structure, &SubstructurePlan::Conventional, data, priors, config)?.collapsed);
    }
    let prior_tables = priors.family_tables(structure)?;
    let counts = expected_family_counts(&DiscreteNetwork::uniform(structure.clone()), data)?;
    let cpts = (0..structure.len())
        .map(|i| Ok(theta_update(counts.node(i), prior_tables.node(i))?.cpt))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteNetwork::from_parts_unchecked(structure.clone(), cpts))
}

fn update_thetas<T: Scalar>(
    mix: &mut MixtureNetwork<T>,
    counts: &FamilyCountTable<T>,
    prior_tables: &FamilyCountTable<T>,
    warnings: &mut Vec<String>,
) -> Result<()> {
    for i in 0..mix.len() {
        for m in 0..mix.submodels(i).len() {
            let proj = projection_for(mix.structure(), i, mix.submodels(i)[m].parents())?;
            let update = theta_update(
                &marginalize_with(counts.node(i), &proj),
                &marginalize_with(prior_tables.node(i), &proj),
            )?;
            if !update.uniform_columns.is_empty() {
                let msg = format!(
                    "node `{}` submodel {m}: {} empty columns set to uniform",
                    mix.structure().node(i).name,
                    update.uniform_columns.len()
                );
                log::debug!("{msg}");
                if !warnings.contains(&msg) {
                    warnings.push(msg);
                }
            }
            mix.set_cpt(i, m, update.cpt)?;
        }
    }
    Ok(())
}

/// For complete data the score is read off the family counts (identical to
/// [`DiscreteNetwork::dataset_score`] up to summation order).
fn score_of<T: Scalar>(
    collapsed: &DiscreteNetwork<T>,
    stats: &SufficientStats<T>,
    data: &Dataset,
    complete: bool,
) -> Result<T> {
    if !complete {
        return observed_data_score(collapsed, data);
    }
    let mut total = T::zero();
    for i in 0..collapsed.len() {
        for (&n, &theta) in stats.counts.node(i).values().iter().zip(collapsed.cpt(i)) {
            total = total + xlogy(n, theta);
        }
    }
    Ok(total / T::of_usize(stats.cases))
}

fn weight_entropies<T: Scalar>(mix: &MixtureNetwork<T>) -> Vec<T> {
    (0..mix.len()).map(|i| entropy(&mix.weights(i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NodeSpec;

    fn table(q: usize, cards: Vec<usize>, values: Vec<f64>) -> FamilyTable<f64> {
        FamilyTable::from_values(q, cards, values).unwrap()
    }

    #[test]
    fn theta_update_examples() {
        let u = theta_update(&table(2, vec![], vec![3.0, 1.0]), &table(2, vec![], vec![0.0, 0.0]))
            .unwrap();
        assert_eq!(u.cpt, vec![0.75, 0.25]);
        let u = theta_update(&table(2, vec![], vec![0.0, 0.0]), &table(2, vec![], vec![0.5, 0.5]))
            .unwrap();
        assert_eq!(u.cpt, vec![0.5, 0.5]);
        let u = theta_update(
            &table(3, vec![], vec![2.0, 2.0, 4.0]),
            &table(3, vec![], vec![1.0, 1.0, 1.0]),
        )
        .unwrap();
        for (got, want) in u.cpt.iter().zip([3.0 / 11.0, 3.0 / 11.0, 5.0 / 11.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn theta_update_zero_column_falls_back_to_uniform() {
        let u = theta_update(
            &table(2, vec![2], vec![1.0, 3.0, 0.0, 0.0]),
            &table(2, vec![2], vec![0.0; 4]),
        )
        .unwrap();
        assert_eq!(u.cpt, vec![0.25, 0.75, 0.5, 0.5]);
        assert_eq!(u.uniform_columns, vec![1]);
    }

    #[test]
    fn theta_update_errors() {
        assert!(matches!(
            theta_update(&table(2, vec![], vec![-1.0, 1.0]), &table(2, vec![], vec![0.0, 0.0])),
            Err(Error::NegativeCount)
        ));
        assert!(theta_update(&table(2, vec![], vec![1.0, 1.0]), &table(3, vec![], vec![0.0; 3]))
            .is_err());
    }

    #[test]
    fn psi_update_examples() {
        assert_eq!(psi_update(&[10.0, 0.0], &[0.0, 0.0], 10.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(psi_update(&[5.0, 5.0], &[1.0, 1.0], 10.0).unwrap(), vec![0.5, 0.5]);
        assert_eq!(psi_update(&[8.0, 2.0], &[1.0, 1.0], 10.0).unwrap(), vec![0.75, 0.25]);
        assert!(matches!(
            psi_update(&[0.0, 0.0], &[0.0, 0.0], 0.0),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn marginalize_examples() {
        // node with two binary candidate parents (0, 1); entry (j, k) at k*2 + j
        let full = table(2, vec![2, 2], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(marginalize_counts(&full, &[0, 1], &[0, 1]).unwrap(), full);
        let empty = marginalize_counts(&full, &[0, 1], &[]).unwrap();
        assert_eq!(empty.values(), &[16.0, 20.0]);
        // keep parent 0: k' = a; (a=0) sums k = (0,0), (0,1)
        let keep_first = marginalize_counts(&full, &[0, 1], &[0]).unwrap();
        assert_eq!(keep_first.values(), &[1.0 + 3.0, 2.0 + 4.0, 5.0 + 7.0, 6.0 + 8.0]);
        assert!(matches!(
            marginalize_counts(&full, &[0, 1], &[2]),
            Err(Error::NotASubset(_))
        ));
    }

    fn two_submodel_mix(psi: [f64; 2], pred: [f64; 2]) -> MixtureNetwork<f64> {
        use crate::mixture::SubmodelSpec;
        let s = Structure::new(vec![NodeSpec::new("A", 2, vec![]), NodeSpec::new("B", 2, vec![0])])
            .unwrap();
        MixtureNetwork::new(
            s,
            vec![
                vec![SubmodelSpec {
                    parents: vec![],
                    cpt: vec![0.5, 0.5],
                    weight: 1.0,
                }],
                vec![
                    SubmodelSpec {
                        parents: vec![],
                        cpt: vec![pred[0], 1.0 - pred[0]],
                        weight: psi[0],
                    },
                    SubmodelSpec {
                        parents: vec![0],
                        cpt: vec![pred[1], 1.0 - pred[1], 0.5, 0.5],
                        weight: psi[1],
                    },
                ],
            ],
        )
        .unwrap()
    }

    fn point(q: usize, cards: Vec<usize>, j: usize, k: usize) -> FamilyTable<f64> {
        let mut t = FamilyTable::zeros(q, cards);
        t.add(j, k, 1.0);
        t
    }

    #[test]
    fn responsibility_examples() {
        let posts = vec![point(2, vec![], 0, 0), point(2, vec![2], 0, 0)];
        let mix = two_submodel_mix([0.5, 0.5], [0.8, 0.2]);
        let r = responsibilities(&mix, &posts).unwrap();
        assert_eq!(r.per_node[0], vec![1.0]);
        assert!((r.per_node[1][0] - 0.8).abs() < 1e-15);
        assert!((r.per_node[1][1] - 0.2).abs() < 1e-15);

        let mix = two_submodel_mix([0.3, 0.7], [0.6, 0.6]);
        let r = responsibilities(&mix, &posts).unwrap();
        assert!((r.per_node[1][0] - 0.3).abs() < 1e-15);
        assert!((r.per_node[1][1] - 0.7).abs() < 1e-15);
        assert!(!r.fallback);
    }

    #[test]
    fn responsibility_fallback_is_uniform() {
        let mix = two_submodel_mix([0.5, 0.5], [1.0, 1.0]);
        let posts = vec![point(2, vec![], 0, 0), point(2, vec![2], 1, 0)];
        let r = responsibilities(&mix, &posts).unwrap();
        assert!(r.fallback);
        assert_eq!(r.per_node[1], vec![0.5, 0.5]);
    }

    #[test]
    fn objective_of_uniform_parameters() {
        let s = Structure::new(vec![NodeSpec::new("A", 2, vec![]), NodeSpec::new("B", 3, vec![0])])
            .unwrap();
        let mix = MixtureNetwork::<f64>::uniform(s.clone(), vec![vec![vec![]], vec![vec![0]]])
            .unwrap();
        let data = Dataset::new(
            vec!["A".into(), "B".into()],
            vec![vec![Some(0), Some(2)], vec![Some(1), Some(0)], vec![Some(1), Some(1)]],
        )
        .unwrap();
        let f = objective_value(&mix, &data, &PriorSpec::zero()).unwrap();
        let expected = 3.0 * (0.5f64).ln() + 3.0 * (1.0f64 / 3.0).ln();
        assert!((f - expected).abs() < 1e-12);
    }

    #[test]
    fn em_rejects_bad_input() {
        let s = Structure::empty(&["A"], &[2]).unwrap();
        let empty = Dataset::new(vec!["A".into()], vec![]).unwrap();
        let cfg = EmConfig::default();
        assert!(matches!(
            em_fit::<f64>(&s, &SubstructurePlan::Conventional, &empty, &PriorSpec::default(), &cfg),
            Err(Error::EmptyDataset)
        ));
        let data = Dataset::new(vec!["A".into()], vec![vec![Some(1)]]).unwrap();
        let bad = PriorSpec::uniform(-1.0, 1.0);
        assert!(matches!(
            em_fit(&s, &SubstructurePlan::Conventional, &data, &bad, &cfg),
            Err(Error::InvalidPrior(_))
        ));
    }
}
