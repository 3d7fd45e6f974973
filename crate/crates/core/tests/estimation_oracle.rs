mod common;

use bmn_core::estimation::theta_update;
use bmn_core::{
    em_fit, em_fit_with, marginalize_counts, objective_with_stats, sufficient_stats, Dataset,
    DiscreteNetwork, EmConfig, FamilyTable, MixtureNetwork, PriorSpec, Structure,
    SubstructurePlan,
};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginalisation_conserves_counts(
        cards in prop::collection::vec(2usize..4, 0..4),
        q in 2usize..4,
        mask in any::<u8>(),
        seed in any::<u64>(),
    ) {
        let r: usize = cards.iter().product();
        let values: Vec<f64> = (0..r * q)
            .map(|x| ((x as u64).wrapping_mul(seed | 1) % 17) as f64)
            .collect();
        let full = FamilyTable::from_values(q, cards.clone(), values).unwrap();
        let candidates: Vec<usize> = (0..cards.len()).collect();
        let subset: Vec<usize> = candidates.iter().copied().filter(|&c| mask >> c & 1 == 1).collect();
        let marg = marginalize_counts(&full, &candidates, &subset).unwrap();
        prop_assert_eq!(marg.state_totals(), full.state_totals());
        // integer-valued entries make the sums exact
        prop_assert_eq!(marg.total(), full.total());
    }
}

#[test]
fn hand_tabulated_marginalisation() {
    // child binary, parents (P0, P1) binary; k = 2 * p0 + p1
    let n = [
        [1.0, 2.0], // k=(0,0): j=0, j=1
        [3.0, 4.0], // k=(0,1)
        [5.0, 6.0], // k=(1,0)
        [7.0, 8.0], // k=(1,1)
    ];
    let full = FamilyTable::from_values(2, vec![2, 2], n.concat()).unwrap();
    let drop_second = marginalize_counts(&full, &[0, 1], &[0]).unwrap();
    // (j, k'=0) = N_{j,(0,0)} + N_{j,(0,1)}
    assert_eq!(drop_second.get(0, 0), 1.0 + 3.0);
    assert_eq!(drop_second.get(1, 0), 2.0 + 4.0);
    assert_eq!(drop_second.get(0, 1), 5.0 + 7.0);
    let drop_first = marginalize_counts(&full, &[0, 1], &[1]).unwrap();
    assert_eq!(drop_first.get(0, 0), 1.0 + 5.0);
    assert_eq!(drop_first.get(1, 1), 4.0 + 8.0);
}

fn skeleton() -> Structure {
    Structure::full(&["One", "Two", "Three", "Four"], &[3, 2, 2, 3]).unwrap()
}

#[test]
fn singleton_plan_reproduces_count_and_normalise_map() {
    let truth = DiscreteNetwork::<f64>::random_cpts(skeleton(), 4);
    let data = truth.sample(250, 9);
    let c = 0.5;
    let report = em_fit(
        truth.structure(),
        &SubstructurePlan::Conventional,
        &data,
        &PriorSpec::uniform(c, 1.0),
        &EmConfig { max_iters: 1, rel_tol: 0.0 },
    )
    .unwrap();
    let s = truth.structure();
    let cards = s.cardinalities();
    for i in 0..s.len() {
        let q = cards[i];
        let r = s.parent_configs(i);
        let mut n = vec![0.0f64; q * r];
        for case in data.cases() {
            let st: Vec<usize> = case.iter().map(|o| o.unwrap()).collect();
            n[config_index(&cards, s.parents(i), &st) * q + st[i]] += 1.0;
        }
        for k in 0..r {
            let prior_total: f64 = (0..q).map(|_| c).sum();
            let data_total: f64 = n[k * q..(k + 1) * q].iter().sum();
            for j in 0..q {
                let want = (c + n[k * q + j]) / (prior_total + data_total);
                assert_eq!(report.collapsed.prob(i, j, k), want);
            }
        }
    }
}

#[test]
fn complete_data_submodel_tables_stay_fixed() {
    let truth = DiscreteNetwork::<f64>::random_cpts(skeleton(), 5);
    let data = truth.sample(120, 1);
    let mut snapshots: Vec<MixtureNetwork<f64>> = Vec::new();
    em_fit_with(
        truth.structure(),
        &SubstructurePlan::all_subsets(truth.structure()),
        &data,
        &PriorSpec::default(),
        &EmConfig { max_iters: 15, rel_tol: 0.0 },
        |_, mix, _| snapshots.push(mix.clone()),
    )
    .unwrap();
    assert_eq!(snapshots.len(), 16);
    let first = &snapshots[0];
    let mut weights_moved = false;
    for snap in &snapshots[1..] {
        for i in 0..first.len() {
            for (a, b) in first.submodels(i).iter().zip(snap.submodels(i)) {
                assert_eq!(a.cpt(), b.cpt());
                weights_moved |= a.weight() != b.weight();
            }
        }
    }
    assert!(weights_moved);
}

#[test]
fn map_point_is_stationary_under_perturbation() {
    let truth = DiscreteNetwork::<f64>::random_cpts(skeleton(), 6);
    let data = truth.sample(80, 2);
    let priors = PriorSpec::default();
    let report = em_fit(
        truth.structure(),
        &SubstructurePlan::Capped(vec![0, 1, 2, 2]),
        &data,
        &priors,
        &EmConfig { max_iters: 3, rel_tol: 0.0 },
    )
    .unwrap();
    // one more M-step from fixed statistics gives the stationary point of F for those statistics
    let stats = sufficient_stats(&report.mixture, &data).unwrap();
    let mut mix = report.mixture.clone();
    let prior_tables = priors.family_tables(mix.structure()).unwrap();
    for i in 0..mix.len() {
        for m in 0..mix.submodels(i).len() {
            let cands = mix.structure().parents(i).to_vec();
            let parents = mix.submodels(i)[m].parents().to_vec();
            let n = marginalize_counts(stats.counts.node(i), &cands, &parents).unwrap();
            let n0 = marginalize_counts(prior_tables.node(i), &cands, &parents).unwrap();
            mix.set_cpt(i, m, theta_update(&n, &n0).unwrap().cpt).unwrap();
        }
        let alpha = priors.weight_pseudocounts(i, mix.submodels(i).len()).unwrap();
        let psi = bmn_core::psi_update(&stats.resp_sums[i], &alpha, data.len() as f64).unwrap();
        mix.set_weights(i, &psi).unwrap();
    }
    let f0 = objective_with_stats(&mix, &stats, &priors).unwrap();
    for i in 0..mix.len() {
        let q = mix.structure().cardinality(i);
        for m in 0..mix.submodels(i).len() {
            for eps in [1e-3, -1e-3] {
                let mut perturbed = mix.clone();
                let mut cpt = perturbed.submodels(i)[m].cpt().to_vec();
                cpt[0] = (cpt[0] + eps).clamp(1e-9, 1.0);
                let col: f64 = cpt[..q].iter().sum();
                cpt[..q].iter_mut().for_each(|v| *v /= col);
                perturbed.set_cpt(i, m, cpt).unwrap();
                let f = objective_with_stats(&perturbed, &stats, &priors).unwrap();
                assert!(f <= f0 + 1e-12, "node {i} submodel {m}: {f} > {f0}");
            }
        }
    }
}

#[test]
fn moving_theta_toward_count_ratio_increases_objective() {
    let s = Structure::empty(&["A"], &[2]).unwrap();
    let data = Dataset::new(
        vec!["A".into()],
        vec![vec![Some(0)], vec![Some(0)], vec![Some(0)], vec![Some(1)]],
    )
    .unwrap();
    let mut mix = MixtureNetwork::<f64>::uniform(s, vec![vec![vec![]]]).unwrap();
    let priors = PriorSpec::zero();
    let stats = sufficient_stats(&mix, &data).unwrap();
    let mut last = objective_with_stats(&mix, &stats, &priors).unwrap();
    for p in [0.55, 0.6, 0.65, 0.7, 0.75] {
        mix.set_cpt(0, 0, vec![p, 1.0 - p]).unwrap();
        let f = objective_with_stats(&mix, &stats, &priors).unwrap();
        assert!(f > last);
        last = f;
    }
}

#[test]
fn complete_data_score_never_decreases_with_ml_weights() {
    for seed in 0..5 {
        let truth = DiscreteNetwork::<f64>::random_cpts(skeleton(), seed);
        let data = truth.sample(100, seed + 10);
        let report = em_fit(
            truth.structure(),
            &SubstructurePlan::all_subsets(truth.structure()),
            &data,
            &PriorSpec::uniform(0.5, 0.0),
            &EmConfig { max_iters: 60, rel_tol: 0.0 },
        )
        .unwrap();
        for w in report.iterations.windows(2) {
            assert!(w[1].score - w[0].score >= -1e-9);
        }
    }
}

#[test]
fn missing_data_fit_runs_and_stays_normalised() {
    let truth = DiscreteNetwork::<f64>::random_cpts(skeleton(), 21);
    let base = truth.sample(60, 3);
    let hidden: Vec<(usize, usize)> = (0..60).filter(|d| d % 3 == 0).map(|d| (d, d % 4)).collect();
    let data = base.with_missing(&hidden);
    let report = em_fit(
        truth.structure(),
        &SubstructurePlan::Capped(vec![0, 1, 1, 2]),
        &data,
        &PriorSpec::default(),
        &EmConfig { max_iters: 25, rel_tol: 1e-9 },
    )
    .unwrap();
    for i in 0..report.mixture.len() {
        let sum: f64 = report.mixture.weights(i).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
    assert!(report.iterations.iter().all(|r| r.score.is_finite()));
    let stats = sufficient_stats(&report.mixture, &data).unwrap();
    for (i, sums) in stats.resp_sums.iter().enumerate() {
        assert!((sums.iter().sum::<f64>() - 60.0).abs() < 1e-9);
        assert!((stats.counts.node(i).total() - 60.0).abs() < 1e-9);
    }
}

#[test]
fn fit_is_generic_over_f32() {
    let truth = DiscreteNetwork::<f64>::random_cpts(skeleton(), 8);
    let data = truth.sample(200, 4);
    let report = em_fit::<f32>(
        truth.structure(),
        &SubstructurePlan::all_subsets(truth.structure()),
        &data,
        &PriorSpec::default(),
        &EmConfig::default(),
    )
    .unwrap();
    let wide = em_fit::<f64>(
        truth.structure(),
        &SubstructurePlan::all_subsets(truth.structure()),
        &data,
        &PriorSpec::default(),
        &EmConfig { max_iters: report.steps(), rel_tol: 0.0 },
    )
    .unwrap();
    assert!((report.final_score() as f64 - wide.final_score()).abs() < 1e-3);
}

#[test]
fn conventional_map_equals_singleton_em() {
    let truth = DiscreteNetwork::<f64>::random_cpts(skeleton(), 31);
    let data = truth.sample(90, 6);
    let priors = PriorSpec::<f64>::default();
    let direct = bmn_core::conventional_map(truth.structure(), &data, &priors, &EmConfig::default())
        .unwrap();
    let em = em_fit(
        truth.structure(),
        &SubstructurePlan::Conventional,
        &data,
        &priors,
        &EmConfig::default(),
    )
    .unwrap();
    assert_eq!(direct, em.collapsed);
}
