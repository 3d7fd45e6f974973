//! Mixture-network fit on the full structure of an ordering, traced on train
//! and test data after every EM step, alongside conventional reference fits.

use std::io::Write;

use bmn_core::{
    em_fit, em_fit_with, inference::observed_data_score, Dataset, EmConfig, Error, Network,
    PriorSpec, Report, Result, Structure, SubstructurePlan,
};
use serde::Serialize;

use crate::sweep::fmt_score;

#[derive(Clone, Debug)]
pub struct BmnExperimentConfig {
    /// Original node indices in ordering position.
    pub ordering: Vec<usize>,
    /// Per ordering position; `None` allows every subset.
    pub caps: Option<Vec<usize>>,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub priors: PriorSpec<f64>,
    pub em: EmConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub train_score: f64,
    pub test_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceScore {
    pub model: String,
    pub train_score: f64,
    pub test_score: f64,
}

#[derive(Clone, Debug)]
pub struct BmnExperiment {
    pub structure: Structure,
    pub report: Report,
    pub trace: Vec<TracePoint>,
    /// Conventional MAP fits of the true, full and empty structures.
    pub references: Vec<ReferenceScore>,
}

impl BmnExperiment {
    pub fn final_test_score(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |t| t.test_score)
    }

    /// Highest test score along the trace and the first iteration reaching it.
    pub fn peak_test(&self) -> (usize, f64) {
        self.trace
            .iter()
            .fold((0, f64::NEG_INFINITY), |(bi, bs), t| {
                if t.test_score > bs {
                    (t.iteration, t.test_score)
                } else {
                    (bi, bs)
                }
            })
    }

    pub fn write_trace_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["iteration", "train_score", "test_score"])?;
        for t in &self.trace {
            wtr.write_record([
                t.iteration.to_string(),
                fmt_score(t.train_score),
                fmt_score(t.test_score),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Fits a mixture network with per-position parent caps on the full structure of
/// `config.ordering`, using train/test data sampled from `truth`.
pub fn run_bmn_experiment(truth: &Network, config: &BmnExperimentConfig) -> Result<BmnExperiment> {
    let base = truth.structure();
    let v = base.len();
    if config.ordering.len() != v {
        return Err(Error::DimensionMismatch {
            expected: v,
            actual: config.ordering.len(),
        });
    }
    let (train, test) = crate::sample_train_test(truth, config.n_train, config.n_test, config.seed);
    let full = crate::reorder(base, &config.ordering, |b| (0..b).collect())?;
    let train_full = train.aligned_to(&full)?;
    let test_full = test.aligned_to(&full)?;
    let plan = match &config.caps {
        Some(caps) => SubstructurePlan::Capped(caps.clone()),
        None => SubstructurePlan::all_subsets(&full),
    };

    let mut trace = Vec::new();
    let mut test_error = None;
    let report = em_fit_with(
        &full,
        &plan,
        &train_full,
        &config.priors,
        &config.em,
        |record, _, collapsed| match observed_data_score(collapsed, &test_full) {
            Ok(test_score) => trace.push(TracePoint {
                iteration: record.iteration,
                train_score: record.score,
                test_score,
            }),
            Err(e) => {
                test_error.get_or_insert(e);
            }
        },
    )?;
    if let Some(e) = test_error {
        return Err(e);
    }

    let empty = crate::reorder(base, &config.ordering, |_| Vec::new())?;
    let references = [("true", base.clone()), ("full", full.clone()), ("empty", empty)]
        .into_iter()
        .map(|(name, s)| reference_fit(name, &s, &train, &test, &config.priors))
        .collect::<Result<Vec<_>>>()?;

    Ok(BmnExperiment {
        structure: full,
        report,
        trace,
        references,
    })
}

fn reference_fit(
    name: &str,
    structure: &Structure,
    train: &Dataset,
    test: &Dataset,
    priors: &PriorSpec<f64>,
) -> Result<ReferenceScore> {
    let train = train.aligned_to(structure)?;
    let test = test.aligned_to(structure)?;
    let fit = em_fit(
        structure,
        &SubstructurePlan::Conventional,
        &train,
        priors,
        &EmConfig::default(),
    )?;
    Ok(ReferenceScore {
        model: name.to_string(),
        train_score: observed_data_score(&fit.collapsed, &train)?,
        test_score: observed_data_score(&fit.collapsed, &test)?,
    })
}
