//! Exhaustive sweep over conventional networks: every ordering and arc set is
//! fitted by MAP on the training data and scored on train and test sets.

use std::collections::HashMap;
use std::io::Write;

use bmn_core::{conventional_map, Dataset, EmConfig, Network, Observation, PriorSpec, Result, Scalar};
use serde::Serialize;

use crate::models::{enumerate_models, ModelSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tags {
    pub empty: bool,
    #[serde(rename = "true")]
    pub true_model: bool,
    pub full: bool,
}

impl Tags {
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.empty {
            parts.push("empty");
        }
        if self.true_model {
            parts.push("true");
        }
        if self.full {
            parts.push("full");
        }
        parts.join("|")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub model: ModelSpec,
    pub train_score: f64,
    pub test_score: f64,
    pub tags: Tags,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub priors: PriorSpec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_train: 100,
            n_test: 2000,
            seed: 0,
            priors: PriorSpec::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    /// Names of the true network's nodes, used to print orderings.
    pub names: Vec<String>,
    pub records: Vec<SweepRecord>,
    pub train: Dataset,
    pub test: Dataset,
}

/// Samples train/test sets from `truth` and sweeps every model.
pub fn run_sweep(truth: &Network, config: &SweepConfig) -> Result<SweepOutcome> {
    let (train, test) = crate::sample_train_test(truth, config.n_train, config.n_test, config.seed);
    sweep_on_data(truth, train, test, &config.priors)
}

/// Sweeps every model on given data. The model with the truth's own node
/// order and parent sets is the single record tagged `true`.
pub fn sweep_on_data(
    truth: &Network,
    train: Dataset,
    test: Dataset,
    priors: &PriorSpec<f64>,
) -> Result<SweepOutcome> {
    let base = truth.structure();
    let v = base.len();
    let identity: Vec<usize> = (0..v).collect();
    let true_sets: Vec<Vec<usize>> = (0..v)
        .map(|i| {
            let mut p = base.parents(i).to_vec();
            p.sort_unstable();
            p
        })
        .collect();
    let em = EmConfig::default();

    let mut aligned: HashMap<Vec<usize>, AlignedData> = HashMap::new();
    let mut records = Vec::new();
    for model in enumerate_models(v)? {
        let structure = model.structure(base)?;
        if !aligned.contains_key(&model.ordering) {
            aligned.insert(
                model.ordering.clone(),
                AlignedData::new(&train, &test, &structure)?,
            );
        }
        let data = &aligned[&model.ordering];
        let fit = conventional_map(&structure, &data.train, priors, &em)?;
        let tags = Tags {
            empty: model.is_empty_model(),
            true_model: model.ordering == identity && model.parent_sets() == true_sets,
            full: model.is_full_model(),
        };
        records.push(SweepRecord {
            train_score: weighted_score(&fit, &data.train_distinct, data.train.len())?,
            test_score: weighted_score(&fit, &data.test_distinct, data.test.len())?,
            model,
            tags,
        });
    }
    Ok(SweepOutcome {
        names: base.names().map(String::from).collect(),
        records,
        train,
        test,
    })
}

/// Train/test data in one ordering, with distinct cases precomputed for scoring.
struct AlignedData {
    train: Dataset,
    train_distinct: Vec<(Vec<Observation>, usize)>,
    test_distinct: Vec<(Vec<Observation>, usize)>,
    test: Dataset,
}

impl AlignedData {
    fn new(train: &Dataset, test: &Dataset, structure: &bmn_core::Structure) -> Result<Self> {
        let train = train.aligned_to(structure)?;
        let test = test.aligned_to(structure)?;
        Ok(AlignedData {
            train_distinct: train.distinct_cases(),
            test_distinct: test.distinct_cases(),
            train,
            test,
        })
    }
}

/// Normalised score from distinct complete cases and their multiplicities.
fn weighted_score(net: &Network, distinct: &[(Vec<Observation>, usize)], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(bmn_core::Error::EmptyDataset);
    }
    let mut total = 0.0;
    for (case, count) in distinct {
        total += *count as f64 * net.joint_log_likelihood(case)?;
    }
    Ok(total / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreStats {
    pub count: usize,
    pub mean_train: f64,
    pub mean_test: f64,
    pub min_test: f64,
    pub max_test: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointScore {
    pub ordering: String,
    pub bitmask: u64,
    pub train_score: f64,
    pub test_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub models: usize,
    pub n_train: usize,
    pub n_test: usize,
    #[serde(rename = "true")]
    pub true_model: Option<PointScore>,
    pub full: ScoreStats,
    pub empty: ScoreStats,
    pub best_train: PointScore,
    pub best_test: PointScore,
}

impl SweepOutcome {
    pub fn ordering_label(&self, model: &ModelSpec) -> String {
        model
            .ordering
            .iter()
            .map(|&i| self.names[i].as_str())
            .collect::<Vec<_>>()
            .join(">")
    }

    pub fn true_record(&self) -> Option<&SweepRecord> {
        self.records.iter().find(|r| r.tags.true_model)
    }

    pub fn full_records(&self) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(|r| r.tags.full)
    }

    pub fn empty_records(&self) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(|r| r.tags.empty)
    }

    fn point(&self, r: &SweepRecord) -> PointScore {
        PointScore {
            ordering: self.ordering_label(&r.model),
            bitmask: r.model.bitmask,
            train_score: r.train_score,
            test_score: r.test_score,
        }
    }

    fn stats<'a>(records: impl Iterator<Item = &'a SweepRecord>) -> ScoreStats {
        let rs: Vec<&SweepRecord> = records.collect();
        let n = rs.len().max(1) as f64;
        ScoreStats {
            count: rs.len(),
            mean_train: rs.iter().map(|r| r.train_score).sum::<f64>() / n,
            mean_test: rs.iter().map(|r| r.test_score).sum::<f64>() / n,
            min_test: rs.iter().map(|r| r.test_score).fold(f64::INFINITY, f64::min),
            max_test: rs.iter().map(|r| r.test_score).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn summary(&self) -> SweepSummary {
        // first maximum in enumeration order
        let best_by = |key: fn(&SweepRecord) -> f64| {
            self.records
                .iter()
                .fold(None::<&SweepRecord>, |best, r| match best {
                    Some(b) if key(b) >= key(r) => Some(b),
                    _ => Some(r),
                })
                .expect("sweep has at least one record")
        };
        SweepSummary {
            models: self.records.len(),
            n_train: self.train.len(),
            n_test: self.test.len(),
            true_model: self.true_record().map(|r| self.point(r)),
            full: Self::stats(self.full_records()),
            empty: Self::stats(self.empty_records()),
            best_train: self.point(best_by(|r| r.train_score)),
            best_test: self.point(best_by(|r| r.test_score)),
        }
    }

    /// CSV with columns `ordering,bitmask,train_score,test_score,tags`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["ordering", "bitmask", "train_score", "test_score", "tags"])?;
        for r in &self.records {
            wtr.write_record([
                self.ordering_label(&r.model),
                r.model.bitmask.to_string(),
                fmt_score(r.train_score),
                fmt_score(r.test_score),
                r.tags.label(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn fmt_score<T: Scalar>(v: T) -> String {
    v.as_f64().to_string()
}
