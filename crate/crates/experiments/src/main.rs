use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use bmn_core::format::{write_json, NetworkFile, ReportFile};
use bmn_core::{
    em_fit, inference::observed_data_score, Dataset, EmConfig, Network, PriorSpec,
    SubstructurePlan,
};
use bmn_experiments::{
    bmn_exp::ReferenceScore, data_seed, default_true_network, ordering_from_names,
    run_bmn_experiment, run_sweep, sample_train_test, verify_mbn_equivalence,
    BmnExperimentConfig, SweepConfig,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Bernoulli mixture networks: fitting, scoring and structure experiments.
#[derive(Parser, Debug)]
#[command(name = "bmn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a true network and train/test datasets sampled from it.
    Generate {
        #[command(flatten)]
        truth: TruthArgs,
        #[arg(long, default_value_t = 100)]
        n_train: usize,
        #[arg(long, default_value_t = 2000)]
        n_test: usize,
        /// Output directory (network.json, train.csv, test.csv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a conventional network or a mixture network to a dataset.
    Fit {
        /// Structure file; CPTs, if present, are ignored.
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Per-node parent caps in ordering position, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "conventional")]
        caps: Option<Vec<usize>>,
        /// One submodel per node: the full parent set.
        #[arg(long)]
        conventional: bool,
        #[command(flatten)]
        em: EmArgs,
        #[command(flatten)]
        priors: PriorArgs,
        /// Accepted for uniformity; fitting is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fit report (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Also write the fitted mixture network here.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Normalised log-likelihood of a dataset under a network.
    Score {
        /// Network or mixture file (the collapsed `cpt` is used).
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Accepted for uniformity; scoring is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit and score every ordering and arc set of the true network's nodes.
    Sweep {
        #[command(flatten)]
        truth: TruthArgs,
        #[arg(long, default_value_t = 100)]
        n_train: usize,
        #[arg(long, default_value_t = 2000)]
        n_test: usize,
        #[command(flatten)]
        priors: PriorArgs,
        /// Output directory (sweep.csv, sweep_summary.json).
        #[arg(long)]
        out: PathBuf,
    },
    /// Mixture-network fit on a full structure, traced on train and test data.
    BmnExp {
        #[command(flatten)]
        truth: TruthArgs,
        /// Node names in ordering position, comma separated; default is the true order.
        #[arg(long, value_delimiter = ',')]
        ordering: Option<Vec<String>>,
        /// Per-node parent caps in ordering position; default is uncapped.
        #[arg(long, value_delimiter = ',')]
        caps: Option<Vec<usize>>,
        #[arg(long, default_value_t = 100)]
        n_train: usize,
        #[arg(long, default_value_t = 2000)]
        n_test: usize,
        #[command(flatten)]
        em: EmArgs,
        #[command(flatten)]
        priors: PriorArgs,
        /// Output directory (trace.csv, bmn_report.json).
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a random full mixture network with its single-ordering global mixture.
    VerifyMbn {
        /// State counts of the nodes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "3,2,2,3")]
        cards: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct TruthArgs {
    /// True network file; default is the built-in 4-node network with CPTs drawn from --seed.
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TruthArgs {
    fn load(&self) -> anyhow::Result<Network> {
        match &self.network {
            Some(p) => NetworkFile::load(p)?
                .network()
                .with_context(|| format!("reading {}", p.display())),
            None => Ok(default_true_network(self.seed)),
        }
    }
}

#[derive(Args, Debug)]
struct EmArgs {
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
}

impl EmArgs {
    fn config(&self) -> EmConfig {
        EmConfig {
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
        }
    }
}

#[derive(Args, Debug)]
struct PriorArgs {
    /// Pseudocount in every family cell.
    #[arg(long, default_value_t = 0.5)]
    prior_count: f64,
    /// Pseudocount of every submodel weight.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

impl PriorArgs {
    fn spec(&self) -> PriorSpec<f64> {
        PriorSpec::uniform(self.prior_count, self.alpha)
    }
}

#[derive(Serialize)]
struct ScoreOutput {
    cases: usize,
    score: f64,
}

#[derive(Serialize)]
struct BmnExpOutput {
    ordering: Vec<String>,
    caps: Option<Vec<usize>>,
    submodel_counts: Vec<usize>,
    final_test_score: f64,
    peak_iteration: usize,
    peak_test_score: f64,
    references: Vec<ReferenceScore>,
    report: ReportFile,
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn emit_json<S: Serialize>(out: Option<&Path>, value: &S) -> anyhow::Result<()> {
    match out {
        Some(p) => write_json(p, value)?,
        None => {
            let mut stdout = io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate {
            truth,
            n_train,
            n_test,
            out,
        } => {
            let net = truth.load()?;
            std::fs::create_dir_all(&out)?;
            let (train, test) = sample_train_test(&net, n_train, n_test, data_seed(truth.seed));
            NetworkFile::from_network(&net).save(out.join("network.json"))?;
            train.save(out.join("train.csv"))?;
            test.save(out.join("test.csv"))?;
        }
        Command::Fit {
            structure,
            data,
            caps,
            conventional,
            em,
            priors,
            seed: _,
            out,
            model_out,
        } => {
            let structure = NetworkFile::load(&structure)?.structure()?;
            let data = Dataset::load(&data)
                .with_context(|| format!("reading {}", data.display()))?
                .aligned_to(&structure)?;
            let plan = match (caps, conventional) {
                (Some(c), _) => SubstructurePlan::Capped(c),
                (None, true) => SubstructurePlan::Conventional,
                (None, false) => SubstructurePlan::all_subsets(&structure),
            };
            let report = em_fit(&structure, &plan, &data, &priors.spec(), &em.config())?;
            for w in &report.warnings {
                log::warn!("{w}");
            }
            write_json(&out, &ReportFile::from_report(&report))?;
            if let Some(p) = model_out {
                NetworkFile::from_mixture(&report.mixture).save(p)?;
            }
        }
        Command::Score {
            model,
            data,
            seed: _,
            out,
        } => {
            let net: Network = NetworkFile::load(&model)?.network()?;
            let data = Dataset::load(&data)
                .with_context(|| format!("reading {}", data.display()))?
                .aligned_to(net.structure())?;
            let score = observed_data_score(&net, &data)?;
            emit_json(out.as_deref(), &ScoreOutput { cases: data.len(), score })?;
        }
        Command::Sweep {
            truth,
            n_train,
            n_test,
            priors,
            out,
        } => {
            let net = truth.load()?;
            let config = SweepConfig {
                n_train,
                n_test,
                seed: data_seed(truth.seed),
                priors: priors.spec(),
            };
            let outcome = run_sweep(&net, &config)?;
            std::fs::create_dir_all(&out)?;
            outcome.write_csv(create(&out.join("sweep.csv"))?)?;
            write_json(out.join("sweep_summary.json"), &outcome.summary())?;
        }
        Command::BmnExp {
            truth,
            ordering,
            caps,
            n_train,
            n_test,
            em,
            priors,
            out,
        } => {
            let net = truth.load()?;
            let base = net.structure();
            let ordering = match ordering {
                Some(names) => ordering_from_names(base, &names)?,
                None => (0..base.len()).collect(),
            };
            if let Some(c) = &caps {
                if c.len() != base.len() {
                    bail!("--caps lists {} values for {} nodes", c.len(), base.len());
                }
            }
            let config = BmnExperimentConfig {
                ordering: ordering.clone(),
                caps: caps.clone(),
                n_train,
                n_test,
                seed: data_seed(truth.seed),
                priors: priors.spec(),
                em: em.config(),
            };
            let exp = run_bmn_experiment(&net, &config)?;
            std::fs::create_dir_all(&out)?;
            exp.write_trace_csv(create(&out.join("trace.csv"))?)?;
            let (peak_iteration, peak_test_score) = exp.peak_test();
            let summary = BmnExpOutput {
                ordering: ordering.iter().map(|&i| base.node(i).name.clone()).collect(),
                caps,
                submodel_counts: exp.report.mixture.submodel_counts(),
                final_test_score: exp.final_test_score(),
                peak_iteration,
                peak_test_score,
                references: exp.references.clone(),
                report: ReportFile::from_report(&exp.report),
            };
            write_json(out.join("bmn_report.json"), &summary)?;
        }
        Command::VerifyMbn {
            cards,
            cases,
            seed,
            out,
        } => {
            let report = verify_mbn_equivalence(&cards, cases, seed)?;
            emit_json(out.as_deref(), &report)?;
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<bmn_core::Error>() {
        Some(e) if e.is_guard() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
