//! Command-line front end. Every verb has a `cmd_*` function returning
//! its text output, so the verbs can be driven without a process.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::data::{split_dataset, DataSplit, Dataset};
use crate::dot::to_dot;
use crate::error::{Error, Result};
use crate::estimators::{CriterionKind, TreatedShare};
use crate::evaluation::{evaluate, evaluate_leaves};
use crate::io::{load_tree, read_csv, read_feature_rows, save_tree, write_csv};
use crate::learner::train;
use crate::pruning::{prune, significant_leaves};
use crate::report::{effect_report, training_summary, tune_report};
use crate::synthetic::generate;
use crate::tree::CausalTree;
use crate::tuning::{tune, TuneResult, TuneSpec};

#[derive(Debug, Parser)]
#[command(name = "trigger-tree", version, about = "Trigger-based causal trees")]
pub struct Cli {
    /// TOML run configuration; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags mirroring `RunConfig` keys.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub treatment: Option<String>,
    #[arg(long, global = true)]
    pub outcome: Option<String>,
    #[arg(long, global = true)]
    pub true_effect: Option<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub discrete: Option<Vec<String>>,
    /// adaptive, honest, learn, honest_learn or honest_val (or CT-A ... CT-HV).
    #[arg(long, global = true)]
    pub criterion: Option<CriterionKind>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Treat the treatment column as 0/1 instead of searching triggers.
    #[arg(long, global = true)]
    pub binary: bool,
    #[arg(long, global = true)]
    pub max_trigger_candidates: Option<usize>,
    /// within_node or global_train.
    #[arg(long, global = true, value_parser = parse_share)]
    pub treated_share: Option<TreatedShare>,
    #[arg(long, global = true)]
    pub min_group_size: Option<usize>,
    #[arg(long, global = true)]
    pub max_depth: Option<usize>,
    #[arg(long, global = true)]
    pub min_split_gain: Option<f64>,
    #[arg(long, global = true)]
    pub validation_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub estimation_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub test_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    #[arg(long, global = true)]
    pub n_samples: Option<usize>,
    #[arg(long, global = true)]
    pub tree_out: Option<PathBuf>,
    /// Write reports here instead of stdout.
    #[arg(long, global = true)]
    pub report_out: Option<PathBuf>,
}

fn parse_share(s: &str) -> std::result::Result<TreatedShare, String> {
    match s {
        "within_node" => Ok(TreatedShare::WithinNode),
        "global_train" => Ok(TreatedShare::GlobalTrain),
        other => Err(format!("unknown treated share `{other}`")),
    }
}

impl Overrides {
    pub fn apply(&self, c: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { c.$field = v.clone(); })*
            };
        }
        set!(
            features,
            treatment,
            outcome,
            discrete,
            criterion,
            lambda,
            treated_share,
            min_group_size,
            min_split_gain,
            validation_fraction,
            estimation_fraction,
            test_fraction,
            seed,
            folds,
            n_samples
        );
        for (flag, key) in [
            (&self.data, &mut c.data),
            (&self.tree_out, &mut c.tree_out),
            (&self.report_out, &mut c.report_out),
        ] {
            if flag.is_some() {
                *key = flag.clone();
            }
        }
        if self.true_effect.is_some() {
            c.true_effect = self.true_effect.clone();
        }
        if self.max_trigger_candidates.is_some() {
            c.max_trigger_candidates = self.max_trigger_candidates;
        }
        if self.max_depth.is_some() {
            c.max_depth = self.max_depth;
        }
        if self.alpha.is_some() {
            c.alpha = self.alpha;
        }
        if self.binary {
            c.trigger_mode = false;
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a dataset from the planted model.
    Generate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Split the data, grow a tree and write it.
    Train {
        /// Tree file; defaults to the config's tree_out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the held-out test part as CSV.
        #[arg(long)]
        test_out: Option<PathBuf>,
    },
    /// Collapse insignificant splits, testing on the run's own split.
    Prune {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leaf effect and prescribed trigger for each row of a CSV.
    Predict {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Held-out metrics; adds pruned metrics when alpha is set.
    Evaluate {
        #[arg(long)]
        tree: PathBuf,
        /// Test CSV; defaults to the test part of the run's split.
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Cross-validate a lambda x rho grid.
    Tune {
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1.0")]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.2,0.4")]
        rhos: Vec<f64>,
    },
    /// Graphviz rendering of a tree.
    ExportDot {
        #[arg(long)]
        tree: PathBuf,
    },
}

/// The run's dataset: the configured CSV, or a draw from the planted model.
pub fn load_data(config: &RunConfig) -> Result<Dataset> {
    match &config.data {
        Some(path) => read_csv(path, &config.roles()),
        None => generate(&config.planted_model(), config.n_samples),
    }
}

/// The run's train / validation / estimation / test partition.
pub fn load_split(config: &RunConfig) -> Result<DataSplit> {
    let data = load_data(config)?;
    split_dataset(
        &data,
        config.validation_fraction,
        config.estimation_fraction,
        config.test_fraction,
        config.seed,
    )
}

fn check_compatible(tree: &CausalTree, data: &Dataset) -> Result<()> {
    if tree.dimension() != data.dimension() {
        return Err(Error::DimensionMismatch {
            expected: tree.dimension(),
            got: data.dimension(),
        });
    }
    Ok(())
}

pub fn cmd_generate(config: &RunConfig, out: &Path) -> Result<Dataset> {
    let data = generate(&config.planted_model(), config.n_samples)?;
    write_csv(out, &data, &config.roles())?;
    Ok(data)
}

/// Train and save; returns the tree and its summary.
pub fn cmd_train(config: &RunConfig, out: &Path, test_out: Option<&Path>) -> Result<(CausalTree, String)> {
    let split = load_split(config)?;
    let tree = train(&split, &config.learner_config())?;
    save_tree(out, &tree)?;
    if let Some(path) = test_out {
        let test = split.test.as_ref().ok_or_else(|| Error::InvalidConfig("test_fraction is 0".into()))?;
        write_csv(path, test, &config.roles())?;
    }
    Ok((tree.clone(), training_summary(&tree)))
}

pub fn cmd_prune(config: &RunConfig, tree_path: &Path, out: &Path) -> Result<(CausalTree, String)> {
    let tree = load_tree(tree_path)?;
    let split = load_split(config)?;
    let pruned = prune(&tree, &split, config.alpha_or_default())?;
    save_tree(out, &pruned)?;
    Ok((pruned.clone(), training_summary(&pruned)))
}

/// CSV of `row,leaf_id,ace,trigger`.
pub fn cmd_predict(tree_path: &Path, input: &Path) -> Result<String> {
    let tree = load_tree(tree_path)?;
    let rows = read_feature_rows(input, &tree.feature_names)?;
    let mut out = String::from("row,leaf_id,ace,trigger\n");
    for (i, x) in rows.iter().enumerate() {
        let id = tree.leaf_id(x)?;
        let p = tree.predict(x)?;
        let trigger = p.trigger.map_or_else(String::new, |t| t.to_string());
        out.push_str(&format!("{i},{id},{},{trigger}\n", p.ace));
    }
    Ok(out)
}

pub fn cmd_evaluate(config: &RunConfig, tree_path: &Path, test_path: Option<&Path>) -> Result<String> {
    let tree = load_tree(tree_path)?;
    let needs_split = test_path.is_none() || config.alpha.is_some();
    let split = needs_split.then(|| load_split(config)).transpose()?;
    let test = match test_path {
        Some(p) => read_csv(p, &config.roles())?,
        None => split
            .as_ref()
            .and_then(|s| s.test.clone())
            .ok_or_else(|| Error::InvalidConfig("no test data: pass --test or set test_fraction".into()))?,
    };
    check_compatible(&tree, &test)?;
    let full = evaluate(&tree, &test)?;
    let pruned = match (config.alpha, &split) {
        (Some(alpha), Some(split)) => {
            let pruned_tree = prune(&tree, split, alpha)?;
            let ids: Vec<usize> = significant_leaves(&pruned_tree, alpha)?.iter().map(|(id, _)| *id).collect();
            match evaluate_leaves(&pruned_tree, &test, Some(&ids)) {
                Ok(r) => Some((r, alpha)),
                Err(Error::NoEvaluableLeaf { .. }) => None,
                Err(e) => return Err(e),
            }
        }
        _ => None,
    };
    let mut text = effect_report(&full, pruned.as_ref().map(|(r, a)| (r, *a)));
    if config.alpha.is_some() && pruned.is_none() {
        text = text.replacen("\n\n", "\npruned_evaluated_leaves = 0\n\n", 1);
    }
    Ok(text)
}

pub fn cmd_tune(config: &RunConfig, lambdas: &[f64], rhos: &[f64]) -> Result<(TuneResult, String)> {
    let data = load_data(config)?;
    let spec = TuneSpec {
        learner: config.learner_config(),
        lambdas: lambdas.to_vec(),
        rhos: rhos.to_vec(),
        estimation_fraction: config.estimation_fraction,
        folds: config.folds,
        seed: config.seed,
    };
    let result = tune(&data, &spec)?;
    let text = tune_report(&result);
    Ok((result, text))
}

pub fn cmd_export_dot(tree_path: &Path) -> Result<String> {
    Ok(to_dot(&load_tree(tree_path)?))
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut config);
    config.validate()?;
    let report = config.report_out.as_deref();
    match &cli.command {
        Command::Generate { out } => {
            let data = cmd_generate(&config, out)?;
            eprintln!("wrote {} rows to {}", data.len(), out.display());
        }
        Command::Train { out, test_out } => {
            let out = out
                .as_deref()
                .or(config.tree_out.as_deref())
                .ok_or_else(|| Error::InvalidConfig("no tree output path: pass --out or set tree_out".into()))?;
            let (_, summary) = cmd_train(&config, out, test_out.as_deref())?;
            emit(&summary, report)?;
        }
        Command::Prune { tree, out } => emit(&cmd_prune(&config, tree, out)?.1, report)?,
        Command::Predict { tree, input } => emit(&cmd_predict(tree, input)?, report)?,
        Command::Evaluate { tree, test } => emit(&cmd_evaluate(&config, tree, test.as_deref())?, report)?,
        Command::Tune { lambdas, rhos } => emit(&cmd_tune(&config, lambdas, rhos)?.1, report)?,
        Command::ExportDot { tree } => emit(&cmd_export_dot(tree)?, report)?,
    }
    Ok(())
}

/// Run the CLI on `args` and return the process exit code:
/// 0 on success, 2 on invalid input, 1 on any other failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}
