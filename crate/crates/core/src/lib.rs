//! Trigger-based causal trees.
//!
//! A causal tree partitions units by their features so that treatment
//! effects differ across leaves. With a continuous treatment amount, each
//! node also learns a *trigger*: the threshold above which a unit counts as
//! treated, chosen to maximize the node's effect.
//!
//! ```
//! use trigger_tree::{generate, split_dataset, train, CriterionConfig, CriterionKind, LearnerConfig, PlantedModel};
//!
//! let data = generate(&PlantedModel::benchmark().with_seed(1), 600).unwrap();
//! let split = split_dataset(&data, 0.4, 0.0, 0.2, 1).unwrap();
//! let config = LearnerConfig::new(CriterionConfig::new(CriterionKind::Learn));
//! let tree = train(&split, &config).unwrap();
//! let p = tree.predict(&[0.2, 0.7]).unwrap();
//! assert!(p.ace > 0.5);
//! ```

pub mod cli;
pub mod config;
pub mod data;
pub mod dot;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod fixtures;
pub mod io;
pub mod learner;
pub mod pruning;
pub mod report;
pub mod seed;
pub mod stats;
pub mod synthetic;
pub mod tree;
pub mod tuning;

pub use config::RunConfig;
pub use data::{split_dataset, DataSplit, Dataset, FeatureKind, NodeSample, Sample};
pub use error::{Error, Result};
pub use estimators::{
    ace, criterion_score, find_trigger, group_stats, CriterionConfig, CriterionKind, GroupStats, TreatedShare,
    TriggerResult,
};
pub use evaluation::{ace_error, evaluate, leaf_variance, mahalanobis_balance, unit_smape, EffectReport};
pub use learner::{best_split, train, BestSplit};
pub use pruning::{prune, significant_leaves};
pub use stats::{sd_overlap_significant, welch_t_test, TTestResult};
pub use synthetic::{generate, oracle_ice, PlantedModel};
pub use tree::{CausalTree, LearnerConfig, Prediction, SplitRule, TreeNode};
pub use tuning::{tune, TuneResult, TuneSpec};
