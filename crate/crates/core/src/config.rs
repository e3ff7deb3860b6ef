//! Run configuration: a flat TOML document whose keys match the CLI flags,
//! plus an optional `[synthetic]` table describing a planted model.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{CriterionConfig, CriterionKind, TreatedShare, DEFAULT_LAMBDA};
use crate::io::ColumnRoles;
use crate::synthetic::PlantedModel;
use crate::tree::LearnerConfig;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Input CSV; when absent, data is drawn from `synthetic`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    pub features: Vec<String>,
    pub treatment: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_effect: Option<String>,
    pub discrete: Vec<String>,

    pub criterion: CriterionKind,
    pub lambda: f64,
    pub trigger_mode: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_trigger_candidates: Option<usize>,
    pub treated_share: TreatedShare,
    pub min_group_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    pub min_split_gain: f64,

    pub validation_fraction: f64,
    pub estimation_fraction: f64,
    pub test_fraction: f64,
    /// Significance level; `evaluate` adds pruned metrics only when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub seed: u64,
    pub folds: usize,

    /// Units drawn when generating synthetic data.
    pub n_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<PlantedModel>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let roles = ColumnRoles::default();
        RunConfig {
            data: None,
            features: roles.features,
            treatment: roles.treatment,
            outcome: roles.outcome,
            true_effect: None,
            discrete: roles.discrete,
            criterion: CriterionKind::Learn,
            lambda: DEFAULT_LAMBDA,
            trigger_mode: true,
            max_trigger_candidates: None,
            treated_share: TreatedShare::WithinNode,
            min_group_size: 5,
            max_depth: None,
            min_split_gain: 0.0,
            validation_fraction: 0.05,
            estimation_fraction: 0.0,
            test_fraction: 0.2,
            alpha: None,
            seed: 0,
            folds: 5,
            n_samples: 2000,
            synthetic: None,
            tree_out: None,
            report_out: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn roles(&self) -> ColumnRoles {
        ColumnRoles {
            features: self.features.clone(),
            treatment: self.treatment.clone(),
            outcome: self.outcome.clone(),
            true_effect: self.true_effect.clone(),
            discrete: self.discrete.clone(),
        }
    }

    pub fn criterion_config(&self) -> CriterionConfig {
        CriterionConfig {
            kind: self.criterion,
            lambda: self.lambda,
            trigger_mode: self.trigger_mode,
            max_trigger_candidates: self.max_trigger_candidates,
            treated_share: self.treated_share,
        }
    }

    pub fn learner_config(&self) -> LearnerConfig {
        LearnerConfig {
            criterion: self.criterion_config(),
            min_group_size: self.min_group_size,
            max_depth: self.max_depth,
            min_split_gain: self.min_split_gain,
        }
    }

    pub fn alpha_or_default(&self) -> f64 {
        self.alpha.unwrap_or(DEFAULT_ALPHA)
    }

    /// The planted model with the run seed applied, or the default benchmark.
    pub fn planted_model(&self) -> PlantedModel {
        self.synthetic.clone().unwrap_or_else(PlantedModel::benchmark).with_seed(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.roles().validate()?;
        self.learner_config().validate()?;
        for (name, v) in [
            ("validation_fraction", self.validation_fraction),
            ("estimation_fraction", self.estimation_fraction),
            ("test_fraction", self.test_fraction),
        ] {
            if !(0.0..1.0).contains(&v) {
                return bad(format!("{name} = {v} must lie in [0, 1)"));
            }
        }
        if self.validation_fraction + self.estimation_fraction + self.test_fraction >= 1.0 {
            return bad("fractions must sum to less than 1".into());
        }
        if let Some(a) = self.alpha.filter(|a| !(*a > 0.0 && *a <= 1.0)) {
            return bad(format!("alpha = {a} must lie in (0, 1]"));
        }
        if self.folds < 2 {
            return bad("folds must be at least 2".into());
        }
        if self.n_samples == 0 {
            return bad("n_samples must be positive".into());
        }
        if let Some(model) = &self.synthetic {
            model.validate()?;
        }
        Ok(())
    }
}
