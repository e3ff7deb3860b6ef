//! Cross-validated choice of the cost weight `lambda` and validation share `rho`.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{split_dataset, Dataset};
use crate::error::{Error, Result};
use crate::evaluation::ace_error;
use crate::learner::train;
use crate::seed;
use crate::stats::mean_sd;
use crate::tree::LearnerConfig;

/// Score given to a fold whose tree cannot be trained or evaluated.
pub const FAILED_FOLD_SCORE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TuneSpec {
    pub learner: LearnerConfig,
    pub lambdas: Vec<f64>,
    pub rhos: Vec<f64>,
    /// Share of each fold's training pool set aside for estimation.
    pub estimation_fraction: f64,
    pub folds: usize,
    pub seed: u64,
}

impl TuneSpec {
    pub fn new(learner: LearnerConfig, lambdas: Vec<f64>, rhos: Vec<f64>) -> Self {
        TuneSpec {
            learner,
            lambdas,
            rhos,
            estimation_fraction: 0.0,
            folds: 5,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.lambdas.is_empty() || self.rhos.is_empty() {
            return bad("lambda and rho grids must be nonempty".into());
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return bad(format!("lambda {l} not in [0, 1]"));
        }
        if let Some(r) = self.rhos.iter().find(|&&r| !(r > 0.0 && r + self.estimation_fraction < 1.0)) {
            return bad(format!("rho {r} must be positive and leave room for training"));
        }
        if self.folds < 2 {
            return bad("at least two folds are required".into());
        }
        self.learner.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub lambda: f64,
    pub rho: f64,
    /// Mean held-out ACE error over folds.
    pub mean: f64,
    pub sd: f64,
    pub fold_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub best_lambda: f64,
    pub best_rho: f64,
    /// One row per grid cell, lambda-major in grid order.
    pub table: Vec<CellScore>,
}

/// Fold id of every unit, balanced to within one unit.
pub fn kfold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seed::rng_for(seed, "folds"));
    let mut fold = vec![0; n];
    for (rank, &i) in perm.iter().enumerate() {
        fold[i] = rank % folds;
    }
    fold
}

fn fold_score(data: &Dataset, assignment: &[usize], fold: usize, learner: &LearnerConfig, rho: f64, spec: &TuneSpec) -> Result<f64> {
    let (held, pool): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| assignment[i] == fold);
    let test = data.subset(&held)?;
    let pool = data.subset(&pool)?;
    let split = split_dataset(&pool, rho, spec.estimation_fraction, 0.0, seed::substream(spec.seed, &format!("fold{fold}")))?;
    let tree = train(&split, learner)?;
    Ok(ace_error(&tree, &test, None)?.value)
}

/// Cross-validated ACE error of a single `(lambda, rho)` cell.
pub fn cross_validate_cell(data: &Dataset, spec: &TuneSpec, lambda: f64, rho: f64) -> Result<CellScore> {
    let mut learner = spec.learner.clone();
    learner.criterion.lambda = lambda;
    let assignment = kfold_assignment(data.len(), spec.folds, spec.seed);
    let fold_scores: Vec<f64> = (0..spec.folds)
        .into_par_iter()
        .map(|f| match fold_score(data, &assignment, f, &learner, rho, spec) {
            Ok(v) => Ok(v),
            Err(e) if e.is_validation() => Err(e),
            Err(_) => Ok(FAILED_FOLD_SCORE),
        })
        .collect::<Result<_>>()?;
    let (mean, sd) = mean_sd(&fold_scores);
    Ok(CellScore {
        lambda,
        rho,
        mean,
        sd,
        fold_scores,
    })
}

/// Score every grid cell and return the argmin; ties go to the smaller
/// lambda, then the smaller rho.
pub fn tune(data: &Dataset, spec: &TuneSpec) -> Result<TuneResult> {
    spec.validate()?;
    if data.len() < spec.folds {
        return Err(Error::InvalidConfig(format!("{} units cannot fill {} folds", data.len(), spec.folds)));
    }
    let cells: Vec<(f64, f64)> = spec
        .lambdas
        .iter()
        .flat_map(|&l| spec.rhos.iter().map(move |&r| (l, r)))
        .collect();
    let table = cells
        .par_iter()
        .map(|&(l, r)| cross_validate_cell(data, spec, l, r))
        .collect::<Result<Vec<_>>>()?;
    let best = table
        .iter()
        .min_by(|a, b| {
            a.mean
                .total_cmp(&b.mean)
                .then(a.lambda.total_cmp(&b.lambda))
                .then(a.rho.total_cmp(&b.rho))
        })
        .expect("grid is nonempty");
    Ok(TuneResult {
        best_lambda: best.lambda,
        best_rho: best.rho,
        table,
    })
}
