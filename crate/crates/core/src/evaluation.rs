//! Held-out effect metrics: leaf ACE error, per-unit SMAPE, leaf-effect
//! variance and Mahalanobis covariate balance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::estimators::{ace, group_stats, is_treated};
use crate::tree::CausalTree;

/// `|a - b| / (|a| + |b|)`, with `0 / 0` read as 0.
pub fn smape_term(a: f64, b: f64) -> f64 {
    let denom = a.abs() + b.abs();
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafReport {
    pub leaf_id: usize,
    /// Test units routed to the leaf.
    pub n: usize,
    /// Stored training-time estimate.
    pub ace_predicted: f64,
    /// Test-sample ACE at the leaf trigger; `None` when an arm is empty.
    pub ace_test: Option<f64>,
    pub trigger: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AceError {
    pub value: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub per_leaf: Vec<LeafReport>,
}

/// Per-leaf comparison of stored and test-sample effects on `test`.
pub fn leaf_reports(tree: &CausalTree, test: &Dataset) -> Result<Vec<LeafReport>> {
    let routed = tree.route_dataset(test)?;
    let leaves = tree.root.leaves();
    Ok(routed
        .into_iter()
        .zip(leaves)
        .map(|((id, idx), (_, leaf))| {
            let stats = group_stats(idx.iter().map(|&i| test.sample(i)), leaf.trigger).ok();
            LeafReport {
                leaf_id: id,
                n: idx.len(),
                ace_predicted: leaf.ace,
                ace_test: stats.as_ref().map(ace),
                trigger: leaf.trigger,
                p_value: leaf.p_value,
            }
        })
        .collect())
}

/// Mean SMAPE between stored and test-sample leaf effects.
///
/// `leaves` restricts the average to the given leaf ids (e.g. the significant
/// ones). Leaves whose test sample misses an arm are skipped and counted.
pub fn ace_error(tree: &CausalTree, test: &Dataset, leaves: Option<&[usize]>) -> Result<AceError> {
    let per_leaf: Vec<LeafReport> = leaf_reports(tree, test)?
        .into_iter()
        .filter(|r| leaves.is_none_or(|ids| ids.contains(&r.leaf_id)))
        .collect();
    let terms: Vec<f64> = per_leaf
        .iter()
        .filter_map(|r| r.ace_test.map(|t| smape_term(r.ace_predicted, t)))
        .collect();
    let skipped = per_leaf.len() - terms.len();
    if terms.is_empty() {
        return Err(Error::NoEvaluableLeaf { skipped });
    }
    Ok(AceError {
        value: terms.iter().sum::<f64>() / terms.len() as f64,
        evaluated: terms.len(),
        skipped,
        per_leaf,
    })
}

/// Mean per-unit SMAPE between predicted and true effects.
pub fn unit_smape(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch(predicted.len(), truth.len()));
    }
    if predicted.is_empty() {
        return Err(Error::EmptyData);
    }
    let sum: f64 = predicted.iter().zip(truth).map(|(&p, &t)| smape_term(p, t)).sum();
    Ok(sum / predicted.len() as f64)
}

/// Sample variance of leaf effects; 0 for fewer than two leaves.
pub fn leaf_variance(effects: &[f64]) -> f64 {
    if effects.len() < 2 || effects.iter().all(|&e| e == effects[0]) {
        return 0.0;
    }
    let n = effects.len() as f64;
    let mean = effects.iter().sum::<f64>() / n;
    effects.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Average distance of every unit to the opposite arm's mean, under the
/// pooled leaf covariance with a small trace-scaled ridge.
pub fn mahalanobis_balance<'a>(samples: impl IntoIterator<Item = &'a Sample>, trigger: Option<f64>) -> Result<f64> {
    let samples: Vec<&Sample> = samples.into_iter().collect();
    let Some(first) = samples.first() else {
        return Err(Error::EmptyData);
    };
    let d = first.features.len();
    let n = samples.len();
    if n < d + 1 {
        return Err(Error::Degenerate(crate::estimators::Degenerate("too few samples for a covariance estimate")));
    }
    let x = DMatrix::from_fn(n, d, |i, j| samples[i].features[j]);
    let treated: Vec<bool> = samples.iter().map(|s| is_treated(s.treatment, trigger)).collect();
    let n1 = treated.iter().filter(|&&t| t).count();
    if n1 == 0 || n1 == n {
        return Err(Error::Degenerate(crate::estimators::Degenerate("a treatment arm is empty")));
    }

    let arm_mean = |flag: bool| {
        let rows: Vec<usize> = (0..n).filter(|&i| treated[i] == flag).collect();
        let mut m = DVector::zeros(d);
        for &i in &rows {
            m += x.row(i).transpose();
        }
        m / rows.len() as f64
    };
    let (mean1, mean0) = (arm_mean(true), arm_mean(false));

    let mean = x.row_mean().transpose();
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..n {
        let c = x.row(i).transpose() - &mean;
        cov += &c * c.transpose();
    }
    cov /= (n - 1) as f64;
    let ridge = 1e-6 * cov.trace() / d as f64;
    for j in 0..d {
        cov[(j, j)] += ridge;
    }
    let chol = cov.cholesky().ok_or(Error::SingularCovariance)?;

    let mut total = 0.0;
    for i in 0..n {
        let other = if treated[i] { &mean0 } else { &mean1 };
        let diff = x.row(i).transpose() - other;
        let solved = chol.solve(&diff);
        total += diff.dot(&solved).max(0.0).sqrt();
    }
    Ok(total / n as f64)
}

/// Mean of per-leaf balance over the leaves where it is defined.
pub fn tree_balance(tree: &CausalTree, data: &Dataset) -> Result<Option<f64>> {
    let routed = tree.route_dataset(data)?;
    let leaves = tree.root.leaves();
    let mut values = Vec::new();
    for ((_, idx), (_, leaf)) in routed.iter().zip(&leaves) {
        match mahalanobis_balance(idx.iter().map(|&i| data.sample(i)), leaf.trigger) {
            Ok(v) => values.push(v),
            Err(Error::SingularCovariance) | Err(Error::Degenerate(_)) | Err(Error::EmptyData) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectReport {
    pub ace_error: f64,
    pub evaluated_leaves: usize,
    pub skipped_leaves: usize,
    /// Present only when every test sample carries a true effect.
    pub unit_smape: Option<f64>,
    pub leaf_variance: f64,
    /// Absent when no leaf admits a covariance estimate.
    pub mahalanobis_balance: Option<f64>,
    pub per_leaf: Vec<LeafReport>,
}

/// All metrics of `tree` on `test`.
pub fn evaluate(tree: &CausalTree, test: &Dataset) -> Result<EffectReport> {
    evaluate_leaves(tree, test, None)
}

/// Metrics restricted to the given leaves: ACE error and leaf variance
/// cover only those leaves; unit SMAPE and balance cover the whole tree.
pub fn evaluate_leaves(tree: &CausalTree, test: &Dataset, leaves: Option<&[usize]>) -> Result<EffectReport> {
    let err = ace_error(tree, test, leaves)?;
    let unit_smape = if test.has_true_effects() && !test.is_empty() {
        let mut predicted = Vec::with_capacity(test.len());
        let mut truth = Vec::with_capacity(test.len());
        for s in test.samples() {
            predicted.push(tree.predict(&s.features)?.ace);
            truth.push(s.true_effect.unwrap_or(f64::NAN));
        }
        Some(unit_smape(&predicted, &truth)?)
    } else {
        None
    };
    let effects: Vec<f64> = tree
        .root
        .leaves()
        .iter()
        .filter(|(id, _)| leaves.is_none_or(|ids| ids.contains(id)))
        .map(|(_, l)| l.ace)
        .collect();
    Ok(EffectReport {
        ace_error: err.value,
        evaluated_leaves: err.evaluated,
        skipped_leaves: err.skipped,
        unit_smape,
        leaf_variance: leaf_variance(&effects),
        mahalanobis_balance: tree_balance(tree, test)?,
        per_leaf: err.per_leaf,
    })
}
