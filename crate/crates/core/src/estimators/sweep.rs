//! Trigger sweep over treatment-sorted prefix moments.
//!
//! Each subsample of a node is kept sorted by `(treatment, outcome)`. For a
//! trigger `theta` the control arm is the prefix `t < theta` and the treated
//! arm the remaining suffix, so every candidate is scored in `O(log n)`.

use std::cmp::Ordering;

use super::{
    ace, measure, CriterionConfig, CriterionKind, Degenerate, GroupStats, NodeCounts, Part,
    TriggerResult, BINARY_THRESHOLD,
};
use crate::data::{DataSplit, Dataset, NodeSample};

/// Split-wide constants shared by every node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScoringContext {
    /// Outcomes are accumulated relative to this value to limit cancellation.
    pub shift: f64,
    pub global_share: f64,
}

impl ScoringContext {
    pub fn new(split: &DataSplit) -> Self {
        let (lo, hi) = split
            .train
            .samples()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.outcome), hi.max(s.outcome))
            });
        let shift = if lo.is_finite() { 0.5 * (lo + hi) } else { 0.0 };
        let n_train = split.train.len();
        let total = n_train + split.validation.len() + split.estimation_len();
        let global_share = if total == 0 {
            0.0
        } else {
            n_train as f64 / total as f64
        };
        ScoringContext { shift, global_share }
    }
}

/// Minimum arm sizes a trigger must leave in each subsample.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ArmLimits {
    pub train: usize,
    pub val: usize,
    pub est: usize,
}

impl ArmLimits {
    pub fn for_config(config: &CriterionConfig, min_train_arm: usize) -> Self {
        let penalty = config.kind.penalty_part();
        let val = match (config.kind.uses_validation(), penalty) {
            (_, Some(Part::Validation)) => 2,
            (true, _) => 1,
            _ => 0,
        };
        let est = if penalty == Some(Part::Estimation) { 2 } else { 0 };
        ArmLimits {
            train: min_train_arm.max(1),
            val,
            est,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sumsq: f64,
}

impl Moments {
    fn minus(self, other: Moments) -> Moments {
        Moments {
            n: self.n - other.n,
            sum: self.sum - other.sum,
            sumsq: self.sumsq - other.sumsq,
        }
    }

    fn mean_var(self, shift: f64) -> (f64, Option<f64>) {
        let n = self.n as f64;
        let centered = self.sum / n;
        let var = (self.n >= 2).then(|| ((self.sumsq - self.sum * centered) / (n - 1.0)).max(0.0));
        (shift + centered, var)
    }
}

fn stats_from(treated: Moments, control: Moments, shift: f64) -> GroupStats {
    let (mean_treated, var_treated) = treated.mean_var(shift);
    let (mean_control, var_control) = control.mean_var(shift);
    GroupStats {
        n_treated: treated.n,
        n_control: control.n,
        mean_treated,
        mean_control,
        var_treated,
        var_control,
    }
}

/// Canonical ordering of `(treatment, outcome)` pairs.
pub(crate) fn cmp_pair(a: &(f64, f64), b: &(f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

/// One subsample sorted by treatment with prefix moments of shifted outcomes.
#[derive(Debug, Clone, Default)]
pub(crate) struct PartPrefix {
    t: Vec<f64>,
    prefix: Vec<Moments>,
}

impl PartPrefix {
    /// Refill from pairs already in canonical order.
    pub fn refill(&mut self, pairs: impl IntoIterator<Item = (f64, f64)>, shift: f64) {
        self.t.clear();
        self.prefix.clear();
        let mut acc = Moments::default();
        self.prefix.push(acc);
        for (t, y) in pairs {
            let y = y - shift;
            acc.n += 1;
            acc.sum += y;
            acc.sumsq += y * y;
            self.t.push(t);
            self.prefix.push(acc);
        }
    }

    pub fn from_sorted(pairs: impl IntoIterator<Item = (f64, f64)>, shift: f64) -> Self {
        let mut p = PartPrefix::default();
        p.refill(pairs, shift);
        p
    }

    fn gather(data: Option<&Dataset>, idx: &[usize], shift: f64) -> Self {
        let mut pairs: Vec<(f64, f64)> = match data {
            Some(d) => idx
                .iter()
                .map(|&i| {
                    let s = d.sample(i);
                    (s.treatment, s.outcome)
                })
                .collect(),
            None => Vec::new(),
        };
        pairs.sort_by(cmp_pair);
        PartPrefix::from_sorted(pairs, shift)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn distinct_treatments(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &t in &self.t {
            if out.last() != Some(&t) {
                out.push(t);
            }
        }
        out
    }

    /// (treated, control) moments at `theta`.
    fn arms(&self, theta: f64) -> (Moments, Moments) {
        let pos = self.t.partition_point(|&t| t < theta);
        let total = self.prefix[self.t.len()];
        let control = self.prefix[pos];
        (total.minus(control), control)
    }
}

/// The subsamples of one node that a criterion reads.
#[derive(Debug, Clone, Default)]
pub(crate) struct PartSweep {
    pub train: PartPrefix,
    pub val: Option<PartPrefix>,
    pub est: Option<PartPrefix>,
}

impl PartSweep {
    pub fn for_node(split: &DataSplit, node: &NodeSample, config: &CriterionConfig, shift: f64) -> Self {
        let kind = config.kind;
        PartSweep {
            train: PartPrefix::gather(Some(&split.train), &node.train_idx, shift),
            val: kind
                .uses_validation()
                .then(|| PartPrefix::gather(Some(&split.validation), &node.val_idx, shift)),
            est: kind
                .uses_estimation()
                .then(|| PartPrefix::gather(split.estimation.as_ref(), &node.est_idx, shift)),
        }
    }

    fn counts(&self) -> NodeCounts {
        NodeCounts {
            train: self.train.len(),
            val: self.val.as_ref().map_or(0, PartPrefix::len),
            est: self.est.as_ref().map_or(0, PartPrefix::len),
        }
    }

    /// Score of this node at one assignment, or `None` if it violates `limits`.
    pub fn evaluate(
        &self,
        theta: f64,
        config: &CriterionConfig,
        ctx: &ScoringContext,
        limits: &ArmLimits,
    ) -> Option<TriggerResult> {
        let ok = |(t, c): (Moments, Moments), min: usize| t.n >= min && c.n >= min;
        let train_arms = self.train.arms(theta);
        if !ok(train_arms, limits.train) {
            return None;
        }
        let val_arms = self.val.as_ref().map(|v| v.arms(theta));
        if let Some(arms) = val_arms {
            if !ok(arms, limits.val) {
                return None;
            }
        }
        let est_arms = self.est.as_ref().map(|e| e.arms(theta));
        if let Some(arms) = est_arms {
            if !ok(arms, limits.est) {
                return None;
            }
        }
        let train = stats_from(train_arms.0, train_arms.1, ctx.shift);
        let to_stats = |a: (Moments, Moments)| stats_from(a.0, a.1, ctx.shift);
        let val = val_arms.filter(|a| a.0.n > 0 && a.1.n > 0).map(to_stats);
        let est = est_arms.map(to_stats);
        let penalty = match config.kind.penalty_part() {
            Some(Part::Estimation) => est.as_ref(),
            Some(Part::Validation) => val.as_ref(),
            None => None,
        };
        let score = measure(config, ctx.global_share, self.counts(), &train, val.as_ref(), penalty).ok()?;
        if score.is_nan() {
            return None;
        }
        let stats = match (config.kind, est) {
            (CriterionKind::Honest, Some(e)) => e,
            _ => train,
        };
        Some(TriggerResult {
            trigger: theta,
            score,
            ace: ace(&stats),
            stats,
        })
    }

    /// Best admissible assignment; candidates ascend so ties keep the smallest.
    pub fn best(
        &self,
        config: &CriterionConfig,
        ctx: &ScoringContext,
        limits: &ArmLimits,
    ) -> Result<TriggerResult, Degenerate> {
        let candidates = if config.trigger_mode {
            thin_candidates(&self.train.distinct_treatments(), config.max_trigger_candidates)
        } else {
            vec![BINARY_THRESHOLD]
        };
        let mut best: Option<TriggerResult> = None;
        for theta in candidates {
            if let Some(r) = self.evaluate(theta, config, ctx, limits) {
                if best.is_none_or(|b| r.score > b.score) {
                    best = Some(r);
                }
            }
        }
        best.ok_or(Degenerate("no admissible trigger"))
    }
}

/// Sorted distinct treatment values: the full trigger candidate set.
pub fn candidate_triggers(treatments: &[f64]) -> Vec<f64> {
    let mut t = treatments.to_vec();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Keep `k` quantile-spaced values of the sorted candidate set.
///
/// The picks sit at the interior `i / (k + 1)` quantiles, so the smallest
/// value (which would leave the control arm empty) is never chosen.
pub fn thin_candidates(distinct: &[f64], k: Option<usize>) -> Vec<f64> {
    let m = distinct.len();
    match k {
        Some(k) if k < m => (1..=k).map(|i| distinct[i * m / (k + 1)]).collect(),
        _ => distinct.to_vec(),
    }
}
