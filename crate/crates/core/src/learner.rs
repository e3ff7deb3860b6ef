//! Greedy recursive partitioning.
//!
//! Every candidate split is scored by the sum of its children's partition
//! measures, where in trigger mode each child contributes the measure at its
//! own best trigger. A node is split while that sum beats the node's own
//! measure. Validation and estimation indices follow the same rules as the
//! training indices, so every node's cost and penalty terms are local.

use rayon::prelude::*;

use crate::data::{DataSplit, FeatureKind, NodeSample};
use crate::error::{Error, Result};
use crate::estimators::{
    cmp_pair, find_trigger, ArmLimits, PartPrefix, PartSweep, ScoringContext, TriggerResult,
    BINARY_THRESHOLD,
};
use crate::tree::{partition_sample, CausalTree, LearnerConfig, SplitRule, TreeNode, FORMAT_VERSION};

/// Candidate thresholds for `feature` at `node`, ascending.
///
/// Continuous features split at midpoints between consecutive distinct
/// training values. Discrete features split at each level except the largest.
pub fn enumerate_splits(split: &DataSplit, node: &NodeSample, feature: usize) -> Vec<SplitRule> {
    let mut values: Vec<f64> = node
        .train_idx
        .iter()
        .map(|&i| split.train.sample(i).features[feature])
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let discrete = split.train.feature_kinds()[feature] == FeatureKind::Discrete;
    values
        .windows(2)
        .map(|w| {
            let threshold = if discrete {
                w[0]
            } else {
                let mid = w[0] + 0.5 * (w[1] - w[0]);
                // adjacent floats: the midpoint can round up onto the right value
                if mid < w[1] {
                    mid
                } else {
                    w[0]
                }
            };
            SplitRule { feature, threshold }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestSplit {
    pub rule: SplitRule,
    pub left: TriggerResult,
    pub right: TriggerResult,
}

impl BestSplit {
    pub fn total(&self) -> f64 {
        self.left.score + self.right.score
    }
}

#[derive(Clone, Copy)]
struct Member {
    idx: usize,
    t: f64,
    y: f64,
}

fn members(data: Option<&crate::data::Dataset>, idx: &[usize]) -> Vec<Member> {
    let Some(data) = data else { return Vec::new() };
    let mut m: Vec<Member> = idx
        .iter()
        .map(|&i| {
            let s = data.sample(i);
            Member {
                idx: i,
                t: s.treatment,
                y: s.outcome,
            }
        })
        .collect();
    m.sort_by(|a, b| cmp_pair(&(a.t, a.y), &(b.t, b.y)));
    m
}

/// Node subsamples in canonical treatment order, ready for split sweeps.
struct NodeMembers {
    train: Vec<Member>,
    val: Option<Vec<Member>>,
    est: Option<Vec<Member>>,
}

#[derive(Default)]
struct ChildBuffers {
    left: PartSweep,
    right: PartSweep,
}

impl ChildBuffers {
    fn fill(&mut self, split: &DataSplit, m: &NodeMembers, rule: &SplitRule, shift: f64) {
        let x = |data: &crate::data::Dataset, i: usize| data.sample(i).features[rule.feature];
        let fill_part = |left: &mut PartPrefix, right: &mut PartPrefix, ms: &[Member], data: &crate::data::Dataset| {
            left.refill(
                ms.iter().filter(|mb| x(data, mb.idx) <= rule.threshold).map(|mb| (mb.t, mb.y)),
                shift,
            );
            right.refill(
                ms.iter().filter(|mb| x(data, mb.idx) > rule.threshold).map(|mb| (mb.t, mb.y)),
                shift,
            );
        };
        fill_part(&mut self.left.train, &mut self.right.train, &m.train, &split.train);
        match &m.val {
            Some(v) => {
                let (l, r) = (self.left.val.get_or_insert_with(Default::default), self.right.val.get_or_insert_with(Default::default));
                fill_part(l, r, v, &split.validation);
            }
            None => {
                self.left.val = None;
                self.right.val = None;
            }
        }
        match (&m.est, split.estimation.as_ref()) {
            (Some(e), Some(data)) => {
                let (l, r) = (self.left.est.get_or_insert_with(Default::default), self.right.est.get_or_insert_with(Default::default));
                fill_part(l, r, e, data);
            }
            (Some(_), None) => {
                self.left.est = Some(PartPrefix::default());
                self.right.est = Some(PartPrefix::default());
            }
            (None, _) => {
                self.left.est = None;
                self.right.est = None;
            }
        }
    }
}

/// The highest scoring admissible split of `node`, if any.
///
/// Ties go to the lowest feature index, then the lowest threshold.
pub fn best_split(split: &DataSplit, node: &NodeSample, config: &LearnerConfig) -> Option<BestSplit> {
    let ctx = ScoringContext::new(split);
    best_split_with(split, node, config, &ctx)
}

fn best_split_with(
    split: &DataSplit,
    node: &NodeSample,
    config: &LearnerConfig,
    ctx: &ScoringContext,
) -> Option<BestSplit> {
    let crit = &config.criterion;
    let limits = ArmLimits::for_config(crit, config.min_group_size);
    let m = NodeMembers {
        train: members(Some(&split.train), &node.train_idx),
        val: crit
            .kind
            .uses_validation()
            .then(|| members(Some(&split.validation), &node.val_idx)),
        est: crit
            .kind
            .uses_estimation()
            .then(|| members(split.estimation.as_ref(), &node.est_idx)),
    };
    let min_child = 2 * limits.train;
    if m.train.len() < 2 * min_child {
        return None;
    }

    let per_feature: Vec<Option<BestSplit>> = (0..split.dimension())
        .into_par_iter()
        .map(|feature| {
            let mut buf = ChildBuffers::default();
            let mut best: Option<BestSplit> = None;
            for rule in enumerate_splits(split, node, feature) {
                buf.fill(split, &m, &rule, ctx.shift);
                if buf.left.train.len() < min_child || buf.right.train.len() < min_child {
                    continue;
                }
                let Ok(left) = buf.left.best(crit, ctx, &limits) else { continue };
                let Ok(right) = buf.right.best(crit, ctx, &limits) else { continue };
                let cand = BestSplit { rule, left, right };
                if best.is_none_or(|b| cand.total() > b.total()) {
                    best = Some(cand);
                }
            }
            best
        })
        .collect();

    per_feature.into_iter().flatten().fold(None, |best, cand| {
        if best.is_none_or(|b: BestSplit| cand.total() > b.total()) {
            Some(cand)
        } else {
            best
        }
    })
}

fn check_inputs(split: &DataSplit, config: &LearnerConfig) -> Result<()> {
    config.validate()?;
    if split.train.is_empty() {
        return Err(Error::EmptyData);
    }
    let kind = config.criterion.kind;
    if kind.uses_validation() && split.validation.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{} needs a validation sample",
            kind.short_name()
        )));
    }
    if kind.uses_estimation() && split.estimation_len() == 0 {
        return Err(Error::InvalidConfig(format!(
            "{} needs an estimation sample",
            kind.short_name()
        )));
    }
    let treatments = split.train.samples().iter().map(|s| s.treatment);
    if config.criterion.trigger_mode {
        let first = split.train.sample(0).treatment;
        if treatments.clone().all(|t| t == first) {
            return Err(Error::NoVariation("single treatment value in training data".into()));
        }
    } else {
        let parts = [Some(&split.train), Some(&split.validation), split.estimation.as_ref()];
        for part in parts.into_iter().flatten() {
            if let Some(s) = part.samples().iter().find(|s| s.treatment != 0.0 && s.treatment != 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "binary mode needs a 0/1 treatment, found {}",
                    s.treatment
                )));
            }
        }
        let treated = treatments.filter(|&t| t == 1.0).count();
        if treated == 0 || treated == split.train.len() {
            return Err(Error::NoVariation("only one treatment arm in training data".into()));
        }
    }
    Ok(())
}

fn node_from(result: &TriggerResult, trigger_mode: bool, depth: usize) -> TreeNode {
    TreeNode {
        rule: None,
        left: None,
        right: None,
        score: result.score,
        ace: result.ace,
        trigger: trigger_mode.then_some(result.trigger),
        n_treated: result.stats.n_treated,
        n_control: result.stats.n_control,
        p_value: None,
        depth,
    }
}

fn grow(
    split: &DataSplit,
    config: &LearnerConfig,
    ctx: &ScoringContext,
    sample: NodeSample,
    result: TriggerResult,
    depth: usize,
) -> TreeNode {
    let mut node = node_from(&result, config.criterion.trigger_mode, depth);
    if config.max_depth.is_some_and(|max| depth >= max) {
        return node;
    }
    let Some(best) = best_split_with(split, &sample, config, ctx) else {
        return node;
    };
    if !(best.total() > result.score + config.min_split_gain) {
        return node;
    }
    let (ls, rs) = partition_sample(&sample, split, &best.rule);
    drop(sample);
    let (left, right) = rayon::join(
        || grow(split, config, ctx, ls, best.left, depth + 1),
        || grow(split, config, ctx, rs, best.right, depth + 1),
    );
    node.rule = Some(best.rule);
    node.left = Some(Box::new(left));
    node.right = Some(Box::new(right));
    node
}

/// Learn a tree on `split`.
pub fn train(split: &DataSplit, config: &LearnerConfig) -> Result<CausalTree> {
    check_inputs(split, config)?;
    let ctx = ScoringContext::new(split);
    let root_sample = split.root_sample();
    let root_result = find_trigger(split, &root_sample, &config.criterion, config.min_group_size)?;
    let root = grow(split, config, &ctx, root_sample, root_result, 0);
    Ok(CausalTree {
        format_version: FORMAT_VERSION.to_string(),
        feature_names: split.train.feature_names().to_vec(),
        feature_kinds: split.train.feature_kinds().to_vec(),
        config: config.clone(),
        root,
    })
}

/// Best assignment of a node under the learner's arm limits (binary mode included).
pub fn evaluate_node(split: &DataSplit, node: &NodeSample, config: &LearnerConfig) -> Result<TriggerResult> {
    let ctx = ScoringContext::new(split);
    let limits = ArmLimits::for_config(&config.criterion, config.min_group_size);
    let sweep = PartSweep::for_node(split, node, &config.criterion, ctx.shift);
    let r = sweep.best(&config.criterion, &ctx, &limits)?;
    debug_assert!(config.criterion.trigger_mode || r.trigger == BINARY_THRESHOLD);
    Ok(r)
}
