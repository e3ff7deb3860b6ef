//! Significance-based pruning.
//!
//! Leaf effects are tested with Welch's t-test on the leaf's outcomes split at
//! the leaf trigger. The test sample is the estimation part when the split
//! has one, otherwise training and validation pooled.

use crate::data::{DataSplit, Dataset, NodeSample};
use crate::error::{Error, Result};
use crate::estimators::is_treated;
use crate::learner::evaluate_node;
use crate::stats::welch_t_test;
use crate::tree::{partition_sample, CausalTree, TreeNode};

/// Treated and control outcomes of a node's test sample at `trigger`.
pub fn test_groups(split: &DataSplit, sample: &NodeSample, trigger: Option<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut treated = Vec::new();
    let mut control = Vec::new();
    let mut push = |data: &Dataset, idx: &[usize]| {
        for &i in idx {
            let s = data.sample(i);
            if is_treated(s.treatment, trigger) {
                treated.push(s.outcome);
            } else {
                control.push(s.outcome);
            }
        }
    };
    match split.estimation.as_ref().filter(|e| !e.is_empty()) {
        Some(est) => push(est, &sample.est_idx),
        None => {
            push(&split.train, &sample.train_idx);
            push(&split.validation, &sample.val_idx);
        }
    }
    (treated, control)
}

/// Two-sided p-value of a node's effect; 1 when an arm has fewer than two units.
pub fn node_p_value(split: &DataSplit, sample: &NodeSample, trigger: Option<f64>) -> f64 {
    let (treated, control) = test_groups(split, sample, trigger);
    welch_t_test(&treated, &control).map_or(1.0, |r| r.p_value)
}

fn prune_node(node: &mut TreeNode, sample: NodeSample, tree: &CausalTree, split: &DataSplit, alpha: f64) {
    let rule = match node.rule {
        Some(rule) if node.left.is_some() && node.right.is_some() => rule,
        _ => {
            node.p_value = Some(node_p_value(split, &sample, node.trigger));
            return;
        }
    };
    let (ls, rs) = partition_sample(&sample, split, &rule);
    let (left, right) = (node.left.as_deref_mut().unwrap(), node.right.as_deref_mut().unwrap());
    prune_node(left, ls, tree, split, alpha);
    prune_node(right, rs, tree, split, alpha);

    let insignificant = |n: &TreeNode| n.is_leaf() && n.p_value.is_some_and(|p| p >= alpha);
    if insignificant(left) && insignificant(right) {
        node.rule = None;
        node.left = None;
        node.right = None;
        if let Ok(r) = evaluate_node(split, &sample, &tree.config) {
            node.score = r.score;
            node.ace = r.ace;
            node.trigger = tree.config.criterion.trigger_mode.then_some(r.trigger);
            node.n_treated = r.stats.n_treated;
            node.n_control = r.stats.n_control;
        }
        node.p_value = Some(node_p_value(split, &sample, node.trigger));
    }
}

/// Collapse, bottom-up, every split whose two leaves are both insignificant
/// at `alpha`. Surviving leaves carry their p-values.
pub fn prune(tree: &CausalTree, split: &DataSplit, alpha: f64) -> Result<CausalTree> {
    if split.dimension() != tree.dimension() {
        return Err(Error::DimensionMismatch {
            expected: tree.dimension(),
            got: split.dimension(),
        });
    }
    let mut out = tree.clone();
    prune_node(&mut out.root, split.root_sample(), tree, split, alpha);
    Ok(out)
}

/// Fill in leaf p-values without changing the structure.
pub fn annotate_p_values(tree: &CausalTree, split: &DataSplit) -> Result<CausalTree> {
    let routed = tree.route_split(split)?;
    let mut out = tree.clone();
    let mut k = 0;
    fn go(n: &mut TreeNode, routed: &[(usize, NodeSample)], k: &mut usize, split: &DataSplit) {
        if let (Some(l), Some(r)) = (n.left.as_deref_mut(), n.right.as_deref_mut()) {
            go(l, routed, k, split);
            go(r, routed, k, split);
        } else {
            n.p_value = Some(node_p_value(split, &routed[*k].1, n.trigger));
            *k += 1;
        }
    }
    go(&mut out.root, &routed, &mut k, split);
    Ok(out)
}

/// Leaves with `p < alpha`, left to right, with their preorder ids.
pub fn significant_leaves(tree: &CausalTree, alpha: f64) -> Result<Vec<(usize, &TreeNode)>> {
    let mut out = Vec::new();
    for (id, leaf) in tree.root.leaves() {
        let p = leaf.p_value.ok_or(Error::MissingPValue(id))?;
        if p < alpha {
            out.push((id, leaf));
        }
    }
    Ok(out)
}
