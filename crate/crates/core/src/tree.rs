//! Tree model: split rules, nodes, routing and prediction.

use serde::{Deserialize, Serialize};

use crate::data::{DataSplit, Dataset, FeatureKind, NodeSample};
use crate::error::{Error, Result};
use crate::estimators::CriterionConfig;

pub const FORMAT_VERSION: &str = "1";

/// `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub feature: usize,
    pub threshold: f64,
}

impl SplitRule {
    pub fn goes_left(&self, features: &[f64]) -> bool {
        features[self.feature] <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub rule: Option<SplitRule>,
    pub left: Option<Box<TreeNode>>,
    pub right: Option<Box<TreeNode>>,
    /// Partition measure of the node under the training criterion.
    pub score: f64,
    pub ace: f64,
    pub trigger: Option<f64>,
    pub n_treated: usize,
    pub n_control: usize,
    pub p_value: Option<f64>,
    pub depth: usize,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.rule.is_none()
    }

    pub fn children(&self) -> Option<(&TreeNode, &TreeNode)> {
        match (&self.left, &self.right) {
            (Some(l), Some(r)) => Some((l, r)),
            _ => None,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().map_or(0, |(l, r)| l.node_count() + r.node_count())
    }

    pub fn max_depth(&self) -> usize {
        self.children()
            .map_or(self.depth, |(l, r)| l.max_depth().max(r.max_depth()))
    }

    /// Visit every node in preorder with its preorder id.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(usize, &'a TreeNode)) {
        fn go<'a>(n: &'a TreeNode, next: &mut usize, f: &mut impl FnMut(usize, &'a TreeNode)) {
            let id = *next;
            *next += 1;
            f(id, n);
            if let Some((l, r)) = n.children() {
                go(l, next, f);
                go(r, next, f);
            }
        }
        go(self, &mut 0, f);
    }

    /// Leaves left to right, paired with their preorder ids.
    pub fn leaves(&self) -> Vec<(usize, &TreeNode)> {
        let mut out = Vec::new();
        self.visit(&mut |id, n| {
            if n.is_leaf() {
                out.push((id, n));
            }
        });
        out
    }

    /// Preorder id and node of the leaf that `features` falls into.
    pub fn find_leaf(&self, features: &[f64]) -> (usize, &TreeNode) {
        let mut node = self;
        let mut id = 0;
        while let (Some(rule), Some((l, r))) = (node.rule, node.children()) {
            if rule.goes_left(features) {
                id += 1;
                node = l;
            } else {
                id += 1 + l.node_count();
                node = r;
            }
        }
        (id, node)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub criterion: CriterionConfig,
    /// Minimum units per treatment arm in each child's training subsample.
    pub min_group_size: usize,
    pub max_depth: Option<usize>,
    pub min_split_gain: f64,
}

impl LearnerConfig {
    pub fn new(criterion: CriterionConfig) -> Self {
        LearnerConfig {
            criterion,
            min_group_size: 5,
            max_depth: None,
            min_split_gain: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.criterion.validate().map_err(Error::InvalidConfig)?;
        if self.min_group_size < 2 {
            return Err(Error::InvalidConfig("min_group_size must be at least 2".into()));
        }
        if !(self.min_split_gain >= 0.0) {
            return Err(Error::InvalidConfig("min_split_gain must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub ace: f64,
    /// Minimum treatment prescribed for the unit's subgroup.
    pub trigger: Option<f64>,
}

/// A trained tree together with the schema and settings it was learned with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalTree {
    pub format_version: String,
    pub feature_names: Vec<String>,
    pub feature_kinds: Vec<FeatureKind>,
    pub config: LearnerConfig,
    pub root: TreeNode,
}

impl CausalTree {
    pub fn dimension(&self) -> usize {
        self.feature_names.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaves().len()
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got,
            });
        }
        Ok(())
    }

    pub fn predict(&self, features: &[f64]) -> Result<Prediction> {
        self.check_dim(features.len())?;
        let (_, leaf) = self.root.find_leaf(features);
        Ok(Prediction {
            ace: leaf.ace,
            trigger: leaf.trigger,
        })
    }

    pub fn leaf_id(&self, features: &[f64]) -> Result<usize> {
        self.check_dim(features.len())?;
        Ok(self.root.find_leaf(features).0)
    }

    /// Indices of `data` grouped by leaf, leaves left to right.
    pub fn route_dataset(&self, data: &Dataset) -> Result<Vec<(usize, Vec<usize>)>> {
        self.check_dim(data.dimension())?;
        let leaves = self.root.leaves();
        let mut groups: Vec<(usize, Vec<usize>)> = leaves.iter().map(|(id, _)| (*id, Vec::new())).collect();
        for (i, s) in data.samples().iter().enumerate() {
            let id = self.root.find_leaf(&s.features).0;
            let slot = groups.partition_point(|(g, _)| *g < id);
            groups[slot].1.push(i);
        }
        Ok(groups)
    }

    /// Node samples of every leaf, in leaf order.
    pub fn route_split(&self, split: &DataSplit) -> Result<Vec<(usize, NodeSample)>> {
        self.check_dim(split.dimension())?;
        let mut out = Vec::new();
        fn go(
            node: &TreeNode,
            sample: NodeSample,
            split: &DataSplit,
            next: &mut usize,
            out: &mut Vec<(usize, NodeSample)>,
        ) {
            let id = *next;
            *next += 1;
            match (node.rule, node.children()) {
                (Some(rule), Some((l, r))) => {
                    let (ls, rs) = partition_sample(&sample, split, &rule);
                    go(l, ls, split, next, out);
                    go(r, rs, split, next, out);
                }
                _ => out.push((id, sample)),
            }
        }
        go(&self.root, split.root_sample(), split, &mut 0, &mut out);
        Ok(out)
    }
}

/// Send each index of `sample` to the side of `rule` its features fall on.
pub fn partition_sample(sample: &NodeSample, split: &DataSplit, rule: &SplitRule) -> (NodeSample, NodeSample) {
    fn side(idx: &[usize], data: Option<&Dataset>, rule: &SplitRule) -> (Vec<usize>, Vec<usize>) {
        match data {
            Some(d) => idx.iter().partition(|&&i| rule.goes_left(&d.sample(i).features)),
            None => (Vec::new(), Vec::new()),
        }
    }
    let (tl, tr) = side(&sample.train_idx, Some(&split.train), rule);
    let (vl, vr) = side(&sample.val_idx, Some(&split.validation), rule);
    let (el, er) = side(&sample.est_idx, split.estimation.as_ref(), rule);
    (
        NodeSample {
            train_idx: tl,
            val_idx: vl,
            est_idx: el,
        },
        NodeSample {
            train_idx: tr,
            val_idx: vr,
            est_idx: er,
        },
    )
}
