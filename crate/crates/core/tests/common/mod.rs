//! Shared helpers for the integration tests: a straight-line reimplementation
//! of node scoring and split search, and random node generators.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use trigger_tree::{CriterionConfig, CriterionKind, DataSplit, Dataset, FeatureKind, LearnerConfig, NodeSample, Sample, TreatedShare};

pub const BINARY_THRESHOLD: f64 = 1.0;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Outcomes of `idx` in `data`, split by `t >= theta`.
fn arms(data: &Dataset, idx: &[usize], theta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut treated = Vec::new();
    let mut control = Vec::new();
    for &i in idx {
        let s = data.sample(i);
        if s.treatment >= theta {
            treated.push(s.outcome);
        } else {
            control.push(s.outcome);
        }
    }
    (treated, control)
}

fn tau(treated: &[f64], control: &[f64]) -> f64 {
    mean(treated) - mean(control)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleTrigger {
    pub trigger: f64,
    pub score: f64,
    pub ace: f64,
}

/// Score of one node at `theta`, or `None` when an arm is too small.
pub fn oracle_score(split: &DataSplit, node: &NodeSample, config: &CriterionConfig, min_arm: usize, theta: f64) -> Option<OracleTrigger> {
    let kind = config.kind;
    let uses_val = matches!(kind, CriterionKind::Learn | CriterionKind::HonestLearn | CriterionKind::HonestVal);
    let est_penalty = matches!(kind, CriterionKind::Honest | CriterionKind::HonestLearn);

    let (t1, t0) = arms(&split.train, &node.train_idx, theta);
    if t1.len() < min_arm.max(1) || t0.len() < min_arm.max(1) {
        return None;
    }
    let n_tr = node.train_idx.len() as f64;
    let tau_tr = tau(&t1, &t0);
    let f = n_tr * tau_tr * tau_tr;

    let (v1, v0) = arms(&split.validation, &node.val_idx, theta);
    let n_val = node.val_idx.len() as f64;
    let min_val = if kind == CriterionKind::HonestVal { 2 } else { 1 };
    if uses_val && (v1.len() < min_val || v0.len() < min_val) {
        return None;
    }
    let empty = Dataset::from_samples(Vec::new(), split.dimension()).unwrap();
    let est_data = split.estimation.as_ref().unwrap_or(&empty);
    let (e1, e0) = arms(est_data, &node.est_idx, theta);
    if est_penalty && (e1.len() < 2 || e0.len() < 2) {
        return None;
    }

    let learned = || {
        let cost = n_val * (tau(&v1, &v0) - tau_tr).abs();
        ((1.0 - config.lambda) * f - config.lambda * cost) / ((n_tr - n_val).abs() + 1.0)
    };
    let penalty = |g1: &[f64], g0: &[f64], n_aux: f64| {
        let p = match config.treated_share {
            TreatedShare::WithinNode => g1.len() as f64 / (g1.len() + g0.len()) as f64,
            TreatedShare::GlobalTrain => {
                let total = split.train.len() + split.validation.len() + split.estimation.as_ref().map_or(0, |e| e.len());
                split.train.len() as f64 / total as f64
            }
        };
        (1.0 + n_aux / n_tr) * (var(g1) / p + var(g0) / (1.0 - p))
    };
    let n_est = node.est_idx.len() as f64;
    let score = match kind {
        CriterionKind::Adaptive => f,
        CriterionKind::Honest => f - penalty(&e1, &e0, n_est),
        CriterionKind::Learn => learned(),
        CriterionKind::HonestLearn => learned() - penalty(&e1, &e0, n_est),
        CriterionKind::HonestVal => learned() - penalty(&v1, &v0, n_val),
    };
    let ace = if kind == CriterionKind::Honest { tau(&e1, &e0) } else { tau_tr };
    Some(OracleTrigger { trigger: theta, score, ace })
}

/// Every distinct training treatment of the node, ascending.
pub fn distinct_treatments(split: &DataSplit, node: &NodeSample) -> Vec<f64> {
    let mut t: Vec<f64> = node.train_idx.iter().map(|&i| split.train.sample(i).treatment).collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Best trigger by enumeration; ties keep the smallest.
pub fn oracle_trigger(split: &DataSplit, node: &NodeSample, config: &CriterionConfig, min_arm: usize) -> Option<OracleTrigger> {
    let candidates = if config.trigger_mode { distinct_treatments(split, node) } else { vec![BINARY_THRESHOLD] };
    let mut best: Option<OracleTrigger> = None;
    for theta in candidates {
        if let Some(r) = oracle_score(split, node, config, min_arm, theta) {
            if best.is_none_or(|b| r.score > b.score) {
                best = Some(r);
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSplit {
    pub feature: usize,
    pub threshold: f64,
    pub left: OracleTrigger,
    pub right: OracleTrigger,
}

impl OracleSplit {
    pub fn total(&self) -> f64 {
        self.left.score + self.right.score
    }
}

fn child(split: &DataSplit, node: &NodeSample, feature: usize, threshold: f64, left: bool) -> NodeSample {
    let keep = |data: &Dataset, idx: &[usize]| -> Vec<usize> {
        idx.iter().copied().filter(|&i| (data.sample(i).features[feature] <= threshold) == left).collect()
    };
    NodeSample {
        train_idx: keep(&split.train, &node.train_idx),
        val_idx: keep(&split.validation, &node.val_idx),
        est_idx: split.estimation.as_ref().map_or(Vec::new(), |e| keep(e, &node.est_idx)),
    }
}

/// Thresholds between distinct training values (midpoints), or at every
/// level but the largest for discrete features.
pub fn oracle_thresholds(split: &DataSplit, node: &NodeSample, feature: usize) -> Vec<f64> {
    let mut v: Vec<f64> = node.train_idx.iter().map(|&i| split.train.sample(i).features[feature]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let discrete = split.train.feature_kinds()[feature] == FeatureKind::Discrete;
    v.windows(2).map(|w| if discrete { w[0] } else { (w[0] + w[1]) / 2.0 }).collect()
}

/// Exhaustive search over every feature, threshold and child trigger.
pub fn oracle_best_split(split: &DataSplit, node: &NodeSample, config: &LearnerConfig) -> Option<OracleSplit> {
    let mut best: Option<OracleSplit> = None;
    for feature in 0..split.dimension() {
        for threshold in oracle_thresholds(split, node, feature) {
            let l = child(split, node, feature, threshold, true);
            let r = child(split, node, feature, threshold, false);
            let Some(left) = oracle_trigger(split, &l, &config.criterion, config.min_group_size) else { continue };
            let Some(right) = oracle_trigger(split, &r, &config.criterion, config.min_group_size) else { continue };
            let cand = OracleSplit { feature, threshold, left, right };
            if best.is_none_or(|b| cand.total() > b.total()) {
                best = Some(cand);
            }
        }
    }
    best
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub const KINDS: [CriterionKind; 5] = [
    CriterionKind::Adaptive,
    CriterionKind::Honest,
    CriterionKind::Learn,
    CriterionKind::HonestLearn,
    CriterionKind::HonestVal,
];

fn random_part(rng: &mut ChaCha8Rng, n: usize, kinds: &[FeatureKind], binary: bool) -> Dataset {
    let d = kinds.len();
    let levels = rng.random_range(2..6) as f64;
    let effect = rng.random_range(-2.0..2.0);
    let samples = (0..n)
        .map(|_| {
            let features: Vec<f64> = kinds
                .iter()
                .map(|k| match k {
                    FeatureKind::Discrete => rng.random_range(0..4) as f64,
                    FeatureKind::Continuous => rng.random::<f64>(),
                })
                .collect();
            let treatment = if binary {
                rng.random_range(0..2) as f64
            } else if rng.random_bool(0.5) {
                // repeated values exercise ties in the trigger sweep
                (rng.random::<f64>() * levels).floor()
            } else {
                rng.random::<f64>() * levels
            };
            let lift = if treatment >= levels / 2.0 && features[0] < 0.5 { effect } else { 0.0 };
            let outcome = lift + features.iter().sum::<f64>() + rng.random::<f64>() - 0.5;
            Sample::new(features, treatment, outcome)
        })
        .collect();
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Dataset::new(samples, names, kinds.to_vec()).unwrap()
}

/// A random split with all three learning parts and a random node inside it.
pub fn random_node(rng: &mut ChaCha8Rng, max_n: usize, max_d: usize, binary: bool) -> (DataSplit, NodeSample) {
    let d = rng.random_range(1..=max_d);
    let kinds: Vec<FeatureKind> = (0..d)
        .map(|_| if rng.random_bool(0.25) { FeatureKind::Discrete } else { FeatureKind::Continuous })
        .collect();
    let n_train = rng.random_range(8..=max_n);
    let n_val = rng.random_range(4..=max_n);
    let n_est = rng.random_range(4..=max_n);
    let train = random_part(rng, n_train, &kinds, binary);
    let validation = random_part(rng, n_val, &kinds, binary);
    let estimation = random_part(rng, n_est, &kinds, binary);
    let split = DataSplit::from_parts(train, validation, Some(estimation), None).unwrap();
    let mut pick = |n: usize| -> Vec<usize> { (0..n).filter(|_| rng.random_bool(0.85)).collect() };
    let node = NodeSample {
        train_idx: pick(n_train),
        val_idx: pick(n_val),
        est_idx: pick(n_est),
    };
    (split, node)
}

pub fn random_criterion(rng: &mut ChaCha8Rng, binary: bool) -> CriterionConfig {
    let kind = KINDS[rng.random_range(0..KINDS.len())];
    let mut c = CriterionConfig::new(kind).with_lambda([0.0, 0.25, 0.5, 0.75, 1.0][rng.random_range(0..5)]);
    if binary {
        c = c.binary();
    }
    if rng.random_bool(0.2) {
        c.treated_share = TreatedShare::GlobalTrain;
    }
    c
}

fn planted_leaf(ace: f64, trigger: f64, depth: usize) -> trigger_tree::TreeNode {
    trigger_tree::TreeNode {
        rule: None,
        left: None,
        right: None,
        score: 0.0,
        ace,
        trigger: Some(trigger),
        n_treated: 0,
        n_control: 0,
        p_value: None,
        depth,
    }
}

/// The benchmark model written out as a tree: split on x0 at 0.5 with the
/// planted triggers and effects in the leaves. Sends `x0 < 0.5` left, which
/// agrees with the model everywhere except the measure-zero line `x0 = 0.5`.
pub fn benchmark_tree() -> trigger_tree::CausalTree {
    let root = trigger_tree::TreeNode {
        rule: Some(trigger_tree::SplitRule { feature: 0, threshold: 0.5 - f64::EPSILON }),
        left: Some(Box::new(planted_leaf(1.0, 3.0, 1))),
        right: Some(Box::new(planted_leaf(-1.0, 7.0, 1))),
        ..planted_leaf(0.0, 5.0, 0)
    };
    trigger_tree::CausalTree {
        format_version: trigger_tree::tree::FORMAT_VERSION.to_string(),
        feature_names: vec!["x0".into(), "x1".into()],
        feature_kinds: vec![FeatureKind::Continuous; 2],
        config: LearnerConfig::new(CriterionConfig::new(CriterionKind::Learn)),
        root,
    }
}
