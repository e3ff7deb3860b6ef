//! Effect estimators and partition measures.
//!
//! A node is scored from its training subsample, optionally checked against
//! its validation subsample (cost term) and penalized by outcome variance on
//! an estimation or validation subsample (honest term). In trigger mode the
//! continuous treatment is binarized as `t >= trigger`, identically in every
//! subsample, before any statistic is computed.

mod sweep;

pub use sweep::{candidate_triggers, thin_candidates};
pub(crate) use sweep::{cmp_pair, ArmLimits, PartPrefix, PartSweep, ScoringContext};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataSplit, Dataset, NodeSample, Sample};

/// A treatment arm was empty (or too small for a variance) where a statistic needed it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("degenerate group: {0}")]
pub struct Degenerate(pub &'static str);

/// Threshold used to read a 0/1 treatment column in binary mode.
pub const BINARY_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    /// Maximize `N * tau^2` on the training subsample.
    Adaptive,
    /// Adaptive measure minus the variance penalty on the estimation subsample.
    Honest,
    /// Training measure traded off against validation disagreement.
    Learn,
    /// `Learn` minus the variance penalty on the estimation subsample.
    HonestLearn,
    /// `Learn` minus the variance penalty on the validation subsample.
    HonestVal,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 5] = [
        CriterionKind::Adaptive,
        CriterionKind::Honest,
        CriterionKind::Learn,
        CriterionKind::HonestLearn,
        CriterionKind::HonestVal,
    ];

    pub fn uses_validation(self) -> bool {
        matches!(
            self,
            CriterionKind::Learn | CriterionKind::HonestLearn | CriterionKind::HonestVal
        )
    }

    pub fn uses_estimation(self) -> bool {
        matches!(self, CriterionKind::Honest | CriterionKind::HonestLearn)
    }

    /// Subsample whose outcome variances feed the honest penalty.
    pub(crate) fn penalty_part(self) -> Option<Part> {
        match self {
            CriterionKind::Honest | CriterionKind::HonestLearn => Some(Part::Estimation),
            CriterionKind::HonestVal => Some(Part::Validation),
            _ => None,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            CriterionKind::Adaptive => "CT-A",
            CriterionKind::Honest => "CT-H",
            CriterionKind::Learn => "CT-L",
            CriterionKind::HonestLearn => "CT-HL",
            CriterionKind::HonestVal => "CT-HV",
        }
    }
}

impl std::str::FromStr for CriterionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "adaptive" | "ct_a" => Ok(CriterionKind::Adaptive),
            "honest" | "ct_h" => Ok(CriterionKind::Honest),
            "learn" | "ct_l" => Ok(CriterionKind::Learn),
            "honest_learn" | "ct_hl" => Ok(CriterionKind::HonestLearn),
            "honest_val" | "ct_hv" => Ok(CriterionKind::HonestVal),
            other => Err(format!("unknown criterion `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Part {
    Validation,
    Estimation,
}

/// Default cost weight of the learned criteria.
pub const DEFAULT_LAMBDA: f64 = 0.75;

/// Which treated share `p` enters the honest penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreatedShare {
    /// Fraction of treated units in the node's penalty subsample.
    #[default]
    WithinNode,
    /// Global share of training units among all units used for learning.
    GlobalTrain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionConfig {
    pub kind: CriterionKind,
    pub lambda: f64,
    /// Search for a per-node treatment threshold. Otherwise treatment must be 0/1.
    pub trigger_mode: bool,
    pub max_trigger_candidates: Option<usize>,
    #[serde(default)]
    pub treated_share: TreatedShare,
}

impl CriterionConfig {
    pub fn new(kind: CriterionKind) -> Self {
        CriterionConfig {
            kind,
            lambda: DEFAULT_LAMBDA,
            trigger_mode: true,
            max_trigger_candidates: None,
            treated_share: TreatedShare::WithinNode,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn binary(mut self) -> Self {
        self.trigger_mode = false;
        self
    }

    pub fn with_max_trigger_candidates(mut self, k: Option<usize>) -> Self {
        self.max_trigger_candidates = k;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(format!("lambda {} not in [0, 1]", self.lambda));
        }
        if self.max_trigger_candidates == Some(0) {
            return Err("max_trigger_candidates must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats {
    pub n_treated: usize,
    pub n_control: usize,
    pub mean_treated: f64,
    pub mean_control: f64,
    /// Unbiased sample variance, defined when the group has at least two units.
    pub var_treated: Option<f64>,
    pub var_control: Option<f64>,
}

impl GroupStats {
    pub fn from_groups(treated: &[f64], control: &[f64]) -> Result<Self, Degenerate> {
        if treated.is_empty() {
            return Err(Degenerate("treated group is empty"));
        }
        if control.is_empty() {
            return Err(Degenerate("control group is empty"));
        }
        let (mean_treated, var_treated) = mean_var(treated);
        let (mean_control, var_control) = mean_var(control);
        Ok(GroupStats {
            n_treated: treated.len(),
            n_control: control.len(),
            mean_treated,
            mean_control,
            var_treated,
            var_control,
        })
    }

    pub fn n(&self) -> usize {
        self.n_treated + self.n_control
    }

    pub fn treated_share(&self) -> f64 {
        self.n_treated as f64 / self.n() as f64
    }
}

fn mean_var(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = (xs.len() >= 2)
        .then(|| xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0));
    (mean, var)
}

/// Treatment indicator for a unit. `None` reads a binary 0/1 treatment.
pub fn is_treated(treatment: f64, trigger: Option<f64>) -> bool {
    treatment >= trigger.unwrap_or(BINARY_THRESHOLD)
}

/// Outcome means and variances of the treated (`t >= trigger`) and control groups.
pub fn group_stats<'a>(
    samples: impl IntoIterator<Item = &'a Sample>,
    trigger: Option<f64>,
) -> Result<GroupStats, Degenerate> {
    let (mut treated, mut control) = (Vec::new(), Vec::new());
    for s in samples {
        if is_treated(s.treatment, trigger) {
            treated.push(s.outcome);
        } else {
            control.push(s.outcome);
        }
    }
    GroupStats::from_groups(&treated, &control)
}

/// Group statistics from explicit treated flags, aligned with `samples`.
pub fn group_stats_flags(samples: &[Sample], treated_flags: &[bool]) -> Result<GroupStats, Degenerate> {
    assert_eq!(samples.len(), treated_flags.len(), "one flag per sample");
    let (mut treated, mut control) = (Vec::new(), Vec::new());
    for (s, &f) in samples.iter().zip(treated_flags) {
        if f {
            treated.push(s.outcome);
        } else {
            control.push(s.outcome);
        }
    }
    GroupStats::from_groups(&treated, &control)
}

/// Average causal effect: treated mean minus control mean.
pub fn ace(stats: &GroupStats) -> f64 {
    stats.mean_treated - stats.mean_control
}

/// `N * tau^2`.
pub fn partition_measure_f(n: usize, tau_hat: f64) -> f64 {
    n as f64 * tau_hat * tau_hat
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cost {
    pub value: f64,
    /// Set when the validation estimate was unavailable and the cost defaulted to 0.
    pub degenerate: bool,
}

/// Validation disagreement `N_val * |tau_val - tau_train|`.
pub fn cost_term(n_val: usize, tau_val: Option<f64>, tau_train: f64) -> Cost {
    match tau_val {
        Some(tau_val) if n_val > 0 => Cost {
            value: n_val as f64 * (tau_val - tau_train).abs(),
            degenerate: false,
        },
        _ => Cost {
            value: 0.0,
            degenerate: true,
        },
    }
}

/// `((1 - lambda) F - lambda C) / (|N_train - N_val| + 1)`.
pub fn f_c(f_train: f64, cost: f64, n_train: usize, n_val: usize, lambda: f64) -> f64 {
    let denom = n_train.abs_diff(n_val) as f64 + 1.0;
    ((1.0 - lambda) * f_train - lambda * cost) / denom
}

/// Variance penalty using the within-group treated share of `stats`.
pub fn honest_penalty(stats: &GroupStats, n_est: usize, n: usize) -> Result<f64, Degenerate> {
    honest_penalty_with_share(stats, n_est, n, stats.treated_share())
}

/// `(1 + N_est / N) * (V1 / p + V0 / (1 - p))`.
pub fn honest_penalty_with_share(
    stats: &GroupStats,
    n_est: usize,
    n: usize,
    p: f64,
) -> Result<f64, Degenerate> {
    if n == 0 {
        return Err(Degenerate("penalty needs a nonempty node"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Degenerate("treated share must lie strictly inside (0, 1)"));
    }
    let v1 = stats.var_treated.ok_or(Degenerate("treated variance undefined"))?;
    let v0 = stats.var_control.ok_or(Degenerate("control variance undefined"))?;
    Ok((1.0 + n_est as f64 / n as f64) * (v1 / p + v0 / (1.0 - p)))
}

/// Subsample sizes of a node, independent of treatment assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct NodeCounts {
    pub train: usize,
    pub val: usize,
    pub est: usize,
}

/// Combine already computed group statistics into the configured measure.
///
/// `val` is `None` when the validation subsample is degenerate at this
/// assignment; the cost then contributes 0.
pub(crate) fn measure(
    config: &CriterionConfig,
    global_share: f64,
    counts: NodeCounts,
    train: &GroupStats,
    val: Option<&GroupStats>,
    penalty: Option<&GroupStats>,
) -> Result<f64, Degenerate> {
    let tau_train = ace(train);
    let f_train = partition_measure_f(counts.train, tau_train);
    let learned = || {
        let cost = cost_term(counts.val, val.map(ace), tau_train);
        f_c(f_train, cost.value, counts.train, counts.val, config.lambda)
    };
    let penalty = |n_aux: usize| -> Result<f64, Degenerate> {
        let stats = penalty.ok_or(Degenerate("penalty subsample degenerate"))?;
        match config.treated_share {
            TreatedShare::WithinNode => honest_penalty(stats, n_aux, counts.train),
            TreatedShare::GlobalTrain => {
                honest_penalty_with_share(stats, n_aux, counts.train, global_share)
            }
        }
    };
    Ok(match config.kind {
        CriterionKind::Adaptive => f_train,
        CriterionKind::Honest => f_train - penalty(counts.est)?,
        CriterionKind::Learn => learned(),
        CriterionKind::HonestLearn => learned() - penalty(counts.est)?,
        CriterionKind::HonestVal => learned() - penalty(counts.val)?,
    })
}

fn part_stats(
    data: Option<&Dataset>,
    idx: &[usize],
    trigger: Option<f64>,
) -> Result<GroupStats, Degenerate> {
    let data = data.ok_or(Degenerate("subsample missing"))?;
    group_stats(idx.iter().map(|&i| data.sample(i)), trigger)
}

/// Score of a node under `config` at a fixed assignment (`trigger`, or the
/// binary 0/1 reading when `None`).
pub fn criterion_score(
    split: &DataSplit,
    node: &NodeSample,
    config: &CriterionConfig,
    trigger: Option<f64>,
) -> Result<f64, Degenerate> {
    let counts = NodeCounts {
        train: node.train_idx.len(),
        val: node.val_idx.len(),
        est: node.est_idx.len(),
    };
    let train = part_stats(Some(&split.train), &node.train_idx, trigger)?;
    let val = if config.kind.uses_validation() {
        part_stats(Some(&split.validation), &node.val_idx, trigger).ok()
    } else {
        None
    };
    let penalty = match config.kind.penalty_part() {
        Some(Part::Estimation) => Some(part_stats(split.estimation.as_ref(), &node.est_idx, trigger)?),
        Some(Part::Validation) => val,
        None => None,
    };
    let share = ScoringContext::new(split).global_share;
    measure(config, share, counts, &train, val.as_ref(), penalty.as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerResult {
    /// Treatment threshold; [`BINARY_THRESHOLD`] in binary mode.
    pub trigger: f64,
    pub score: f64,
    /// Effect estimate at the trigger (on the estimation subsample for honest trees).
    pub ace: f64,
    pub stats: GroupStats,
}

/// Exhaustive search for the trigger maximizing the node's score.
///
/// Every distinct training treatment value of the node is a candidate (or
/// `max_trigger_candidates` quantile-spaced ones). Each training arm must hold
/// at least `min_train_arm` units. Ties go to the smallest trigger.
pub fn find_trigger(
    split: &DataSplit,
    node: &NodeSample,
    config: &CriterionConfig,
    min_train_arm: usize,
) -> Result<TriggerResult, Degenerate> {
    let ctx = ScoringContext::new(split);
    let limits = ArmLimits::for_config(config, min_train_arm);
    let sweep = PartSweep::for_node(split, node, config, ctx.shift);
    if config.trigger_mode {
        let distinct = sweep.train.distinct_treatments();
        if distinct.len() < 2 {
            return Err(Degenerate("fewer than two distinct treatment values"));
        }
    }
    sweep.best(config, &ctx, &limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;

    fn split_of(treatments: &[f64], outcomes: &[f64]) -> (DataSplit, NodeSample) {
        let samples = treatments
            .iter()
            .zip(outcomes)
            .map(|(&t, &y)| Sample::new(vec![0.0], t, y))
            .collect();
        let train = Dataset::from_samples(samples, 1).unwrap();
        let val = train.empty_like();
        let split = DataSplit::from_parts(train, val, None, None).unwrap();
        let node = split.root_sample();
        (split, node)
    }

    #[test]
    fn group_means() {
        let s = GroupStats::from_groups(&[2.0, 4.0], &[1.0, 1.0]).unwrap();
        assert_eq!((s.mean_treated, s.mean_control), (3.0, 1.0));
        assert_eq!(ace(&s), 2.0);
        assert_eq!(s.var_treated, Some(2.0));
        assert_eq!(s.var_control, Some(0.0));

        let c = GroupStats::from_groups(&[5.0, 5.0], &[5.0]).unwrap();
        assert_eq!((c.mean_treated, c.mean_control), (5.0, 5.0));
        assert_eq!(ace(&c), 0.0);
        assert_eq!(c.var_control, None);

        let swapped = GroupStats::from_groups(&[1.0, 1.0], &[2.0, 4.0]).unwrap();
        assert_eq!(ace(&swapped), -ace(&s));
        assert!(GroupStats::from_groups(&[], &[1.0]).is_err());
    }

    #[test]
    fn trigger_membership() {
        let samples: Vec<Sample> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&t| Sample::new(vec![0.0], t, t))
            .collect();
        let s = group_stats(&samples, Some(2.0)).unwrap();
        assert_eq!((s.n_treated, s.n_control), (2, 1));
        assert!(group_stats(&samples, Some(0.5)).is_err());
        let f = group_stats_flags(&samples, &[true, false, true]).unwrap();
        assert_eq!((f.n_treated, f.mean_treated), (2, 2.0));
    }

    #[test]
    fn scalar_measures() {
        assert_eq!(partition_measure_f(4, 2.0), 16.0);
        assert_eq!(partition_measure_f(7, 0.0), 0.0);
        assert_eq!(partition_measure_f(3, -1.5), partition_measure_f(3, 1.5));

        assert_eq!(cost_term(10, Some(0.7), 0.7).value, 0.0);
        assert_eq!(cost_term(10, Some(1.0), 0.5).value, 5.0);
        let empty = cost_term(0, None, 0.5);
        assert_eq!((empty.value, empty.degenerate), (0.0, true));

        assert_eq!(f_c(16.0, 5.0, 8, 8, 0.0), 16.0);
        assert_eq!(f_c(16.0, 5.0, 8, 8, 1.0), -5.0);
        assert!((f_c(16.0, 5.0, 8, 10, 0.5) - 5.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn honest_penalty_cases() {
        let stats = GroupStats {
            n_treated: 5,
            n_control: 5,
            mean_treated: 0.0,
            mean_control: 0.0,
            var_treated: Some(1.0),
            var_control: Some(1.0),
        };
        assert_eq!(honest_penalty(&stats, 10, 10).unwrap(), 8.0);
        let flat = GroupStats {
            var_treated: Some(0.0),
            var_control: Some(0.0),
            ..stats
        };
        assert_eq!(honest_penalty(&flat, 3, 10).unwrap(), 0.0);
        assert!(honest_penalty_with_share(&stats, 10, 10, 1.0).is_err());
        let no_var = GroupStats {
            var_control: None,
            ..stats
        };
        assert!(honest_penalty(&no_var, 10, 10).is_err());
    }

    #[test]
    fn adaptive_score_is_f() {
        // treated {3, 5} control {1, 3}: tau = 2, N = 4
        let (split, node) = split_of(&[1.0, 1.0, 0.0, 0.0], &[3.0, 5.0, 1.0, 3.0]);
        let cfg = CriterionConfig::new(CriterionKind::Adaptive).binary();
        assert_eq!(criterion_score(&split, &node, &cfg, None).unwrap(), 16.0);
    }

    #[test]
    fn find_trigger_worked_example() {
        let (split, node) = split_of(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.0, 1.0, 1.0]);
        let cfg = CriterionConfig::new(CriterionKind::Adaptive);
        let r = find_trigger(&split, &node, &cfg, 1).unwrap();
        assert_eq!(r.trigger, 3.0);
        assert_eq!(r.ace, 1.0);
        assert_eq!(r.score, 4.0);
        for theta in [2.0, 4.0] {
            let s = criterion_score(&split, &node, &cfg, Some(theta)).unwrap();
            assert!((s - 4.0 * (2.0f64 / 3.0).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn find_trigger_ties_pick_smallest() {
        let (split, node) = split_of(&[1.0, 2.0, 3.0, 4.0], &[5.0; 4]);
        let cfg = CriterionConfig::new(CriterionKind::Adaptive);
        let r = find_trigger(&split, &node, &cfg, 1).unwrap();
        assert_eq!((r.trigger, r.ace), (2.0, 0.0));
    }

    #[test]
    fn find_trigger_needs_variation() {
        let (split, node) = split_of(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]);
        let cfg = CriterionConfig::new(CriterionKind::Adaptive);
        assert!(find_trigger(&split, &node, &cfg, 1).is_err());
    }

    #[test]
    fn cap_at_or_above_distinct_count_is_noop() {
        let t: Vec<f64> = (0..20).map(|i| (i * 7 % 11) as f64).collect();
        let y: Vec<f64> = (0..20).map(|i| ((i * 13) % 5) as f64 * 0.3).collect();
        let (split, node) = split_of(&t, &y);
        let cfg = CriterionConfig::new(CriterionKind::Adaptive);
        let full = find_trigger(&split, &node, &cfg, 1).unwrap();
        for k in [11, 12, 50] {
            let capped = find_trigger(&split, &node, &cfg.clone().with_max_trigger_candidates(Some(k)), 1).unwrap();
            assert_eq!(full, capped);
        }
    }

    #[test]
    fn learn_with_zero_lambda_equals_training_f() {
        let samples = |ys: &[f64]| {
            ys.iter()
                .enumerate()
                .map(|(i, &y)| Sample::new(vec![0.0], (i % 2) as f64, y))
                .collect::<Vec<_>>()
        };
        let train = Dataset::from_samples(samples(&[1.0, 3.0, 2.0, 6.0]), 1).unwrap();
        let val = Dataset::from_samples(samples(&[0.0, 1.0, 0.5, 0.0]), 1).unwrap();
        let split = DataSplit::from_parts(train, val, None, None).unwrap();
        let node = split.root_sample();
        let learn = CriterionConfig::new(CriterionKind::Learn).with_lambda(0.0).binary();
        let adaptive = CriterionConfig::new(CriterionKind::Adaptive).binary();
        assert_eq!(
            criterion_score(&split, &node, &learn, None).unwrap(),
            criterion_score(&split, &node, &adaptive, None).unwrap()
        );
    }

    #[test]
    fn honest_val_without_penalty_is_f_c() {
        // constant outcome within each arm, identical train/val effects
        let mk = |n: usize| {
            (0..n)
                .map(|i| {
                    let t = (i % 2) as f64;
                    Sample::new(vec![0.0], t, 2.0 * t)
                })
                .collect::<Vec<_>>()
        };
        let train = Dataset::from_samples(mk(8), 1).unwrap();
        let val = Dataset::from_samples(mk(6), 1).unwrap();
        let split = DataSplit::from_parts(train, val, None, None).unwrap();
        let node = split.root_sample();
        let hv = CriterionConfig::new(CriterionKind::HonestVal).binary();
        let expected = f_c(partition_measure_f(8, 2.0), 0.0, 8, 6, DEFAULT_LAMBDA);
        assert_eq!(criterion_score(&split, &node, &hv, None).unwrap(), expected);
    }

    #[test]
    fn parse_kind() {
        assert_eq!("CT-HV".parse::<CriterionKind>().unwrap(), CriterionKind::HonestVal);
        assert_eq!("learn".parse::<CriterionKind>().unwrap(), CriterionKind::Learn);
        assert!("bogus".parse::<CriterionKind>().is_err());
    }
}
