//! Hand-built trees used in documentation, examples and tests.

use crate::data::FeatureKind;
use crate::estimators::{CriterionConfig, CriterionKind};
use crate::tree::{CausalTree, LearnerConfig, SplitRule, TreeNode, FORMAT_VERSION};

fn leaf(ace: f64, trigger: f64, n_treated: usize, n_control: usize, depth: usize) -> TreeNode {
    TreeNode {
        rule: None,
        left: None,
        right: None,
        score: (n_treated + n_control) as f64 * ace * ace,
        ace,
        trigger: Some(trigger),
        n_treated,
        n_control,
        p_value: None,
        depth,
    }
}

/// Small smoking / medical-expenditure tree.
///
/// Features are `male` (0 or 1) and `age_started`. Treatment is log
/// pack-years and the outcome log cost. Men who started smoking before 19
/// spend 0.642 more (log scale) once above 3 log pack-years. The other
/// leaves carry illustrative values.
pub fn smoking_tree() -> CausalTree {
    let young_men = leaf(0.642, 3.0, 120, 80, 2);
    let older_men = leaf(0.215, 2.5, 90, 110, 2);
    let women = leaf(0.318, 2.0, 150, 170, 1);
    let men = TreeNode {
        rule: Some(SplitRule {
            feature: 1,
            threshold: 18.5,
        }),
        left: Some(Box::new(young_men)),
        right: Some(Box::new(older_men)),
        ..leaf(0.401, 2.5, 210, 190, 1)
    };
    let root = TreeNode {
        rule: Some(SplitRule {
            feature: 0,
            threshold: 0.5,
        }),
        left: Some(Box::new(women)),
        right: Some(Box::new(men)),
        ..leaf(0.352, 2.5, 360, 360, 0)
    };
    CausalTree {
        format_version: FORMAT_VERSION.to_string(),
        feature_names: vec!["male".into(), "age_started".into()],
        feature_kinds: vec![FeatureKind::Discrete, FeatureKind::Continuous],
        config: LearnerConfig::new(CriterionConfig::new(CriterionKind::Learn)),
        root,
    }
}
