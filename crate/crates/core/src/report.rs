//! Plain-text reports: `key = value` lines, a blank line, then a CSV table.
//!
//! Numbers are printed in shortest round-trip form, so parsing a report
//! gives back the exact values.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::evaluation::{EffectReport, LeafReport};
use crate::tree::CausalTree;
use crate::tuning::TuneResult;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn push_kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(out, "{key} = {value}").unwrap();
}

fn effect_kv(out: &mut String, prefix: &str, r: &EffectReport) {
    push_kv(out, &format!("{prefix}ace_error"), r.ace_error);
    push_kv(out, &format!("{prefix}evaluated_leaves"), r.evaluated_leaves);
    push_kv(out, &format!("{prefix}skipped_leaves"), r.skipped_leaves);
    if let Some(u) = r.unit_smape {
        push_kv(out, &format!("{prefix}unit_smape"), u);
    }
    push_kv(out, &format!("{prefix}leaf_variance"), r.leaf_variance);
    if let Some(m) = r.mahalanobis_balance {
        push_kv(out, &format!("{prefix}mahalanobis_balance"), m);
    }
    push_kv(out, &format!("{prefix}leaf_count"), r.per_leaf.len());
}

fn leaf_rows(out: &mut String, variant: &str, leaves: &[LeafReport]) {
    for l in leaves {
        writeln!(
            out,
            "{variant},{},{},{},{},{},{}",
            l.leaf_id,
            l.n,
            l.ace_predicted,
            opt(l.ace_test),
            opt(l.trigger),
            opt(l.p_value)
        )
        .unwrap();
    }
}

/// Evaluation report, with the pruned tree's metrics under `pruned_` keys.
pub fn effect_report(report: &EffectReport, pruned: Option<(&EffectReport, f64)>) -> String {
    let mut out = String::new();
    effect_kv(&mut out, "", report);
    if let Some((p, alpha)) = pruned {
        push_kv(&mut out, "alpha", alpha);
        effect_kv(&mut out, "pruned_", p);
    }
    out.push_str("\nvariant,leaf_id,n,ace_predicted,ace_test,trigger,p_value\n");
    leaf_rows(&mut out, "full", &report.per_leaf);
    if let Some((p, _)) = pruned {
        leaf_rows(&mut out, "pruned", &p.per_leaf);
    }
    out
}

/// Shape of a trained tree and its leaves.
pub fn training_summary(tree: &CausalTree) -> String {
    let mut out = String::new();
    push_kv(&mut out, "criterion", tree.config.criterion.kind.short_name());
    push_kv(&mut out, "depth", tree.root.max_depth());
    push_kv(&mut out, "node_count", tree.root.node_count());
    push_kv(&mut out, "leaf_count", tree.leaf_count());
    out.push_str("\nleaf_id,depth,ace,trigger,n_treated,n_control,p_value\n");
    for (id, l) in tree.root.leaves() {
        writeln!(
            out,
            "{id},{},{},{},{},{},{}",
            l.depth,
            l.ace,
            opt(l.trigger),
            l.n_treated,
            l.n_control,
            opt(l.p_value)
        )
        .unwrap();
    }
    out
}

pub fn tune_report(result: &TuneResult) -> String {
    let mut out = String::new();
    push_kv(&mut out, "best_lambda", result.best_lambda);
    push_kv(&mut out, "best_rho", result.best_rho);
    out.push_str("\nlambda,rho,mean_ace_error,sd_ace_error\n");
    for c in &result.table {
        writeln!(out, "{},{},{},{}", c.lambda, c.rho, c.mean, c.sd).unwrap();
    }
    out
}

/// The `key = value` header of a report.
pub fn parse_key_values(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .take_while(|l| !l.trim().is_empty())
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// Rows of the table that follows the header, including its column line.
pub fn parse_table(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip_while(|l| !l.trim().is_empty())
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::smoking_tree;

    #[test]
    fn summary_lists_every_leaf() {
        let text = training_summary(&smoking_tree());
        let kv = parse_key_values(&text);
        assert_eq!(kv["leaf_count"], "3");
        assert_eq!(kv["depth"], "2");
        let rows = parse_table(&text);
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[2][2], "0.642");
    }

    #[test]
    fn effect_values_parse_back_exactly() {
        let r = EffectReport {
            ace_error: 0.1 + 0.2,
            evaluated_leaves: 2,
            skipped_leaves: 1,
            unit_smape: None,
            leaf_variance: 1.0 / 3.0,
            mahalanobis_balance: Some(0.7),
            per_leaf: Vec::new(),
        };
        let kv = parse_key_values(&effect_report(&r, None));
        assert_eq!(kv["ace_error"].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(kv["leaf_variance"].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert!(!kv.contains_key("unit_smape"));
    }
}
