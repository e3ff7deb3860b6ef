//! Grow a learned-criterion tree on the two-subgroup benchmark and compare
//! the leaf triggers with the planted ones.

use trigger_tree::*;

fn main() -> Result<()> {
    let model = PlantedModel::benchmark().with_seed(1);
    let data = generate(&model, 2000)?;
    let split = split_dataset(&data, 0.05, 0.0, 0.2, 1)?;

    let mut config = LearnerConfig::new(CriterionConfig::new(CriterionKind::Learn));
    config.max_depth = Some(1);
    let tree = train(&split, &config)?;

    if let Some(rule) = tree.root.rule {
        println!("root split: x{} <= {:.3}", rule.feature, rule.threshold);
    }
    for (id, leaf) in tree.root.leaves() {
        println!("leaf {id}: trigger {:.3?}, effect {:+.3}, {} treated {} control", leaf.trigger, leaf.ace, leaf.n_treated, leaf.n_control);
    }
    for x in [[0.2, 0.5], [0.8, 0.5]] {
        let (effect, trigger) = oracle_ice(&model, &x)?;
        let p = tree.predict(&x)?;
        println!("x = {x:?}: planted ({effect:+}, {trigger}), learned ({:+.3}, {:.3?})", p.ace, p.trigger);
    }
    Ok(())
}
