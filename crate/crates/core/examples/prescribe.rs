//! Use a trained tree to prescribe a minimum treatment for new units.

use trigger_tree::*;

fn main() -> Result<()> {
    let data = generate(&PlantedModel::benchmark().with_seed(4), 2000)?;
    let split = split_dataset(&data, 0.05, 0.0, 0.0, 4)?;
    let mut config = LearnerConfig::new(CriterionConfig::new(CriterionKind::Learn));
    config.max_depth = Some(2);
    let tree = train(&split, &config)?;

    for x in [[0.1, 0.1], [0.4, 0.9], [0.6, 0.3], [0.95, 0.95]] {
        let p = tree.predict(&x)?;
        let advice = match p.trigger {
            Some(t) if p.ace > 0.0 => format!("treat with at least {t:.2} for a lift of {:.2}", p.ace),
            Some(t) => format!("keep treatment below {t:.2}; above it the outcome drops by {:.2}", -p.ace),
            None => "no trigger".to_string(),
        };
        println!("unit {x:?} (leaf {}): {advice}", tree.leaf_id(&x)?);
    }
    Ok(())
}
