//! Prune trees grown on pure noise and count the leaves that stay significant.

use trigger_tree::*;

fn main() -> Result<()> {
    let (mut grown, mut kept, mut significant) = (0, 0, 0);
    for seed in 0..20 {
        let data = generate(&PlantedModel::null(2, 1.0).with_seed(seed), 1000)?;
        let split = split_dataset(&data, 0.05, 0.2, 0.2, seed)?;
        let tree = train(&split, &LearnerConfig::new(CriterionConfig::new(CriterionKind::Learn)))?;
        let pruned = prune(&tree, &split, 0.05)?;
        grown += tree.leaf_count();
        kept += pruned.leaf_count();
        significant += significant_leaves(&pruned, 0.05)?.len();
    }
    println!("grown leaves {grown}, after pruning {kept}, significant at 0.05: {significant}");
    println!("significant per grown leaf: {:.3}", significant as f64 / grown as f64);
    Ok(())
}
