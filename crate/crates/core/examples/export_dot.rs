//! Render a pruned tree as Graphviz; pipe into `dot -Tpng`.

use trigger_tree::dot::to_dot;
use trigger_tree::*;

fn main() -> Result<()> {
    let data = generate(&PlantedModel::benchmark().with_noise(0.3).with_seed(8), 2000)?;
    let split = split_dataset(&data, 0.05, 0.2, 0.2, 8)?;
    let tree = train(&split, &LearnerConfig::new(CriterionConfig::new(CriterionKind::HonestLearn)))?;
    let pruned = prune(&tree, &split, 0.05)?;
    eprintln!("{} leaves before pruning, {} after", tree.leaf_count(), pruned.leaf_count());
    print!("{}", to_dot(&pruned));
    Ok(())
}
