//! Write a dataset to CSV, read it back with explicit column roles, train,
//! save the tree as JSON and reload it.

use trigger_tree::io::{load_tree, read_csv, save_tree, write_csv, ColumnRoles};
use trigger_tree::*;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("trigger-tree-csv-example");
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join("data.csv");
    let tree_path = dir.join("tree.json");

    let data = generate(&PlantedModel::benchmark().with_seed(6), 1500)?;
    let roles = ColumnRoles {
        features: vec!["x0".into(), "x1".into()],
        ..ColumnRoles::default()
    };
    write_csv(&csv_path, &data, &roles)?;
    let loaded = read_csv(&csv_path, &roles)?;
    println!("read {} rows with features {:?}", loaded.len(), loaded.feature_names());

    let split = split_dataset(&loaded, 0.05, 0.0, 0.2, 6)?;
    let tree = train(&split, &LearnerConfig::new(CriterionConfig::new(CriterionKind::Learn)))?;
    save_tree(&tree_path, &tree)?;
    let back = load_tree(&tree_path)?;
    assert_eq!(back, tree);

    let report = evaluate(&back, split.test.as_ref().expect("test part"))?;
    println!("tree in {}: {} leaves, ace_error {:.4}", tree_path.display(), back.leaf_count(), report.ace_error);
    Ok(())
}
