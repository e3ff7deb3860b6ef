//! Held-out metrics of every splitting criterion on the noisy benchmark.

use trigger_tree::stats::mean_sd;
use trigger_tree::*;

fn main() -> Result<()> {
    let kinds = [
        CriterionKind::Adaptive,
        CriterionKind::Honest,
        CriterionKind::Learn,
        CriterionKind::HonestLearn,
        CriterionKind::HonestVal,
    ];
    println!("{:<13} {:>16} {:>16} {:>8}", "criterion", "ace_error", "unit_smape", "leaves");
    for kind in kinds {
        let (mut errors, mut smape, mut leaves) = (Vec::new(), Vec::new(), 0);
        for seed in 0..5 {
            let data = generate(&PlantedModel::benchmark().with_noise(0.5).with_seed(seed), 2000)?;
            let est = if kind.uses_estimation() { 0.2 } else { 0.0 };
            let val = if kind == CriterionKind::Adaptive || kind == CriterionKind::Honest { 0.0 } else { 0.05 };
            let split = split_dataset(&data, val, est, 0.2, seed)?;
            let tree = train(&split, &LearnerConfig::new(CriterionConfig::new(kind)))?;
            let report = evaluate(&tree, split.test.as_ref().expect("test part"))?;
            errors.push(report.ace_error);
            smape.push(report.unit_smape.unwrap_or(f64::NAN));
            leaves += tree.leaf_count();
        }
        let (e, es) = mean_sd(&errors);
        let (u, us) = mean_sd(&smape);
        println!("{:<13} {e:>8.3} ± {es:<5.3} {u:>8.3} ± {us:<5.3} {:>8.1}", format!("{kind:?}"), leaves as f64 / 5.0);
    }
    Ok(())
}
