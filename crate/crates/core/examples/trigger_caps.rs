//! Effect of thinning the trigger candidates on held-out error.

use trigger_tree::stats::mean_sd;
use trigger_tree::*;

fn main() -> Result<()> {
    for cap in [Some(2), Some(5), Some(10), Some(50), None] {
        let (mut errors, mut smape) = (Vec::new(), Vec::new());
        for seed in 0..5 {
            let data = generate(&PlantedModel::benchmark().with_seed(seed), 2000)?;
            let split = split_dataset(&data, 0.05, 0.0, 0.2, seed)?;
            let criterion = CriterionConfig::new(CriterionKind::Learn).with_max_trigger_candidates(cap);
            let tree = train(&split, &LearnerConfig::new(criterion))?;
            let report = evaluate(&tree, split.test.as_ref().expect("test part"))?;
            errors.push(report.ace_error);
            smape.push(report.unit_smape.unwrap_or(f64::NAN));
        }
        let label = cap.map_or("all".to_string(), |c| c.to_string());
        println!("candidates {label:>4}: ace_error {:.4}, unit_smape {:.4}", mean_sd(&errors).0, mean_sd(&smape).0);
    }
    Ok(())
}
