//! Cross-validate the cost weight and validation share.

use trigger_tree::report::tune_report;
use trigger_tree::*;

fn main() -> Result<()> {
    let data = generate(&PlantedModel::benchmark().with_noise(0.5).with_seed(2), 1000)?;
    let learner = LearnerConfig::new(CriterionConfig::new(CriterionKind::Learn));
    let spec = TuneSpec::new(learner, vec![0.25, 0.75], vec![0.05, 0.4]);
    let result = tune(&data, &spec)?;
    print!("{}", tune_report(&result));
    Ok(())
}
