//! Planted-effect data generator.
//!
//! Features are uniform on the unit cube and treatment is uniform on the
//! treatment range, drawn independently of the features. Each axis-aligned
//! region carries its own trigger and effect:
//!
//! ```text
//! y = baseline(x) + effect(x) * 1[t >= trigger(x)] + N(0, noise_sd^2)
//! ```

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::seed;

/// `lo <= x[feature] < hi`; a missing bound is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub feature: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

impl Bound {
    pub fn contains(&self, features: &[f64]) -> bool {
        let x = features[self.feature];
        self.lo.is_none_or(|lo| x >= lo) && self.hi.is_none_or(|hi| x < hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subgroup {
    /// Conjunction of bounds; empty means the whole space.
    #[serde(default)]
    pub region: Vec<Bound>,
    pub trigger: f64,
    pub effect: f64,
}

impl Subgroup {
    pub fn contains(&self, features: &[f64]) -> bool {
        self.region.iter().all(|b| b.contains(features))
    }
}

/// `intercept + coefficients . x`; empty coefficients mean a constant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    #[serde(default)]
    pub intercept: f64,
    #[serde(default)]
    pub coefficients: Vec<f64>,
}

impl Baseline {
    pub fn at(&self, features: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(features).map(|(c, x)| c * x).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedModel {
    pub dimension: usize,
    pub subgroups: Vec<Subgroup>,
    #[serde(default)]
    pub baseline: Baseline,
    pub noise_sd: f64,
    pub treatment_range: [f64; 2],
    #[serde(default)]
    pub seed: u64,
}

const MAX_GRID_CELLS: usize = 1 << 20;

impl PlantedModel {
    /// Two subgroups split on `x0` at 0.5: trigger 3 with effect +1 below,
    /// trigger 7 with effect -1 above. Treatment on [0, 10], noise sd 0.1.
    pub fn benchmark() -> Self {
        PlantedModel {
            dimension: 2,
            subgroups: vec![
                Subgroup {
                    region: vec![Bound {
                        feature: 0,
                        lo: None,
                        hi: Some(0.5),
                    }],
                    trigger: 3.0,
                    effect: 1.0,
                },
                Subgroup {
                    region: vec![Bound {
                        feature: 0,
                        lo: Some(0.5),
                        hi: None,
                    }],
                    trigger: 7.0,
                    effect: -1.0,
                },
            ],
            baseline: Baseline::default(),
            noise_sd: 0.1,
            treatment_range: [0.0, 10.0],
            seed: 0,
        }
    }

    /// No effect anywhere.
    pub fn null(dimension: usize, noise_sd: f64) -> Self {
        PlantedModel {
            dimension,
            subgroups: vec![Subgroup {
                region: Vec::new(),
                trigger: 5.0,
                effect: 0.0,
            }],
            baseline: Baseline::default(),
            noise_sd,
            treatment_range: [0.0, 10.0],
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_noise(mut self, noise_sd: f64) -> Self {
        self.noise_sd = noise_sd;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.dimension == 0 {
            return bad("dimension must be positive".into());
        }
        let [t_min, t_max] = self.treatment_range;
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return bad(format!("treatment range [{t_min}, {t_max}] is empty"));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return bad(format!("noise_sd {} must be finite and nonnegative", self.noise_sd));
        }
        if !self.baseline.coefficients.is_empty() && self.baseline.coefficients.len() != self.dimension {
            return bad(format!(
                "baseline has {} coefficients for dimension {}",
                self.baseline.coefficients.len(),
                self.dimension
            ));
        }
        if self.subgroups.is_empty() {
            return bad("at least one subgroup is required".into());
        }
        for (g, sub) in self.subgroups.iter().enumerate() {
            if !(sub.trigger > t_min && sub.trigger < t_max) {
                return bad(format!("subgroup {g}: trigger {} not strictly inside the treatment range", sub.trigger));
            }
            if !sub.effect.is_finite() {
                return bad(format!("subgroup {g}: effect must be finite"));
            }
            for b in &sub.region {
                if b.feature >= self.dimension {
                    return bad(format!("subgroup {g}: feature {} out of range", b.feature));
                }
                if let (Some(lo), Some(hi)) = (b.lo, b.hi) {
                    if !(lo < hi) {
                        return bad(format!("subgroup {g}: empty interval [{lo}, {hi})"));
                    }
                }
            }
        }
        self.check_partition()
    }

    /// Membership is constant on the cells cut by the region bounds, so the
    /// cells' lower corners are enough to check the regions tile [0, 1)^d.
    fn check_partition(&self) -> Result<()> {
        let mut cuts: Vec<Vec<f64>> = vec![vec![0.0]; self.dimension];
        for sub in &self.subgroups {
            for b in &sub.region {
                for v in [b.lo, b.hi].into_iter().flatten() {
                    if v > 0.0 && v < 1.0 {
                        cuts[b.feature].push(v);
                    }
                }
            }
        }
        for c in &mut cuts {
            c.sort_by(f64::total_cmp);
            c.dedup();
        }
        let cells = cuts.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
        if cells.is_none_or(|n| n > MAX_GRID_CELLS) {
            return Err(Error::InvalidModel("too many region boundaries to verify".into()));
        }
        let mut pos = vec![0usize; self.dimension];
        loop {
            let point: Vec<f64> = pos.iter().zip(&cuts).map(|(&i, c)| c[i]).collect();
            let hits = self.subgroups.iter().filter(|s| s.contains(&point)).count();
            if hits != 1 {
                return Err(Error::InvalidModel(format!(
                    "point {point:?} lies in {hits} regions; regions must partition the unit cube"
                )));
            }
            let mut k = 0;
            loop {
                if k == self.dimension {
                    return Ok(());
                }
                pos[k] += 1;
                if pos[k] < cuts[k].len() {
                    break;
                }
                pos[k] = 0;
                k += 1;
            }
        }
    }

    fn subgroup(&self, features: &[f64]) -> Result<&Subgroup> {
        if features.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: features.len(),
            });
        }
        self.subgroups
            .iter()
            .find(|s| s.contains(features))
            .ok_or_else(|| Error::InvalidModel(format!("no region contains {features:?}")))
    }
}

/// Planted `(effect, trigger)` at `features`.
pub fn oracle_ice(model: &PlantedModel, features: &[f64]) -> Result<(f64, f64)> {
    let g = model.subgroup(features)?;
    Ok((g.effect, g.trigger))
}

/// Draw `n` units from `model`, each carrying its true effect.
pub fn generate(model: &PlantedModel, n: usize) -> Result<Dataset> {
    model.validate()?;
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let mut rng = seed::rng_for(model.seed, "generate");
    let [t_min, t_max] = model.treatment_range;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let features: Vec<f64> = (0..model.dimension).map(|_| rng.random::<f64>()).collect();
        let treatment = t_min + (t_max - t_min) * rng.random::<f64>();
        let z: f64 = rng.sample(StandardNormal);
        let g = model.subgroup(&features)?;
        let lift = if treatment >= g.trigger { g.effect } else { 0.0 };
        let outcome = model.baseline.at(&features) + lift + model.noise_sd * z;
        samples.push(Sample::new(features, treatment, outcome).with_true_effect(g.effect));
    }
    Dataset::from_samples(samples, model.dimension)
}
