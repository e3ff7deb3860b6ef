//! Units, datasets and the train / validation / estimation / test partition.
//!
//! A sample's identity is its position in the source dataset. Every part of a
//! [`DataSplit`] remembers the source positions of its samples so that parts
//! can be checked for disjointness and mapped back.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    /// Amount of treatment received.
    pub treatment: f64,
    pub outcome: f64,
    /// Ground-truth individual effect, known only for synthetic data.
    pub true_effect: Option<f64>,
}

impl Sample {
    pub fn new(features: Vec<f64>, treatment: f64, outcome: f64) -> Self {
        Sample {
            features,
            treatment,
            outcome,
            true_effect: None,
        }
    }

    pub fn with_true_effect(mut self, effect: f64) -> Self {
        self.true_effect = Some(effect);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    dimension: usize,
    feature_names: Vec<String>,
    feature_kinds: Vec<FeatureKind>,
}

impl Dataset {
    pub fn new(
        samples: Vec<Sample>,
        feature_names: Vec<String>,
        feature_kinds: Vec<FeatureKind>,
    ) -> Result<Self> {
        let dimension = feature_names.len();
        if dimension == 0 {
            return Err(Error::InvalidConfig("dataset needs at least one feature".into()));
        }
        if feature_kinds.len() != dimension {
            return Err(Error::LengthMismatch(feature_kinds.len(), dimension));
        }
        for (index, s) in samples.iter().enumerate() {
            if s.features.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: s.features.len(),
                });
            }
            if !s.treatment.is_finite() || !s.outcome.is_finite() {
                return Err(Error::InvalidSample {
                    index,
                    reason: "treatment and outcome must be finite".into(),
                });
            }
            if s.features.iter().any(|x| x.is_nan()) {
                return Err(Error::InvalidSample {
                    index,
                    reason: "missing feature value".into(),
                });
            }
        }
        Ok(Dataset {
            samples,
            dimension,
            feature_names,
            feature_kinds,
        })
    }

    /// Dataset with continuous features named `x0 .. x{d-1}`.
    pub fn from_samples(samples: Vec<Sample>, dimension: usize) -> Result<Self> {
        let names = (0..dimension).map(|j| format!("x{j}")).collect();
        Dataset::new(samples, names, vec![FeatureKind::Continuous; dimension])
    }

    /// An empty dataset sharing this dataset's schema.
    pub fn empty_like(&self) -> Self {
        Dataset {
            samples: Vec::new(),
            dimension: self.dimension,
            feature_names: self.feature_names.clone(),
            feature_kinds: self.feature_kinds.clone(),
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> &Sample {
        &self.samples[i]
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_kinds(&self) -> &[FeatureKind] {
        &self.feature_kinds
    }

    pub fn has_true_effects(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.true_effect.is_some())
    }

    /// Copy of the samples at `indices`, in the order given.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut seen = HashSet::with_capacity(indices.len());
        let mut samples = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.samples.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.samples.len(),
                });
            }
            if !seen.insert(i) {
                return Err(Error::DuplicateIndex(i));
            }
            samples.push(self.samples[i].clone());
        }
        Ok(Dataset {
            samples,
            dimension: self.dimension,
            feature_names: self.feature_names.clone(),
            feature_kinds: self.feature_kinds.clone(),
        })
    }
}

/// Source positions of the samples in each part of a [`DataSplit`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartIds {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub estimation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    pub train: Dataset,
    pub validation: Dataset,
    pub estimation: Option<Dataset>,
    pub test: Option<Dataset>,
    pub seed: u64,
    pub validation_fraction: f64,
    pub ids: PartIds,
}

impl DataSplit {
    /// Assemble a split from already separated parts. Source ids are assigned
    /// consecutively: train, then validation, estimation and test.
    pub fn from_parts(
        train: Dataset,
        validation: Dataset,
        estimation: Option<Dataset>,
        test: Option<Dataset>,
    ) -> Result<Self> {
        let d = train.dimension();
        for part in [Some(&validation), estimation.as_ref(), test.as_ref()]
            .into_iter()
            .flatten()
        {
            if part.dimension() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: part.dimension(),
                });
            }
        }
        let mut next = 0;
        let mut take = |n: usize| {
            let ids: Vec<usize> = (next..next + n).collect();
            next += n;
            ids
        };
        let ids = PartIds {
            train: take(train.len()),
            validation: take(validation.len()),
            estimation: take(estimation.as_ref().map_or(0, Dataset::len)),
            test: take(test.as_ref().map_or(0, Dataset::len)),
        };
        let total = train.len() + validation.len();
        let validation_fraction = if total == 0 {
            0.0
        } else {
            validation.len() as f64 / total as f64
        };
        Ok(DataSplit {
            train,
            validation,
            estimation,
            test,
            seed: 0,
            validation_fraction,
            ids,
        })
    }

    pub fn estimation_len(&self) -> usize {
        self.estimation.as_ref().map_or(0, Dataset::len)
    }

    pub fn dimension(&self) -> usize {
        self.train.dimension()
    }

    /// The node sample covering every train, validation and estimation unit.
    pub fn root_sample(&self) -> NodeSample {
        NodeSample {
            train_idx: (0..self.train.len()).collect(),
            val_idx: (0..self.validation.len()).collect(),
            est_idx: (0..self.estimation_len()).collect(),
        }
    }
}

/// Index lists of one tree node into the train, validation and estimation parts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeSample {
    pub train_idx: Vec<usize>,
    pub val_idx: Vec<usize>,
    pub est_idx: Vec<usize>,
}

impl NodeSample {
    pub fn len(&self) -> usize {
        self.train_idx.len() + self.val_idx.len() + self.est_idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Randomly partition `data` into train, validation, estimation and test parts.
///
/// Each non-train part receives `floor(fraction * N)` samples; the remainder
/// goes to train. Within a part samples keep their source order.
pub fn split_dataset(
    data: &Dataset,
    validation_fraction: f64,
    estimation_fraction: f64,
    test_fraction: f64,
    seed: u64,
) -> Result<DataSplit> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    for (name, f) in [
        ("validation", validation_fraction),
        ("estimation", estimation_fraction),
        ("test", test_fraction),
    ] {
        if !(0.0..1.0).contains(&f) {
            return Err(Error::InvalidFraction(format!("{name} fraction {f} not in [0, 1)")));
        }
    }
    let sum = validation_fraction + estimation_fraction + test_fraction;
    if sum >= 1.0 {
        return Err(Error::InvalidFraction(format!("fractions sum to {sum}, must be < 1")));
    }

    let n = data.len();
    let count = |f: f64| (f * n as f64).floor() as usize;
    let (n_test, n_est, n_val) = (count(test_fraction), count(estimation_fraction), count(validation_fraction));

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seed::rng_for(seed, "split"));

    let mut rest = perm.as_slice();
    let mut take = |k: usize| {
        let (head, tail) = rest.split_at(k);
        rest = tail;
        let mut ids = head.to_vec();
        ids.sort_unstable();
        ids
    };
    let test = take(n_test);
    let estimation = take(n_est);
    let validation = take(n_val);
    let train = take(n - n_test - n_est - n_val);

    let ids = PartIds {
        train,
        validation,
        estimation,
        test,
    };
    Ok(DataSplit {
        train: data.subset(&ids.train)?,
        validation: data.subset(&ids.validation)?,
        estimation: (estimation_fraction > 0.0)
            .then(|| data.subset(&ids.estimation))
            .transpose()?,
        test: (test_fraction > 0.0)
            .then(|| data.subset(&ids.test))
            .transpose()?,
        seed,
        validation_fraction,
        ids,
    })
}
