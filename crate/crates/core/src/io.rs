//! CSV datasets and tree files.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind, Sample};
use crate::error::{Error, Result};
use crate::tree::{CausalTree, TreeNode, FORMAT_VERSION};

/// Which CSV columns play which part. Empty `features` means every column
/// not otherwise assigned, in file order. Without an explicit `true_effect`,
/// a column named `true_effect` is read as one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRoles {
    #[serde(default)]
    pub features: Vec<String>,
    pub treatment: String,
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_effect: Option<String>,
    /// Feature columns holding ordinal levels.
    #[serde(default)]
    pub discrete: Vec<String>,
}

impl Default for ColumnRoles {
    fn default() -> Self {
        ColumnRoles {
            features: Vec::new(),
            treatment: "treatment".into(),
            outcome: "outcome".into(),
            true_effect: None,
            discrete: Vec::new(),
        }
    }
}

impl ColumnRoles {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let named = self
            .features
            .iter()
            .chain([&self.treatment, &self.outcome])
            .chain(self.true_effect.as_ref());
        for name in named {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidConfig(format!("column '{name}' assigned to more than one role")));
            }
        }
        for d in &self.discrete {
            if d == &self.treatment || d == &self.outcome || Some(d) == self.true_effect.as_ref() {
                return Err(Error::InvalidConfig(format!("discrete column '{d}' is not a feature")));
            }
        }
        Ok(())
    }
}

/// Header name used for the true-effect column when writing.
pub const TRUE_EFFECT_COLUMN: &str = "true_effect";

fn csv_error(row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Csv {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Parse a dataset from CSV text. Row numbers in errors are file lines,
/// the header being line 1.
pub fn read_csv_from(reader: impl Read, roles: &ColumnRoles) -> Result<Dataset> {
    roles.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(1, "", e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| csv_error(1, name, "column not found in header"))
    };
    let treatment_col = find(&roles.treatment)?;
    let outcome_col = find(&roles.outcome)?;
    let effect_col = match roles.true_effect.as_deref() {
        Some(name) => Some(find(name)?),
        None => headers.iter().position(|h| h == TRUE_EFFECT_COLUMN),
    };
    let feature_names: Vec<String> = if roles.features.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != treatment_col && *i != outcome_col && Some(*i) != effect_col)
            .map(|(_, h)| h.clone())
            .collect()
    } else {
        roles.features.clone()
    };
    if feature_names.is_empty() {
        return Err(Error::InvalidConfig("no feature columns".into()));
    }
    let feature_cols = feature_names.iter().map(|n| find(n)).collect::<Result<Vec<_>>>()?;
    for d in &roles.discrete {
        if !feature_names.contains(d) {
            return Err(Error::InvalidConfig(format!("discrete column '{d}' is not a feature")));
        }
    }
    let kinds = feature_names
        .iter()
        .map(|n| {
            if roles.discrete.contains(n) {
                FeatureKind::Discrete
            } else {
                FeatureKind::Continuous
            }
        })
        .collect();

    let mut samples = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let row = k + 2;
        let record = record.map_err(|e| csv_error(row, "", e.to_string()))?;
        let value = |col: usize| -> Result<f64> {
            let name = &headers[col];
            let raw = record.get(col).ok_or_else(|| csv_error(row, name, "missing field"))?.trim();
            if raw.is_empty() {
                return Err(csv_error(row, name, "missing value"));
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| csv_error(row, name, format!("'{raw}' is not a number")))?;
            if !v.is_finite() {
                return Err(csv_error(row, name, format!("'{raw}' is not finite")));
            }
            Ok(v)
        };
        let features = feature_cols.iter().map(|&c| value(c)).collect::<Result<Vec<_>>>()?;
        let mut sample = Sample::new(features, value(treatment_col)?, value(outcome_col)?);
        if let Some(c) = effect_col {
            sample = sample.with_true_effect(value(c)?);
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::EmptyData);
    }
    Dataset::new(samples, feature_names, kinds)
}

pub fn read_csv(path: impl AsRef<Path>, roles: &ColumnRoles) -> Result<Dataset> {
    read_csv_from(BufReader::new(File::open(path)?), roles)
}

/// Feature rows of a CSV, taking the named columns in the given order.
/// Other columns are ignored.
pub fn read_feature_rows(path: impl AsRef<Path>, names: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(BufReader::new(File::open(path)?));
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(1, "", e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let cols = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| csv_error(1, n, "column not found in header"))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let row = k + 2;
        let record = record.map_err(|e| csv_error(row, "", e.to_string()))?;
        let mut x = Vec::with_capacity(cols.len());
        for &c in &cols {
            let raw = record.get(c).unwrap_or("").trim();
            let v: f64 = raw
                .parse()
                .map_err(|_| csv_error(row, &headers[c], format!("'{raw}' is not a number")))?;
            if !v.is_finite() {
                return Err(csv_error(row, &headers[c], format!("'{raw}' is not finite")));
            }
            x.push(v);
        }
        rows.push(x);
    }
    Ok(rows)
}

/// Write features, treatment, outcome and (when every sample has one) the
/// true effect.
pub fn write_csv_to(writer: impl Write, data: &Dataset, roles: &ColumnRoles) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let with_effect = data.has_true_effects() && !data.is_empty();
    let effect_name = roles.true_effect.as_deref().unwrap_or(TRUE_EFFECT_COLUMN);
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    header.push(&roles.treatment);
    header.push(&roles.outcome);
    if with_effect {
        header.push(effect_name);
    }
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(&header).map_err(io)?;
    for s in data.samples() {
        let mut row: Vec<String> = s.features.iter().map(f64::to_string).collect();
        row.push(s.treatment.to_string());
        row.push(s.outcome.to_string());
        if with_effect {
            row.push(s.true_effect.unwrap_or(f64::NAN).to_string());
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, data: &Dataset, roles: &ColumnRoles) -> Result<()> {
    write_csv_to(File::create(path)?, data, roles)
}

pub fn tree_to_string(tree: &CausalTree) -> Result<String> {
    let mut s = serde_json::to_string_pretty(tree).map_err(|e| Error::CorruptTree(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn tree_from_str(text: &str) -> Result<CausalTree> {
    let tree: CausalTree = serde_json::from_str(text).map_err(|e| Error::CorruptTree(e.to_string()))?;
    check_tree(&tree)?;
    Ok(tree)
}

pub fn save_tree(path: impl AsRef<Path>, tree: &CausalTree) -> Result<()> {
    std::fs::write(path, tree_to_string(tree)?)?;
    Ok(())
}

pub fn load_tree(path: impl AsRef<Path>) -> Result<CausalTree> {
    tree_from_str(&std::fs::read_to_string(path)?)
}

fn check_tree(tree: &CausalTree) -> Result<()> {
    let corrupt = |m: String| Err(Error::CorruptTree(m));
    if tree.format_version != FORMAT_VERSION {
        return corrupt(format!("unsupported format version '{}'", tree.format_version));
    }
    if tree.feature_kinds.len() != tree.feature_names.len() {
        return corrupt("feature_kinds and feature_names differ in length".into());
    }
    fn node(n: &TreeNode, d: usize, depth: usize) -> std::result::Result<(), String> {
        if n.depth != depth {
            return Err(format!("node depth {} found at depth {depth}", n.depth));
        }
        if !n.ace.is_finite() {
            return Err("leaf effect is not finite".into());
        }
        match (&n.rule, &n.left, &n.right) {
            (None, None, None) => Ok(()),
            (Some(rule), Some(l), Some(r)) => {
                if rule.feature >= d {
                    return Err(format!("split on feature {} of {d}", rule.feature));
                }
                node(l, d, depth + 1)?;
                node(r, d, depth + 1)
            }
            _ => Err("internal node must have a rule and two children".into()),
        }
    }
    node(&tree.root, tree.dimension(), 0).or_else(corrupt)
}
