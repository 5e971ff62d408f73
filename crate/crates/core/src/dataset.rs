//! Dataset persistence and summary reports.
//!
//! The CSV schema is fixed: `commit` followed by the fourteen features in
//! [`Feature::ALL`] order and the `defective` label. Booleans are written as
//! `0`/`1`, every other number with six decimals.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{Feature, FeatureMatrix, FeatureVector};
use crate::szz::CommitLabel;
use crate::vcs::RepoHandle;
use crate::{Error, Result};

pub const COMMIT_COLUMN: &str = "commit";
pub const LABEL_COLUMN: &str = "defective";

pub fn header() -> Vec<&'static str> {
    std::iter::once(COMMIT_COLUMN)
        .chain(Feature::ALL.iter().map(|f| f.name()))
        .chain(std::iter::once(LABEL_COLUMN))
        .collect()
}

fn format_float(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_owned()
    } else {
        s
    }
}

fn format_bool(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes the matrix in dataset CSV form; returns the number of data rows.
pub fn write_csv(matrix: &FeatureMatrix, out: impl Write) -> Result<usize> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(out);
    writer.write_record(header())?;
    for row in &matrix.rows {
        let mut record = Vec::with_capacity(16);
        record.push(row.commit_hash.clone());
        for f in Feature::ALL {
            record.push(if f.is_boolean() {
                format_bool(row.get(f) >= 0.5).to_owned()
            } else {
                format_float(row.get(f))
            });
        }
        record.push(format_bool(row.defective).to_owned());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(matrix.len())
}

pub fn export_csv(matrix: &FeatureMatrix, path: impl AsRef<Path>) -> Result<usize> {
    let file = BufWriter::new(File::create(path)?);
    write_csv(matrix, file)
}

pub fn read_csv(input: impl Read) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let expected = header();
    let found = reader.headers()?.clone();
    for (position, name) in found.iter().enumerate() {
        match expected.get(position) {
            Some(&want) if want == name => {}
            Some(&want) => {
                return Err(Error::SchemaMismatch {
                    position: position + 1,
                    found: name.to_owned(),
                    expected: want.to_owned(),
                })
            }
            None => {
                return Err(Error::SchemaMismatch {
                    position: position + 1,
                    found: name.to_owned(),
                    expected: String::new(),
                })
            }
        }
    }
    if found.len() < expected.len() {
        return Err(Error::SchemaMismatch {
            position: found.len() + 1,
            found: String::new(),
            expected: expected[found.len()].to_owned(),
        });
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let malformed = |column: &str, reason: String| Error::MalformedRow {
            row,
            column: column.to_owned(),
            reason,
        };
        if record.len() != expected.len() {
            return Err(malformed(
                "*",
                format!("expected {} fields, found {}", expected.len(), record.len()),
            ));
        }
        let commit = &record[0];
        if commit.is_empty() || !commit.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(malformed(COMMIT_COLUMN, format!("not a commit hash: {commit:?}")));
        }
        let parse_bool = |column: &str, text: &str| match text {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(malformed(column, format!("expected 0 or 1, found {other:?}"))),
        };
        let mut vector = FeatureVector {
            commit_hash: commit.to_owned(),
            ..FeatureVector::default()
        };
        for (k, f) in Feature::ALL.into_iter().enumerate() {
            let text = &record[k + 1];
            if f.is_boolean() {
                vector.fix = parse_bool(f.name(), text)?;
                continue;
            }
            let value: f64 = text
                .parse()
                .map_err(|_| malformed(f.name(), format!("not a number: {text:?}")))?;
            if !value.is_finite() {
                return Err(malformed(f.name(), format!("not finite: {text:?}")));
            }
            vector.set(f, value);
        }
        vector.defective = parse_bool(LABEL_COLUMN, &record[15])?;
        rows.push(vector);
    }
    Ok(FeatureMatrix::new(rows))
}

pub fn import_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    read_csv(File::open(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub feature: Feature,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation (denominator N).
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub row_count: usize,
    pub defective_count: usize,
    pub fix_count: usize,
    pub defective_ratio: f64,
    pub fix_ratio: f64,
    /// First and last commit timestamps, when known.
    pub period: Option<(i64, i64)>,
    pub features: Vec<FeatureStats>,
}

fn column_stats(feature: Feature, mut values: Vec<f64>) -> FeatureStats {
    // Sorting first makes the sums independent of row order.
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let min = values[0];
    let max = values[values.len() - 1];
    let mean = (values.iter().sum::<f64>() / n).clamp(min, max);
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    FeatureStats {
        feature,
        min,
        max,
        mean,
        stddev: variance.sqrt(),
    }
}

/// Per-feature population statistics and label counts. `fix` is reported
/// through `fix_count` rather than as a numeric column.
pub fn summarize(matrix: &FeatureMatrix) -> Result<DatasetSummary> {
    if matrix.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = matrix.len();
    let defective_count = matrix.rows.iter().filter(|r| r.defective).count();
    let fix_count = matrix.rows.iter().filter(|r| r.fix).count();
    let features = Feature::ALL
        .into_iter()
        .filter(|f| !f.is_boolean())
        .map(|f| column_stats(f, matrix.column(f)))
        .collect();
    Ok(DatasetSummary {
        row_count: n,
        defective_count,
        fix_count,
        defective_ratio: defective_count as f64 / n as f64,
        fix_ratio: fix_count as f64 / n as f64,
        period: None,
        features,
    })
}

pub const NO_EXTENSION: &str = "no extension";

/// Lowercased text after the last dot of the file name. Dotfiles and names
/// without a suffix map to [`NO_EXTENSION`].
pub fn extension_of(path: &str) -> String {
    let name = path.rsplit('/').next().unwrap_or(path);
    match name.rfind('.') {
        Some(i) if i > 0 && i + 1 < name.len() => name[i + 1..].to_lowercase(),
        _ => NO_EXTENSION.to_owned(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionRow {
    pub extension: String,
    pub mean_files_changed_per_defective_commit: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub defective_commits: usize,
    pub rows: Vec<ExtensionRow>,
    pub mean_files_changed: f64,
    pub mean_distinct_extensions: f64,
}

/// Extension report over the changed-file lists of defective commits.
pub fn extension_report_from_paths<S: AsRef<str>>(commits: &[Vec<S>]) -> ExtensionReport {
    if commits.is_empty() {
        return ExtensionReport::default();
    }
    let n = commits.len() as f64;
    let mut per_extension: BTreeMap<String, usize> = BTreeMap::new();
    let mut total_files = 0usize;
    let mut total_distinct = 0usize;
    for paths in commits {
        let mut distinct = BTreeSet::new();
        for p in paths {
            let ext = extension_of(p.as_ref());
            *per_extension.entry(ext.clone()).or_default() += 1;
            distinct.insert(ext);
            total_files += 1;
        }
        total_distinct += distinct.len();
    }
    let mut rows: Vec<ExtensionRow> = per_extension
        .into_iter()
        .map(|(extension, count)| ExtensionRow {
            extension,
            mean_files_changed_per_defective_commit: count as f64 / n,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.mean_files_changed_per_defective_commit
            .total_cmp(&a.mean_files_changed_per_defective_commit)
            .then_with(|| a.extension.cmp(&b.extension))
    });
    ExtensionReport {
        defective_commits: commits.len(),
        rows,
        mean_files_changed: total_files as f64 / n,
        mean_distinct_extensions: total_distinct as f64 / n,
    }
}

/// Extension report for the commits labeled defective, reading their
/// changed files from the repository. Commits whose diff cannot be read are
/// skipped with a warning.
pub fn extension_report(handle: &RepoHandle, labels: &[CommitLabel]) -> ExtensionReport {
    let defective: Vec<&str> = labels
        .iter()
        .filter(|l| l.defective)
        .map(|l| l.commit_hash.as_str())
        .collect();
    extension_report_for_commits(handle, &defective)
}

pub fn extension_report_for_commits(handle: &RepoHandle, hashes: &[&str]) -> ExtensionReport {
    let paths: Vec<Vec<String>> = hashes
        .par_iter()
        .filter_map(|hash| match handle.commit_diff(hash) {
            Ok(deltas) => Some(deltas.into_iter().map(|d| d.path).collect()),
            Err(e) => {
                log::warn!("extensions: {hash}: {e}");
                None
            }
        })
        .collect();
    extension_report_from_paths(&paths)
}
