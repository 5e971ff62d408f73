use serde::{Deserialize, Serialize};

use super::{Feature, FeatureMatrix, FeatureVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub feature: Feature,
    pub min: f64,
    pub max: f64,
}

/// Min-max scaling fitted on one matrix and reusable on others.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub columns: Vec<ColumnRange>,
}

impl MinMaxScaler {
    /// Records min and max of each selected numeric column. Boolean columns
    /// in the selection are ignored.
    pub fn fit(matrix: &FeatureMatrix, columns: &[Feature]) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut ranges = Vec::new();
        for &feature in columns {
            if feature.is_boolean() || ranges.iter().any(|r: &ColumnRange| r.feature == feature) {
                continue;
            }
            let (min, max) = matrix
                .rows
                .iter()
                .map(|r| r.get(feature))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            ranges.push(ColumnRange { feature, min, max });
        }
        Ok(Self { columns: ranges })
    }

    /// `(x - min) / (max - min)`; a constant column maps to 0.
    pub fn scale(range: &ColumnRange, x: f64) -> f64 {
        let span = range.max - range.min;
        if span > 0.0 {
            (x - range.min) / span
        } else {
            0.0
        }
    }

    pub fn apply_row(&self, row: &FeatureVector) -> FeatureVector {
        let mut out = row.clone();
        for range in &self.columns {
            out.set(range.feature, Self::scale(range, row.get(range.feature)));
        }
        out
    }

    pub fn apply(&self, matrix: &FeatureMatrix) -> FeatureMatrix {
        FeatureMatrix::new(matrix.rows.iter().map(|r| self.apply_row(r)).collect())
    }
}

/// Fits a scaler on `matrix` and applies it, returning both.
pub fn min_max_normalize(matrix: &FeatureMatrix, columns: &[Feature]) -> Result<(FeatureMatrix, MinMaxScaler)> {
    let scaler = MinMaxScaler::fit(matrix, columns)?;
    Ok((scaler.apply(matrix), scaler))
}
