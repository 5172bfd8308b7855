//! Feature schema: correlation-based feature selection and min-max scaling.
//!
//! Both steps are fitted on training rows only. The correlation filter does
//! a greedy left-to-right scan in schema order: a column is dropped when its
//! Pearson correlation with an already-retained column exceeds the cutoff in
//! magnitude, and zero-variance columns are dropped outright (their
//! correlation is undefined).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::features::FeatureVector;
use crate::stats;

/// Default Pearson cutoff: drop columns correlated above 95%.
pub const DEFAULT_CORRELATION_CUTOFF: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub enum SchemaError {
    /// Rows disagree on dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// `apply_scaler` called before `fit_scaler`.
    SchemaNotFitted,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaError::DimensionMismatch { expected, got } => {
                write!(f, "row has {got} values, schema expects {expected}")
            }
            SchemaError::SchemaNotFitted => write!(f, "scaler has not been fitted"),
        }
    }
}

impl core::error::Error for SchemaError {}

/// Which raw features survive filtering and how each is scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    /// Raw feature names, in input-row order.
    pub names: Vec<String>,
    /// Strictly increasing indices into `names` surviving the filter.
    pub retained_indices: Vec<usize>,
    /// Per-retained-feature (min, max) fitted on training rows.
    pub scaler: Option<Vec<(f64, f64)>>,
}

impl FeatureSchema {
    pub fn new(names: Vec<String>, retained_indices: Vec<usize>) -> Self {
        debug_assert!(retained_indices.windows(2).all(|w| w[0] < w[1]));
        FeatureSchema {
            names,
            retained_indices,
            scaler: None,
        }
    }

    /// Dimension of rows after filtering, i.e. the model input dimension.
    pub fn output_dim(&self) -> usize {
        self.retained_indices.len()
    }
}

/// Greedy Pearson filter over the columns of `matrix`; returns the retained
/// column indices. `matrix` rows must be non-empty and uniform in dimension;
/// `cutoff` must lie in (0, 1].
pub fn correlation_filter(matrix: &[Vec<f64>], cutoff: f64) -> Result<Vec<usize>, SchemaError> {
    assert!(!matrix.is_empty(), "correlation filter needs at least one row");
    assert!(cutoff > 0.0 && cutoff <= 1.0, "cutoff must be in (0, 1]");
    let dim = matrix[0].len();
    for row in matrix {
        if row.len() != dim {
            return Err(SchemaError::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }

    let columns: Vec<Vec<f64>> = (0..dim)
        .map(|j| matrix.iter().map(|row| row[j]).collect())
        .collect();

    let mut retained: Vec<usize> = Vec::new();
    for j in 0..dim {
        if stats::population_std(&columns[j]) == 0.0 {
            continue;
        }
        let correlated = retained.iter().any(|&i| {
            stats::pearson(&columns[i], &columns[j])
                .map(|r| r.abs() > cutoff)
                .unwrap_or(false)
        });
        if !correlated {
            retained.push(j);
        }
    }
    Ok(retained)
}

/// Fits per-feature (min, max) on training rows for the schema's retained
/// columns. Training rows carry the full raw dimension.
pub fn fit_scaler(schema: &mut FeatureSchema, train_matrix: &[Vec<f64>]) -> Result<(), SchemaError> {
    assert!(!train_matrix.is_empty(), "scaler needs at least one training row");
    let dim = schema.names.len();
    for row in train_matrix {
        if row.len() != dim {
            return Err(SchemaError::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    let ranges = schema
        .retained_indices
        .iter()
        .map(|&j| {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for row in train_matrix {
                min = min.min(row[j]);
                max = max.max(row[j]);
            }
            (min, max)
        })
        .collect();
    schema.scaler = Some(ranges);
    Ok(())
}

/// Projects a raw row onto the retained columns and min-max scales each to
/// [0, 1], clamping values outside the fitted range. A feature with
/// degenerate range (max = min) scales to 0.
pub fn apply_scaler(schema: &FeatureSchema, row: &FeatureVector) -> Result<FeatureVector, SchemaError> {
    let ranges = schema.scaler.as_ref().ok_or(SchemaError::SchemaNotFitted)?;
    if row.values.len() != schema.names.len() {
        return Err(SchemaError::DimensionMismatch {
            expected: schema.names.len(),
            got: row.values.len(),
        });
    }
    let values = schema
        .retained_indices
        .iter()
        .zip(ranges)
        .map(|(&j, &(min, max))| {
            if max == min {
                0.0
            } else {
                ((row.values[j] - min) / (max - min)).clamp(0.0, 1.0)
            }
        })
        .collect();
    Ok(FeatureVector {
        values,
        label: row.label,
        flow_id: row.flow_id.clone(),
    })
}
