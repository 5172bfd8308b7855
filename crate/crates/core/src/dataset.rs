//! Dataset splitting and end-to-end preparation for training.
//!
//! The autoencoder trains on benign traffic only, so the split ratios apply
//! to the benign rows: benign train/validation/test partitions come from a
//! seeded shuffle and contiguous cut, and every attack row goes straight to
//! the test partition.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use crate::features::{FeatureVector, Label};
use crate::rng;
use crate::schema::{self, FeatureSchema, SchemaError};

/// Benign train / benign validation / mixed test portions of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<FeatureVector>,
    pub validation: Vec<FeatureVector>,
    pub test: Vec<FeatureVector>,
}

/// A split dataset with its fitted schema, rows already filtered and scaled.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub schema: FeatureSchema,
    pub train: Vec<FeatureVector>,
    pub validation: Vec<FeatureVector>,
    pub test: Vec<FeatureVector>,
}

impl PreparedDataset {
    /// Model input dimension after feature filtering.
    pub fn input_dim(&self) -> usize {
        self.schema.output_dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetError {
    /// A split partition would come out empty.
    InsufficientRows { benign: usize },
    /// Rows disagree on dimension.
    Schema(SchemaError),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::InsufficientRows { benign } => {
                write!(f, "{benign} benign rows cannot fill train/validation/test")
            }
            DatasetError::Schema(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DatasetError {}

impl From<SchemaError> for DatasetError {
    fn from(e: SchemaError) -> Self {
        DatasetError::Schema(e)
    }
}

/// Splits labeled rows into benign train, benign validation, and mixed test.
///
/// Ratios must be positive and sum to 1 (within 1e-9). Benign rows are
/// shuffled with the seed and cut contiguously; attack and unknown rows are
/// appended to the test partition in input order.
pub fn split_dataset(
    rows: &[FeatureVector],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit, DatasetError> {
    let (r_train, r_val, r_test) = ratios;
    assert!(r_train > 0.0 && r_val > 0.0 && r_test > 0.0, "ratios must be positive");
    assert!(
        (r_train + r_val + r_test - 1.0).abs() <= 1e-9,
        "ratios must sum to 1"
    );

    let mut benign: Vec<FeatureVector> = Vec::new();
    let mut rest: Vec<FeatureVector> = Vec::new();
    for row in rows {
        if row.label == Label::Benign {
            benign.push(row.clone());
        } else {
            rest.push(row.clone());
        }
    }

    let n = benign.len();
    let n_train = libm::floor(r_train * n as f64) as usize;
    let n_val = libm::floor(r_val * n as f64) as usize;
    if n_train == 0 || n_val == 0 || (n_train + n_val >= n && rest.is_empty()) {
        return Err(DatasetError::InsufficientRows { benign: n });
    }

    let mut shuffle_rng = rng::seeded_rng(rng::derive_seed(seed, 0x5b17, 0));
    benign.shuffle(&mut shuffle_rng);

    let mut iter = benign.into_iter();
    let train: Vec<FeatureVector> = iter.by_ref().take(n_train).collect();
    let validation: Vec<FeatureVector> = iter.by_ref().take(n_val).collect();
    let mut test: Vec<FeatureVector> = iter.collect();
    test.extend(rest);

    Ok(DatasetSplit {
        train,
        validation,
        test,
    })
}

/// Conventional ratios; validation must be sizable because the detection
/// threshold is calibrated on it.
pub const DEFAULT_SPLIT_RATIOS: (f64, f64, f64) = (0.6, 0.2, 0.2);

/// Splits raw labeled rows, fits the correlation filter and scaler on the
/// training partition, and returns all three partitions scaled.
pub fn prepare_dataset(
    rows: &[FeatureVector],
    names: &[&str],
    ratios: (f64, f64, f64),
    correlation_cutoff: f64,
    seed: u64,
) -> Result<PreparedDataset, DatasetError> {
    let split = split_dataset(rows, ratios, seed)?;

    let train_matrix: Vec<Vec<f64>> = split.train.iter().map(|r| r.values.clone()).collect();
    let retained = schema::correlation_filter(&train_matrix, correlation_cutoff)?;
    let mut schema = FeatureSchema::new(
        names.iter().map(|n| alloc::string::String::from(*n)).collect(),
        retained,
    );
    schema::fit_scaler(&mut schema, &train_matrix)?;

    let scale_all = |rows: &[FeatureVector]| -> Result<Vec<FeatureVector>, SchemaError> {
        rows.iter().map(|r| schema::apply_scaler(&schema, r)).collect()
    };
    let train = scale_all(&split.train)?;
    let validation = scale_all(&split.validation)?;
    let test = scale_all(&split.test)?;

    Ok(PreparedDataset {
        schema,
        train,
        validation,
        test,
    })
}
