//! Labeled state-action samples built from simulated order records.

mod features;
mod io;
mod prep;

use thiserror::Error;

use crate::agents::Archetype;

pub use features::{
    extract_all, extract_sample, ExtractStats, LabeledSample, Skip, COLUMNS, DIRECTION_COLUMN,
    FEATURES,
};
pub use io::{
    read_jsonl, read_records_jsonl, read_samples_jsonl, write_jsonl, write_records_jsonl,
    write_samples_jsonl, SampleHeader,
};
pub use prep::{balance_downsample, class_counts, split, Scaler, Splits, DEFAULT_RATIOS};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("class {class} has {count} samples, fewer than the {needed} requested")]
    InsufficientClass {
        class: Archetype,
        count: usize,
        needed: usize,
    },
    #[error("cannot split an empty sample set")]
    Empty,
    #[error("split ratios {0:?} must be non-negative and sum to 1")]
    BadRatios([f64; 3]),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("sample header declares columns {found:?}, expected the {expected}-column layout")]
    Columns { found: Vec<String>, expected: usize },
    #[error("scaler expects {expected} columns, got {got}")]
    Width { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
