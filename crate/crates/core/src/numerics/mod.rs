//! Hand-written numerical kernels: truncated Gaussian distribution and its
//! maximum-likelihood fit, a two-hidden-layer perceptron with exact
//! backpropagation, Adam, PCA by Jacobi rotations, and confusion matrices.

mod adam;
mod confusion;
mod mlp;
pub mod normal;
pub mod pca;
mod truncnorm;

use thiserror::Error;

pub use adam::{AdamConfig, AdamState};
pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use mlp::{argmax, relu, softmax, softmax_xent, Forward, MlpParams, MlpShape, Real};
pub use pca::PcaModel;
pub use truncnorm::{fit_mle, TruncGauss, SIGMA_MIN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid distribution parameters: {0}")]
    InvalidParams(String),
    #[error("value {x} outside support [{lower}, {upper}]")]
    OutOfSupport { x: f64, lower: f64, upper: f64 },
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("invalid component count {k} for a {rows}x{cols} matrix")]
    InvalidK { k: usize, rows: usize, cols: usize },
}
