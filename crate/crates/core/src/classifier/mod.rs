//! Archetype classifier: minibatch Adam training of the perceptron on scaled
//! feature vectors, evaluation, model files and penultimate-layer PCA.

mod model_io;

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::Archetype;
use crate::dataset::{LabeledSample, FEATURES};
use crate::numerics::{
    confusion_matrix, pca, softmax_xent, AdamConfig, AdamState, ConfusionMatrix, MlpParams,
    MlpShape, NumericsError, PcaModel,
};

pub use model_io::{read_model_csv, write_model_csv};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("no training samples")]
    Empty,
    #[error("sample has {got} features, model expects {expected}")]
    Width { expected: usize, got: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: [usize; 2],
    pub learning_rate: f64,
    pub seed: u64,
    /// Keep the parameters from the epoch with the lowest validation loss.
    pub keep_best: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            batch_size: 64,
            hidden: [128, 128],
            learning_rate: 4e-4,
            seed: 0,
            keep_best: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.epochs == 0 || self.batch_size == 0 || self.hidden.contains(&0) {
            return Err(ClassifierError::InvalidConfig(
                "epochs, batch_size and hidden widths must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ClassifierError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> MlpShape {
        MlpShape::new(
            FEATURES,
            self.hidden[0],
            self.hidden[1],
            Archetype::ALL.len(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean minibatch loss over the epoch.
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: MlpParams<f32>,
    pub history: Vec<EpochStats>,
    /// Epoch whose parameters were kept (1-based).
    pub best_epoch: usize,
}

/// Feature rows and label codes in single precision.
#[derive(Debug, Clone)]
pub struct Batch {
    pub x: Vec<Vec<f32>>,
    pub y: Vec<usize>,
}

impl Batch {
    pub fn from_samples(samples: &[LabeledSample], width: usize) -> Result<Batch, ClassifierError> {
        let mut x = Vec::with_capacity(samples.len());
        let mut y = Vec::with_capacity(samples.len());
        for s in samples {
            if s.features.len() != width {
                return Err(ClassifierError::Width {
                    expected: width,
                    got: s.features.len(),
                });
            }
            x.push(s.features.iter().map(|&v| v as f32).collect());
            y.push(s.label.code());
        }
        Ok(Batch { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// One Adam step on the mean loss of the indexed examples. Returns that loss.
pub fn adam_step(
    model: &mut MlpParams<f32>,
    adam: &mut AdamState<f32>,
    grads: &mut MlpParams<f32>,
    data: &Batch,
    idx: &[usize],
) -> Result<f64, ClassifierError> {
    grads.fill_zero();
    let mut loss = 0.0f64;
    for &i in idx {
        loss += model.accumulate_gradient(&data.x[i], data.y[i], grads)? as f64;
    }
    let scale = 1.0 / idx.len() as f32;
    grads.as_mut_slice().iter_mut().for_each(|g| *g *= scale);
    adam.step(model.as_mut_slice(), grads.as_slice())?;
    Ok(loss / idx.len() as f64)
}

/// Mean cross-entropy and accuracy over a batch.
pub fn loss_and_accuracy(
    model: &MlpParams<f32>,
    data: &Batch,
) -> Result<(f64, f64), ClassifierError> {
    if data.is_empty() {
        return Err(ClassifierError::Empty);
    }
    let mut loss = 0.0;
    let mut hits = 0usize;
    for (x, &y) in data.x.iter().zip(&data.y) {
        let f = model.forward(x)?;
        loss += softmax_xent(&f.logits, y).0 as f64;
        if crate::numerics::argmax(&f.logits) == y {
            hits += 1;
        }
    }
    let n = data.len() as f64;
    Ok((loss / n, hits as f64 / n))
}

pub fn train(
    train: &[LabeledSample],
    val: &[LabeledSample],
    cfg: &TrainConfig,
) -> Result<TrainOutput, ClassifierError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(ClassifierError::Empty);
    }
    let shape = cfg.shape();
    let data = Batch::from_samples(train, shape.input)?;
    let val = Batch::from_samples(val, shape.input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpParams::<f32>::init(shape, &mut rng);
    let mut adam = AdamState::new(
        shape.num_params(),
        AdamConfig {
            learning_rate: cfg.learning_rate,
            ..AdamConfig::default()
        },
    );
    let mut grads = MlpParams::zeros(shape);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, MlpParams<f32>)> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            total += adam_step(&mut model, &mut adam, &mut grads, &data, chunk)?;
            batches += 1;
        }
        let (val_loss, val_accuracy) = if val.is_empty() {
            (None, None)
        } else {
            let (l, a) = loss_and_accuracy(&model, &val)?;
            (Some(l), Some(a))
        };
        let stats = EpochStats {
            epoch,
            train_loss: total / batches as f64,
            val_loss,
            val_accuracy,
        };
        log::debug!(
            "epoch {epoch}: train {:.4} val {:?} acc {:?}",
            stats.train_loss,
            val_loss,
            val_accuracy
        );
        history.push(stats);
        if let (true, Some(l)) = (cfg.keep_best, val_loss) {
            if best.as_ref().is_none_or(|(b, _, _)| l < *b) {
                best = Some((l, epoch, model.clone()));
            }
        }
    }
    let (model, best_epoch) = match best {
        Some((_, e, m)) => (m, e),
        None => (model, cfg.epochs),
    };
    Ok(TrainOutput {
        model,
        history,
        best_epoch,
    })
}

pub fn predict(
    model: &MlpParams<f32>,
    samples: &[LabeledSample],
) -> Result<Vec<usize>, ClassifierError> {
    let data = Batch::from_samples(samples, model.shape().input)?;
    data.x
        .iter()
        .map(|x| model.predict(x).map_err(ClassifierError::from))
        .collect()
}

pub fn evaluate(
    model: &MlpParams<f32>,
    samples: &[LabeledSample],
) -> Result<ConfusionMatrix, ClassifierError> {
    let preds = predict(model, samples)?;
    let labels: Vec<usize> = samples.iter().map(|s| s.label.code()).collect();
    Ok(confusion_matrix(&preds, &labels, model.shape().classes)?)
}

/// Second hidden layer activations, one row per sample.
pub fn penultimate(
    model: &MlpParams<f32>,
    samples: &[LabeledSample],
) -> Result<Vec<Vec<f64>>, ClassifierError> {
    let data = Batch::from_samples(samples, model.shape().input)?;
    data.x
        .iter()
        .map(|x| {
            let f = model.forward(x)?;
            Ok(f.h2.iter().map(|&v| v as f64).collect())
        })
        .collect()
}

/// Fits PCA on the penultimate activations and projects them onto the top `k`
/// axes.
pub fn project_penultimate(
    model: &MlpParams<f32>,
    samples: &[LabeledSample],
    k: usize,
) -> Result<(PcaModel, Vec<Vec<f64>>), ClassifierError> {
    let rows = penultimate(model, samples)?;
    let pca = pca::fit(&rows, k)?;
    let projected = pca.project(&rows)?;
    Ok((pca, projected))
}

pub fn write_projection_csv<W: Write>(
    mut w: W,
    projected: &[Vec<f64>],
    labels: &[Archetype],
) -> std::io::Result<()> {
    let k = projected.first().map_or(0, |r| r.len());
    let header: Vec<String> = (1..=k).map(|i| format!("pc{i}")).collect();
    writeln!(w, "{},label", header.join(","))?;
    for (row, label) in projected.iter().zip(labels) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{},{label}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_history_csv<W: Write>(mut w: W, history: &[EpochStats]) -> std::io::Result<()> {
    writeln!(w, "epoch,train_loss,val_loss,val_accuracy")?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for h in history {
        writeln!(
            w,
            "{},{},{},{}",
            h.epoch,
            h.train_loss,
            opt(h.val_loss),
            opt(h.val_accuracy)
        )?;
    }
    Ok(())
}

/// Rows are true labels, columns predictions.
pub fn write_confusion_csv<W: Write>(mut w: W, cm: &ConfusionMatrix) -> std::io::Result<()> {
    let names: Vec<&str> = Archetype::ALL.iter().map(|a| a.name()).collect();
    writeln!(w, "true\\pred,{}", names.join(","))?;
    for (name, row) in names.iter().zip(&cm.counts) {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{name},{}", cells.join(","))?;
    }
    Ok(())
}
