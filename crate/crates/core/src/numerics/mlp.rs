use std::fmt::Debug;
use std::ops::Range;

use num_traits::{Float, FromPrimitive};
use rand::Rng;

use super::NumericsError;

/// Scalar type the network can be instantiated with (`f32` for training,
/// `f64` for gradient checks).
pub trait Real: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {}
impl<T: Float + FromPrimitive + Debug + Default + Send + Sync + 'static> Real for T {}

/// Layer widths of a two-hidden-layer perceptron.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpShape {
    pub input: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub classes: usize,
}

impl MlpShape {
    pub fn new(input: usize, hidden1: usize, hidden2: usize, classes: usize) -> Self {
        MlpShape {
            input,
            hidden1,
            hidden2,
            classes,
        }
    }

    /// Parameter blocks in storage order: W1, b1, W2, b2, W3, b3.
    pub fn blocks(&self) -> [(usize, usize); 6] {
        [
            (self.hidden1, self.input),
            (self.hidden1, 1),
            (self.hidden2, self.hidden1),
            (self.hidden2, 1),
            (self.classes, self.hidden2),
            (self.classes, 1),
        ]
    }

    fn ranges(&self) -> [Range<usize>; 6] {
        let mut start = 0;
        self.blocks().map(|(r, c)| {
            let range = start..start + r * c;
            start += r * c;
            range
        })
    }

    pub fn num_params(&self) -> usize {
        self.blocks().iter().map(|(r, c)| r * c).sum()
    }
}

/// Weights stored as one flat row-major buffer so optimizers can treat the
/// whole network as a single vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams<T> {
    shape: MlpShape,
    data: Vec<T>,
}

/// Activations of one forward pass. `h2` is the penultimate feature map.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward<T> {
    pub h1: Vec<T>,
    pub h2: Vec<T>,
    pub logits: Vec<T>,
}

pub fn relu<T: Real>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

/// Cross-entropy of softmax(logits) against `label`, with its gradient with
/// respect to the logits (softmax − one-hot). Max-subtracted for stability.
pub fn softmax_xent<T: Real>(logits: &[T], label: usize) -> (T, Vec<T>) {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total = exps.iter().copied().fold(T::zero(), |a, b| a + b);
    let loss = total.ln() - (logits[label] - max);
    let mut grad: Vec<T> = exps.iter().map(|&e| e / total).collect();
    grad[label] = grad[label] - T::one();
    (loss, grad)
}

pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total = exps.iter().copied().fold(T::zero(), |a, b| a + b);
    exps.into_iter().map(|e| e / total).collect()
}

fn affine<T: Real>(w: &[T], b: &[T], x: &[T], out: &mut [T]) {
    let cols = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &w[i * cols..(i + 1) * cols];
        let mut acc = b[i];
        for (wij, xj) in row.iter().zip(x) {
            acc = acc + *wij * *xj;
        }
        *o = acc;
    }
}

impl<T: Real> MlpParams<T> {
    pub fn zeros(shape: MlpShape) -> Self {
        MlpParams {
            shape,
            data: vec![T::zero(); shape.num_params()],
        }
    }

    /// Scaled-uniform weights in ±√(6/(fan_in + fan_out)), zero biases.
    pub fn init<R: Rng + ?Sized>(shape: MlpShape, rng: &mut R) -> Self {
        let mut params = Self::zeros(shape);
        let ranges = shape.ranges();
        for (k, (rows, cols)) in shape.blocks().into_iter().enumerate() {
            if k % 2 == 1 {
                continue;
            }
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            for w in &mut params.data[ranges[k].clone()] {
                *w = T::from_f64(rng.random_range(-limit..limit)).unwrap();
            }
        }
        params
    }

    pub fn from_flat(shape: MlpShape, data: Vec<T>) -> Result<Self, NumericsError> {
        if data.len() != shape.num_params() {
            return Err(NumericsError::DimensionMismatch {
                expected: shape.num_params(),
                got: data.len(),
            });
        }
        Ok(MlpParams { shape, data })
    }

    pub fn shape(&self) -> MlpShape {
        self.shape
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Block `k` in storage order (W1, b1, W2, b2, W3, b3).
    pub fn block(&self, k: usize) -> &[T] {
        &self.data[self.shape.ranges()[k].clone()]
    }

    pub fn cast<U: Real>(&self) -> MlpParams<U> {
        MlpParams {
            shape: self.shape,
            data: self
                .data
                .iter()
                .map(|v| U::from_f64(v.to_f64().unwrap()).unwrap())
                .collect(),
        }
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = T::zero());
    }

    pub fn forward(&self, x: &[T]) -> Result<Forward<T>, NumericsError> {
        let s = self.shape;
        if x.len() != s.input {
            return Err(NumericsError::DimensionMismatch {
                expected: s.input,
                got: x.len(),
            });
        }
        let r = s.ranges();
        let d = &self.data;
        let mut h1 = vec![T::zero(); s.hidden1];
        affine(&d[r[0].clone()], &d[r[1].clone()], x, &mut h1);
        h1.iter_mut().for_each(|v| *v = relu(*v));
        let mut h2 = vec![T::zero(); s.hidden2];
        affine(&d[r[2].clone()], &d[r[3].clone()], &h1, &mut h2);
        h2.iter_mut().for_each(|v| *v = relu(*v));
        let mut logits = vec![T::zero(); s.classes];
        affine(&d[r[4].clone()], &d[r[5].clone()], &h2, &mut logits);
        Ok(Forward { h1, h2, logits })
    }

    pub fn predict(&self, x: &[T]) -> Result<usize, NumericsError> {
        let f = self.forward(x)?;
        Ok(argmax(&f.logits))
    }

    pub fn loss(&self, x: &[T], label: usize) -> Result<T, NumericsError> {
        let f = self.forward(x)?;
        check_label(label, self.shape.classes)?;
        Ok(softmax_xent(&f.logits, label).0)
    }

    /// Gradient of the cross-entropy loss for one example.
    pub fn backward(&self, x: &[T], label: usize) -> Result<(T, MlpParams<T>), NumericsError> {
        let mut grads = MlpParams::zeros(self.shape);
        let loss = self.accumulate_gradient(x, label, &mut grads)?;
        Ok((loss, grads))
    }

    /// Adds this example's gradient into `grads` and returns its loss.
    pub fn accumulate_gradient(
        &self,
        x: &[T],
        label: usize,
        grads: &mut MlpParams<T>,
    ) -> Result<T, NumericsError> {
        check_label(label, self.shape.classes)?;
        let fwd = self.forward(x)?;
        let s = self.shape;
        let r = s.ranges();
        let (loss, dz3) = softmax_xent(&fwd.logits, label);
        let w = &self.data;
        let g = &mut grads.data;

        // output layer
        let w3 = &w[r[4].clone()];
        let mut dh2 = vec![T::zero(); s.hidden2];
        for (c, &dc) in dz3.iter().enumerate() {
            let row = c * s.hidden2;
            for j in 0..s.hidden2 {
                g[r[4].start + row + j] = g[r[4].start + row + j] + dc * fwd.h2[j];
                dh2[j] = dh2[j] + w3[row + j] * dc;
            }
            g[r[5].start + c] = g[r[5].start + c] + dc;
        }

        // second hidden layer
        let w2 = &w[r[2].clone()];
        let mut dh1 = vec![T::zero(); s.hidden1];
        for i in 0..s.hidden2 {
            if fwd.h2[i] <= T::zero() {
                continue;
            }
            let dz = dh2[i];
            let row = i * s.hidden1;
            let gw = &mut g[r[2].start + row..r[2].start + row + s.hidden1];
            for (k, gk) in gw.iter_mut().enumerate() {
                *gk = *gk + dz * fwd.h1[k];
            }
            for (k, dk) in dh1.iter_mut().enumerate() {
                *dk = *dk + w2[row + k] * dz;
            }
            g[r[3].start + i] = g[r[3].start + i] + dz;
        }

        // first hidden layer
        for k in 0..s.hidden1 {
            if fwd.h1[k] <= T::zero() {
                continue;
            }
            let dz = dh1[k];
            let row = k * s.input;
            let gw = &mut g[r[0].start + row..r[0].start + row + s.input];
            for (m, gm) in gw.iter_mut().enumerate() {
                *gm = *gm + dz * x[m];
            }
            g[r[1].start + k] = g[r[1].start + k] + dz;
        }
        Ok(loss)
    }
}

fn check_label(label: usize, classes: usize) -> Result<(), NumericsError> {
    if label >= classes {
        Err(NumericsError::LabelOutOfRange { label, classes })
    } else {
        Ok(())
    }
}

pub fn argmax<T: PartialOrd>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
