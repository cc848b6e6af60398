use std::io::{self, BufRead, Write};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{LabeledSample, DIRECTION_COLUMN, FEATURES};
use super::DatasetError;
use crate::agents::Archetype;

/// Train / validation / test fractions.
pub const DEFAULT_RATIOS: [f64; 3] = [0.536, 0.134, 0.334];

const RATIO_SUM_TOLERANCE: f64 = 0.01;
const STD_FLOOR: f64 = 1e-8;

pub fn class_counts(samples: &[LabeledSample]) -> [usize; 4] {
    let mut c = [0; 4];
    for s in samples {
        c[s.label.code()] += 1;
    }
    c
}

/// Keeps exactly `per_class` samples of every archetype, chosen uniformly
/// without replacement. Relative order is preserved.
pub fn balance_downsample<R: Rng + ?Sized>(
    samples: &[LabeledSample],
    per_class: usize,
    rng: &mut R,
) -> Result<Vec<LabeledSample>, DatasetError> {
    let mut by_class: [Vec<usize>; 4] = Default::default();
    for (i, s) in samples.iter().enumerate() {
        by_class[s.label.code()].push(i);
    }
    for class in Archetype::ALL {
        let count = by_class[class.code()].len();
        if count < per_class {
            return Err(DatasetError::InsufficientClass {
                class,
                count,
                needed: per_class,
            });
        }
    }
    let mut keep: Vec<usize> = Vec::with_capacity(4 * per_class);
    for idx in &by_class {
        keep.extend(
            index::sample(rng, idx.len(), per_class)
                .into_iter()
                .map(|k| idx[k]),
        );
    }
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| samples[i].clone()).collect())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Splits {
    pub train: Vec<LabeledSample>,
    pub val: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
}

impl Splits {
    pub fn sizes(&self) -> [usize; 3] {
        [self.train.len(), self.val.len(), self.test.len()]
    }
}

/// Stratified seeded split. Within each class the validation and test sizes
/// are round(ratio · class size) and the train split takes the rest. Each
/// split is shuffled.
pub fn split<R: Rng + ?Sized>(
    samples: &[LabeledSample],
    ratios: [f64; 3],
    rng: &mut R,
) -> Result<Splits, DatasetError> {
    if samples.is_empty() {
        return Err(DatasetError::Empty);
    }
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r))
        || (ratios.iter().sum::<f64>() - 1.0).abs() > RATIO_SUM_TOLERANCE
    {
        return Err(DatasetError::BadRatios(ratios));
    }
    let mut by_class: [Vec<usize>; 4] = Default::default();
    for (i, s) in samples.iter().enumerate() {
        by_class[s.label.code()].push(i);
    }
    let mut out = Splits::default();
    for mut idx in by_class {
        idx.shuffle(rng);
        let n = idx.len();
        let n_val = ((ratios[1] * n as f64).round() as usize).min(n);
        let n_test = ((ratios[2] * n as f64).round() as usize).min(n - n_val);
        let n_train = n - n_val - n_test;
        let take = |r: &[usize]| r.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
        out.train.extend(take(&idx[..n_train]));
        out.val.extend(take(&idx[n_train..n_train + n_val]));
        out.test.extend(take(&idx[n_train + n_val..]));
    }
    out.train.shuffle(rng);
    out.val.shuffle(rng);
    out.test.shuffle(rng);
    Ok(out)
}

/// Per-column z-scoring fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Population statistics per column; std is floored at 1e-8. The
    /// direction column keeps mean 0 and std 1.
    pub fn fit(train: &[LabeledSample]) -> Result<Scaler, DatasetError> {
        if train.is_empty() {
            return Err(DatasetError::Empty);
        }
        let n = train.len() as f64;
        let mut mean = vec![0.0; FEATURES];
        for s in train {
            check_width(s)?;
            for (m, x) in mean.iter_mut().zip(&s.features) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; FEATURES];
        for s in train {
            for ((v, x), m) in var.iter_mut().zip(&s.features).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let mut std: Vec<f64> = var.iter().map(|v| (v / n).sqrt().max(STD_FLOOR)).collect();
        mean[DIRECTION_COLUMN] = 0.0;
        std[DIRECTION_COLUMN] = 1.0;
        Ok(Scaler { mean, std })
    }

    pub fn transform(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn apply(&self, samples: &[LabeledSample]) -> Result<Vec<LabeledSample>, DatasetError> {
        samples
            .iter()
            .map(|s| {
                check_width(s)?;
                Ok(LabeledSample {
                    features: self.transform(&s.features),
                    ..s.clone()
                })
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "column,mean,std")?;
        for (i, name) in super::COLUMNS.iter().enumerate() {
            writeln!(w, "{name},{},{}", self.mean[i], self.std[i])?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Scaler, DatasetError> {
        let (mut mean, mut std) = (Vec::new(), Vec::new());
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| DatasetError::Parse {
                line: i + 1,
                message,
            };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", cols.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            mean.push(num(cols[1])?);
            std.push(num(cols[2])?);
        }
        if mean.len() != FEATURES {
            return Err(DatasetError::Width {
                expected: FEATURES,
                got: mean.len(),
            });
        }
        Ok(Scaler { mean, std })
    }
}

fn check_width(s: &LabeledSample) -> Result<(), DatasetError> {
    if s.features.len() != FEATURES {
        return Err(DatasetError::Width {
            expected: FEATURES,
            got: s.features.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn synthetic(counts: [usize; 4], seed: u64) -> Vec<LabeledSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        let mut id = 0;
        for class in Archetype::ALL {
            for _ in 0..counts[class.code()] {
                id += 1;
                let mut features: Vec<f64> =
                    (0..FEATURES).map(|_| rng.random_range(-5.0..5.0)).collect();
                features[DIRECTION_COLUMN] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                out.push(LabeledSample {
                    label: class,
                    features,
                    seed,
                    timestamp: id,
                    agent: class.code() as u32,
                    order_id: id,
                });
            }
        }
        out.shuffle(&mut rng);
        out
    }

    #[test]
    fn downsample_uneven_counts() {
        let s = synthetic([9000, 7000, 6000, 5000], 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = balance_downsample(&s, 5000, &mut rng).unwrap();
        assert_eq!(b.len(), 20_000);
        assert_eq!(class_counts(&b), [5000; 4]);
        let mut ids: Vec<u64> = b.iter().map(|x| x.order_id).collect();
        ids.dedup();
        assert_eq!(ids.len(), 20_000);
    }

    #[test]
    fn downsample_balanced_is_identity_and_n1() {
        let s = synthetic([30; 4], 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(balance_downsample(&s, 30, &mut rng).unwrap(), s);
        assert_eq!(
            class_counts(&balance_downsample(&s, 1, &mut rng).unwrap()),
            [1; 4]
        );
    }

    #[test]
    fn downsample_names_short_class() {
        let s = synthetic([10, 10, 3, 10], 5);
        let err = balance_downsample(&s, 5, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert!(matches!(
            err,
            DatasetError::InsufficientClass {
                class: Archetype::ME,
                count: 3,
                needed: 5
            }
        ));
        assert!(err.to_string().contains("ME"));
    }

    #[test]
    fn split_sizes_and_partition() {
        let s = synthetic([5000; 4], 6);
        let sp = split(&s, DEFAULT_RATIOS, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(sp.sizes(), [10_640, 2_680, 6_680]);
        let mut ids: Vec<u64> = sp
            .train
            .iter()
            .chain(&sp.val)
            .chain(&sp.test)
            .map(|x| x.order_id)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 20_000);
        for part in [&sp.train, &sp.val, &sp.test] {
            let c = class_counts(part);
            assert!(c.iter().all(|&x| x == c[0]));
        }
    }

    #[test]
    fn split_all_train_and_errors() {
        let s = synthetic([7, 3, 5, 2], 8);
        let sp = split(&s, [1.0, 0.0, 0.0], &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(sp.sizes(), [17, 0, 0]);
        assert!(matches!(
            split(&[], DEFAULT_RATIOS, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(DatasetError::Empty)
        ));
        assert!(matches!(
            split(&s, [0.5, 0.2, 0.2], &mut ChaCha8Rng::seed_from_u64(0)),
            Err(DatasetError::BadRatios(_))
        ));
    }

    #[test]
    fn scaler_statistics() {
        let mut s = synthetic([50; 4], 9);
        for x in &mut s {
            x.features[3] = 7.0;
        }
        let sc = Scaler::fit(&s).unwrap();
        let z = sc.apply(&s).unwrap();
        for c in 0..FEATURES {
            let col: Vec<f64> = z.iter().map(|x| x.features[c]).collect();
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / col.len() as f64;
            if c == 3 {
                assert!(col.iter().all(|&x| x == 0.0));
            } else if c == DIRECTION_COLUMN {
                assert_eq!(col, s.iter().map(|x| x.features[c]).collect::<Vec<_>>());
            } else {
                assert!(
                    m.abs() < 1e-12 && (v - 1.0).abs() < 1e-9,
                    "column {c}: {m} {v}"
                );
            }
        }
        let mut at_mean = sc.mean.clone();
        at_mean[DIRECTION_COLUMN] = 1.0;
        let t = sc.transform(&at_mean);
        for (c, x) in t.iter().enumerate() {
            if c != DIRECTION_COLUMN {
                assert_eq!(*x, 0.0);
            }
        }
    }

    #[test]
    fn scaler_csv_round_trip() {
        let sc = Scaler::fit(&synthetic([5; 4], 10)).unwrap();
        let mut buf = Vec::new();
        sc.write_csv(&mut buf).unwrap();
        assert_eq!(Scaler::read_csv(&buf[..]).unwrap(), sc);
    }
}
