use super::NumericsError;

/// `counts[i][j]` = number of examples with true label `i` predicted as `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

pub fn confusion_matrix(
    preds: &[usize],
    labels: &[usize],
    classes: usize,
) -> Result<ConfusionMatrix, NumericsError> {
    if preds.len() != labels.len() {
        return Err(NumericsError::DimensionMismatch {
            expected: labels.len(),
            got: preds.len(),
        });
    }
    let mut counts = vec![vec![0u64; classes]; classes];
    for (&p, &l) in preds.iter().zip(labels) {
        for v in [p, l] {
            if v >= classes {
                return Err(NumericsError::LabelOutOfRange { label: v, classes });
            }
        }
        counts[l][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

impl ConfusionMatrix {
    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let diag: u64 = (0..self.classes()).map(|i| self.counts[i][i]).sum();
        diag as f64 / self.total().max(1) as f64
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Fraction of class `i` examples predicted as `i`.
    pub fn recall(&self, i: usize) -> f64 {
        let row: u64 = self.counts[i].iter().sum();
        self.counts[i][i] as f64 / row.max(1) as f64
    }

    /// Off-diagonal cell with the largest count, as (true, predicted).
    pub fn largest_confusion(&self) -> Option<(usize, usize)> {
        let n = self.classes();
        (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .max_by_key(|&(i, j)| (self.counts[i][j], std::cmp::Reverse((i, j))))
    }
}
