use super::NumericsError;

/// Principal axes of a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` orthonormal rows, ordered by descending explained variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Trace of the sample covariance.
    pub total_variance: f64,
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and eigenvectors (as rows), unsorted.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    // v[i] is the i-th eigenvector once converged
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = a
        .iter()
        .flatten()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                let (vp, vq) = (v[p].clone(), v[q].clone());
                for k in 0..n {
                    v[p][k] = c * vp[k] - s * vq[k];
                    v[q][k] = s * vp[k] + c * vq[k];
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

pub fn covariance(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        let c: Vec<f64> = r.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[i][j] += c[i] * c[j];
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= denom;
            cov[j][i] = cov[i][j];
        }
    }
    (mean, cov)
}

/// Fits the top-`k` principal axes of `rows` (each row one observation).
pub fn fit(rows: &[Vec<f64>], k: usize) -> Result<PcaModel, NumericsError> {
    let d = rows.first().map_or(0, |r| r.len());
    if k == 0 || k > d || rows.len() < k {
        return Err(NumericsError::InvalidK {
            k,
            rows: rows.len(),
            cols: d,
        });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(NumericsError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let (mean, cov) = covariance(rows);
    let total_variance = (0..d).map(|i| cov[i][i]).sum();
    let (values, vectors) = symmetric_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut components = Vec::with_capacity(k);
    let mut explained_variance = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let mut axis = vectors[i].clone();
        // sign convention: largest-magnitude entry positive
        let pivot = super::mlp::argmax(&axis.iter().map(|x| x.abs()).collect::<Vec<_>>());
        if axis[pivot] < 0.0 {
            axis.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(axis);
        explained_variance.push(values[i].max(0.0));
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        total_variance,
    })
}

impl PcaModel {
    pub fn project(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NumericsError> {
        rows.iter()
            .map(|r| {
                if r.len() != self.mean.len() {
                    return Err(NumericsError::DimensionMismatch {
                        expected: self.mean.len(),
                        got: r.len(),
                    });
                }
                Ok(self
                    .components
                    .iter()
                    .map(|c| {
                        c.iter()
                            .zip(r)
                            .zip(&self.mean)
                            .map(|((ci, x), m)| ci * (x - m))
                            .sum()
                    })
                    .collect())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn line_data_has_analytic_axis() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let x = i as f64 * 0.1 - 2.0;
                vec![x, 2.0 * x]
            })
            .collect();
        let m = fit(&rows, 1).unwrap();
        let expected = [1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt()];
        for (a, b) in m.components[0].iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn isotropic_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..20_000)
            .map(|_| (0..3).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let m = fit(&rows, 3).unwrap();
        for v in &m.explained_variance {
            assert!((v - 1.0).abs() < 0.05, "{v}");
        }
    }

    #[test]
    fn mean_projects_to_origin_and_axes_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|_| {
                let z: Vec<f64> = (0..6).map(|_| StandardNormal.sample(&mut rng)).collect();
                (0..6)
                    .map(|j| z[j] * (j + 1) as f64 + z[(j + 1) % 6])
                    .collect()
            })
            .collect();
        let m = fit(&rows, 4).unwrap();
        let origin = m.project(std::slice::from_ref(&m.mean)).unwrap();
        assert!(origin[0].iter().all(|v| v.abs() < 1e-12));
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = m.components[i]
                    .iter()
                    .zip(&m.components[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((dot - target).abs() < 1e-8);
            }
        }
        assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
        assert!(m.explained_variance.iter().sum::<f64>() <= m.total_variance + 1e-9);
    }

    #[test]
    fn invalid_k() {
        let rows = vec![vec![1.0, 2.0]; 5];
        assert!(matches!(fit(&rows, 0), Err(NumericsError::InvalidK { .. })));
        assert!(matches!(fit(&rows, 3), Err(NumericsError::InvalidK { .. })));
        assert!(matches!(
            fit(&rows[..1], 2),
            Err(NumericsError::InvalidK { .. })
        ));
    }
}
