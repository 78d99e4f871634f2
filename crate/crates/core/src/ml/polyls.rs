//! Least-squares classifier: one weight vector per class, solved jointly as
//! the minimum-norm least-squares fit of the inputs to one-hot targets.
//! Inputs are expected to be polynomial-expanded already.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{argmax, ClassifierKind, Model, TrainedClassifier, TrainingSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyLs {
    n_features: usize,
    n_classes: usize,
    /// `n_features × n_classes`, row-major.
    weights: Vec<f64>,
}

impl PolyLs {
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.n_classes];
        for (xi, row) in x.iter().zip(self.weights.chunks_exact(self.n_classes)) {
            for (sc, w) in s.iter_mut().zip(row) {
                *sc += xi * w;
            }
        }
        s
    }

    /// Weight vector of class index `c`.
    pub fn class_weights(&self, c: usize) -> Vec<f64> {
        self.weights.chunks_exact(self.n_classes).map(|row| row[c]).collect()
    }

    pub(crate) fn predict_index(&self, x: &[f64]) -> usize {
        argmax(&self.scores(x))
    }
}

/// `W = X⁺ T` via SVD; singular values below `max(n, d) · σ_max · ε` are
/// treated as zero, giving the minimum-norm solution when `X` is rank
/// deficient.
pub fn polyls_fit(ts: &TrainingSet) -> Result<TrainedClassifier> {
    let (classes, y) = ts.encode();
    let n = ts.len();
    let d = ts.features.n_cols();
    let k = classes.len();
    let x = DMatrix::from_fn(n, d, |i, j| ts.features.get(i, j));
    let t = DMatrix::from_fn(n, k, |i, c| if y[i] == c { 1.0 } else { 0.0 });

    let svd = x.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = sigma_max * n.max(d) as f64 * f64::EPSILON;
    let w = svd
        .solve(&t, eps)
        .map_err(|e| Error::InvalidTrainingSet(format!("least-squares solve failed: {e}")))?;

    let mut weights = Vec::with_capacity(d * k);
    for i in 0..d {
        for c in 0..k {
            weights.push(w[(i, c)]);
        }
    }
    let model = PolyLs {
        n_features: d,
        n_classes: k,
        weights,
    };
    Ok(TrainedClassifier::new(ClassifierKind::PolyLs, classes, d, Model::PolyLs(model)))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::Matrix;
    use super::*;
    use crate::features::polynomial_expand_slice;
    use crate::seed;
    use rand::Rng;

    fn expanded(ts: &TrainingSet) -> TrainingSet {
        let rows: Vec<Vec<f64>> = ts.features.rows().map(polynomial_expand_slice).collect();
        TrainingSet::new(Matrix::from_rows(&rows).unwrap(), ts.labels.clone()).unwrap()
    }

    fn squared_error(model: &PolyLs, ts: &TrainingSet, y: &[usize], w: &[f64]) -> f64 {
        let probe = PolyLs {
            weights: w.to_vec(),
            ..model.clone()
        };
        ts.features
            .rows()
            .zip(y)
            .map(|(r, &c)| {
                probe
                    .scores(r)
                    .iter()
                    .enumerate()
                    .map(|(j, s)| (s - if j == c { 1.0 } else { 0.0 }).powi(2))
                    .sum::<f64>()
            })
            .sum()
    }

    #[test]
    fn realizable_targets_are_fit_exactly() {
        // One-hot targets that are affine in the input: [1 - x, x] for x in {0, 1}.
        let rows: Vec<Vec<f64>> = [0.0, 1.0, 0.0, 1.0, 1.0].iter().map(|&v| vec![1.0, v]).collect();
        let labels: Vec<u32> = [0, 1, 0, 1, 1].to_vec();
        let ts = TrainingSet::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap();
        let m = polyls_fit(&ts).unwrap();
        let p = m.as_polyls().unwrap();
        let (_, y) = ts.encode();
        assert!(squared_error(p, &ts, &y, &p.weights) < 1e-20);
        assert_eq!(train_accuracy(&m, &ts), 1.0);
    }

    #[test]
    fn single_point_is_reproduced() {
        let ts = TrainingSet::new(Matrix::from_rows(&[polynomial_expand_slice(&[0.3, 1.7])]).unwrap(), vec![9]).unwrap();
        let m = polyls_fit(&ts).unwrap();
        assert_eq!(m.predict(ts.features.row(0)).unwrap(), 9);
        let s = m.as_polyls().unwrap().scores(ts.features.row(0));
        assert!((s[0] - 1.0).abs() < 1e-12);
    }

    /// Normal equations `XᵀX w = Xᵀt` solved by Gaussian elimination with
    /// partial pivoting.
    fn normal_equations(x: &[Vec<f64>], t: &[f64]) -> Vec<f64> {
        let d = x[0].len();
        let mut a = vec![vec![0.0; d + 1]; d];
        for (row, &ti) in x.iter().zip(t) {
            for i in 0..d {
                for j in 0..d {
                    a[i][j] += row[i] * row[j];
                }
                a[i][d] += row[i] * ti;
            }
        }
        for col in 0..d {
            let piv = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, piv);
            for r in 0..d {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..=d {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        (0..d).map(|i| a[i][d] / a[i][i]).collect()
    }

    #[test]
    fn matches_normal_equation_oracle() {
        for seed in 0..4 {
            let raw = random_set(100, 3, seed, |x| u32::from(x[0] * x[0] + 0.5 * x[1] - 0.3 * x[2] > 0.4));
            let ts = expanded(&raw);
            let m = polyls_fit(&ts).unwrap();
            let (_, y) = ts.encode();
            let rows: Vec<Vec<f64>> = ts.features.rows().map(|r| r.to_vec()).collect();
            let oracle: Vec<Vec<f64>> = (0..2)
                .map(|c| normal_equations(&rows, &y.iter().map(|&l| if l == c { 1.0 } else { 0.0 }).collect::<Vec<_>>()))
                .collect();
            let p = m.as_polyls().unwrap();
            for c in 0..2 {
                for (a, b) in p.class_weights(c).iter().zip(&oracle[c]) {
                    assert!((a - b).abs() < 1e-6 * b.abs().max(1.0), "{a} vs {b}");
                }
            }
            let queries = random_set(200, 3, seed + 50, |_| 0);
            for q in queries.features.rows() {
                let e = polynomial_expand_slice(q);
                let s: Vec<f64> = oracle.iter().map(|w| w.iter().zip(&e).map(|(a, b)| a * b).sum()).collect();
                let expected = raw.encode().0[argmax(&s)];
                assert_eq!(m.predict(&e).unwrap(), expected);
            }
        }
    }

    #[test]
    fn residual_is_locally_minimal() {
        let ts = expanded(&random_set(80, 4, 21, |x| (x[0] * 2.0 + x[3]) as u32));
        let m = polyls_fit(&ts).unwrap();
        let p = m.as_polyls().unwrap();
        let (_, y) = ts.encode();
        let base = squared_error(p, &ts, &y, &p.weights);
        let mut rng = seed::rng(5);
        for _ in 0..50 {
            let perturbed: Vec<f64> = p.weights.iter().map(|w| w + 1e-4 * (rng.random::<f64>() - 0.5)).collect();
            assert!(squared_error(p, &ts, &y, &perturbed) >= base - 1e-12);
        }
    }

    #[test]
    fn rank_deficient_input_is_solved() {
        // Duplicate columns make XᵀX singular.
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, f64::from(i), f64::from(i)]).collect();
        let labels = (0..10).map(|i| u32::from(i > 4)).collect();
        let ts = TrainingSet::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap();
        let m = polyls_fit(&ts).unwrap();
        let w = m.as_polyls().unwrap().class_weights(1);
        assert!((w[1] - w[2]).abs() < 1e-10, "minimum-norm splits weight evenly");
        assert_eq!(m.predict(&[1.0, 9.0, 9.0]).unwrap(), 1);
    }
}
