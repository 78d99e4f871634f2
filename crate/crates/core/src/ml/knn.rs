use serde::{Deserialize, Serialize};

use super::{argmax, ClassifierKind, Matrix, Model, TrainedClassifier, TrainingSet};
use crate::{Error, Result};

/// Brute-force k-nearest-neighbour vote under Euclidean distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    n_classes: usize,
    points: Matrix,
    labels: Vec<usize>,
}

impl Knn {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of stored training rows.
    pub fn n_points(&self) -> usize {
        self.labels.len()
    }

    /// Training row indices of the k nearest points, nearest first.
    /// Equal distances are ordered by row index.
    pub fn neighbours(&self, x: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .points
            .rows()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_distance);
            dist.truncate(self.k);
        }
        dist.sort_unstable_by(by_distance);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    pub(crate) fn predict_index(&self, x: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for i in self.neighbours(x) {
            votes[self.labels[i]] += 1;
        }
        argmax(&votes)
    }
}

pub fn knn_fit(ts: &TrainingSet, k: usize) -> Result<TrainedClassifier> {
    if k == 0 || k > ts.len() {
        return Err(Error::KOutOfRange { k, n_rows: ts.len() });
    }
    let (classes, labels) = ts.encode();
    let model = Knn {
        k,
        n_classes: classes.len(),
        points: ts.features.clone(),
        labels,
    };
    Ok(TrainedClassifier::new(
        ClassifierKind::Knn,
        classes,
        ts.features.n_cols(),
        Model::Knn(model),
    ))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    #[test]
    fn k_range_checked() {
        let ts = random_set(5, 2, 0, |_| 1);
        assert!(matches!(knn_fit(&ts, 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(knn_fit(&ts, 6), Err(Error::KOutOfRange { k: 6, n_rows: 5 })));
        assert!(knn_fit(&ts, 5).is_ok());
    }

    #[test]
    fn single_row_predicts_its_class() {
        let ts = TrainingSet::new(Matrix::from_rows(&[vec![0.5, 0.5]]).unwrap(), vec![4]).unwrap();
        let m = knn_fit(&ts, 1).unwrap();
        assert_eq!(m.predict(&[100.0, -3.0]).unwrap(), 4);
    }

    #[test]
    fn nearest_of_two() {
        let ts = TrainingSet::new(Matrix::from_rows(&[vec![0.0; 3], vec![1.0; 3]]).unwrap(), vec![0, 1]).unwrap();
        let m = knn_fit(&ts, 1).unwrap();
        assert_eq!(m.predict(&[0.2, 0.1, 0.4]).unwrap(), 0);
        assert_eq!(m.predict(&[0.9, 0.6, 0.7]).unwrap(), 1);
    }

    /// Full sort of all distances, then a plain majority count.
    fn oracle(points: &[Vec<f64>], labels: &[u32], k: usize, q: &[f64]) -> u32 {
        let mut d: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), i))
            .collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut classes: Vec<u32> = labels.to_vec();
        classes.sort();
        classes.dedup();
        let counts: Vec<usize> = classes
            .iter()
            .map(|c| d[..k].iter().filter(|(_, i)| labels[*i] == *c).count())
            .collect();
        let best = *counts.iter().max().unwrap();
        classes[counts.iter().position(|&c| c == best).unwrap()]
    }

    #[test]
    fn five_point_toy_matches_exhaustive_sort() {
        let points = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.2],
            vec![0.1, 0.9],
            vec![2.0, 2.0],
            vec![1.8, 2.4],
        ];
        let labels = vec![0, 0, 1, 1, 1];
        let ts = TrainingSet::new(Matrix::from_rows(&points).unwrap(), labels.clone()).unwrap();
        let m = knn_fit(&ts, 3).unwrap();
        for q in [[0.2, 0.1], [1.0, 1.0], [0.5, 0.6], [3.0, 0.0], [-1.0, 2.0]] {
            assert_eq!(m.predict(&q).unwrap(), oracle(&points, &labels, 3, &q), "{q:?}");
        }
    }

    #[test]
    fn random_sets_match_oracle() {
        for seed in 0..5 {
            let ts = random_set(120, 4, seed, |x| ((x[0] * 3.0) as u32 + (x[3] * 2.0) as u32) % 3);
            let points: Vec<Vec<f64>> = ts.features.rows().map(|r| r.to_vec()).collect();
            let queries = random_set(40, 4, seed + 100, |_| 0);
            for k in [1, 4, 7] {
                let m = knn_fit(&ts, k).unwrap();
                for q in queries.features.rows() {
                    assert_eq!(m.predict(q).unwrap(), oracle(&points, &ts.labels, k, q));
                }
            }
        }
    }

    #[test]
    fn k1_reproduces_distinct_training_set() {
        let ts = random_set(200, 3, 8, |x| (x[1] * 5.0) as u32);
        let m = knn_fit(&ts, 1).unwrap();
        assert_eq!(train_accuracy(&m, &ts), 1.0);
    }
}
