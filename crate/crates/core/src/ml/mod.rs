//! From-scratch classifiers: kNN, CART trees, Random Forest, Extra-Trees,
//! SAMME AdaBoost and a least-squares polynomial classifier.
//!
//! Every fit takes an explicit random stream (or seed) and is reproducible.
//! Class labels are arbitrary `u32` values; internally they are mapped to
//! indices in ascending label order, and every tie is broken towards the
//! smallest index.

mod adaboost;
mod forest;
mod knn;
pub mod persist;
mod polyls;
mod tree;

pub use adaboost::{adaboost_fit, adaboost_fit_observed, AdaBoost, BoostBase};
pub use forest::{forest_fit, Forest, ForestMode};
pub use knn::{knn_fit, Knn};
pub use polyls::{polyls_fit, PolyLs};
pub use tree::{tree_fit, DecisionTree, SplitMode, TreeParams};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::InvalidTrainingSet(format!(
                "{} values do not fill a {n_rows}x{n_cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { n_rows, n_cols, data })
    }

    /// Stacks equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::InvalidTrainingSet(format!(
                    "row {i} has {} columns, expected {n_cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            n_rows: rows.len(),
            n_cols,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols.max(1)).take(self.n_rows)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.n_cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            n_rows: idx.len(),
            n_cols: self.n_cols,
            data,
        }
    }
}

/// Feature matrix plus one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub features: Matrix,
    pub labels: Vec<u32>,
}

impl TrainingSet {
    pub fn new(features: Matrix, labels: Vec<u32>) -> Result<Self> {
        if features.n_rows() != labels.len() {
            return Err(Error::InvalidTrainingSet(format!(
                "{} feature rows but {} labels",
                features.n_rows(),
                labels.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidTrainingSet("no rows".into()));
        }
        if features.n_cols() == 0 {
            return Err(Error::InvalidTrainingSet("no feature columns".into()));
        }
        Ok(TrainingSet { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Sorted distinct labels and the index of each row's label in it.
    pub(crate) fn encode(&self) -> (Vec<u32>, Vec<usize>) {
        let mut classes = self.labels.clone();
        classes.sort_unstable();
        classes.dedup();
        let y = self
            .labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label in vocabulary"))
            .collect();
        (classes, y)
    }
}

/// Index of the largest count; the first index wins ties.
pub(crate) fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierKind {
    PolyLs,
    Knn,
    Tree,
    RandomForest,
    ExtraTrees,
    AdaBoost,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::PolyLs => "poly",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Tree => "tree",
            ClassifierKind::RandomForest => "rf",
            ClassifierKind::ExtraTrees => "et",
            ClassifierKind::AdaBoost => "adaboost",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "poly" | "polynomial" | "polyls" => Ok(ClassifierKind::PolyLs),
            "knn" => Ok(ClassifierKind::Knn),
            "tree" | "cart" => Ok(ClassifierKind::Tree),
            "rf" | "random-forest" => Ok(ClassifierKind::RandomForest),
            "et" | "extra-trees" => Ok(ClassifierKind::ExtraTrees),
            "adaboost" | "ada" => Ok(ClassifierKind::AdaBoost),
            other => Err(Error::InvalidConfig(format!(
                "unknown classifier '{other}' (expected poly, knn, tree, rf, et or adaboost)"
            ))),
        }
    }
}

/// A classifier family together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClassifierSpec {
    PolyLs,
    Knn { k: usize },
    Tree { max_depth: Option<usize> },
    RandomForest { n_estimators: usize },
    ExtraTrees { n_estimators: usize },
    AdaBoost { n_estimators: usize, base: BoostBase },
}

impl ClassifierSpec {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierSpec::PolyLs => ClassifierKind::PolyLs,
            ClassifierSpec::Knn { .. } => ClassifierKind::Knn,
            ClassifierSpec::Tree { .. } => ClassifierKind::Tree,
            ClassifierSpec::RandomForest { .. } => ClassifierKind::RandomForest,
            ClassifierSpec::ExtraTrees { .. } => ClassifierKind::ExtraTrees,
            ClassifierSpec::AdaBoost { .. } => ClassifierKind::AdaBoost,
        }
    }

    pub fn fit(&self, ts: &TrainingSet, seed: u64) -> Result<TrainedClassifier> {
        let mut rng = seed::rng(seed);
        match *self {
            ClassifierSpec::PolyLs => polyls_fit(ts),
            ClassifierSpec::Knn { k } => knn_fit(ts, k),
            ClassifierSpec::Tree { max_depth } => {
                let params = TreeParams {
                    max_depth,
                    feature_subsample: ts.features.n_cols(),
                    split_mode: SplitMode::BestThreshold,
                };
                tree_fit(ts, &params, &mut rng)
            }
            ClassifierSpec::RandomForest { n_estimators } => {
                forest_fit(ts, n_estimators, ForestMode::RandomForest, &mut rng)
            }
            ClassifierSpec::ExtraTrees { n_estimators } => {
                forest_fit(ts, n_estimators, ForestMode::ExtraTrees, &mut rng)
            }
            ClassifierSpec::AdaBoost { n_estimators, base } => adaboost_fit(ts, n_estimators, base, &mut rng),
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::PolyLs => write!(f, "poly"),
            ClassifierSpec::Knn { k } => write!(f, "knn(k={k})"),
            ClassifierSpec::Tree { max_depth: None } => write!(f, "tree"),
            ClassifierSpec::Tree { max_depth: Some(d) } => write!(f, "tree(depth={d})"),
            ClassifierSpec::RandomForest { n_estimators } => write!(f, "rf({n_estimators})"),
            ClassifierSpec::ExtraTrees { n_estimators } => write!(f, "et({n_estimators})"),
            ClassifierSpec::AdaBoost {
                n_estimators,
                base: BoostBase::Stump,
            } => write!(f, "adaboost({n_estimators}, stump)"),
            ClassifierSpec::AdaBoost {
                n_estimators,
                base: BoostBase::RandomForest { n_estimators: b },
            } => write!(f, "adaboost({n_estimators}, rf({b}))"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum Model {
    Knn(Knn),
    Tree(DecisionTree),
    Forest(Forest),
    AdaBoost(AdaBoost),
    PolyLs(PolyLs),
}

/// A fitted model. Predictions are always labels seen during training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    kind: ClassifierKind,
    classes: Vec<u32>,
    n_features: usize,
    model: Model,
}

impl TrainedClassifier {
    pub(crate) fn new(kind: ClassifierKind, classes: Vec<u32>, n_features: usize, model: Model) -> Self {
        TrainedClassifier {
            kind,
            classes,
            n_features,
            model,
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    /// Training label vocabulary in ascending order.
    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict(&self, x: &[f64]) -> Result<u32> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    pub fn predict_batch(&self, x: &Matrix) -> Result<Vec<u32>> {
        if x.n_cols() != self.n_features && x.n_rows() > 0 {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.n_cols(),
            });
        }
        Ok((0..x.n_rows())
            .into_par_iter()
            .map(|i| self.predict_unchecked(x.row(i)))
            .collect())
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> u32 {
        let index = match &self.model {
            Model::Knn(m) => m.predict_index(x),
            Model::Tree(m) => m.predict_index(x),
            Model::Forest(m) => m.predict_index(x),
            Model::AdaBoost(m) => m.predict_index(x),
            Model::PolyLs(m) => m.predict_index(x),
        };
        self.classes[index]
    }

    /// Per-class vote counts for forest models, in [`Self::classes`] order.
    pub fn forest_votes(&self, x: &[f64]) -> Option<Vec<usize>> {
        match &self.model {
            Model::Forest(f) if x.len() == self.n_features => Some(f.votes(x)),
            _ => None,
        }
    }

    pub fn as_knn(&self) -> Option<&Knn> {
        match &self.model {
            Model::Knn(k) => Some(k),
            _ => None,
        }
    }

    pub fn as_forest(&self) -> Option<&Forest> {
        match &self.model {
            Model::Forest(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_adaboost(&self) -> Option<&AdaBoost> {
        match &self.model {
            Model::AdaBoost(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_tree(&self) -> Option<&DecisionTree> {
        match &self.model {
            Model::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_polyls(&self) -> Option<&PolyLs> {
        match &self.model {
            Model::PolyLs(p) => Some(p),
            _ => None,
        }
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn training_set_validation() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!(TrainingSet::new(m.clone(), vec![1]).is_err());
        assert!(TrainingSet::new(Matrix::new(0, 2, vec![]).unwrap(), vec![]).is_err());
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        let ts = TrainingSet::new(m, vec![7, 3]).unwrap();
        assert_eq!(ts.encode(), (vec![3, 7], vec![1, 0]));
    }

    #[test]
    fn kind_names_parse() {
        for k in [
            ClassifierKind::PolyLs,
            ClassifierKind::Knn,
            ClassifierKind::Tree,
            ClassifierKind::RandomForest,
            ClassifierKind::ExtraTrees,
            ClassifierKind::AdaBoost,
        ] {
            assert_eq!(k.name().parse::<ClassifierKind>().unwrap(), k);
        }
        assert!("svm".parse::<ClassifierKind>().is_err());
    }

    fn all_specs() -> Vec<ClassifierSpec> {
        vec![
            ClassifierSpec::Knn { k: 3 },
            ClassifierSpec::Tree { max_depth: None },
            ClassifierSpec::RandomForest { n_estimators: 15 },
            ClassifierSpec::ExtraTrees { n_estimators: 15 },
            ClassifierSpec::AdaBoost {
                n_estimators: 10,
                base: BoostBase::Stump,
            },
            ClassifierSpec::AdaBoost {
                n_estimators: 3,
                base: BoostBase::RandomForest { n_estimators: 5 },
            },
            ClassifierSpec::PolyLs,
        ]
    }

    #[test]
    fn predictions_stay_in_vocabulary_and_are_stable() {
        let ts = random_set(60, 3, 1, |x| if x[0] + x[1] > 1.0 { 10 } else if x[2] > 0.5 { 20 } else { 30 });
        let query = [0.3, 0.9, 0.1];
        for spec in all_specs() {
            let model = spec.fit(&ts, 5).unwrap();
            assert_eq!(model.kind(), spec.kind());
            for r in ts.features.rows() {
                assert!([10, 20, 30].contains(&model.predict(r).unwrap()), "{spec}");
            }
            let again = spec.fit(&ts, 5).unwrap();
            assert_eq!(model.predict(&query).unwrap(), again.predict(&query).unwrap());
            assert_eq!(model.predict(&query).unwrap(), model.predict(&query).unwrap());
            assert!(matches!(model.predict(&[0.0]), Err(Error::DimensionMismatch { expected: 3, got: 1 })));
        }
    }

    #[test]
    fn label_permutation_equivariance() {
        let ts = random_set(80, 2, 3, |x| if x[0] > 0.6 { 0 } else if x[1] > 0.4 { 1 } else { 2 });
        let perm = [2u32, 0, 1];
        let permuted = TrainingSet::new(ts.features.clone(), ts.labels.iter().map(|&l| perm[l as usize]).collect()).unwrap();
        let queries = random_set(50, 2, 4, |_| 0);
        for spec in [
            ClassifierSpec::Knn { k: 1 },
            ClassifierSpec::RandomForest { n_estimators: 11 },
            ClassifierSpec::ExtraTrees { n_estimators: 11 },
            ClassifierSpec::PolyLs,
        ] {
            let a = spec.fit(&ts, 9).unwrap().predict_batch(&queries.features).unwrap();
            let b = spec.fit(&permuted, 9).unwrap().predict_batch(&queries.features).unwrap();
            let mapped: Vec<u32> = a.iter().map(|&l| perm[l as usize]).collect();
            assert_eq!(mapped, b, "{spec}");
        }
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(argmax(&[1, 3, 3, 2]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }
}
