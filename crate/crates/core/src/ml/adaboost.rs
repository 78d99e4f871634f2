//! SAMME multiclass AdaBoost.
//!
//! Each round fits the base learner to the current sample weights, measures
//! the weighted training error `ε`, gives the learner the vote
//! `α = ln((1 - ε) / ε) + ln(K - 1)` and multiplies the weight of every
//! misclassified row by `exp(α)` before renormalising. Boosting stops early
//! on a perfect learner (`ε = 0`) or one no better than chance
//! (`ε >= 1 - 1/K`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::forest::{grow_forest, Forest, ForestMode};
use super::tree::{grow, DecisionTree, SplitMode, TreeData, TreeParams};
use super::{argmax, ClassifierKind, Matrix, Model, TrainedClassifier, TrainingSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoostBase {
    /// Depth-one tree fitted with weighted Gini impurity.
    Stump,
    /// Random Forest fitted on a weighted bootstrap resample.
    RandomForest { n_estimators: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Learner {
    Tree(DecisionTree),
    Forest(Forest),
}

impl Learner {
    fn predict_index(&self, x: &[f64]) -> usize {
        match self {
            Learner::Tree(t) => t.predict_index(x),
            Learner::Forest(f) => f.predict_index(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    n_classes: usize,
    learners: Vec<Learner>,
    alphas: Vec<f64>,
}

impl AdaBoost {
    pub fn n_learners(&self) -> usize {
        self.learners.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub(crate) fn predict_index(&self, x: &[f64]) -> usize {
        let mut score = vec![0.0; self.n_classes];
        for (learner, alpha) in self.learners.iter().zip(&self.alphas) {
            score[learner.predict_index(x)] += alpha;
        }
        argmax(&score)
    }
}

/// Row indices drawn with probability proportional to `weights`.
fn weighted_resample<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    (0..weights.len())
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(weights.len() - 1)
        })
        .collect()
}

fn boost<R: Rng + ?Sized>(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    n_estimators: usize,
    base: BoostBase,
    rng: &mut R,
    mut on_round: impl FnMut(&[f64]),
) -> AdaBoost {
    let n = y.len();
    let k = n_classes as f64;
    let mut weights = vec![1.0 / n as f64; n];
    let mut learners = Vec::new();
    let mut alphas = Vec::new();
    let stump = TreeParams {
        max_depth: Some(1),
        feature_subsample: x.n_cols(),
        split_mode: SplitMode::BestThreshold,
    };

    for _ in 0..n_estimators {
        let learner = match base {
            BoostBase::Stump => {
                let data = TreeData {
                    x,
                    y,
                    w: Some(&weights),
                    n_classes,
                };
                Learner::Tree(grow(&data, (0..n).collect(), &stump, rng))
            }
            BoostBase::RandomForest { n_estimators } => {
                let data = TreeData {
                    x,
                    y,
                    w: None,
                    n_classes,
                };
                let sample = weighted_resample(&weights, rng);
                Learner::Forest(grow_forest(&data, &sample, n_estimators, ForestMode::RandomForest, rng))
            }
        };
        let miss: Vec<bool> = (0..n).map(|i| learner.predict_index(x.row(i)) != y[i]).collect();
        let error: f64 = weights.iter().zip(&miss).filter(|(_, &m)| m).map(|(w, _)| w).sum();

        if error <= 0.0 {
            learners.push(learner);
            alphas.push(1.0);
            break;
        }
        if error >= 1.0 - 1.0 / k {
            if learners.is_empty() {
                learners.push(learner);
                alphas.push(1.0);
            }
            break;
        }
        let alpha = ((1.0 - error) / error).ln() + (k - 1.0).ln();
        for (w, &m) in weights.iter_mut().zip(&miss) {
            if m {
                *w *= alpha.exp();
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        on_round(&weights);
        learners.push(learner);
        alphas.push(alpha);
    }
    AdaBoost {
        n_classes,
        learners,
        alphas,
    }
}

pub fn adaboost_fit<R: Rng + ?Sized>(ts: &TrainingSet, n_estimators: usize, base: BoostBase, rng: &mut R) -> Result<TrainedClassifier> {
    adaboost_fit_observed(ts, n_estimators, base, rng, |_| {})
}

/// As [`adaboost_fit`], calling `on_round` with the renormalised sample
/// weights after every completed round.
pub fn adaboost_fit_observed<R: Rng + ?Sized>(
    ts: &TrainingSet,
    n_estimators: usize,
    base: BoostBase,
    rng: &mut R,
    on_round: impl FnMut(&[f64]),
) -> Result<TrainedClassifier> {
    if n_estimators == 0 {
        return Err(Error::InvalidConfig("AdaBoost needs at least one round".into()));
    }
    if let BoostBase::RandomForest { n_estimators: 0 } = base {
        return Err(Error::InvalidConfig("AdaBoost base forest needs at least one tree".into()));
    }
    let (classes, y) = ts.encode();
    let model = boost(&ts.features, &y, classes.len(), n_estimators, base, rng, on_round);
    Ok(TrainedClassifier::new(
        ClassifierKind::AdaBoost,
        classes,
        ts.features.n_cols(),
        Model::AdaBoost(model),
    ))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::seed;

    #[test]
    fn perfect_first_learner_stops_boosting() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![f64::from(i)]).collect();
        let labels: Vec<u32> = (0..30).map(|i| u32::from(i >= 12)).collect();
        let ts = TrainingSet::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap();
        let m = adaboost_fit(&ts, 50, BoostBase::Stump, &mut seed::rng(0)).unwrap();
        assert_eq!(m.as_adaboost().unwrap().n_learners(), 1);
        assert_eq!(train_accuracy(&m, &ts), 1.0);
    }

    #[test]
    fn xor_with_boosted_stumps_and_forest_base() {
        // A vote over stumps is additive in the features, so on XOR quadrants
        // it gets at most three of the four right, and the weighted error
        // soon reaches 1/2 which ends boosting. A forest base captures the
        // interaction.
        let ts = random_set(200, 2, 5, |x| u32::from((x[0] > 0.5) != (x[1] > 0.5)));
        let single = adaboost_fit(&ts, 1, BoostBase::Stump, &mut seed::rng(1)).unwrap();
        let boosted = adaboost_fit(&ts, 50, BoostBase::Stump, &mut seed::rng(1)).unwrap();
        let (a1, a50) = (train_accuracy(&single, &ts), train_accuracy(&boosted, &ts));
        assert!(a50 >= a1, "{a50} vs single stump {a1}");
        assert!(a50 < 0.8, "boosted stumps {a50}");

        let forest_base = adaboost_fit(&ts, 50, BoostBase::RandomForest { n_estimators: 10 }, &mut seed::rng(1)).unwrap();
        assert!(train_accuracy(&forest_base, &ts) > 0.9);
    }

    #[test]
    fn weights_stay_a_distribution() {
        let ts = random_set(120, 3, 6, |x| ((x[0] * 3.0) as u32 + (x[2] > 0.7) as u32) % 3);
        let (classes, y) = ts.encode();
        let mut rounds = 0;
        boost(&ts.features, &y, classes.len(), 40, BoostBase::Stump, &mut seed::rng(2), |w| {
            rounds += 1;
            let sum: f64 = w.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "sum {sum}");
            assert!(w.iter().all(|&v| v > 0.0));
        });
        assert!(rounds > 1);
    }

    #[test]
    fn forest_base_and_alpha_formula() {
        let ts = random_set(100, 3, 7, |x| u32::from(x[0] + x[1] > 1.0));
        let m = adaboost_fit(&ts, 5, BoostBase::RandomForest { n_estimators: 10 }, &mut seed::rng(3)).unwrap();
        let ada = m.as_adaboost().unwrap();
        assert!(ada.n_learners() >= 1);
        assert!(train_accuracy(&m, &ts) > 0.95);

        // With stumps on 3 classes: alpha = ln((1-e)/e) + ln 2 > ln 2 for e < 2/3.
        let ts3 = random_set(90, 2, 8, |x| (x[0] * 3.0) as u32);
        let m3 = adaboost_fit(&ts3, 5, BoostBase::Stump, &mut seed::rng(4)).unwrap();
        for &a in m3.as_adaboost().unwrap().alphas() {
            assert!(a > 0.0);
        }
    }

    #[test]
    fn weighted_resample_follows_weights() {
        let mut rng = seed::rng(11);
        let idx = weighted_resample(&[0.0, 1.0, 0.0, 3.0], &mut rng);
        assert_eq!(idx.len(), 4);
        assert!(idx.iter().all(|&i| i == 1 || i == 3));
        let many: Vec<usize> = (0..2000).flat_map(|_| weighted_resample(&[0.25, 0.75], &mut rng)).collect();
        let frac = many.iter().filter(|&&i| i == 1).count() as f64 / many.len() as f64;
        assert!((frac - 0.75).abs() < 0.02);
    }

    #[test]
    fn determinism() {
        let ts = random_set(80, 3, 9, |x| u32::from(x[1] > 0.3));
        let base = BoostBase::RandomForest { n_estimators: 4 };
        let a = adaboost_fit(&ts, 4, base, &mut seed::rng(5)).unwrap();
        let b = adaboost_fit(&ts, 4, base, &mut seed::rng(5)).unwrap();
        assert_eq!(a, b);
    }
}
