use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, TreeData};
use super::{argmax, ClassifierKind, DecisionTree, Model, SplitMode, TrainedClassifier, TrainingSet, TreeParams};
use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForestMode {
    /// Bootstrap resample per tree, `ceil(sqrt(d))` features per node, best thresholds.
    RandomForest,
    /// Full sample per tree, all features per node, one random threshold each.
    ExtraTrees,
}

impl ForestMode {
    fn params(self, n_features: usize) -> TreeParams {
        match self {
            ForestMode::RandomForest => TreeParams {
                max_depth: None,
                feature_subsample: (n_features as f64).sqrt().ceil() as usize,
                split_mode: SplitMode::BestThreshold,
            },
            ForestMode::ExtraTrees => TreeParams {
                max_depth: None,
                feature_subsample: n_features,
                split_mode: SplitMode::RandomThreshold,
            },
        }
    }
}

/// Plurality vote over fully grown trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    mode: ForestMode,
    n_classes: usize,
    trees: Vec<DecisionTree>,
}

impl Forest {
    pub fn mode(&self) -> ForestMode {
        self.mode
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict_index(x)] += 1;
        }
        votes
    }

    pub(crate) fn predict_index(&self, x: &[f64]) -> usize {
        argmax(&self.votes(x))
    }
}

/// Fits `n_estimators` trees on rows drawn from `base_sample`. Tree seeds are
/// drawn from `rng` up front so the parallel build matches a serial one.
pub(crate) fn grow_forest<R: Rng + ?Sized>(
    data: &TreeData<'_>,
    base_sample: &[usize],
    n_estimators: usize,
    mode: ForestMode,
    rng: &mut R,
) -> Forest {
    let params = mode.params(data.x.n_cols());
    let seeds: Vec<u64> = (0..n_estimators).map(|_| rng.random()).collect();
    let trees = seeds
        .par_iter()
        .map(|&s| {
            let mut tree_rng = seed::rng(s);
            let sample = match mode {
                ForestMode::RandomForest => {
                    let n = base_sample.len();
                    (0..n).map(|_| base_sample[tree_rng.random_range(0..n)]).collect()
                }
                ForestMode::ExtraTrees => base_sample.to_vec(),
            };
            grow(data, sample, &params, &mut tree_rng)
        })
        .collect();
    Forest {
        mode,
        n_classes: data.n_classes,
        trees,
    }
}

pub fn forest_fit<R: Rng + ?Sized>(ts: &TrainingSet, n_estimators: usize, mode: ForestMode, rng: &mut R) -> Result<TrainedClassifier> {
    if n_estimators == 0 {
        return Err(Error::InvalidConfig("a forest needs at least one tree".into()));
    }
    let (classes, y) = ts.encode();
    let data = TreeData {
        x: &ts.features,
        y: &y,
        w: None,
        n_classes: classes.len(),
    };
    let all: Vec<usize> = (0..ts.len()).collect();
    let forest = grow_forest(&data, &all, n_estimators, mode, rng);
    let kind = match mode {
        ForestMode::RandomForest => ClassifierKind::RandomForest,
        ForestMode::ExtraTrees => ClassifierKind::ExtraTrees,
    };
    Ok(TrainedClassifier::new(kind, classes, ts.features.n_cols(), Model::Forest(forest)))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::seed;

    fn toy(seed: u64) -> TrainingSet {
        random_set(150, 4, seed, |x| u32::from(x[0] > 0.5) + u32::from(x[1] + x[2] > 1.2))
    }

    #[test]
    fn single_tree_forest_is_one_bootstrapped_tree() {
        let ts = toy(1);
        let m = forest_fit(&ts, 1, ForestMode::RandomForest, &mut seed::rng(42)).unwrap();

        // Rebuild by hand: one seed from the stream, bootstrap, then grow.
        let (classes, y) = ts.encode();
        let data = TreeData {
            x: &ts.features,
            y: &y,
            w: None,
            n_classes: classes.len(),
        };
        let tree_seed: u64 = seed::rng(42).random();
        let mut r = seed::rng(tree_seed);
        let sample: Vec<usize> = (0..ts.len()).map(|_| r.random_range(0..ts.len())).collect();
        let tree = grow(&data, sample, &ForestMode::RandomForest.params(4), &mut r);
        assert_eq!(m.as_forest().unwrap().trees(), &[tree]);
    }

    #[test]
    fn extra_trees_fit_their_training_rows() {
        for seed in 0..3 {
            let ts = toy(seed);
            let m = forest_fit(&ts, 25, ForestMode::ExtraTrees, &mut seed::rng(seed)).unwrap();
            assert!(train_accuracy(&m, &ts) >= 0.95);
        }
    }

    #[test]
    fn votes_sum_to_tree_count() {
        let ts = toy(2);
        let queries = random_set(30, 4, 77, |_| 0);
        for mode in [ForestMode::RandomForest, ForestMode::ExtraTrees] {
            let m = forest_fit(&ts, 17, mode, &mut seed::rng(3)).unwrap();
            for q in queries.features.rows() {
                assert_eq!(m.forest_votes(q).unwrap().iter().sum::<usize>(), 17);
            }
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let ts = toy(3);
        for mode in [ForestMode::RandomForest, ForestMode::ExtraTrees] {
            let a = forest_fit(&ts, 20, mode, &mut seed::rng(9)).unwrap();
            let b = forest_fit(&ts, 20, mode, &mut seed::rng(9)).unwrap();
            assert_eq!(a, b);
            let c = forest_fit(&ts, 20, mode, &mut seed::rng(10)).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn zero_trees_rejected() {
        assert!(forest_fit(&toy(0), 0, ForestMode::ExtraTrees, &mut seed::rng(0)).is_err());
    }

    #[test]
    fn feature_subsample_per_mode() {
        assert_eq!(ForestMode::RandomForest.params(9).feature_subsample, 3);
        assert_eq!(ForestMode::RandomForest.params(55).feature_subsample, 8);
        assert_eq!(ForestMode::ExtraTrees.params(55).feature_subsample, 55);
    }
}
