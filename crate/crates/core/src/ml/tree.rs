//! CART classification trees grown by Gini impurity reduction.
//!
//! Two split modes share one builder: `BestThreshold` scans the midpoints
//! between consecutive distinct values of each candidate feature (Random
//! Forest style), `RandomThreshold` draws a single uniform cut between the
//! node's min and max of each candidate feature (Extra-Trees style).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, ClassifierKind, Matrix, Model, TrainedClassifier, TrainingSet};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMode {
    BestThreshold,
    RandomThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    /// Number of non-constant features examined per node.
    pub feature_subsample: usize,
    pub split_mode: SplitMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub(crate) fn predict_index(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Training data as seen by the builder: rows of `x`, encoded labels and
/// per-row weights.
pub(crate) struct TreeData<'a> {
    pub x: &'a Matrix,
    pub y: &'a [usize],
    pub w: Option<&'a [f64]>,
    pub n_classes: usize,
}

impl TreeData<'_> {
    #[inline]
    fn weight(&self, i: usize) -> f64 {
        self.w.map_or(1.0, |w| w[i])
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

struct Scratch {
    values: Vec<(f64, usize, f64)>,
    left: Vec<f64>,
    right: Vec<f64>,
}

/// Grows a tree on the rows listed in `sample` (duplicates allowed).
pub(crate) fn grow<R: Rng + ?Sized>(data: &TreeData<'_>, mut sample: Vec<usize>, params: &TreeParams, rng: &mut R) -> DecisionTree {
    let k = data.n_classes;
    let n_features = data.x.n_cols();
    let mtry = params.feature_subsample.clamp(1, n_features);
    let mut features: Vec<usize> = (0..n_features).collect();
    let mut scratch = Scratch {
        values: Vec::with_capacity(sample.len()),
        left: vec![0.0; k],
        right: vec![0.0; k],
    };
    let mut nodes = vec![Node::Leaf { class: 0 }];
    // (node id, start, end, depth)
    let mut stack = vec![(0usize, 0usize, sample.len(), 0usize)];
    let mut counts = vec![0.0; k];

    while let Some((id, start, end, depth)) = stack.pop() {
        counts.iter_mut().for_each(|c| *c = 0.0);
        for &i in &sample[start..end] {
            counts[data.y[i]] += data.weight(i);
        }
        let class = argmax(&counts);
        let occupied = counts.iter().filter(|&&c| c > 0.0).count();
        let depth_reached = params.max_depth.is_some_and(|d| depth >= d);
        if end - start < 2 || occupied <= 1 || depth_reached {
            nodes[id] = Node::Leaf { class };
            continue;
        }

        features.shuffle(rng);
        let mut best: Option<Candidate> = None;
        let mut visited = 0;
        for &f in &features {
            if visited == mtry {
                break;
            }
            let found = match params.split_mode {
                SplitMode::BestThreshold => best_threshold(data, &sample[start..end], f, &counts, &mut scratch),
                SplitMode::RandomThreshold => random_threshold(data, &sample[start..end], f, &mut scratch, rng),
            };
            let Some(cand) = found else {
                continue; // constant within this node
            };
            visited += 1;
            if best.as_ref().is_none_or(|b| cand.score > b.score) {
                best = Some(cand);
            }
        }
        let Some(split) = best else {
            nodes[id] = Node::Leaf { class };
            continue;
        };

        let mid = partition(&mut sample[start..end], |i| data.x.get(i, split.feature) <= split.threshold) + start;
        debug_assert!(mid > start && mid < end);
        let left = nodes.len();
        nodes.push(Node::Leaf { class });
        nodes.push(Node::Leaf { class });
        nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right: left + 1,
        };
        stack.push((left + 1, mid, end, depth + 1));
        stack.push((left, start, mid, depth + 1));
    }
    DecisionTree { nodes }
}

/// Stable in-place partition; returns the number of elements satisfying `pred`.
fn partition(items: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let mut kept: Vec<usize> = Vec::with_capacity(items.len());
    let mut rest: Vec<usize> = Vec::new();
    for &i in items.iter() {
        if pred(i) {
            kept.push(i);
        } else {
            rest.push(i);
        }
    }
    let n = kept.len();
    items[..n].copy_from_slice(&kept);
    items[n..].copy_from_slice(&rest);
    n
}

/// Split score `Σ_k l_k²/W_l + Σ_k r_k²/W_r`; maximising it minimises the
/// weighted child Gini impurity.
#[inline]
fn score(left_sq: f64, wl: f64, right_sq: f64, wr: f64) -> f64 {
    left_sq / wl + right_sq / wr
}

fn best_threshold(data: &TreeData<'_>, rows: &[usize], f: usize, totals: &[f64], s: &mut Scratch) -> Option<Candidate> {
    s.values.clear();
    s.values.extend(rows.iter().map(|&i| (data.x.get(i, f), data.y[i], data.weight(i))));
    s.values.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let n = s.values.len();
    if s.values[0].0 == s.values[n - 1].0 {
        return None;
    }
    s.left.iter_mut().for_each(|c| *c = 0.0);
    s.right.copy_from_slice(totals);
    let mut wl = 0.0;
    let mut wr: f64 = totals.iter().sum();
    let mut left_sq = 0.0;
    let mut right_sq: f64 = totals.iter().map(|c| c * c).sum();

    let mut best: Option<(usize, f64)> = None;
    for pos in 0..n - 1 {
        let (v, class, w) = s.values[pos];
        left_sq += 2.0 * s.left[class] * w + w * w;
        right_sq -= 2.0 * s.right[class] * w - w * w;
        s.left[class] += w;
        s.right[class] -= w;
        wl += w;
        wr -= w;
        if v < s.values[pos + 1].0 {
            let sc = score(left_sq, wl, right_sq, wr);
            if best.is_none_or(|(_, b)| sc > b) {
                best = Some((pos, sc));
            }
        }
    }
    best.map(|(pos, score)| {
        let lo = s.values[pos].0;
        let hi = s.values[pos + 1].0;
        let mid = lo + (hi - lo) / 2.0;
        Candidate {
            feature: f,
            threshold: if mid < hi { mid } else { lo },
            score,
        }
    })
}

fn random_threshold<R: Rng + ?Sized>(data: &TreeData<'_>, rows: &[usize], f: usize, s: &mut Scratch, rng: &mut R) -> Option<Candidate> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &i in rows {
        let v = data.x.get(i, f);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo >= hi {
        return None;
    }
    let threshold = rng.random_range(lo..hi);
    s.left.iter_mut().for_each(|c| *c = 0.0);
    s.right.iter_mut().for_each(|c| *c = 0.0);
    for &i in rows {
        let side = if data.x.get(i, f) <= threshold { &mut s.left } else { &mut s.right };
        side[data.y[i]] += data.weight(i);
    }
    let wl: f64 = s.left.iter().sum();
    let wr: f64 = s.right.iter().sum();
    let sq = |c: &[f64]| c.iter().map(|v| v * v).sum::<f64>();
    Some(Candidate {
        feature: f,
        threshold,
        score: score(sq(&s.left), wl, sq(&s.right), wr),
    })
}

pub fn tree_fit<R: Rng + ?Sized>(ts: &TrainingSet, params: &TreeParams, rng: &mut R) -> Result<TrainedClassifier> {
    let (classes, y) = ts.encode();
    let data = TreeData {
        x: &ts.features,
        y: &y,
        w: None,
        n_classes: classes.len(),
    };
    let tree = grow(&data, (0..ts.len()).collect(), params, rng);
    Ok(TrainedClassifier::new(
        ClassifierKind::Tree,
        classes,
        ts.features.n_cols(),
        Model::Tree(tree),
    ))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::seed;

    fn full(d: usize, mode: SplitMode) -> TreeParams {
        TreeParams {
            max_depth: None,
            feature_subsample: d,
            split_mode: mode,
        }
    }

    #[test]
    fn pure_set_is_a_single_leaf() {
        let ts = random_set(10, 3, 1, |_| 5);
        let m = tree_fit(&ts, &full(3, SplitMode::BestThreshold), &mut seed::rng(0)).unwrap();
        let tree = m.as_tree().unwrap();
        assert_eq!((tree.n_nodes(), tree.depth()), (1, 0));
        assert_eq!(m.predict(&[9.0, 9.0, 9.0]).unwrap(), 5);
    }

    #[test]
    fn separable_1d_needs_one_split() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![f64::from(i)]).collect();
        let labels = (0..20).map(|i| u32::from(i >= 8)).collect();
        let ts = TrainingSet::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap();
        let m = tree_fit(&ts, &full(1, SplitMode::BestThreshold), &mut seed::rng(0)).unwrap();
        assert_eq!(m.as_tree().unwrap().depth(), 1);
        assert_eq!(train_accuracy(&m, &ts), 1.0);
        assert_eq!(m.predict(&[7.4]).unwrap(), 0);
        assert_eq!(m.predict(&[7.6]).unwrap(), 1);
    }

    #[test]
    fn fully_grown_trees_fit_distinct_points() {
        for seed in 0..10 {
            let ts = random_set(20, 2, seed, |x| u32::from((x[0] * 7.0).sin() * (x[1] * 5.0).cos() > 0.0));
            for mode in [SplitMode::BestThreshold, SplitMode::RandomThreshold] {
                for mtry in [1, 2] {
                    let params = TreeParams {
                        max_depth: None,
                        feature_subsample: mtry,
                        split_mode: mode,
                    };
                    let m = tree_fit(&ts, &params, &mut seed::rng(seed)).unwrap();
                    assert_eq!(train_accuracy(&m, &ts), 1.0, "{mode:?} mtry={mtry}");
                }
            }
        }
    }

    #[test]
    fn depth_limit_respected() {
        let ts = random_set(200, 3, 4, |x| ((x[0] * 4.0) as u32 + (x[1] * 4.0) as u32) % 3);
        for depth in [1, 2, 5] {
            let params = TreeParams {
                max_depth: Some(depth),
                feature_subsample: 3,
                split_mode: SplitMode::BestThreshold,
            };
            let m = tree_fit(&ts, &params, &mut seed::rng(1)).unwrap();
            assert!(m.as_tree().unwrap().depth() <= depth);
        }
    }

    #[test]
    fn duplicate_points_with_conflicting_labels_terminate() {
        let rows = vec![vec![1.0, 1.0]; 6];
        let ts = TrainingSet::new(Matrix::from_rows(&rows).unwrap(), vec![0, 1, 1, 0, 1, 1]).unwrap();
        let m = tree_fit(&ts, &full(2, SplitMode::RandomThreshold), &mut seed::rng(0)).unwrap();
        assert_eq!(m.as_tree().unwrap().n_nodes(), 1);
        assert_eq!(m.predict(&[1.0, 1.0]).unwrap(), 1);
    }

    #[test]
    fn best_split_is_gini_optimal_on_a_brute_force_check() {
        // Exhaustive weighted-Gini search over every cut of every feature.
        let ts = random_set(30, 3, 12, |x| u32::from(x[0] + 0.3 * x[2] > 0.6) + u32::from(x[1] > 0.8));
        let (classes, y) = ts.encode();
        let gini = |idx: &[usize]| -> f64 {
            let n = idx.len() as f64;
            1.0 - (0..classes.len())
                .map(|c| (idx.iter().filter(|&&i| y[i] == c).count() as f64 / n).powi(2))
                .sum::<f64>()
        };
        let all: Vec<usize> = (0..ts.len()).collect();
        let mut best = f64::INFINITY;
        for f in 0..3 {
            for &t in &all {
                let thr = ts.features.get(t, f);
                let (l, r): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| ts.features.get(i, f) <= thr);
                if l.is_empty() || r.is_empty() {
                    continue;
                }
                let imp = (l.len() as f64 * gini(&l) + r.len() as f64 * gini(&r)) / ts.len() as f64;
                best = best.min(imp);
            }
        }
        let params = TreeParams {
            max_depth: Some(1),
            feature_subsample: 3,
            split_mode: SplitMode::BestThreshold,
        };
        let m = tree_fit(&ts, &params, &mut seed::rng(3)).unwrap();
        let Node::Split { feature, threshold, .. } = m.as_tree().unwrap().nodes[0] else {
            panic!("expected a split")
        };
        let (l, r): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| ts.features.get(i, feature) <= threshold);
        let imp = (l.len() as f64 * gini(&l) + r.len() as f64 * gini(&r)) / ts.len() as f64;
        assert!((imp - best).abs() < 1e-12, "{imp} vs {best}");
    }
}
