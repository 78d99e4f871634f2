use std::collections::BTreeSet;
use std::fmt::Display;

use serde::{Deserialize, Serialize};

use super::JointPrediction;
use crate::dataset::LabeledRow;
use crate::{Error, Result};

/// Accuracy and confusion matrix of one label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy_pct: f64,
    /// Sorted union of true and predicted labels.
    pub labels: Vec<String>,
    /// `confusion[t][p]`: rows with true label `labels[t]` predicted as
    /// `labels[p]`.
    pub confusion: Vec<Vec<usize>>,
}

/// Reports for the modulation part, the antenna part and both together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointReport {
    pub modulation: AccuracyReport,
    pub antenna: AccuracyReport,
    pub joint: AccuracyReport,
}

pub fn evaluate_labels<T: Ord + Clone + Display>(predicted: &[T], truth: &[T]) -> Result<AccuracyReport> {
    if predicted.len() != truth.len() {
        return Err(Error::EvaluationLength {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let labels: Vec<T> = truth.iter().chain(predicted).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let pos = |v: &T| labels.binary_search(v).expect("label collected above");
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    for (p, t) in predicted.iter().zip(truth) {
        confusion[pos(t)][pos(p)] += 1;
    }
    let correct = (0..labels.len()).map(|i| confusion[i][i]).sum();
    Ok(AccuracyReport {
        total: truth.len(),
        correct,
        accuracy_pct: 100.0 * correct as f64 / truth.len() as f64,
        labels: labels.iter().map(ToString::to_string).collect(),
        confusion,
    })
}

pub fn evaluate_joint(predicted: &[JointPrediction], truth: &[LabeledRow]) -> Result<JointReport> {
    if predicted.len() != truth.len() {
        return Err(Error::EvaluationLength {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    let split = |f: &dyn Fn(&JointPrediction) -> usize, g: &dyn Fn(&LabeledRow) -> usize| {
        (
            predicted.iter().map(f).collect::<Vec<_>>(),
            truth.iter().map(g).collect::<Vec<_>>(),
        )
    };
    let (pm, tm) = split(&|p| p.modulation.index(), &|r| r.modulation.index());
    let mut modulation = evaluate_labels(&pm, &tm)?;
    modulation.labels = modulation
        .labels
        .iter()
        .map(|i| crate::sim::Modulation::ALL[i.parse::<usize>().expect("index label")].label().to_string())
        .collect();
    let (pa, ta) = split(&|p| p.n_tx, &|r| r.n_tx);
    let antenna = evaluate_labels(&pa, &ta)?;
    let pj: Vec<_> = predicted.iter().map(JointPrediction::key).collect();
    let tj: Vec<_> = truth.iter().map(LabeledRow::class).collect();
    let joint = evaluate_labels(&pj, &tj)?;
    Ok(JointReport {
        modulation,
        antenna,
        joint,
    })
}
