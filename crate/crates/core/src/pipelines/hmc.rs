use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FeatureMode;
use crate::dataset::{LabeledDataset, LabeledRow};
use crate::features::FeatureVector;
use crate::ml::persist::Persist;
use crate::ml::{ClassifierSpec, TrainedClassifier, TrainingSet};
use crate::sim::{Family, Modulation};
use crate::{seed, Error, Result};

/// Branch points of the hierarchy. Each makes a binary decision where
/// label 0 is the first alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HmcNode {
    /// PSK (0) vs QAM (1).
    Family,
    /// BPSK (0) vs QPSK/8PSK (1).
    Psk,
    /// 16QAM (0) vs 64QAM/256QAM (1).
    Qam,
    /// QPSK (0) vs 8PSK (1).
    HigherPsk,
    /// 64QAM (0) vs 256QAM (1).
    HigherQam,
}

impl HmcNode {
    pub const ALL: [HmcNode; 5] = [
        HmcNode::Family,
        HmcNode::Psk,
        HmcNode::Qam,
        HmcNode::HigherPsk,
        HmcNode::HigherQam,
    ];

    /// Binary target of `m` at this node, or `None` when `m` is outside the
    /// node's subtree.
    pub fn target(self, m: Modulation) -> Option<u32> {
        use Modulation::*;
        match (self, m) {
            (HmcNode::Family, _) => Some(u32::from(m.family() == Family::Qam)),
            (HmcNode::Psk, Bpsk) => Some(0),
            (HmcNode::Psk, Qpsk | Psk8) => Some(1),
            (HmcNode::Qam, Qam16) => Some(0),
            (HmcNode::Qam, Qam64 | Qam256) => Some(1),
            (HmcNode::HigherPsk, Qpsk) => Some(0),
            (HmcNode::HigherPsk, Psk8) => Some(1),
            (HmcNode::HigherQam, Qam64) => Some(0),
            (HmcNode::HigherQam, Qam256) => Some(1),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Decisions taken for one prediction, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct HmcTrace {
    pub steps: Vec<(HmcNode, u32)>,
    pub modulation: Modulation,
}

/// Five binary classifiers arranged as a tree over the six modulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalModel {
    feature_mode: FeatureMode,
    nodes: Vec<TrainedClassifier>,
}

impl HierarchicalModel {
    pub fn feature_mode(&self) -> FeatureMode {
        self.feature_mode
    }

    pub fn node(&self, node: HmcNode) -> &TrainedClassifier {
        &self.nodes[node.index()]
    }

    pub fn predict(&self, fv: &FeatureVector) -> Modulation {
        self.trace(fv).modulation
    }

    /// Prediction together with the path taken through the tree.
    pub fn trace(&self, fv: &FeatureVector) -> HmcTrace {
        let x = self.feature_mode.apply(fv);
        let mut steps = Vec::with_capacity(3);
        let mut decide = |node: HmcNode| {
            let d = self.node(node).predict_unchecked(&x);
            steps.push((node, d));
            d
        };
        let modulation = if decide(HmcNode::Family) == 0 {
            if decide(HmcNode::Psk) == 0 {
                Modulation::Bpsk
            } else if decide(HmcNode::HigherPsk) == 0 {
                Modulation::Qpsk
            } else {
                Modulation::Psk8
            }
        } else if decide(HmcNode::Qam) == 0 {
            Modulation::Qam16
        } else if decide(HmcNode::HigherQam) == 0 {
            Modulation::Qam64
        } else {
            Modulation::Qam256
        };
        HmcTrace { steps, modulation }
    }

    pub fn predict_rows(&self, rows: &[LabeledRow]) -> Vec<Modulation> {
        rows.par_iter().map(|r| self.predict(&r.features)).collect()
    }
}

impl Persist for HierarchicalModel {
    const KIND: &'static str = "hmc";
}

/// Fits every node on the rows of its own subtree; antenna labels are
/// ignored. Node `i` is fitted with seed `derive(seed, [i])`.
pub fn hmc_fit(train: &LabeledDataset, spec: &ClassifierSpec, mode: FeatureMode, seed: u64) -> Result<HierarchicalModel> {
    let missing: Vec<&str> = Modulation::ALL
        .iter()
        .filter(|m| !train.rows.iter().any(|r| r.modulation == **m))
        .map(|m| m.label())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingClass(format!(
            "modulation classifier training data lacks {}",
            missing.join(", ")
        )));
    }

    let nodes = HmcNode::ALL
        .iter()
        .map(|&node| {
            let (rows, labels): (Vec<&LabeledRow>, Vec<u32>) = train
                .rows
                .iter()
                .filter_map(|r| node.target(r.modulation).map(|t| (r, t)))
                .unzip();
            let ts = TrainingSet::new(mode.matrix(rows), labels)?;
            spec.fit(&ts, seed::derive(seed, &[node.index() as u64]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HierarchicalModel {
        feature_mode: mode,
        nodes,
    })
}

pub fn hmc_predict(model: &HierarchicalModel, fv: &FeatureVector) -> Modulation {
    model.predict(fv)
}
