use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DedicatedBank, FeatureMode, HierarchicalModel};
use crate::dataset::{ClassKey, LabeledRow};
use crate::features::FeatureVector;
use crate::ml::TrainedClassifier;
use crate::sim::Modulation;
use crate::Result;

/// Predicted labels for one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointPrediction {
    pub modulation: Modulation,
    pub n_tx: usize,
}

impl JointPrediction {
    pub fn key(&self) -> ClassKey {
        ClassKey {
            modulation: self.modulation,
            n_tx: self.n_tx,
        }
    }

    /// Correct only when both labels match.
    pub fn is_correct(&self, truth: &LabeledRow) -> bool {
        self.modulation == truth.modulation && self.n_tx == truth.n_tx
    }
}

/// Anything that maps a feature vector to a modulation.
pub trait ModulationClassifier: Sync {
    fn predict_modulation(&self, fv: &FeatureVector) -> Modulation;
}

impl ModulationClassifier for HierarchicalModel {
    fn predict_modulation(&self, fv: &FeatureVector) -> Modulation {
        self.predict(fv)
    }
}

/// Modulation and antenna count predicted independently.
pub fn joint_parallel(
    modulation: &impl ModulationClassifier,
    uac: &TrainedClassifier,
    rows: &[LabeledRow],
) -> Result<Vec<JointPrediction>> {
    if let Some(r) = rows.first() {
        uac.predict(&FeatureMode::Cumulant.apply(&r.features))?;
    }
    Ok(rows
        .par_iter()
        .map(|r| JointPrediction {
            modulation: modulation.predict_modulation(&r.features),
            n_tx: uac.predict_unchecked(r.features.as_slice()) as usize,
        })
        .collect())
}

/// Modulation first; the predicted modulation picks the dedicated antenna
/// classifier, so a wrong modulation routes the row to a mismatched member.
pub fn joint_sequential(
    modulation: &impl ModulationClassifier,
    bank: &DedicatedBank,
    rows: &[LabeledRow],
) -> Vec<JointPrediction> {
    rows.par_iter()
        .map(|r| {
            let m = modulation.predict_modulation(&r.features);
            JointPrediction {
                modulation: m,
                n_tx: bank.predict(r, m),
            }
        })
        .collect()
}
