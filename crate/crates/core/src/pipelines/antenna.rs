use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FeatureMode;
use crate::dataset::{LabeledDataset, LabeledRow, TX_ANTENNAS};
use crate::ml::persist::Persist;
use crate::ml::{ClassifierSpec, TrainedClassifier, TrainingSet};
use crate::sim::Modulation;
use crate::{seed, Error, Result};

fn antenna_set<'a>(rows: impl IntoIterator<Item = &'a LabeledRow>) -> Result<TrainingSet> {
    let rows: Vec<&LabeledRow> = rows.into_iter().collect();
    let labels = rows.iter().map(|r| r.n_tx as u32).collect();
    TrainingSet::new(FeatureMode::Cumulant.matrix(rows), labels)
}

fn missing_antennas<'a>(rows: impl Iterator<Item = &'a LabeledRow> + Clone) -> Vec<usize> {
    TX_ANTENNAS
        .into_iter()
        .filter(|&t| !rows.clone().any(|r| r.n_tx == t))
        .collect()
}

/// One 3-class antenna classifier over all modulations, on the cumulant
/// features. Modulation labels are ignored.
pub fn uac_fit(train: &LabeledDataset, spec: &ClassifierSpec, seed: u64) -> Result<TrainedClassifier> {
    let missing = missing_antennas(train.rows.iter());
    if !missing.is_empty() {
        return Err(Error::MissingClass(format!(
            "antenna classifier training data lacks n_tx = {missing:?}"
        )));
    }
    spec.fit(&antenna_set(&train.rows)?, seed)
}

/// Antenna classifiers dedicated to one modulation each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedicatedBank {
    /// Indexed by [`Modulation::index`].
    members: Vec<TrainedClassifier>,
}

impl DedicatedBank {
    pub fn get(&self, modulation: Modulation) -> &TrainedClassifier {
        &self.members[modulation.index()]
    }

    /// Antenna count of one row, using the member for `modulation`.
    pub fn predict(&self, row: &LabeledRow, modulation: Modulation) -> usize {
        self.get(modulation).predict_unchecked(row.features.as_slice()) as usize
    }

    /// Row `i` is routed to the member for `routes[i]`.
    pub fn predict_rows(&self, rows: &[LabeledRow], routes: &[Modulation]) -> Vec<usize> {
        assert_eq!(rows.len(), routes.len(), "one route per row");
        rows.par_iter()
            .zip(routes.par_iter())
            .map(|(r, &m)| self.predict(r, m))
            .collect()
    }
}

impl Persist for DedicatedBank {
    const KIND: &'static str = "deac";
}

/// Fits one antenna classifier per modulation on that modulation's rows
/// only. Member `m` is fitted with seed `derive(seed, [m.index()])`.
pub fn deac_fit(train: &LabeledDataset, spec: &ClassifierSpec, seed: u64) -> Result<DedicatedBank> {
    let mut gaps = Vec::new();
    for m in Modulation::ALL {
        let rows = train.rows.iter().filter(|r| r.modulation == m);
        let missing = missing_antennas(rows);
        if !missing.is_empty() {
            gaps.push(format!("{m} lacks n_tx = {missing:?}"));
        }
    }
    if !gaps.is_empty() {
        return Err(Error::MissingClass(format!(
            "dedicated classifiers need every modulation with all antenna counts: {}",
            gaps.join("; ")
        )));
    }
    let members = Modulation::ALL
        .iter()
        .map(|&m| {
            let ts = antenna_set(train.rows.iter().filter(|r| r.modulation == m))?;
            spec.fit(&ts, seed::derive(seed, &[m.index() as u64]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DedicatedBank { members })
}
