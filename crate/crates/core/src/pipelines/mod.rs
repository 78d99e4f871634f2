//! Classifier compositions: the hierarchical modulation classifier (HMC),
//! the universal and dedicated antenna classifiers (UAC, DeAC) and the two
//! joint pipelines built from them.

mod antenna;
mod eval;
mod hmc;
mod joint;

pub use antenna::{deac_fit, uac_fit, DedicatedBank};
pub use eval::{evaluate_joint, evaluate_labels, AccuracyReport, JointReport};
pub use hmc::{hmc_fit, hmc_predict, HierarchicalModel, HmcNode, HmcTrace};
pub use joint::{joint_parallel, joint_sequential, JointPrediction, ModulationClassifier};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, LabeledRow};
use crate::features::{polynomial_expand_slice, FeatureVector};
use crate::ml::persist::Persist;
use crate::ml::{BoostBase, ClassifierKind, ClassifierSpec, Matrix, TrainedClassifier};
use crate::sim::Modulation;
use crate::{seed, Error, Result};

/// Input representation for modulation classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FeatureMode {
    /// The nine normalized cumulants.
    #[default]
    Cumulant,
    /// Degree-2 polynomial expansion of the cumulants (55 values).
    Polynomial,
}

impl FeatureMode {
    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Cumulant => "cumulant",
            FeatureMode::Polynomial => "polynomial",
        }
    }

    pub fn apply(self, fv: &FeatureVector) -> Vec<f64> {
        match self {
            FeatureMode::Cumulant => fv.as_slice().to_vec(),
            FeatureMode::Polynomial => polynomial_expand_slice(fv.as_slice()),
        }
    }

    pub(crate) fn matrix<'a>(self, rows: impl IntoIterator<Item = &'a LabeledRow>) -> Matrix {
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| self.apply(&r.features)).collect();
        Matrix::from_rows(&rows).expect("equal-length feature rows")
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cumulant" | "cumulants" => Ok(FeatureMode::Cumulant),
            "polynomial" | "poly" => Ok(FeatureMode::Polynomial),
            other => Err(Error::InvalidConfig(format!(
                "unknown feature mode '{other}' (expected cumulant or polynomial)"
            ))),
        }
    }
}

/// The five experiment architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PipelineKind {
    Hmc,
    Uac,
    Deac,
    JointParallel,
    JointSequential,
}

impl PipelineKind {
    pub const ALL: [PipelineKind; 5] = [
        PipelineKind::Hmc,
        PipelineKind::Uac,
        PipelineKind::Deac,
        PipelineKind::JointParallel,
        PipelineKind::JointSequential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PipelineKind::Hmc => "hmc",
            PipelineKind::Uac => "uac",
            PipelineKind::Deac => "deac",
            PipelineKind::JointParallel => "joint-parallel",
            PipelineKind::JointSequential => "joint-sequential",
        }
    }

    /// Default hyperparameters of `kind` within this pipeline.
    pub fn default_spec(self, kind: ClassifierKind) -> Result<ClassifierSpec> {
        use ClassifierKind as K;
        let spec = match (self, kind) {
            (PipelineKind::Hmc, K::PolyLs) => ClassifierSpec::PolyLs,
            (_, K::PolyLs) => {
                return Err(Error::InvalidConfig(format!(
                    "the poly classifier is only available in the hmc pipeline, not {}",
                    self.name()
                )))
            }
            (_, K::Tree) => ClassifierSpec::Tree { max_depth: None },
            (_, K::RandomForest) => ClassifierSpec::RandomForest { n_estimators: 100 },
            (PipelineKind::Hmc, K::Knn) => ClassifierSpec::Knn { k: 1 },
            (PipelineKind::Hmc, K::ExtraTrees) => ClassifierSpec::ExtraTrees { n_estimators: 100 },
            (PipelineKind::Hmc, K::AdaBoost) => ClassifierSpec::AdaBoost {
                n_estimators: 100,
                base: BoostBase::Stump,
            },
            (PipelineKind::Uac | PipelineKind::Deac, K::Knn) => ClassifierSpec::Knn { k: 5 },
            (_, K::Knn) => ClassifierSpec::Knn { k: 100 },
            (_, K::ExtraTrees) => ClassifierSpec::ExtraTrees { n_estimators: 200 },
            (_, K::AdaBoost) => ClassifierSpec::AdaBoost {
                n_estimators: 100,
                base: BoostBase::RandomForest { n_estimators: 100 },
            },
        };
        Ok(spec)
    }

    /// Whether the pipeline has a modulation stage that uses the feature mode.
    pub fn uses_feature_mode(self) -> bool {
        !matches!(self, PipelineKind::Uac | PipelineKind::Deac)
    }
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PipelineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        PipelineKind::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown pipeline '{s}' (expected hmc, uac, deac, joint-parallel or joint-sequential)"
                ))
            })
    }
}

/// Checks that `spec` can run in `pipeline` with `mode`.
pub fn validate(pipeline: PipelineKind, spec: &ClassifierSpec, mode: FeatureMode) -> Result<()> {
    if spec.kind() == ClassifierKind::PolyLs {
        if pipeline != PipelineKind::Hmc {
            return Err(Error::InvalidConfig(format!(
                "the poly classifier is only available in the hmc pipeline, not {pipeline}"
            )));
        }
        if mode != FeatureMode::Polynomial {
            return Err(Error::InvalidConfig(
                "the poly classifier needs polynomial features (--features polynomial)".into(),
            ));
        }
    }
    match *spec {
        ClassifierSpec::Knn { k: 0 } => Err(Error::InvalidConfig("kNN needs k >= 1".into())),
        ClassifierSpec::RandomForest { n_estimators: 0 }
        | ClassifierSpec::ExtraTrees { n_estimators: 0 }
        | ClassifierSpec::AdaBoost { n_estimators: 0, .. }
        | ClassifierSpec::AdaBoost {
            base: BoostBase::RandomForest { n_estimators: 0 },
            ..
        } => Err(Error::InvalidConfig("ensembles need at least one estimator".into())),
        _ => Ok(()),
    }
}

/// Accuracy of one pipeline on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub pipeline: PipelineKind,
    /// Headline accuracy: modulation for hmc, antennas for uac/deac, both
    /// labels for the joint pipelines.
    pub accuracy_pct: f64,
    pub modulation: Option<AccuracyReport>,
    pub antenna: Option<AccuracyReport>,
    pub joint: Option<AccuracyReport>,
    /// Dedicated classifier accuracy per modulation (deac only).
    pub per_modulation: BTreeMap<String, AccuracyReport>,
}

/// Fitted models of one pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FittedPipeline {
    Hmc(HierarchicalModel),
    Uac(TrainedClassifier),
    Deac(DedicatedBank),
    JointParallel(HierarchicalModel, TrainedClassifier),
    JointSequential(HierarchicalModel, DedicatedBank),
}

impl Persist for FittedPipeline {
    const KIND: &'static str = "pipeline";
}

impl FittedPipeline {
    /// Trains `pipeline` on `train`. The antenna stages always use the
    /// cumulant features; `mode` applies to the modulation stage. All stages
    /// see the same training rows.
    pub fn fit(
        pipeline: PipelineKind,
        spec: &ClassifierSpec,
        mode: FeatureMode,
        train: &LabeledDataset,
        seed: u64,
    ) -> Result<Self> {
        validate(pipeline, spec, mode)?;
        let hmc = || hmc_fit(train, spec, mode, seed::derive(seed, &[1]));
        let antenna_seed = seed::derive(seed, &[2]);
        Ok(match pipeline {
            PipelineKind::Hmc => FittedPipeline::Hmc(hmc()?),
            PipelineKind::Uac => FittedPipeline::Uac(uac_fit(train, spec, antenna_seed)?),
            PipelineKind::Deac => FittedPipeline::Deac(deac_fit(train, spec, antenna_seed)?),
            PipelineKind::JointParallel => FittedPipeline::JointParallel(hmc()?, uac_fit(train, spec, antenna_seed)?),
            PipelineKind::JointSequential => {
                FittedPipeline::JointSequential(hmc()?, deac_fit(train, spec, antenna_seed)?)
            }
        })
    }

    pub fn kind(&self) -> PipelineKind {
        match self {
            FittedPipeline::Hmc(_) => PipelineKind::Hmc,
            FittedPipeline::Uac(_) => PipelineKind::Uac,
            FittedPipeline::Deac(_) => PipelineKind::Deac,
            FittedPipeline::JointParallel(..) => PipelineKind::JointParallel,
            FittedPipeline::JointSequential(..) => PipelineKind::JointSequential,
        }
    }

    /// Accuracy on `test`. The dedicated bank alone is evaluated with each
    /// row routed by its true modulation.
    pub fn evaluate(&self, test: &LabeledDataset) -> Result<PipelineResult> {
        if test.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut result = PipelineResult {
            pipeline: self.kind(),
            accuracy_pct: 0.0,
            modulation: None,
            antenna: None,
            joint: None,
            per_modulation: BTreeMap::new(),
        };
        let true_mods: Vec<Modulation> = test.rows.iter().map(|r| r.modulation).collect();
        let true_tx: Vec<usize> = test.rows.iter().map(|r| r.n_tx).collect();

        match self {
            FittedPipeline::Hmc(model) => {
                let report = evaluate_labels(&model.predict_rows(&test.rows), &true_mods)?;
                result.accuracy_pct = report.accuracy_pct;
                result.modulation = Some(report);
            }
            FittedPipeline::Uac(model) => {
                let x = FeatureMode::Cumulant.matrix(&test.rows);
                let pred: Vec<usize> = model.predict_batch(&x)?.into_iter().map(|l| l as usize).collect();
                let report = evaluate_labels(&pred, &true_tx)?;
                result.accuracy_pct = report.accuracy_pct;
                result.antenna = Some(report);
            }
            FittedPipeline::Deac(bank) => {
                let pred = bank.predict_rows(&test.rows, &true_mods);
                for m in Modulation::ALL {
                    let idx: Vec<usize> = (0..test.len()).filter(|&i| true_mods[i] == m).collect();
                    if idx.is_empty() {
                        continue;
                    }
                    let p: Vec<usize> = idx.iter().map(|&i| pred[i]).collect();
                    let t: Vec<usize> = idx.iter().map(|&i| true_tx[i]).collect();
                    result.per_modulation.insert(m.label().to_string(), evaluate_labels(&p, &t)?);
                }
                let report = evaluate_labels(&pred, &true_tx)?;
                result.accuracy_pct = report.accuracy_pct;
                result.antenna = Some(report);
            }
            FittedPipeline::JointParallel(..) | FittedPipeline::JointSequential(..) => {
                let preds = match self {
                    FittedPipeline::JointParallel(hmc, uac) => joint_parallel(hmc, uac, &test.rows)?,
                    FittedPipeline::JointSequential(hmc, bank) => joint_sequential(hmc, bank, &test.rows),
                    _ => unreachable!(),
                };
                let report = evaluate_joint(&preds, &test.rows)?;
                result.accuracy_pct = report.joint.accuracy_pct;
                result.modulation = Some(report.modulation);
                result.antenna = Some(report.antenna);
                result.joint = Some(report.joint);
            }
        }
        Ok(result)
    }
}

/// Trains `pipeline` on `train` and evaluates it on `test`.
pub fn run_pipeline(
    pipeline: PipelineKind,
    spec: &ClassifierSpec,
    mode: FeatureMode,
    train: &LabeledDataset,
    test: &LabeledDataset,
    seed: u64,
) -> Result<PipelineResult> {
    FittedPipeline::fit(pipeline, spec, mode, train, seed)?.evaluate(test)
}
