//! Experiment configuration: built-in defaults, overridden by an optional
//! TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use amc_core::dataset::GenerationOptions;
use amc_core::features::{CumulantVariant, RxCombining};
use amc_core::ml::{BoostBase, ClassifierKind, ClassifierSpec};
use amc_core::pipelines::{self, FeatureMode, PipelineKind};
use amc_core::sim::SnrConvention;

pub const DEFAULT_SNRS: [f64; 7] = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0];

/// Flags shared by `generate` and `run`. Every flag is optional so that a
/// config file can supply it instead.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with any of the settings below (flags take precedence).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Receive antenna counts, comma separated.
    #[arg(long = "n-rx", value_delimiter = ',')]
    pub n_rx: Option<Vec<usize>>,
    /// SNR points in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub snr: Option<Vec<f64>>,
    /// Captures per (modulation, n_tx) class.
    #[arg(long = "samples-per-class")]
    pub samples_per_class: Option<usize>,
    /// Symbols per capture.
    #[arg(long)]
    pub symbols: Option<usize>,
    /// Pipelines: hmc, uac, deac, joint-parallel, joint-sequential.
    #[arg(long, value_delimiter = ',')]
    pub pipeline: Option<Vec<String>>,
    /// Classifiers: poly, knn, tree, rf, et, adaboost.
    #[arg(long, value_delimiter = ',')]
    pub classifier: Option<Vec<String>>,
    /// Modulation-stage features: cumulant or polynomial.
    #[arg(long)]
    pub features: Option<String>,
    /// Training fraction of the stratified split.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory of previously generated datasets to use instead of
    /// generating them in memory.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Neighbour count for knn, overriding the pipeline default.
    #[arg(long)]
    pub k: Option<usize>,
    /// Trees for rf/et or boosting rounds for adaboost.
    #[arg(long)]
    pub estimators: Option<usize>,
    /// Boosting base learner: stump or rf (rf uses 100 trees).
    #[arg(long = "boost-base")]
    pub boost_base: Option<String>,
    /// per-stream (noise 1/snr) or total-transmit (noise n_tx/snr).
    #[arg(long = "snr-convention")]
    pub snr_convention: Option<String>,
    /// average (per receive antenna, then averaged) or pooled.
    #[arg(long)]
    pub combining: Option<String>,
    /// default or textbook fourth-order cumulants.
    #[arg(long)]
    pub cumulants: Option<String>,
    /// Also write the fitted models as JSON.
    #[arg(long = "save-models")]
    pub save_models: bool,
}

/// Contents of a config file; same names as the flags with `_` for `-`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n_rx: Option<Vec<usize>>,
    pub snr: Option<Vec<f64>>,
    pub samples_per_class: Option<usize>,
    pub symbols: Option<usize>,
    pub pipeline: Option<Vec<String>>,
    pub classifier: Option<Vec<String>>,
    pub features: Option<String>,
    pub split: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub k: Option<usize>,
    pub estimators: Option<usize>,
    pub boost_base: Option<String>,
    pub snr_convention: Option<String>,
    pub combining: Option<String>,
    pub cumulants: Option<String>,
    pub save_models: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n_rx: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub samples_per_class: usize,
    pub n_symbols: usize,
    pub pipelines: Vec<PipelineKind>,
    pub classifiers: Vec<ClassifierKind>,
    pub feature_mode: FeatureMode,
    pub train_fraction: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub data: Option<PathBuf>,
    pub k: Option<usize>,
    pub estimators: Option<usize>,
    pub boost_base: Option<BoostBase>,
    pub generation: GenerationOptions,
    pub save_models: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_rx: vec![1],
            snr_db: DEFAULT_SNRS.to_vec(),
            samples_per_class: 600,
            n_symbols: 1024,
            pipelines: vec![PipelineKind::Hmc],
            classifiers: vec![ClassifierKind::ExtraTrees],
            feature_mode: FeatureMode::Cumulant,
            train_fraction: 0.6,
            seed: 1,
            out: PathBuf::from("out"),
            data: None,
            k: None,
            estimators: None,
            boost_base: None,
            generation: GenerationOptions::default(),
            save_models: false,
        }
    }
}

fn parse_list<T>(values: &[String], parse: impl Fn(&str) -> amc_core::Result<T>) -> Result<Vec<T>> {
    values.iter().map(|v| parse(v.trim()).map_err(Into::into)).collect()
}

fn parse_snr_convention(s: &str) -> Result<SnrConvention> {
    match s.to_ascii_lowercase().as_str() {
        "per-stream" | "per_stream" => Ok(SnrConvention::PerStream),
        "total-transmit" | "total_transmit" => Ok(SnrConvention::TotalTransmit),
        other => bail!("unknown snr convention '{other}' (expected per-stream or total-transmit)"),
    }
}

fn parse_combining(s: &str) -> Result<RxCombining> {
    match s.to_ascii_lowercase().as_str() {
        "average" => Ok(RxCombining::AntennaAverage),
        "pooled" => Ok(RxCombining::Pooled),
        other => bail!("unknown combining '{other}' (expected average or pooled)"),
    }
}

fn parse_cumulants(s: &str) -> Result<CumulantVariant> {
    match s.to_ascii_lowercase().as_str() {
        "default" => Ok(CumulantVariant::Default),
        "textbook" => Ok(CumulantVariant::Textbook),
        other => bail!("unknown cumulant variant '{other}' (expected default or textbook)"),
    }
}

fn parse_boost_base(s: &str) -> Result<BoostBase> {
    match s.to_ascii_lowercase().as_str() {
        "stump" => Ok(BoostBase::Stump),
        "rf" => Ok(BoostBase::RandomForest { n_estimators: 100 }),
        other => bail!("unknown boosting base '{other}' (expected stump or rf)"),
    }
}

impl ExperimentConfig {
    /// Defaults, then the file named by `--config`, then the flags.
    pub fn resolve(args: &ConfigArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut cfg = ExperimentConfig::default();
        macro_rules! pick {
            ($field:ident) => {
                args.$field.clone().or(file.$field.clone())
            };
        }
        if let Some(v) = pick!(n_rx) {
            cfg.n_rx = v;
        }
        if let Some(v) = pick!(snr) {
            cfg.snr_db = v;
        }
        if let Some(v) = pick!(samples_per_class) {
            cfg.samples_per_class = v;
        }
        if let Some(v) = pick!(symbols) {
            cfg.n_symbols = v;
        }
        if let Some(v) = pick!(pipeline) {
            cfg.pipelines = parse_list(&v, str::parse)?;
        }
        if let Some(v) = pick!(classifier) {
            cfg.classifiers = parse_list(&v, str::parse)?;
        }
        if let Some(v) = pick!(features) {
            cfg.feature_mode = v.parse()?;
        }
        if let Some(v) = pick!(split) {
            cfg.train_fraction = v;
        }
        if let Some(v) = pick!(seed) {
            cfg.seed = v;
        }
        if let Some(v) = pick!(out) {
            cfg.out = v;
        }
        cfg.data = pick!(data);
        cfg.k = pick!(k);
        cfg.estimators = pick!(estimators);
        if let Some(v) = pick!(boost_base) {
            cfg.boost_base = Some(parse_boost_base(&v)?);
        }
        if let Some(v) = pick!(snr_convention) {
            cfg.generation.snr_convention = parse_snr_convention(&v)?;
        }
        if let Some(v) = pick!(combining) {
            cfg.generation.features.combining = parse_combining(&v)?;
        }
        if let Some(v) = pick!(cumulants) {
            cfg.generation.features.variant = parse_cumulants(&v)?;
        }
        cfg.save_models = args.save_models || file.save_models.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.n_rx.is_empty(), "n_rx list is empty");
        ensure!(self.n_rx.iter().all(|&r| r >= 1), "n_rx values must be at least 1");
        ensure!(!self.snr_db.is_empty(), "snr list is empty");
        ensure!(self.snr_db.iter().all(|s| s.is_finite()), "snr values must be finite");
        ensure!(self.n_symbols >= 1, "symbols must be at least 1");
        ensure!(!self.pipelines.is_empty(), "pipeline list is empty");
        ensure!(!self.classifiers.is_empty(), "classifier list is empty");
        ensure!(
            self.train_fraction > 0.0 && self.train_fraction < 1.0,
            "split must lie strictly between 0 and 1, got {}",
            self.train_fraction
        );
        let n_train = (self.train_fraction * self.samples_per_class as f64).round() as usize;
        ensure!(
            n_train >= 1 && n_train < self.samples_per_class,
            "split {} of {} samples per class leaves an empty train or test part",
            self.train_fraction,
            self.samples_per_class
        );
        for &p in &self.pipelines {
            for &c in &self.classifiers {
                pipelines::validate(p, &self.spec(p, c)?, self.feature_mode)?;
            }
        }
        Ok(())
    }

    /// Hyperparameters for `kind` in `pipeline`: the pipeline default with
    /// the configured overrides applied.
    pub fn spec(&self, pipeline: PipelineKind, kind: ClassifierKind) -> Result<ClassifierSpec> {
        let mut spec = pipeline.default_spec(kind)?;
        match &mut spec {
            ClassifierSpec::Knn { k } => *k = self.k.unwrap_or(*k),
            ClassifierSpec::RandomForest { n_estimators } | ClassifierSpec::ExtraTrees { n_estimators } => {
                *n_estimators = self.estimators.unwrap_or(*n_estimators)
            }
            ClassifierSpec::AdaBoost { n_estimators, base } => {
                *n_estimators = self.estimators.unwrap_or(*n_estimators);
                *base = self.boost_base.unwrap_or(*base);
            }
            ClassifierSpec::PolyLs | ClassifierSpec::Tree { .. } => {}
        }
        Ok(spec)
    }

    /// Feature mode actually used by the modulation stage of `pipeline`.
    pub fn feature_mode_for(&self, pipeline: PipelineKind) -> FeatureMode {
        if pipeline.uses_feature_mode() {
            self.feature_mode
        } else {
            FeatureMode::Cumulant
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::resolve(&ConfigArgs::default()).unwrap();
        assert_eq!(cfg.n_rx, vec![1]);
        assert_eq!(cfg.snr_db.len(), 7);
        assert_eq!(cfg.samples_per_class, 600);
        assert_eq!(cfg.train_fraction, 0.6);
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "snr = [0.0, 10.0]\nseed = 5\nclassifier = [\"knn\"]\nk = 3").unwrap();
        let args = ConfigArgs {
            config: Some(f.path().to_path_buf()),
            seed: Some(9),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(&args).unwrap();
        assert_eq!(cfg.snr_db, vec![0.0, 10.0]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.spec(PipelineKind::Uac, ClassifierKind::Knn).unwrap(), ClassifierSpec::Knn { k: 3 });
        assert_eq!(cfg.samples_per_class, 600);
    }

    #[test]
    fn unknown_names_are_rejected() {
        let bad = |args: ConfigArgs| ExperimentConfig::resolve(&args).unwrap_err().to_string();
        let msg = bad(ConfigArgs {
            classifier: Some(vec!["svm".into()]),
            ..Default::default()
        });
        assert!(msg.contains("unknown classifier 'svm'"), "{msg}");
        let msg = bad(ConfigArgs {
            classifier: Some(vec!["poly".into()]),
            pipeline: Some(vec!["uac".into()]),
            ..Default::default()
        });
        assert!(msg.contains("only available in the hmc pipeline"), "{msg}");
        assert!(ExperimentConfig::resolve(&ConfigArgs {
            snr: Some(vec![]),
            ..Default::default()
        })
        .is_err());
        assert!(ExperimentConfig::resolve(&ConfigArgs {
            split: Some(0.01),
            samples_per_class: Some(10),
            ..Default::default()
        })
        .is_err());
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "snrs = [0.0]").unwrap();
        let args = ConfigArgs {
            config: Some(f.path().to_path_buf()),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(&args).is_err());
    }
}
