//! The `generate`, `run` and `report` subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use amc_core::dataset::{self, dataset_file_name, DatasetMeta, LabeledDataset};
use amc_core::ml::persist;
use amc_core::pipelines::{FittedPipeline, PipelineResult};
use amc_core::seed;

use crate::config::ExperimentConfig;

pub const RESULTS_FILE: &str = "results.csv";
pub const RESULTS_HEADER: [&str; 7] = [
    "pipeline",
    "classifier",
    "feature_mode",
    "n_rx",
    "snr_db",
    "accuracy_pct",
    "seed",
];

/// Seed path of the train/test split, below the experiment seed.
pub const SPLIT_STREAM: u64 = 0x5350;
/// Seed path handed to every pipeline fit.
pub const FIT_STREAM: u64 = 0x4649;

/// One line of a results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub pipeline: String,
    pub classifier: String,
    pub feature_mode: String,
    pub n_rx: usize,
    pub snr_db: f64,
    pub accuracy_pct: f64,
    pub seed: u64,
}

/// Full record of one sweep point, written as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub pipeline: String,
    pub classifier: String,
    pub feature_mode: String,
    pub n_rx: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub result: PipelineResult,
}

/// Writes `bytes` next to `path` and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)
        .and_then(|_| f.sync_all())
        .with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))
}

fn dataset_meta(cfg: &ExperimentConfig, n_rx: usize, snr_db: f64) -> DatasetMeta {
    DatasetMeta {
        n_rx,
        snr_db,
        samples_per_class: cfg.samples_per_class,
        n_symbols: cfg.n_symbols,
        seed: cfg.seed,
        options: cfg.generation,
    }
}

fn grid(cfg: &ExperimentConfig) -> Vec<(usize, f64)> {
    cfg.n_rx
        .iter()
        .flat_map(|&r| cfg.snr_db.iter().map(move |&s| (r, s)))
        .collect()
}

/// Generates one dataset per (n_rx, snr) and writes them to `cfg.out`.
/// Returns the written CSV paths.
pub fn generate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let datasets = grid(cfg)
        .into_par_iter()
        .map(|(n_rx, snr)| dataset::generate(&dataset_meta(cfg, n_rx, snr), true).map(|ds| (n_rx, snr, ds)))
        .collect::<amc_core::Result<Vec<_>>>()?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut paths = Vec::new();
    for (n_rx, snr, ds) in datasets {
        let path = cfg.out.join(dataset_file_name(n_rx, snr));
        dataset::write_csv(&ds, &path)?;
        paths.push(path);
    }
    Ok(paths)
}

fn load_or_generate(cfg: &ExperimentConfig, n_rx: usize, snr: f64) -> Result<LabeledDataset> {
    let Some(dir) = &cfg.data else {
        return Ok(dataset::generate(&dataset_meta(cfg, n_rx, snr), true)?);
    };
    let path = dir.join(dataset_file_name(n_rx, snr));
    ensure!(path.exists(), "dataset {} not found (run `amc generate` first)", path.display());
    let ds = dataset::read_csv(&path)?;
    if let Some(meta) = &ds.meta {
        ensure!(
            meta.n_rx == n_rx && meta.snr_db == snr,
            "{} holds n_rx={} snr={} dB",
            path.display(),
            meta.n_rx,
            meta.snr_db
        );
    }
    Ok(ds)
}

fn point_stem(report: &PointReport, kind: &str) -> String {
    format!(
        "{}__{}__{}__nrx{}_snr{}dB",
        report.pipeline, kind, report.feature_mode, report.n_rx, report.snr_db
    )
}

/// Everything `run` writes, kept in memory until the sweep has finished.
struct RunOutput {
    rows: Vec<ResultRow>,
    files: Vec<(PathBuf, Vec<u8>)>,
}

fn results_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner()?)
}

/// Trains and evaluates every configured (pipeline, classifier) at every
/// (n_rx, snr). Files are only written once every point has succeeded.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let points = grid(cfg)
        .into_par_iter()
        .map(|(n_rx, snr)| run_point(cfg, n_rx, snr))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut files = Vec::new();
    for p in points {
        rows.extend(p.rows);
        files.extend(p.files);
    }
    files.push((cfg.out.join(RESULTS_FILE), results_csv(&rows)?));

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    if cfg.save_models {
        fs::create_dir_all(cfg.out.join("models"))?;
    }
    for (path, bytes) in &files {
        write_atomic(path, bytes)?;
    }
    Ok(rows)
}

fn run_point(cfg: &ExperimentConfig, n_rx: usize, snr: f64) -> Result<RunOutput> {
    let ds = load_or_generate(cfg, n_rx, snr)?;
    let (train, test) = dataset::split(&ds, cfg.train_fraction, seed::derive(cfg.seed, &[SPLIT_STREAM]))?;
    let fit_seed = seed::derive(cfg.seed, &[FIT_STREAM]);
    let mut out = RunOutput {
        rows: Vec::new(),
        files: Vec::new(),
    };
    for &pipeline in &cfg.pipelines {
        for &kind in &cfg.classifiers {
            let spec = cfg.spec(pipeline, kind)?;
            let mode = cfg.feature_mode_for(pipeline);
            let fitted = FittedPipeline::fit(pipeline, &spec, mode, &train, fit_seed)
                .with_context(|| format!("{pipeline} / {spec} at n_rx={n_rx}, {snr} dB"))?;
            let result = fitted.evaluate(&test)?;
            let report = PointReport {
                pipeline: pipeline.to_string(),
                classifier: spec.to_string(),
                feature_mode: mode.to_string(),
                n_rx,
                snr_db: snr,
                seed: cfg.seed,
                n_train: train.len(),
                n_test: test.len(),
                result,
            };
            let stem = point_stem(&report, kind.name());
            let mut json = serde_json::to_vec_pretty(&report)?;
            json.push(b'\n');
            out.files.push((cfg.out.join(format!("{stem}.json")), json));
            if cfg.save_models {
                let model = persist::to_string(&fitted)?;
                out.files
                    .push((cfg.out.join("models").join(format!("{stem}.model.json")), model.into_bytes()));
            }
            out.rows.push(ResultRow {
                pipeline: report.pipeline,
                classifier: report.classifier,
                feature_mode: report.feature_mode,
                n_rx,
                snr_db: snr,
                accuracy_pct: report.result.accuracy_pct,
                seed: cfg.seed,
            });
        }
    }
    Ok(out)
}

/// Reads a results CSV, checking its header.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        bail!(
            "{}: not a results file (header {:?}, expected {:?})",
            path.display(),
            header.iter().collect::<Vec<_>>(),
            RESULTS_HEADER
        );
    }
    r.deserialize()
        .collect::<std::result::Result<Vec<ResultRow>, _>>()
        .with_context(|| format!("reading {}", path.display()))
}

/// Merged rows plus a pivot with one line per configuration and one column
/// per SNR.
pub struct Report {
    pub rows: Vec<ResultRow>,
    pub table: String,
}

pub fn report(inputs: &[PathBuf]) -> Result<Report> {
    ensure!(!inputs.is_empty(), "no result files given");
    let mut rows = Vec::new();
    for path in inputs {
        rows.extend(read_results(path)?);
    }

    type Key = (String, String, String, usize, u64);
    let mut snrs: Vec<f64> = rows.iter().map(|r| r.snr_db).collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();
    let mut cells: BTreeMap<Key, BTreeMap<usize, f64>> = BTreeMap::new();
    for r in &rows {
        let col = snrs.iter().position(|&s| s == r.snr_db).expect("collected above");
        cells
            .entry((r.pipeline.clone(), r.classifier.clone(), r.feature_mode.clone(), r.n_rx, r.seed))
            .or_default()
            .insert(col, r.accuracy_pct);
    }

    let mut header = vec![
        "pipeline".to_string(),
        "classifier".into(),
        "features".into(),
        "n_rx".into(),
        "seed".into(),
    ];
    header.extend(snrs.iter().map(|s| format!("{s} dB")));
    let mut lines = vec![header];
    for ((pipeline, classifier, features, n_rx, seed), by_snr) in &cells {
        let mut line = vec![
            pipeline.clone(),
            classifier.clone(),
            features.clone(),
            n_rx.to_string(),
            seed.to_string(),
        ];
        line.extend((0..snrs.len()).map(|c| by_snr.get(&c).map_or("-".to_string(), |a| format!("{a:.2}"))));
        lines.push(line);
    }
    let widths: Vec<usize> = (0..lines[0].len())
        .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut table = String::new();
    for line in &lines {
        let cols: Vec<String> = line.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
        table.push_str(cols.join("  ").trim_end());
        table.push('\n');
    }
    Ok(Report { rows, table })
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_atomic(path, &results_csv(rows)?)
}
