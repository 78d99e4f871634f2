//! Balanced labelled datasets over the (modulation, Tx antennas) grid.
//!
//! CSV layout, one row per capture:
//!
//! ```text
//! C20,C21,C40,C41,C42,C60,C61,C62,C63,Modulation,TxAntennas
//! ```
//!
//! Floats are written with 17 significant digits so a write/read cycle is
//! lossless. Generation metadata, when present, goes to a sidecar
//! `<stem>.meta.json` next to the CSV.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{capture_features, FeatureOptions, FeatureVector, FEATURE_NAMES, N_FEATURES};
use crate::seed;
use crate::sim::{transmit, Modulation, SnrConvention, TxConfig};
use crate::{Error, Result};

/// Transmit antenna counts covered by every dataset.
pub const TX_ANTENNAS: [usize; 3] = [1, 2, 4];

pub const CSV_HEADER: [&str; 11] = [
    "C20",
    "C21",
    "C40",
    "C41",
    "C42",
    "C60",
    "C61",
    "C62",
    "C63",
    "Modulation",
    "TxAntennas",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub features: FeatureVector,
    pub modulation: Modulation,
    pub n_tx: usize,
}

impl LabeledRow {
    pub fn class(&self) -> ClassKey {
        ClassKey {
            modulation: self.modulation,
            n_tx: self.n_tx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassKey {
    pub modulation: Modulation,
    pub n_tx: usize,
}

impl std::fmt::Display for ClassKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}tx", self.modulation, self.n_tx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GenerationOptions {
    pub snr_convention: SnrConvention,
    pub features: FeatureOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n_rx: usize,
    pub snr_db: f64,
    pub samples_per_class: usize,
    pub n_symbols: usize,
    pub seed: u64,
    #[serde(default)]
    pub options: GenerationOptions,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    pub rows: Vec<LabeledRow>,
    pub meta: Option<DatasetMeta>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> BTreeMap<ClassKey, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.rows {
            *counts.entry(r.class()).or_insert(0) += 1;
        }
        counts
    }

    /// Rows of one modulation, metadata dropped.
    pub fn filter_modulation(&self, modulation: Modulation) -> LabeledDataset {
        LabeledDataset {
            rows: self.rows.iter().filter(|r| r.modulation == modulation).copied().collect(),
            meta: None,
        }
    }
}

/// Builds the dataset described by `meta`; `parallel` only changes scheduling.
pub fn generate(meta: &DatasetMeta, parallel: bool) -> Result<LabeledDataset> {
    if meta.samples_per_class == 0 {
        return Err(Error::InvalidConfig("samples_per_class must be positive".into()));
    }
    let mut jobs = Vec::with_capacity(Modulation::ALL.len() * TX_ANTENNAS.len() * meta.samples_per_class);
    for modulation in Modulation::ALL {
        for n_tx in TX_ANTENNAS {
            for sample in 0..meta.samples_per_class {
                jobs.push((modulation, n_tx, sample));
            }
        }
    }
    let make_row = |&(modulation, n_tx, sample): &(Modulation, usize, usize)| -> Result<LabeledRow> {
        let config = TxConfig {
            modulation,
            n_tx,
            n_rx: meta.n_rx,
            snr_db: meta.snr_db,
            n_symbols: meta.n_symbols,
            seed: seed::derive(meta.seed, &[modulation.index() as u64, n_tx as u64, sample as u64]),
            snr_convention: meta.options.snr_convention,
        };
        let capture = transmit(&config)?;
        Ok(LabeledRow {
            features: capture_features(&capture, meta.options.features)?,
            modulation,
            n_tx,
        })
    };
    let rows = if parallel {
        jobs.par_iter().map(make_row).collect::<Result<Vec<_>>>()?
    } else {
        jobs.iter().map(make_row).collect::<Result<Vec<_>>>()?
    };
    Ok(LabeledDataset {
        rows,
        meta: Some(meta.clone()),
    })
}

/// `samples_per_class` captures for each of the 18 (modulation, n_tx) classes.
pub fn generate_dataset(
    n_rx: usize,
    snr_db: f64,
    samples_per_class: usize,
    n_symbols: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    let meta = DatasetMeta {
        n_rx,
        snr_db,
        samples_per_class,
        n_symbols,
        seed,
        options: GenerationOptions::default(),
    };
    generate(&meta, true)
}

/// Stratified split: every (modulation, n_tx) class is shuffled and cut at
/// `round(train_fraction * class_size)`. Row order within each part follows
/// the input order.
pub fn split(ds: &LabeledDataset, train_fraction: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("train fraction {train_fraction} must lie in (0, 1)")));
    }
    let mut by_class: BTreeMap<ClassKey, Vec<usize>> = BTreeMap::new();
    for (i, r) in ds.rows.iter().enumerate() {
        by_class.entry(r.class()).or_default().push(i);
    }
    let mut in_train = vec![false; ds.rows.len()];
    for (key, mut idx) in by_class {
        let n_train = (train_fraction * idx.len() as f64).round() as usize;
        if n_train == 0 || n_train == idx.len() {
            return Err(Error::DegenerateClass {
                class: key.to_string(),
                train: n_train,
                test: idx.len() - n_train,
            });
        }
        let mut rng = seed::derived_rng(seed, &[key.modulation.index() as u64, key.n_tx as u64]);
        idx.shuffle(&mut rng);
        for &i in &idx[..n_train] {
            in_train[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (row, is_train) in ds.rows.iter().zip(in_train) {
        if is_train {
            train.push(*row);
        } else {
            test.push(*row);
        }
    }
    Ok((
        LabeledDataset { rows: train, meta: None },
        LabeledDataset { rows: test, meta: None },
    ))
}

/// `ds_nrx{R}_snr{S}dB.csv`
pub fn dataset_file_name(n_rx: usize, snr_db: f64) -> String {
    format!("ds_nrx{n_rx}_snr{snr_db}dB.csv")
}

fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn write_csv(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(CSV_HEADER)?;
    let mut record = Vec::with_capacity(CSV_HEADER.len());
    for row in &ds.rows {
        record.clear();
        record.extend(row.features.0.iter().map(|v| format!("{v:.16e}")));
        record.push(row.modulation.label().to_string());
        record.push(row.n_tx.to_string());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let sidecar = meta_path(path);
    match &ds.meta {
        Some(meta) => {
            let mut f = File::create(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
            serde_json::to_writer_pretty(&mut f, meta)?;
            f.write_all(b"\n").map_err(|e| Error::io(&sidecar, e))?;
        }
        None if sidecar.exists() => std::fs::remove_file(&sidecar).map_err(|e| Error::io(&sidecar, e))?,
        None => {}
    }
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<LabeledDataset> {
    let schema = |reason: String| Error::Schema {
        path: path.to_path_buf(),
        reason,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(schema(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != CSV_HEADER.len() {
            return Err(schema(format!("row {} has {} fields", line + 1, record.len())));
        }
        let mut features = [0.0; N_FEATURES];
        for (i, f) in features.iter_mut().enumerate() {
            *f = record[i]
                .parse()
                .map_err(|_| schema(format!("row {}: bad {} value '{}'", line + 1, FEATURE_NAMES[i], &record[i])))?;
        }
        let modulation = record[9]
            .parse::<Modulation>()
            .map_err(|_| schema(format!("row {}: unknown modulation '{}'", line + 1, &record[9])))?;
        let n_tx = record[10]
            .parse::<usize>()
            .map_err(|_| schema(format!("row {}: bad antenna count '{}'", line + 1, &record[10])))?;
        rows.push(LabeledRow {
            features: FeatureVector(features),
            modulation,
            n_tx,
        });
    }
    let sidecar = meta_path(path);
    let meta = if sidecar.exists() {
        let f = File::open(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
        Some(serde_json::from_reader(f)?)
    } else {
        None
    };
    Ok(LabeledDataset { rows, meta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(samples_per_class: usize, seed: u64) -> LabeledDataset {
        generate_dataset(1, 10.0, samples_per_class, 128, seed).unwrap()
    }

    #[test]
    fn row_counts_and_balance() {
        let ds = small(1, 3);
        assert_eq!(ds.len(), 18);
        let ds = small(4, 3);
        assert_eq!(ds.len(), 72);
        let counts = ds.class_counts();
        assert_eq!(counts.len(), 18);
        assert!(counts.values().all(|&c| c == 4));
    }

    #[test]
    fn paper_scale_row_count() {
        // Short captures keep this fast; the row count only depends on the grid.
        let ds = generate_dataset(1, 0.0, 600, 8, 1).unwrap();
        assert_eq!(ds.len(), 10_800);
        let (train, test) = split(&ds, 0.6, 2).unwrap();
        assert_eq!((train.len(), test.len()), (6480, 4320));
        let slice = ds.filter_modulation(Modulation::Qam16);
        assert_eq!(slice.len(), 1800);
        let (tr, te) = split(&slice, 0.6, 2).unwrap();
        assert_eq!((tr.len(), te.len()), (1080, 720));
    }

    #[test]
    fn determinism_and_parallel_equivalence() {
        let meta = DatasetMeta {
            n_rx: 2,
            snr_db: 0.0,
            samples_per_class: 3,
            n_symbols: 64,
            seed: 99,
            options: GenerationOptions::default(),
        };
        let a = generate(&meta, true).unwrap();
        let b = generate(&meta, false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, generate(&meta, true).unwrap());
        let mut other = meta.clone();
        other.seed = 100;
        assert_ne!(generate(&other, true).unwrap().rows, a.rows);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(generate_dataset(1, 0.0, 0, 16, 0).is_err());
    }

    #[test]
    fn split_is_stratified_and_disjoint() {
        let ds = small(5, 4);
        let (train, test) = split(&ds, 0.6, 7).unwrap();
        assert_eq!(train.len() + test.len(), ds.len());
        assert!(train.class_counts().values().all(|&c| c == 3));
        assert!(test.class_counts().values().all(|&c| c == 2));
        for r in &train.rows {
            assert!(!test.rows.contains(r));
        }
        let (train2, _) = split(&ds, 0.6, 7).unwrap();
        assert_eq!(train, train2);
        let (train3, _) = split(&ds, 0.6, 8).unwrap();
        assert_ne!(train, train3);
    }

    #[test]
    fn degenerate_split_rejected() {
        let ds = small(1, 5);
        assert!(matches!(split(&ds, 0.5, 0), Err(Error::DegenerateClass { .. })));
        assert!(split(&ds, 1.0, 0).is_err());
        assert!(split(&ds, 0.0, 0).is_err());
    }

    #[test]
    fn csv_round_trip_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(dataset_file_name(1, -10.0));
        assert!(path.ends_with("ds_nrx1_snr-10dB.csv"));
        let ds = small(1, 6);
        write_csv(&ds, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "C20,C21,C40,C41,C42,C60,C61,C62,C63,Modulation,TxAntennas"
        );
        assert_eq!(read_csv(&path).unwrap(), ds);

        let empty = LabeledDataset::default();
        write_csv(&empty, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 1);
        assert_eq!(read_csv(&path).unwrap(), empty);
    }

    #[test]
    fn csv_schema_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(read_csv(&path), Err(Error::Schema { .. })));
        std::fs::write(
            &path,
            "C20,C21,C40,C41,C42,C60,C61,C62,C63,Modulation,TxAntennas\n1,1,1,1,1,1,1,1,1,OOK,1\n",
        )
        .unwrap();
        assert!(matches!(read_csv(&path), Err(Error::Schema { .. })));
        assert!(matches!(read_csv(&dir.path().join("missing.csv")), Err(Error::Io { .. })));
    }
}
