//! Versioned JSON model files.
//!
//! ```json
//! { "format": "amc-model", "version": 1, "kind": "classifier", "model": { ... } }
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::TrainedClassifier;
use crate::{Error, Result};

pub const FORMAT: &str = "amc-model";
pub const VERSION: u32 = 1;

/// Types that can be stored in a model file, tagged by `KIND`.
pub trait Persist: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

impl Persist for TrainedClassifier {
    const KIND: &'static str = "classifier";
}

#[derive(Serialize)]
struct EnvelopeRef<'a, T> {
    format: &'a str,
    version: u32,
    kind: &'a str,
    model: &'a T,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
    kind: String,
}

#[derive(Deserialize)]
struct Envelope<T> {
    model: T,
}

pub fn to_string<T: Persist>(model: &T) -> Result<String> {
    Ok(serde_json::to_string(&EnvelopeRef {
        format: FORMAT,
        version: VERSION,
        kind: T::KIND,
        model,
    })?)
}

pub fn from_str<T: Persist>(text: &str) -> Result<T> {
    let header: Header = serde_json::from_str(text)?;
    check_header::<T>(&header)?;
    Ok(serde_json::from_str::<Envelope<T>>(text)?.model)
}

fn check_header<T: Persist>(h: &Header) -> Result<()> {
    if h.format != FORMAT {
        return Err(Error::ModelFormat(format!("format '{}' is not '{FORMAT}'", h.format)));
    }
    if h.version != VERSION {
        return Err(Error::ModelFormat(format!("version {} is not supported (expected {VERSION})", h.version)));
    }
    if h.kind != T::KIND {
        return Err(Error::ModelFormat(format!("file holds a '{}', expected '{}'", h.kind, T::KIND)));
    }
    Ok(())
}

pub fn save<T: Persist>(model: &T, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer(
        BufWriter::new(f),
        &EnvelopeRef {
            format: FORMAT,
            version: VERSION,
            kind: T::KIND,
            model,
        },
    )?;
    Ok(())
}

pub fn load<T: Persist>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::random_set;
    use super::super::{BoostBase, ClassifierSpec};
    use super::*;

    #[test]
    fn models_survive_a_file_round_trip() {
        let ts = random_set(60, 3, 2, |x| u32::from(x[0] > 0.4) * 2);
        let dir = tempfile::tempdir().unwrap();
        for spec in [
            ClassifierSpec::Knn { k: 3 },
            ClassifierSpec::RandomForest { n_estimators: 5 },
            ClassifierSpec::ExtraTrees { n_estimators: 5 },
            ClassifierSpec::AdaBoost {
                n_estimators: 5,
                base: BoostBase::Stump,
            },
            ClassifierSpec::PolyLs,
        ] {
            let model = spec.fit(&ts, 1).unwrap();
            let path = dir.path().join("m.json");
            save(&model, &path).unwrap();
            let back: TrainedClassifier = load(&path).unwrap();
            assert_eq!(back.predict_batch(&ts.features).unwrap(), model.predict_batch(&ts.features).unwrap());
        }
    }

    #[test]
    fn wrong_version_or_kind_rejected() {
        let ts = random_set(10, 2, 3, |x| u32::from(x[0] > 0.5));
        let model = ClassifierSpec::Knn { k: 1 }.fit(&ts, 0).unwrap();
        let text = to_string(&model).unwrap();
        let bumped = text.replacen("\"version\":1", "\"version\":99", 1);
        assert!(matches!(from_str::<TrainedClassifier>(&bumped), Err(Error::ModelFormat(_))));
        let other = text.replacen("\"kind\":\"classifier\"", "\"kind\":\"hmc\"", 1);
        assert!(matches!(from_str::<TrainedClassifier>(&other), Err(Error::ModelFormat(_))));
        let foreign = text.replacen("amc-model", "pickle", 1);
        assert!(from_str::<TrainedClassifier>(&foreign).is_err());
    }
}
