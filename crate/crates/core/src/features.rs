//! Higher-order moment and cumulant features.
//!
//! `M_pq = E[y^(p-q) (y*)^q]` is estimated by the sample mean. The nine
//! cumulants C20, C21, C40, C41, C42, C60, C61, C62, C63 are combined from
//! the moments, normalised to `|C|^(2/p)` and used as a fixed-order
//! [`FeatureVector`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sim::SignalCapture;
use crate::{Error, Result};

pub const N_FEATURES: usize = 9;

/// Column order of the feature vector.
pub const FEATURE_NAMES: [&str; N_FEATURES] = ["C20", "C21", "C40", "C41", "C42", "C60", "C61", "C62", "C63"];

/// Cumulant order p of each feature, used for the `2/p` normalisation.
pub const FEATURE_ORDERS: [u32; N_FEATURES] = [2, 2, 4, 4, 4, 6, 6, 6, 6];

/// Length of the degree-2 expansion of a 9-feature vector.
pub const POLY_LEN: usize = 1 + N_FEATURES + N_FEATURES * (N_FEATURES + 1) / 2;

/// Sample estimate of `E[y^(p-q) (y*)^q]`.
///
/// Samples are summed in a canonical (sorted) order, so the result depends
/// only on the multiset of samples and not on their arrangement.
pub fn compute_moment(samples: &[Complex64], p: u32, q: u32) -> Result<Complex64> {
    if q > p {
        return Err(Error::InvalidOrder { p, q });
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(sorted_moment(&canonical_order(samples), p, q))
}

fn canonical_order(samples: &[Complex64]) -> Vec<Complex64> {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    sorted
}

fn sorted_moment(samples: &[Complex64], p: u32, q: u32) -> Complex64 {
    let sum: Complex64 = samples
        .iter()
        .map(|y| {
            let yc = y.conj();
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..p - q {
                acc *= y;
            }
            for _ in 0..q {
                acc *= yc;
            }
            acc
        })
        .sum();
    sum / samples.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub m20: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    pub m40: Complex64,
    pub m41: Complex64,
    pub m42: Complex64,
    pub m43: Complex64,
    pub m60: Complex64,
    pub m61: Complex64,
    pub m62: Complex64,
    pub m63: Complex64,
}

impl MomentSet {
    /// Same values as calling [`compute_moment`] for each `(p, q)`.
    pub fn estimate(samples: &[Complex64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        let sorted = canonical_order(samples);
        let m = |p, q| sorted_moment(&sorted, p, q);
        Ok(MomentSet {
            m20: m(2, 0),
            m21: m(2, 1),
            m22: m(2, 2),
            m40: m(4, 0),
            m41: m(4, 1),
            m42: m(4, 2),
            m43: m(4, 3),
            m60: m(6, 0),
            m61: m(6, 1),
            m62: m(6, 2),
            m63: m(6, 3),
        })
    }
}

/// Which forms of C41 and C42 to use.
///
/// `Default` computes `C41 = M40 - 3 M20 M21` and
/// `C42 = M42 + |M40|² - 2 M21²`. `Textbook` uses the usual
/// `C41 = M41 - 3 M20 M21` and `C42 = M42 - |M20|² - 2 M21²`.
/// All other cumulants are identical in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CumulantVariant {
    #[default]
    Default,
    Textbook,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cumulants {
    pub c20: Complex64,
    pub c21: Complex64,
    pub c40: Complex64,
    pub c41: Complex64,
    pub c42: Complex64,
    pub c60: Complex64,
    pub c61: Complex64,
    pub c62: Complex64,
    pub c63: Complex64,
}

impl Cumulants {
    pub fn from_moments(m: &MomentSet, variant: CumulantVariant) -> Self {
        let MomentSet {
            m20,
            m21,
            m22,
            m40,
            m41,
            m42,
            m43,
            m60,
            m61,
            m62,
            m63,
        } = *m;
        let (c41, c42) = match variant {
            CumulantVariant::Default => (m40 - 3.0 * m20 * m21, m42 + m40.norm_sqr() - 2.0 * m21 * m21),
            CumulantVariant::Textbook => (m41 - 3.0 * m20 * m21, m42 - m20.norm_sqr() - 2.0 * m21 * m21),
        };
        Cumulants {
            c20: m20,
            c21: m21,
            c40: m40 - 3.0 * m20 * m20,
            c41,
            c42,
            c60: m60 - 15.0 * m20 * m40 + 30.0 * m20 * m20 * m20,
            c61: m61 - 5.0 * m21 * m40 - 10.0 * m20 * m41 + 30.0 * m20 * m20 * m21,
            c62: m62 - 6.0 * m20 * m42 - 8.0 * m21 * m41 - m22 * m40
                + 6.0 * m20 * m20 * m22
                + 24.0 * m21 * m21 * m20,
            c63: m63 - 9.0 * m21 * m42 + 12.0 * m21 * m21 * m21 - 3.0 * m20 * m43 - 3.0 * m22 * m41
                + 18.0 * m20 * m21 * m22,
        }
    }

    /// Values in [`FEATURE_NAMES`] order.
    pub fn to_array(&self) -> [Complex64; N_FEATURES] {
        [
            self.c20, self.c21, self.c40, self.c41, self.c42, self.c60, self.c61, self.c62, self.c63,
        ]
    }
}

pub fn compute_cumulants(samples: &[Complex64]) -> Result<Cumulants> {
    compute_cumulants_with(samples, CumulantVariant::Default)
}

pub fn compute_cumulants_with(samples: &[Complex64], variant: CumulantVariant) -> Result<Cumulants> {
    Ok(Cumulants::from_moments(&MomentSet::estimate(samples)?, variant))
}

/// Nine normalised cumulant magnitudes in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|&n| n == name).map(|i| self.0[i])
    }
}

/// `|C|^(2/p)` per cumulant.
pub fn normalize_cumulants(raw: &Cumulants) -> FeatureVector {
    let values = raw.to_array();
    let mut out = [0.0; N_FEATURES];
    for ((o, c), p) in out.iter_mut().zip(values).zip(FEATURE_ORDERS) {
        *o = c.norm().powf(2.0 / f64::from(p));
    }
    FeatureVector(out)
}

/// Degree-2 expansion `[1, x_1..x_d, x_i x_j (i <= j)]`, row-major over `(i, j)`.
pub fn polynomial_expand_slice(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut out = Vec::with_capacity(1 + d + d * (d + 1) / 2);
    out.push(1.0);
    out.extend_from_slice(x);
    for i in 0..d {
        for j in i..d {
            out.push(x[i] * x[j]);
        }
    }
    out
}

pub fn polynomial_expand(fv: &FeatureVector) -> Vec<f64> {
    polynomial_expand_slice(&fv.0)
}

/// How the receive-antenna streams of one capture become one feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RxCombining {
    /// Features are computed per receive antenna and averaged.
    #[default]
    AntennaAverage,
    /// All receive streams are concatenated into one sample set.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeatureOptions {
    pub combining: RxCombining,
    pub variant: CumulantVariant,
}

pub fn extract(samples: &[Complex64], variant: CumulantVariant) -> Result<FeatureVector> {
    Ok(normalize_cumulants(&compute_cumulants_with(samples, variant)?))
}

pub fn capture_features(capture: &SignalCapture, options: FeatureOptions) -> Result<FeatureVector> {
    match options.combining {
        RxCombining::Pooled => extract(&capture.flattened(), options.variant),
        RxCombining::AntennaAverage => {
            let mut acc = [0.0; N_FEATURES];
            for stream in &capture.samples {
                let fv = extract(stream, options.variant)?;
                for (a, v) in acc.iter_mut().zip(fv.0) {
                    *a += v;
                }
            }
            let n = capture.samples.len() as f64;
            Ok(FeatureVector(acc.map(|a| a / n)))
        }
    }
}
