//! Blind classification of the modulation scheme and the number of transmit
//! antennas of a MIMO transmission from raw received I/Q samples.
//!
//! The crate is organised bottom-up:
//!
//! * [`sim`] generates Gray-mapped PSK/QAM symbols, draws a quasi-static
//!   Rayleigh channel and adds AWGN (`y = Hx + n`).
//! * [`features`] estimates moments `M_pq` and the nine second, fourth and
//!   sixth order cumulants used as classifier inputs.
//! * [`dataset`] builds balanced labelled datasets over the
//!   (modulation, Tx antennas) grid, with CSV I/O and stratified splits.
//! * [`ml`] holds from-scratch kNN, CART trees, Random Forest, Extra-Trees,
//!   SAMME AdaBoost and a least-squares polynomial classifier.
//! * [`pipelines`] composes them into the hierarchical modulation classifier,
//!   the universal and dedicated antenna classifiers and the two joint schemes.

pub mod dataset;
pub mod error;
pub mod features;
pub mod ml;
pub mod pipelines;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
