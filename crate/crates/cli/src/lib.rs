//! Command-line front end: dataset generation, classifier sweeps over SNR
//! and receive-antenna count, and merged result tables.

pub mod commands;
pub mod config;
