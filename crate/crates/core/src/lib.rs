//! Unimodality testing and cluster-count estimation.

pub mod baseline;
pub mod bench;
pub mod cluster;
pub mod dataset;
pub mod error;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod sigtest;
pub mod stats;
pub mod synth;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use sigtest::{sigtest, SigtestConfig, TestOutcome, Variant};
pub use stats::SampleVector;
