//! Experiment orchestration for PHQ-8 regression: corpus layout, synthetic
//! corpora, feature extraction, training, evaluation and cross-validation.

pub mod config;
pub mod corpus;
pub mod cv;
pub mod error;
pub mod eval;
pub mod extract;
pub mod models;
pub mod report;
pub mod store;
pub mod synth;
pub mod train;

pub use config::PipelineConfig;
pub use error::{Error, Result};
