//! Feature extraction, feature selection and regression for estimating
//! PHQ-8 depression severity from interview sessions.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! bottom fix the scalar for callers that do not care.

pub mod audio;
pub mod cv;
pub mod error;
pub mod face;
pub mod features;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod regress;
pub mod scalar;
pub mod selection;
pub mod text;
pub mod turns;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Session64 = model::Session<f64>;
pub type AudioSignal64 = model::AudioSignal<f64>;
pub type LandmarkSequence64 = model::LandmarkSequence<f64>;
pub type MetricReport64 = metrics::MetricReport<f64>;
pub type SvrModel64 = regress::SvrModel<f64>;
pub type RepTreeModel64 = regress::RepTreeModel<f64>;
pub type LstmModel64 = regress::LstmModel<f64>;
pub type AnyModel64 = regress::AnyModel<f64>;
pub type FeatureMatrix64 = features::FeatureMatrix<f64>;
pub type WindowBatch64 = face::WindowBatch<f64>;
pub type PcaProjection64 = face::PcaProjection<f64>;
pub type SvrModel32 = regress::SvrModel<f32>;
pub type RepTreeModel32 = regress::RepTreeModel<f32>;
pub type LstmModel32 = regress::LstmModel<f32>;
