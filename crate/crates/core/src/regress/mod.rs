//! Trainable predictors sharing one prediction contract, and their
//! versioned on-disk format.

pub mod lstm;
pub mod reptree;
pub mod svr;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use lstm::{LstmConfig, LstmModel};
pub use reptree::{RepTreeModel, RepTreeParams};
pub use svr::{Kernel, SvrModel, SvrParams};

/// Fixed-length feature vector to score.
pub trait Regressor<T: Real> {
    fn input_dim(&self) -> usize;

    fn predict(&self, x: &[T]) -> Result<T>;

    fn predict_many(&self, rows: &[Vec<T>]) -> Result<Vec<T>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn check_training_set<T: Real>(x: &[Vec<T>], y: &[T], min_rows: usize) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} targets",
            x.len(),
            y.len()
        )));
    }
    if x.len() < min_rows {
        return Err(Error::InvalidArgument(format!(
            "need at least {min_rows} training rows, got {}",
            x.len()
        )));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("ragged feature matrix".into()));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training data".into()));
    }
    Ok(d)
}

/// Predicts the training-target mean for every input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanModel<T> {
    pub mean: T,
    pub dim: usize,
}

impl<T: Real> MeanModel<T> {
    pub fn fit(dim: usize, y: &[T]) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyInput("no training targets".into()));
        }
        Ok(MeanModel {
            mean: y.iter().copied().sum::<T>() / T::from_usize_lossy(y.len()),
            dim,
        })
    }
}

impl<T: Real> Regressor<T> for MeanModel<T> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        check_dim(self.dim, x.len())?;
        Ok(self.mean)
    }
}

/// Per-feature min-max scaling to [0, 1]; constant features map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler<T> {
    pub min: Vec<T>,
    pub max: Vec<T>,
}

impl<T: Real> MinMaxScaler<T> {
    pub fn fit(x: &[Vec<T>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let mut min = vec![T::infinity(); d];
        let mut max = vec![T::neg_infinity(); d];
        for row in x {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        MinMaxScaler { min, max }
    }

    pub fn transform(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| {
                let range = hi - lo;
                if range > T::zero() {
                    (v - lo) / range
                } else {
                    T::zero()
                }
            })
            .collect()
    }
}

pub const MODEL_FORMAT: &str = "phq-model";
pub const MODEL_VERSION: u32 = 1;

/// Any trained model, tagged by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
#[serde(bound(deserialize = "T: Real"))]
pub enum AnyModel<T: Real> {
    Mean(MeanModel<T>),
    Svr(SvrModel<T>),
    RepTree(RepTreeModel<T>),
    Lstm(LstmModel<T>),
}

impl<T: Real> AnyModel<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Mean(_) => "mean",
            AnyModel::Svr(_) => "svr",
            AnyModel::RepTree(_) => "reptree",
            AnyModel::Lstm(_) => "lstm",
        }
    }

    /// Vector regressor view; `None` for sequence models.
    pub fn as_regressor(&self) -> Option<&dyn Regressor<T>> {
        match self {
            AnyModel::Mean(m) => Some(m),
            AnyModel::Svr(m) => Some(m),
            AnyModel::RepTree(m) => Some(m),
            AnyModel::Lstm(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
struct ModelEnvelope<T: Real> {
    format: String,
    version: u32,
    scalar: String,
    #[serde(flatten)]
    model: AnyModel<T>,
}

fn scalar_name<T: Real>() -> &'static str {
    if std::mem::size_of::<T>() == 4 {
        "f32"
    } else {
        "f64"
    }
}

pub fn model_to_json<T: Real>(model: &AnyModel<T>) -> Result<String> {
    let env = ModelEnvelope {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        scalar: scalar_name::<T>().into(),
        model: model.clone(),
    };
    serde_json::to_string_pretty(&env).map_err(|e| Error::ModelFormat(e.to_string()))
}

pub fn model_from_json<T: Real>(text: &str) -> Result<AnyModel<T>> {
    let header: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if header.get("format").and_then(|v| v.as_str()) != Some(MODEL_FORMAT) {
        return Err(Error::ModelFormat("not a model file".into()));
    }
    let version = header.get("version").and_then(|v| v.as_u64());
    if version != Some(MODEL_VERSION as u64) {
        return Err(Error::ModelFormat(format!(
            "unsupported version {version:?}, expected {MODEL_VERSION}"
        )));
    }
    let scalar = header.get("scalar").and_then(|v| v.as_str());
    if scalar != Some(scalar_name::<T>()) {
        return Err(Error::ModelFormat(format!(
            "model scalar {scalar:?} does not match {}",
            scalar_name::<T>()
        )));
    }
    let env: ModelEnvelope<T> =
        serde_json::from_value(header).map_err(|e| Error::ModelFormat(e.to_string()))?;
    Ok(env.model)
}

pub fn save_model<T: Real>(path: impl AsRef<Path>, model: &AnyModel<T>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model)? + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_model<T: Real>(path: impl AsRef<Path>) -> Result<AnyModel<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_file_round_trip_and_version_check() {
        let m: AnyModel<f64> = AnyModel::Mean(MeanModel::fit(3, &[1.0, 2.0, 6.0]).unwrap());
        let text = model_to_json(&m).unwrap();
        assert_eq!(model_from_json::<f64>(&text).unwrap(), m);
        let bumped = text.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(model_from_json::<f64>(&bumped), Err(Error::ModelFormat(_))));
        assert!(model_from_json::<f32>(&text).is_err());
    }

    #[test]
    fn scaler_handles_constant_columns() {
        let s = MinMaxScaler::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        assert_eq!(s.transform(&[2.0, 5.0]), vec![0.5, 0.0]);
    }
}
