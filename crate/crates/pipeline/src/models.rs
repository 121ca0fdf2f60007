//! Model fitting and prediction shared by `train`, `eval`, `cv` and
//! `tune-relief`.

use std::collections::BTreeMap;

use phq_core::face::{aggregate_predictions, WindowBatch};
use phq_core::features::FeatureMatrix;
use phq_core::metrics::{error_metrics, explained_variance};
use phq_core::regress::{AnyModel, LstmModel, MeanModel, RepTreeModel, SvrModel};
use phq_core::selection::{binarize, project_columns, relief_weights, select_top, tune_relief, TuneResult};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Modality, ModelKind, PipelineConfig};
use crate::corpus::SplitEntry;
use crate::error::{Error, Result};
use crate::store::load_windows;

/// Extracted features of one modality.
pub enum Dataset {
    Vectors(FeatureMatrix<f64>),
    Windows(WindowBatch<f64>),
}

impl Dataset {
    pub fn load(cfg: &PipelineConfig) -> Result<Self> {
        let modality = cfg.modality()?;
        let path = cfg.features_dir().join(format!("{}.csv", modality.store_name()));
        if !path.exists() {
            return Err(Error::Corpus(format!(
                "{} not found; run extract for {modality} first",
                path.display()
            )));
        }
        Ok(match modality {
            Modality::Visual => Dataset::Windows(load_windows(&path)?),
            _ => Dataset::Vectors(FeatureMatrix::load(&path)?),
        })
    }

    pub fn has_session(&self, id: &str) -> bool {
        match self {
            Dataset::Vectors(m) => m.row(id).is_some(),
            Dataset::Windows(b) => b.windows.iter().any(|w| w.session_id == id),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Dataset::Vectors(m) => m.dim(),
            Dataset::Windows(b) => b.dim,
        }
    }
}

/// Labeled sessions of `entries` present in the dataset. Unlabeled sessions
/// are an error; sessions missing from the store are logged and dropped.
pub fn labeled_sessions(entries: &[SplitEntry], data: &Dataset, what: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for e in entries {
        let label = e
            .label
            .ok_or_else(|| Error::Corpus(format!("{what} session {} has no label", e.id)))?;
        if data.has_session(&e.id) {
            out.push((e.id.clone(), label.score() as f64));
        } else {
            log::warn!("{what} session {} has no extracted features", e.id);
        }
    }
    Ok(out)
}

pub fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

/// Fits a vector model.
pub fn fit_vectors(kind: ModelKind, cfg: &PipelineConfig, x: &[Vec<f64>], y: &[f64]) -> Result<AnyModel<f64>> {
    let dim = x.first().map_or(0, Vec::len);
    Ok(match kind {
        ModelKind::Mean => AnyModel::Mean(MeanModel::fit(dim, y)?),
        ModelKind::Svr => AnyModel::Svr(SvrModel::train(x, y, cfg.svr_params()?)?),
        ModelKind::RepTree => AnyModel::RepTree(RepTreeModel::train(x, y, cfg.reptree_params())?),
        ModelKind::Lstm => return Err(Error::Config("the LSTM consumes visual windows only".into())),
    })
}

pub fn predict_vectors(model: &AnyModel<f64>, x: &[Vec<f64>]) -> Result<Vec<f64>> {
    let r = model
        .as_regressor()
        .ok_or_else(|| Error::Config(format!("{} model cannot score feature vectors", model.kind())))?;
    Ok(r.predict_many(x)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliefChoice {
    pub threshold: f64,
    pub k: usize,
    /// Cross-validated MAE of the chosen point, when tuned.
    pub tuned_mae: Option<f64>,
}

/// Relief feature selection on training rows: optionally tunes (threshold, k)
/// first, then keeps the top columns.
pub fn select_features(
    kind: ModelKind,
    cfg: &PipelineConfig,
    x: &[Vec<f64>],
    y: &[f64],
    tune: bool,
) -> Result<(ReliefChoice, Vec<usize>, Option<TuneResult>)> {
    let tuning = if tune {
        let fit_predict = |xt: &[Vec<f64>], yt: &[f64], xs: &[Vec<f64>]| -> phq_core::Result<Vec<f64>> {
            let model = fit_vectors(kind, cfg, xt, yt).map_err(|e| match e {
                Error::Core(c) => c,
                other => phq_core::Error::InvalidArgument(other.to_string()),
            })?;
            model.as_regressor().expect("vector model").predict_many(xs)
        };
        Some(tune_relief(x, y, &cfg.tune_spec(), &fit_predict)?)
    } else {
        None
    };
    let choice = match &tuning {
        Some(t) => ReliefChoice {
            threshold: t.threshold,
            k: t.k,
            tuned_mae: Some(t.mae),
        },
        None => ReliefChoice {
            threshold: cfg.relief.threshold,
            k: cfg.relief.k,
            tuned_mae: None,
        },
    };
    let weights = relief_weights(x, &binarize(y), choice.k)?;
    let columns = select_top(&weights.weights, choice.threshold, cfg.relief.max_features);
    if columns.is_empty() {
        return Err(Error::Config(format!(
            "no feature has a Relief weight above {}",
            choice.threshold
        )));
    }
    Ok((choice, columns, tuning))
}

/// A fitted vector pipeline: optional column selection, then the model.
pub struct VectorFit {
    pub model: AnyModel<f64>,
    pub columns: Option<Vec<usize>>,
    pub relief: Option<ReliefChoice>,
    pub tuning: Option<TuneResult>,
}

pub fn fit_vector_pipeline(
    kind: ModelKind,
    cfg: &PipelineConfig,
    x: &[Vec<f64>],
    y: &[f64],
    tune: bool,
) -> Result<VectorFit> {
    let select = matches!(cfg.modality()?, Modality::Acoustic { select: true, .. });
    if !select {
        return Ok(VectorFit {
            model: fit_vectors(kind, cfg, x, y)?,
            columns: None,
            relief: None,
            tuning: None,
        });
    }
    let (relief, columns, tuning) = select_features(kind, cfg, x, y, tune)?;
    let model = fit_vectors(kind, cfg, &project_columns(x, &columns), y)?;
    Ok(VectorFit {
        model,
        columns: Some(columns),
        relief: Some(relief),
        tuning,
    })
}

impl VectorFit {
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        match &self.columns {
            Some(c) => predict_vectors(&self.model, &project_columns(x, c)),
            None => predict_vectors(&self.model, x),
        }
    }
}

/// Windows of the given sessions, labeled with the session score.
pub fn labeled_windows(all: &WindowBatch<f64>, sessions: &[(String, f64)]) -> WindowBatch<f64> {
    let labels: BTreeMap<&str, f64> = sessions.iter().map(|(id, y)| (id.as_str(), *y)).collect();
    let mut out = WindowBatch::new(all.window, all.overlap, all.dim);
    for w in &all.windows {
        if let Some(&y) = labels.get(w.session_id.as_str()) {
            let mut w = w.clone();
            w.label = Some(y);
            out.windows.push(w);
        }
    }
    out
}

/// Splits sessions into (fit, validation) for early stopping.
pub fn validation_split(sessions: &[(String, f64)], fraction: f64, seed: u64) -> (Vec<(String, f64)>, Vec<(String, f64)>) {
    let n_val = (fraction * sessions.len() as f64).floor() as usize;
    if n_val == 0 || n_val >= sessions.len() {
        return (sessions.to_vec(), Vec::new());
    }
    let mut order: Vec<usize> = (0..sessions.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut val: Vec<usize> = order[..n_val].to_vec();
    val.sort_unstable();
    let fit = (0..sessions.len()).filter(|i| !val.contains(i)).map(|i| sessions[i].clone()).collect();
    (fit, val.into_iter().map(|i| sessions[i].clone()).collect())
}

pub struct WindowFit {
    pub model: AnyModel<f64>,
    pub validation: Vec<String>,
}

pub fn fit_window_model(kind: ModelKind, cfg: &PipelineConfig, all: &WindowBatch<f64>, sessions: &[(String, f64)]) -> Result<WindowFit> {
    let y: Vec<f64> = sessions.iter().map(|s| s.1).collect();
    match kind {
        ModelKind::Mean => Ok(WindowFit {
            model: AnyModel::Mean(MeanModel::fit(all.dim, &y)?),
            validation: Vec::new(),
        }),
        ModelKind::Lstm => {
            let (fit, val) = validation_split(sessions, cfg.lstm.validation_fraction, cfg.seed);
            let train = labeled_windows(all, &fit);
            let validation = labeled_windows(all, &val);
            let model = LstmModel::train(&train, Some(&validation), cfg.lstm_config())?;
            Ok(WindowFit {
                model: AnyModel::Lstm(model),
                validation: val.into_iter().map(|s| s.0).collect(),
            })
        }
        other => Err(Error::Config(format!("{} cannot consume visual windows", other.name()))),
    }
}

/// Session scores from window predictions; sessions without windows get
/// `fallback`. Returns (score, used_fallback) per requested session.
pub fn predict_windows(model: &AnyModel<f64>, all: &WindowBatch<f64>, ids: &[String], fallback: f64) -> Result<Vec<(f64, bool)>> {
    let mut per: BTreeMap<&str, Vec<f64>> = ids.iter().map(|id| (id.as_str(), Vec::new())).collect();
    for w in &all.windows {
        if let Some(slot) = per.get_mut(w.session_id.as_str()) {
            let p = match model {
                AnyModel::Lstm(m) => m.predict_window(&w.samples)?,
                AnyModel::Mean(m) => m.mean,
                other => return Err(Error::Config(format!("{} model cannot score windows", other.kind()))),
            };
            slot.push(p);
        }
    }
    Ok(ids
        .iter()
        .map(|id| {
            let a = aggregate_predictions(&per[id.as_str()], fallback);
            (a.score, a.used_fallback)
        })
        .collect())
}

/// RMSE, MAE and EVS; EVS is `None` when undefined. A single pair gets
/// RMSE = MAE = its absolute residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub n: usize,
    pub rmse: f64,
    pub mae: f64,
    pub evs: Option<f64>,
}

pub fn score(y: &[f64], yhat: &[f64]) -> Result<Scores> {
    match y.len() {
        0 => Err(Error::Corpus("nothing to score".into())),
        1 => {
            let r = (y[0] - yhat[0]).abs();
            Ok(Scores { n: 1, rmse: r, mae: r, evs: None })
        }
        n => {
            let e = error_metrics(y, yhat)?;
            Ok(Scores {
                n,
                rmse: e.rmse,
                mae: e.mae,
                evs: explained_variance(y, yhat).ok(),
            })
        }
    }
}
