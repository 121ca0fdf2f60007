//! `train` and `tune-relief`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use phq_core::regress::{load_model, save_model, AnyModel};
use phq_core::selection::TuneResult;
use serde::{Deserialize, Serialize};

use crate::config::{Modality, PipelineConfig};
use crate::corpus::Corpus;
use crate::error::{create_dir, read, write, Error, Result};
use crate::models::{fit_vector_pipeline, fit_window_model, labeled_sessions, mean, select_features, Dataset, ReliefChoice};

/// Everything `eval` needs besides the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub modality: String,
    pub model: String,
    pub seed: u64,
    pub store_dim: usize,
    /// Store columns fed to the model, in order; empty for windows.
    pub columns: Vec<String>,
    /// Mean training label: the baseline prediction and the fallback for
    /// sessions without features.
    pub label_mean: f64,
    pub train_sessions: Vec<String>,
    pub validation_sessions: Vec<String>,
    pub relief: Option<ReliefChoice>,
}

impl RunRecord {
    pub fn path(output: &Path) -> PathBuf {
        output.join("run.json")
    }

    pub fn load(output: &Path) -> Result<Self> {
        let path = Self::path(output);
        serde_json::from_str(&read(&path)?).map_err(|e| Error::Corpus(format!("{}: {e}", path.display())))
    }
}

pub fn model_path(output: &Path) -> PathBuf {
    output.join("model.json")
}

pub fn load_trained(output: &Path) -> Result<(RunRecord, AnyModel<f64>)> {
    Ok((RunRecord::load(output)?, load_model(model_path(output))?))
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub record: RunRecord,
    pub model_path: PathBuf,
}

pub fn tuning_csv(t: &TuneResult) -> String {
    let mut out = String::from("threshold,k,mae,skipped\n");
    for p in &t.points {
        let mae = p.mae.map_or_else(|| "NA".to_string(), |m| m.to_string());
        let _ = writeln!(out, "{},{},{},{}", p.threshold, p.k, mae, p.skipped.as_deref().unwrap_or("").replace(',', " "));
    }
    out
}

pub fn run_train(cfg: &PipelineConfig) -> Result<TrainSummary> {
    cfg.validate()?;
    let modality = cfg.modality()?;
    let kind = cfg.model_kind()?;
    let corpus = Corpus::open(&cfg.corpus)?;
    let data = Dataset::load(cfg)?;
    let sessions = labeled_sessions(&corpus.train, &data, "training")?;
    if sessions.len() < 2 {
        return Err(Error::Corpus(format!("only {} usable training sessions", sessions.len())));
    }
    let y: Vec<f64> = sessions.iter().map(|s| s.1).collect();
    create_dir(&cfg.output)?;
    let mut record = RunRecord {
        modality: modality.to_string(),
        model: kind.name().to_string(),
        seed: cfg.seed,
        store_dim: data.dim(),
        columns: Vec::new(),
        label_mean: mean(&y),
        train_sessions: sessions.iter().map(|s| s.0.clone()).collect(),
        validation_sessions: Vec::new(),
        relief: None,
    };
    let model = match &data {
        Dataset::Vectors(m) => {
            let x: Vec<Vec<f64>> = sessions.iter().map(|(id, _)| m.row(id).unwrap().to_vec()).collect();
            let fit = fit_vector_pipeline(kind, cfg, &x, &y, cfg.relief.tune)?;
            record.columns = match &fit.columns {
                Some(c) => c.iter().map(|&j| m.names[j].clone()).collect(),
                None => m.names.clone(),
            };
            if fit.columns.is_some() {
                write(&cfg.output.join("selected_features.txt"), record.columns.join("\n") + "\n")?;
            }
            if let Some(t) = &fit.tuning {
                write(&cfg.output.join("relief_tuning.csv"), tuning_csv(t))?;
            }
            record.relief = fit.relief;
            fit.model
        }
        Dataset::Windows(b) => {
            let fit = fit_window_model(kind, cfg, b, &sessions)?;
            record.validation_sessions = fit.validation;
            if let AnyModel::Lstm(m) = &fit.model {
                let mut hist = String::from("epoch,train_loss,val_loss\n");
                for r in &m.history {
                    let val = r.val_loss.map_or_else(|| "NA".to_string(), |v| v.to_string());
                    let _ = writeln!(hist, "{},{},{}", r.epoch, r.train_loss, val);
                }
                write(&cfg.output.join("training_history.csv"), hist)?;
                log::info!("kept LSTM parameters of epoch {}", m.best_epoch);
            }
            fit.model
        }
    };
    let path = model_path(&cfg.output);
    save_model(&path, &model)?;
    write(
        &RunRecord::path(&cfg.output),
        serde_json::to_string_pretty(&record).expect("record serializes") + "\n",
    )?;
    Ok(TrainSummary { record, model_path: path })
}

/// Cross-validated grid search over Relief (threshold, k) on the training
/// split, written to `relief_tuning.csv`.
pub fn run_tune_relief(cfg: &PipelineConfig) -> Result<TuneResult> {
    cfg.validate()?;
    if matches!(cfg.modality()?, Modality::Visual) {
        return Err(Error::Config("Relief tuning needs a vector modality".into()));
    }
    let kind = cfg.model_kind()?;
    let corpus = Corpus::open(&cfg.corpus)?;
    let data = Dataset::load(cfg)?;
    let Dataset::Vectors(m) = &data else { unreachable!() };
    let sessions = labeled_sessions(&corpus.train, &data, "training")?;
    let x: Vec<Vec<f64>> = sessions.iter().map(|(id, _)| m.row(id).unwrap().to_vec()).collect();
    let y: Vec<f64> = sessions.iter().map(|s| s.1).collect();
    let (_, columns, tuning) = select_features(kind, cfg, &x, &y, true)?;
    let tuning = tuning.expect("tuning requested");
    create_dir(&cfg.output)?;
    write(&cfg.output.join("relief_tuning.csv"), tuning_csv(&tuning))?;
    let names: Vec<&str> = columns.iter().map(|&j| m.names[j].as_str()).collect();
    log::info!("best point keeps {} features: {}", names.len(), names.join(" "));
    Ok(tuning)
}
