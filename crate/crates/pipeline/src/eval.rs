//! `eval`: scores a trained run on a labeled split.

use crate::config::PipelineConfig;
use crate::corpus::{Corpus, Split};
use crate::error::{write, Error, Result};
use crate::models::{predict_windows, score, Dataset};
use crate::report::{predictions_csv, PredictionRow, RunReport};
use crate::train::load_trained;

pub fn run_eval(cfg: &PipelineConfig, split: Split) -> Result<RunReport> {
    cfg.validate()?;
    let corpus = Corpus::open(&cfg.corpus)?;
    let entries = corpus.split(split);
    if entries.is_empty() {
        return Err(Error::Corpus(format!("{split} split is empty")));
    }
    let (record, model) = load_trained(&cfg.output)?;
    if record.modality != cfg.modality()?.to_string() {
        return Err(Error::Config(format!(
            "trained run is for {}, config asks for {}",
            record.modality, cfg.modality
        )));
    }
    let data = Dataset::load(cfg)?;
    let mut labels = Vec::with_capacity(entries.len());
    for e in entries {
        let l = e
            .label
            .ok_or_else(|| Error::Corpus(format!("{split} session {} has no label", e.id)))?;
        labels.push(l.score() as f64);
    }
    let ids: Vec<String> = entries.iter().map(|e| e.id.clone()).collect();
    let predicted: Vec<(f64, bool)> = match &data {
        Dataset::Vectors(m) => {
            let cols = record
                .columns
                .iter()
                .map(|n| {
                    m.column_index(n)
                        .ok_or_else(|| Error::Corpus(format!("feature {n} missing from the store")))
                })
                .collect::<Result<Vec<usize>>>()?;
            let regressor = model
                .as_regressor()
                .ok_or_else(|| Error::Config(format!("{} model cannot score feature vectors", model.kind())))?;
            ids.iter()
                .map(|id| match m.row(id) {
                    Some(row) => {
                        let x: Vec<f64> = cols.iter().map(|&j| row[j]).collect();
                        Ok((regressor.predict(&x)?, false))
                    }
                    None => {
                        log::warn!("{split} session {id} has no features; predicting the training mean");
                        Ok((record.label_mean, true))
                    }
                })
                .collect::<Result<_>>()?
        }
        Dataset::Windows(b) => predict_windows(&model, b, &ids, record.label_mean)?,
    };
    let rows: Vec<PredictionRow> = ids
        .iter()
        .zip(&labels)
        .zip(&predicted)
        .map(|((id, &label), &(prediction, fallback))| PredictionRow {
            session_id: id.clone(),
            label,
            prediction,
            baseline: record.label_mean,
            fallback,
        })
        .collect();
    let yhat: Vec<f64> = rows.iter().map(|r| r.prediction).collect();
    let base: Vec<f64> = rows.iter().map(|r| r.baseline).collect();
    let report = RunReport {
        split: split.name().to_string(),
        modality: record.modality.clone(),
        model: record.model.clone(),
        fallbacks: rows.iter().filter(|r| r.fallback).count(),
        store_dim: record.store_dim,
        input_dim: if record.columns.is_empty() { data.dim() } else { record.columns.len() },
        scores: score(&labels, &yhat)?,
        baseline: score(&labels, &base)?,
        selected: if record.relief.is_some() { record.columns.clone() } else { Vec::new() },
        relief: record.relief.clone(),
        config: cfg.to_toml(),
    };
    write(&cfg.output.join(format!("predictions_{split}.csv")), predictions_csv(&rows))?;
    write(&cfg.output.join(format!("report_{split}.csv")), report.to_csv())?;
    write(&cfg.output.join(format!("report_{split}.txt")), report.to_text())?;
    Ok(report)
}
