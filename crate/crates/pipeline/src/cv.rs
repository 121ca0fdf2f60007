//! `cv`: stratified k-fold or leave-one-sequence-out on the training split.

use std::str::FromStr;

use phq_core::cv::{complement, loso_folds, stratified_folds};
use phq_core::selection::binarize;

use crate::config::PipelineConfig;
use crate::corpus::Corpus;
use crate::error::{create_dir, write, Error, Result};
use crate::models::{fit_vector_pipeline, fit_window_model, labeled_sessions, mean, predict_windows, score, Dataset, Scores};
use crate::report::{cv_predictions_csv, cv_report_csv, CvPrediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvScheme {
    KFold(usize),
    Loso,
}

impl CvScheme {
    pub fn tag(self) -> String {
        match self {
            CvScheme::KFold(k) => format!("kfold{k}"),
            CvScheme::Loso => "loso".into(),
        }
    }
}

impl FromStr for CvScheme {
    type Err = Error;

    /// `kfold`, `kfold:<k>` or `loso`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loso" => Ok(CvScheme::Loso),
            "kfold" => Ok(CvScheme::KFold(3)),
            _ => s
                .strip_prefix("kfold:")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k >= 2)
                .map(CvScheme::KFold)
                .ok_or_else(|| Error::Config(format!("unknown cv scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvSummary {
    pub folds: Vec<Scores>,
    pub pooled: Scores,
    pub predictions: Vec<CvPrediction>,
}

pub fn run_cv(cfg: &PipelineConfig, scheme: CvScheme) -> Result<CvSummary> {
    cfg.validate()?;
    let kind = cfg.model_kind()?;
    let corpus = Corpus::open(&cfg.corpus)?;
    let data = Dataset::load(cfg)?;
    let sessions = labeled_sessions(&corpus.train, &data, "training")?;
    let y: Vec<f64> = sessions.iter().map(|s| s.1).collect();
    let folds = match scheme {
        CvScheme::KFold(k) => stratified_folds(&binarize(&y), k, cfg.seed)?,
        CvScheme::Loso => loso_folds(sessions.len())?,
    };
    let mut predictions = Vec::new();
    let mut fold_scores = Vec::new();
    for (f, test) in folds.iter().enumerate() {
        let train_idx = complement(sessions.len(), test);
        let fold_train: Vec<(String, f64)> = train_idx.iter().map(|&i| sessions[i].clone()).collect();
        let ty: Vec<f64> = fold_train.iter().map(|s| s.1).collect();
        let yhat: Vec<f64> = match &data {
            Dataset::Vectors(m) => {
                let rows = |idx: &[usize]| -> Vec<Vec<f64>> {
                    idx.iter().map(|&i| m.row(&sessions[i].0).unwrap().to_vec()).collect()
                };
                let fit = fit_vector_pipeline(kind, cfg, &rows(&train_idx), &ty, false)?;
                fit.predict(&rows(test))?
            }
            Dataset::Windows(b) => {
                let fit = fit_window_model(kind, cfg, b, &fold_train)?;
                let ids: Vec<String> = test.iter().map(|&i| sessions[i].0.clone()).collect();
                predict_windows(&fit.model, b, &ids, mean(&ty))?
                    .into_iter()
                    .map(|p| p.0)
                    .collect()
            }
        };
        let fy: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        fold_scores.push(score(&fy, &yhat)?);
        for (&i, &p) in test.iter().zip(&yhat) {
            predictions.push(CvPrediction {
                fold: f,
                session_id: sessions[i].0.clone(),
                label: y[i],
                prediction: p,
            });
        }
        log::info!("fold {f}: {} test sessions", test.len());
    }
    let py: Vec<f64> = predictions.iter().map(|p| p.label).collect();
    let pp: Vec<f64> = predictions.iter().map(|p| p.prediction).collect();
    let pooled = score(&py, &pp)?;
    create_dir(&cfg.output)?;
    let tag = scheme.tag();
    write(&cfg.output.join(format!("cv_{tag}_predictions.csv")), cv_predictions_csv(&predictions))?;
    write(&cfg.output.join(format!("cv_{tag}_report.csv")), cv_report_csv(&fold_scores, &pooled))?;
    Ok(CvSummary {
        folds: fold_scores,
        pooled,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_strings() {
        assert_eq!("kfold".parse::<CvScheme>().unwrap(), CvScheme::KFold(3));
        assert_eq!("kfold:5".parse::<CvScheme>().unwrap(), CvScheme::KFold(5));
        assert_eq!("loso".parse::<CvScheme>().unwrap(), CvScheme::Loso);
        assert!("kfold:1".parse::<CvScheme>().is_err());
        assert!("holdout".parse::<CvScheme>().is_err());
    }
}
