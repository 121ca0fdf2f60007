//! Report and prediction files.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::models::{ReliefChoice, Scores};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub session_id: String,
    pub label: f64,
    pub prediction: f64,
    pub baseline: f64,
    /// No features for the session, so the training-label mean was used.
    pub fallback: bool,
}

pub fn predictions_csv(rows: &[PredictionRow]) -> String {
    let mut out = String::from("session_id,label,prediction,baseline,fallback\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.session_id, r.label, r.prediction, r.baseline, u8::from(r.fallback));
    }
    out
}

pub fn parse_predictions(text: &str) -> Option<Vec<PredictionRow>> {
    let mut lines = text.lines();
    if lines.next()? != "session_id,label,prediction,baseline,fallback" {
        return None;
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return None;
            }
            Some(PredictionRow {
                session_id: f[0].to_string(),
                label: f[1].parse().ok()?,
                prediction: f[2].parse().ok()?,
                baseline: f[3].parse().ok()?,
                fallback: f[4] == "1",
            })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn opt_fixed(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub split: String,
    pub modality: String,
    pub model: String,
    pub fallbacks: usize,
    pub store_dim: usize,
    pub input_dim: usize,
    pub scores: Scores,
    pub baseline: Scores,
    pub relief: Option<ReliefChoice>,
    pub selected: Vec<String>,
    pub config: String,
}

impl RunReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("split,system,n,rmse,mae,evs\n");
        for (name, s) in [(self.model.as_str(), &self.scores), ("mean", &self.baseline)] {
            let _ = writeln!(out, "{},{},{},{},{},{}", self.split, name, s.n, s.rmse, s.mae, opt(s.evs));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "split       {}", self.split);
        let _ = writeln!(out, "modality    {}", self.modality);
        let _ = writeln!(out, "model       {}", self.model);
        let _ = writeln!(out, "sessions    {} ({} without features)", self.scores.n, self.fallbacks);
        let _ = writeln!(out, "features    {} extracted, {} used", self.store_dim, self.input_dim);
        if let Some(r) = &self.relief {
            let _ = write!(out, "relief      threshold {} k {}", r.threshold, r.k);
            match r.tuned_mae {
                Some(m) => {
                    let _ = writeln!(out, " (tuned, cv MAE {m:.4})");
                }
                None => out.push('\n'),
            }
            let _ = writeln!(out, "selected    {}", self.selected.join(" "));
        }
        let _ = writeln!(out, "\n{:<10} {:>10} {:>10} {:>10}", "system", "RMSE", "MAE", "EVS");
        for (name, s) in [(self.model.as_str(), &self.scores), ("mean", &self.baseline)] {
            let _ = writeln!(out, "{:<10} {:>10.4} {:>10.4} {:>10}", name, s.rmse, s.mae, opt_fixed(s.evs));
        }
        let _ = writeln!(out, "\nconfig\n------\n{}", self.config);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPrediction {
    pub fold: usize,
    pub session_id: String,
    pub label: f64,
    pub prediction: f64,
}

pub fn cv_predictions_csv(rows: &[CvPrediction]) -> String {
    let mut out = String::from("fold,session_id,label,prediction\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.fold, r.session_id, r.label, r.prediction);
    }
    out
}

pub fn cv_report_csv(folds: &[Scores], pooled: &Scores) -> String {
    let mut out = String::from("fold,n,rmse,mae,evs\n");
    for (i, s) in folds.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{},{},{}", s.n, s.rmse, s.mae, opt(s.evs));
    }
    let _ = writeln!(out, "pooled,{},{},{},{}", pooled.n, pooled.rmse, pooled.mae, opt(pooled.evs));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictions_round_trip() {
        let rows = vec![
            PredictionRow {
                session_id: "300".into(),
                label: 4.0,
                prediction: 5.123456789012345,
                baseline: 6.5,
                fallback: false,
            },
            PredictionRow {
                session_id: "301".into(),
                label: 17.0,
                prediction: 6.5,
                baseline: 6.5,
                fallback: true,
            },
        ];
        assert_eq!(parse_predictions(&predictions_csv(&rows)).unwrap(), rows);
        assert!(parse_predictions("id,label\n").is_none());
    }
}
