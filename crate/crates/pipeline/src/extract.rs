//! Per-session feature extraction into `<output>/features/`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use phq_core::audio::session_llds;
use phq_core::face::{fit_pca, second_descriptors, window_sequence, WindowBatch};
use phq_core::features::FeatureMatrix;
use phq_core::text::{build_document, embed_average, vectorize, EmbeddingTable, TextMode, Vocabulary};
use phq_core::turns::{behavioral_vector, Lexicons, BEHAVIORAL_NAMES};
use rayon::prelude::*;

use crate::config::{Modality, PipelineConfig, TextFeatures};
use crate::corpus::{Corpus, Inputs};
use crate::error::{create_dir, write, Error, Result};
use crate::store::save_windows;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractSummary {
    pub store: PathBuf,
    pub sessions: usize,
    pub dim: usize,
    pub skipped: Vec<(String, String)>,
}

fn skip_list(skipped: &[(String, String)]) -> String {
    let mut out = String::from("session_id,reason\n");
    for (id, reason) in skipped {
        let _ = writeln!(out, "{id},{}", reason.replace([',', '\n'], " "));
    }
    out
}

/// Runs `f` on every session in parallel, keeping corpus order. Failures are
/// logged and returned as skip reasons.
fn per_session<R: Send>(
    ids: &[String],
    f: impl Fn(&str) -> Result<R> + Sync,
) -> (Vec<(String, R)>, Vec<(String, String)>) {
    let results: Vec<(String, Result<R>)> = ids.par_iter().map(|id| (id.clone(), f(id))).collect();
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for (id, r) in results {
        match r {
            Ok(v) => ok.push((id, v)),
            Err(e) => {
                log::warn!("skipping session {id}: {e}");
                skipped.push((id, e.to_string()));
            }
        }
    }
    (ok, skipped)
}

fn column_name(term: &str) -> String {
    format!("w_{}", term.replace('%', "%25").replace(',', "%2C"))
}

pub fn run_extract(cfg: &PipelineConfig) -> Result<ExtractSummary> {
    cfg.validate()?;
    let modality = cfg.modality()?;
    let corpus = Corpus::open(&cfg.corpus)?;
    let ids: Vec<String> = corpus.all().map(|e| e.id.clone()).collect();
    let train_ids: BTreeSet<&str> = corpus.train.iter().map(|e| e.id.as_str()).collect();
    let dir = cfg.features_dir();
    create_dir(&dir)?;
    let store = dir.join(format!("{}.csv", modality.store_name()));
    let transcript = Inputs {
        transcript: true,
        ..Inputs::default()
    };

    let (dim, sessions, mut skipped) = match modality {
        Modality::Acoustic { group, .. } => {
            let inputs = Inputs {
                audio: true,
                ..transcript
            };
            let (rows, skipped) = per_session(&ids, |id| {
                let session = corpus.load_session(id, inputs)?;
                Ok(session_llds(&session)?.vector(id, group)?)
            });
            let first = rows
                .first()
                .ok_or_else(|| Error::Corpus("no session yielded acoustic features".into()))?;
            let mut m = FeatureMatrix::new(first.1.names.clone());
            for (id, v) in rows {
                m.push(id, v.values)?;
            }
            m.save(&store)?;
            (m.dim(), m.len(), skipped)
        }
        Modality::Behavioral => {
            let lex = match &cfg.lexicons {
                Some(p) => Lexicons::load(p)?,
                None => Lexicons::default(),
            };
            let (rows, skipped) = per_session(&ids, |id| {
                let session = corpus.load_session(id, transcript)?;
                Ok(behavioral_vector::<f64>(&session.turns, &lex)?)
            });
            let mut m = FeatureMatrix::new(BEHAVIORAL_NAMES.iter().map(|s| s.to_string()).collect());
            let mut ambiguous = String::from("session_id,topics\n");
            for (id, v) in rows {
                if !v.ambiguous.is_empty() {
                    let topics: Vec<&str> = v.ambiguous.iter().map(|t| t.key()).collect();
                    let _ = writeln!(ambiguous, "{id},{}", topics.join(" "));
                }
                m.push(id, v.values())?;
            }
            m.save(&store)?;
            write(&dir.join("behavioral_ambiguous.csv"), ambiguous)?;
            (m.dim(), m.len(), skipped)
        }
        Modality::Text(kind) => {
            let (docs, skipped) = per_session(&ids, |id| Ok(build_document(&corpus.load_session(id, transcript)?)));
            let m = match kind {
                TextFeatures::Bool | TextFeatures::Tfidf => {
                    let train_docs: Vec<Vec<String>> = docs
                        .iter()
                        .filter(|(id, _)| train_ids.contains(id.as_str()))
                        .map(|(_, d)| d.clone())
                        .collect();
                    let vocab = Vocabulary::fit(&train_docs)?;
                    write(
                        &dir.join(format!("{}_vocabulary.json", modality.store_name())),
                        serde_json::to_string_pretty(&vocab).expect("vocabulary serializes") + "\n",
                    )?;
                    let mode = if kind == TextFeatures::Bool { TextMode::Bool } else { TextMode::Tfidf };
                    let all: Vec<Vec<String>> = docs.iter().map(|(_, d)| d.clone()).collect();
                    let rows = vectorize::<f64>(&all, &vocab, mode)?;
                    let mut m = FeatureMatrix::new(vocab.terms().iter().map(|t| column_name(t)).collect());
                    for ((id, _), row) in docs.into_iter().zip(rows) {
                        m.push(id, row)?;
                    }
                    m
                }
                TextFeatures::Embedding => {
                    let path = cfg
                        .embeddings
                        .as_ref()
                        .ok_or_else(|| Error::Config("text:WE needs an embeddings file".into()))?;
                    let table = EmbeddingTable::<f64>::load(path)?;
                    let mut m = FeatureMatrix::new((0..table.dim()).map(|j| format!("we_{j}")).collect());
                    for (id, doc) in docs {
                        m.push(id, embed_average(&doc, &table)?)?;
                    }
                    m
                }
            };
            m.save(&store)?;
            (m.dim(), m.len(), skipped)
        }
        Modality::Visual => {
            let inputs = Inputs {
                landmarks: true,
                ..Inputs::default()
            };
            let (seqs, skipped) = per_session(&ids, |id| {
                let s = corpus.load_session(id, inputs)?;
                Ok(s.landmarks.expect("landmarks requested"))
            });
            let train_seqs: Vec<_> = seqs.iter().filter(|(id, _)| train_ids.contains(id.as_str())).collect();
            let descriptors: Vec<Vec<f64>> = train_seqs
                .par_iter()
                .map(|(_, seq)| second_descriptors(seq).into_iter().flatten().collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect();
            let stride = descriptors.len().div_ceil(cfg.visual.pca_rows.max(1)).max(1);
            let sample: Vec<Vec<f64>> = descriptors.into_iter().step_by(stride).collect();
            let pca = fit_pca(&sample, cfg.visual.variance_keep)?;
            log::info!(
                "PCA on {} training samples keeps {} components ({:.4} of variance)",
                sample.len(),
                pca.dim(),
                pca.explained
            );
            write(
                &dir.join("pca_model.json"),
                serde_json::to_string(&pca).expect("projection serializes") + "\n",
            )?;
            let (w, o) = (cfg.visual.window, cfg.visual.overlap);
            let batches: Vec<Result<WindowBatch<f64>>> = seqs
                .par_iter()
                .map(|(id, seq)| Ok(window_sequence(id, seq, None, &pca, w, o)?))
                .collect();
            let mut all = WindowBatch::new(w, o, pca.dim());
            for b in batches {
                all.extend(b?)?;
            }
            save_windows(&store, &all)?;
            let windowed: BTreeSet<&str> = all.windows.iter().map(|w| w.session_id.as_str()).collect();
            let mut skipped = skipped;
            for (id, _) in &seqs {
                if !windowed.contains(id.as_str()) {
                    log::warn!("session {id} has no clean window");
                    skipped.push((id.clone(), "no clean window".into()));
                }
            }
            (pca.dim(), windowed.len(), skipped)
        }
    };
    skipped.sort_by_key(|(id, _)| ids.iter().position(|i| i == id));
    write(&dir.join(format!("{}_skipped.csv", modality.store_name())), skip_list(&skipped))?;
    Ok(ExtractSummary {
        store,
        sessions,
        dim,
        skipped,
    })
}
