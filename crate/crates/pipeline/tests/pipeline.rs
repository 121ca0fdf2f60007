#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use phq_core::metrics::compute_metrics;
use phq_pipeline::config::PipelineConfig;
use phq_pipeline::corpus::{Corpus, Split};
use phq_pipeline::cv::{run_cv, CvScheme};
use phq_pipeline::eval::run_eval;
use phq_pipeline::extract::run_extract;
use phq_pipeline::report::parse_predictions;
use phq_pipeline::synth::{generate, SynthSpec};
use phq_pipeline::train::{run_train, run_tune_relief};

fn small_spec(train: usize, dev: usize, audio: bool, landmarks: bool) -> SynthSpec {
    SynthSpec {
        train,
        dev,
        train_depressed: train * 3 / 10,
        dev_depressed: dev * 3 / 10,
        audio,
        landmarks,
        ..SynthSpec::default()
    }
}

fn config(corpus: &Path, output: &Path, modality: &str) -> PipelineConfig {
    PipelineConfig {
        corpus: corpus.to_path_buf(),
        output: output.to_path_buf(),
        modality: modality.into(),
        ..PipelineConfig::default()
    }
}

/// Relative path to file bytes, for every file under `root`.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if !p.file_name().unwrap().to_string_lossy().starts_with("timing_") {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn synth_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(4, 2, true, true);
    generate(&spec, 9, &dir.path().join("a")).unwrap();
    generate(&spec, 9, &dir.path().join("b")).unwrap();
    generate(&spec, 10, &dir.path().join("c")).unwrap();
    let a = snapshot(&dir.path().join("a"));
    assert_eq!(a.len(), 2 + 6 * 3);
    assert_eq!(a, snapshot(&dir.path().join("b")));
    assert_ne!(a, snapshot(&dir.path().join("c")));
}

#[test]
fn default_spec_matches_split_proportions() {
    let spec = SynthSpec { audio: false, landmarks: false, ..SynthSpec::default() };
    let other = tempfile::tempdir().unwrap();
    generate(&spec, 1, other.path()).unwrap();
    let c = Corpus::open(other.path()).unwrap();
    let depressed = |s: Split| c.split(s).iter().filter(|e| e.label.unwrap().is_depressed()).count();
    assert_eq!((c.train.len(), c.dev.len()), (107, 35));
    assert_eq!((depressed(Split::Train), depressed(Split::Dev)), (30, 13));
}

#[test]
fn feature_dimensions_and_idempotent_extract() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    generate(&small_spec(3, 1, true, false), 4, &corpus).unwrap();
    let out = dir.path().join("out");
    for (modality, dim) in [("acoustic:M", 1440), ("acoustic:S", 864), ("acoustic:P", 288), ("acoustic:VQ", 288), ("behavioral", 12)] {
        let s = run_extract(&config(&corpus, &out, modality)).unwrap();
        assert_eq!((s.dim, s.sessions), (dim, 4), "{modality}");
    }
    let first = snapshot(&out);
    run_extract(&config(&corpus, &out, "acoustic:M")).unwrap();
    run_extract(&config(&corpus, &out, "behavioral")).unwrap();
    assert_eq!(first, snapshot(&out));
}

#[test]
fn missing_inputs_skip_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    generate(&small_spec(3, 1, false, false), 4, &corpus).unwrap();
    let s = run_extract(&config(&corpus, &dir.path().join("out"), "acoustic:P")).unwrap_err();
    assert_eq!(s.kind(), "corpus");
    std::fs::remove_file(corpus.join("sessions/301/301_TRANSCRIPT.csv")).unwrap();
    let s = run_extract(&config(&corpus, &dir.path().join("out"), "behavioral")).unwrap();
    assert_eq!(s.sessions, 3);
    assert_eq!(s.skipped.len(), 1);
    assert_eq!(s.skipped[0].0, "301");
    let list = std::fs::read_to_string(dir.path().join("out/features/behavioral_skipped.csv")).unwrap();
    assert!(list.starts_with("session_id,reason\n301,"));
}

fn hashes(out: &Path) -> (Vec<u8>, Vec<u8>) {
    (std::fs::read(out.join("model.json")).unwrap(), std::fs::read(out.join("run.json")).unwrap())
}

#[test]
fn dev_labels_never_reach_training() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    generate(&small_spec(30, 10, false, false), 6, &corpus).unwrap();
    for modality in ["behavioral", "text:TFIDF"] {
        let a = dir.path().join(format!("a_{}", modality.replace(':', "_")));
        let cfg = config(&corpus, &a, modality);
        run_extract(&cfg).unwrap();
        run_train(&cfg).unwrap();
        let before = hashes(&a);

        let labels = std::fs::read_to_string(corpus.join("dev_split.csv")).unwrap();
        let ids: String = labels.lines().skip(1).map(|l| format!("{}\n", l.split(',').next().unwrap())).collect();
        std::fs::write(corpus.join("dev_split.csv"), format!("Participant_ID\n{ids}")).unwrap();
        let b = dir.path().join(format!("b_{}", modality.replace(':', "_")));
        let cfg_b = config(&corpus, &b, modality);
        run_extract(&cfg_b).unwrap();
        run_train(&cfg_b).unwrap();
        assert_eq!(before, hashes(&b), "{modality}");
        assert_eq!(snapshot(&a.join("features")), snapshot(&b.join("features")));
        // unlabeled dev sessions cannot be scored
        assert_eq!(run_eval(&cfg_b, Split::Dev).unwrap_err().kind(), "corpus");
        std::fs::write(corpus.join("dev_split.csv"), labels).unwrap();
    }
}

#[test]
fn reports_recompute_from_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    generate(&small_spec(30, 12, false, false), 2, &corpus).unwrap();
    let out = dir.path().join("out");
    let cfg = config(&corpus, &out, "behavioral");
    run_extract(&cfg).unwrap();
    run_train(&cfg).unwrap();
    let report = run_eval(&cfg, Split::Dev).unwrap();
    let rows = parse_predictions(&std::fs::read_to_string(out.join("predictions_dev.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 12);
    let y: Vec<f64> = rows.iter().map(|r| r.label).collect();
    let p: Vec<f64> = rows.iter().map(|r| r.prediction).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.baseline).collect();
    let m = compute_metrics(&y, &p).unwrap();
    assert_eq!((m.rmse, m.mae, Some(m.evs)), (report.scores.rmse, report.scores.mae, report.scores.evs));
    let (rmse, mae, evs) = oracles::metrics_oracle(&y, &p);
    assert!((rmse - report.scores.rmse).abs() < 1e-12);
    assert!((mae - report.scores.mae).abs() < 1e-12);
    assert!((evs - report.scores.evs.unwrap()).abs() < 1e-12);
    // a constant baseline explains nothing
    assert!(report.baseline.evs.unwrap() <= 0.0);
    assert_eq!(compute_metrics(&y, &b).unwrap().mae, report.baseline.mae);

    let csv = std::fs::read_to_string(out.join("report_dev.csv")).unwrap();
    let line = csv.lines().nth(1).unwrap();
    assert_eq!(line, format!("dev,reptree,12,{},{},{}", m.rmse, m.mae, m.evs));
    let text = std::fs::read_to_string(out.join("report_dev.txt")).unwrap();
    assert!(text.contains("modality = \"behavioral\""));
}

#[test]
fn cv_folds_and_pooled_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    generate(&small_spec(20, 2, false, false), 3, &corpus).unwrap();
    let out = dir.path().join("out");
    let cfg = config(&corpus, &out, "behavioral");
    run_extract(&cfg).unwrap();

    let loso = run_cv(&cfg, CvScheme::Loso).unwrap();
    assert_eq!(loso.folds.len(), 20);
    let k = run_cv(&cfg, CvScheme::KFold(3)).unwrap();
    let sizes: Vec<usize> = k.folds.iter().map(|f| f.n).collect();
    assert_eq!(sizes.iter().sum::<usize>(), 20);
    assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);

    let text = std::fs::read_to_string(out.join("cv_kfold3_predictions.csv")).unwrap();
    let mut y = Vec::new();
    let mut p = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        y.push(f[2].parse::<f64>().unwrap());
        p.push(f[3].parse::<f64>().unwrap());
    }
    let (_, mae, _) = oracles::metrics_oracle(&y, &p);
    assert!((mae - k.pooled.mae).abs() < 1e-12);
    let report = std::fs::read_to_string(out.join("cv_kfold3_report.csv")).unwrap();
    assert!(report.lines().last().unwrap().starts_with("pooled,20,"));

    let tiny = dir.path().join("tiny");
    generate(&small_spec(2, 1, false, false), 3, &tiny).unwrap();
    let cfg = config(&tiny, &dir.path().join("tiny_out"), "behavioral");
    run_extract(&cfg).unwrap();
    assert!(run_cv(&cfg, CvScheme::KFold(3)).is_err());
}

#[test]
fn unlabeled_training_and_empty_dev_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    generate(&small_spec(8, 2, false, false), 3, &corpus).unwrap();
    let cfg = config(&corpus, &dir.path().join("out"), "behavioral");
    run_extract(&cfg).unwrap();
    run_train(&cfg).unwrap();
    std::fs::write(corpus.join("dev_split.csv"), "Participant_ID,PHQ8_Binary,PHQ8_Score\n").unwrap();
    assert_eq!(run_eval(&cfg, Split::Dev).unwrap_err().kind(), "corpus");
    std::fs::write(corpus.join("train_split.csv"), "Participant_ID\n300\n301\n").unwrap();
    assert_eq!(run_train(&cfg).unwrap_err().kind(), "corpus");
}

#[test]
fn selection_run_echoes_relief_choice() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let spec = SynthSpec { train_depressed: 12, ..small_spec(30, 4, true, false) };
    generate(&spec, 5, &corpus).unwrap();
    let out = dir.path().join("out");
    let mut cfg = config(&corpus, &out, "acoustic:M+FS");
    cfg.relief.k_grid = vec![3, 5];
    cfg.relief.threshold_grid = vec![0.0, -0.02];
    run_extract(&cfg).unwrap();
    let tuned = run_tune_relief(&cfg).unwrap();
    assert_eq!(tuned.points.len(), 4);
    run_train(&cfg).unwrap();
    let report = run_eval(&cfg, Split::Dev).unwrap();
    let relief = report.relief.clone().unwrap();
    assert_eq!((relief.threshold, relief.k), (tuned.threshold, tuned.k));
    assert!(!report.selected.is_empty() && report.selected.len() <= 20);
    let selected = std::fs::read_to_string(out.join("selected_features.txt")).unwrap();
    assert_eq!(selected.lines().collect::<Vec<_>>(), report.selected);
    assert!(report.to_text().contains(&format!("relief      threshold {} k {}", relief.threshold, relief.k)));
    assert_eq!(report.store_dim, 1440);
}

#[test]
fn visual_run_reports_evs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    generate(&small_spec(10, 4, false, true), 8, &corpus).unwrap();
    let out = dir.path().join("out");
    let mut cfg = config(&corpus, &out, "visual");
    cfg.lstm.epochs = 3;
    let s = run_extract(&cfg).unwrap();
    assert!(s.dim >= 1);
    let pca: phq_core::face::PcaProjection<f64> =
        serde_json::from_str(&std::fs::read_to_string(out.join("features/pca_model.json")).unwrap()).unwrap();
    assert!(pca.explained >= 0.995);
    assert_eq!(pca.input_dim(), 2482);
    run_train(&cfg).unwrap();
    let report = run_eval(&cfg, Split::Dev).unwrap();
    assert_eq!(report.model, "lstm");
    assert!(report.scores.evs.is_some());
    let header = std::fs::read_to_string(out.join("report_dev.csv")).unwrap();
    assert!(header.starts_with("split,system,n,rmse,mae,evs\n"));
    assert!(std::fs::read_to_string(out.join("training_history.csv")).unwrap().lines().count() == 5);
}

#[test]
fn cli_error_line_and_show_config() {
    let bin = env!("CARGO_BIN_EXE_phq");
    let out = Command::new(bin).args(["train", "--corpus", "/nonexistent/corpus"]).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    let last = stderr.lines().last().unwrap();
    assert!(last.starts_with("error kind=corpus message="), "{last}");

    let out = Command::new(bin).args(["train", "--modality", "audio"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("error kind=config"));

    let out = Command::new(bin).args(["eval", "--seed", "18446744073709551615"]).output().unwrap();
    assert!(String::from_utf8(out.stderr).unwrap().contains("error kind=config"));

    let out = Command::new(bin).arg("show-config").output().unwrap();
    assert!(out.status.success());
    let cfg = PipelineConfig::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg, PipelineConfig::default());
}
