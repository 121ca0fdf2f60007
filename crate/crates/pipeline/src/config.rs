//! Run configuration, read from TOML with every field defaulted.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use phq_core::audio::AcousticGroup;
use phq_core::regress::{Kernel, LstmConfig, RepTreeParams, SvrParams};
use phq_core::selection::{TuneSpec, DEFAULT_K, DEFAULT_MAX_FEATURES, DEFAULT_THRESHOLD, K_GRID, THRESHOLD_GRID};
use serde::{Deserialize, Serialize};

use crate::error::{read, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextFeatures {
    Bool,
    Tfidf,
    Embedding,
}

/// Feature family, written `acoustic:S|P|VQ|M|M+FS`, `behavioral`,
/// `text:BOOL|TFIDF|WE` or `visual`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Acoustic { group: AcousticGroup, select: bool },
    Behavioral,
    Text(TextFeatures),
    Visual,
}

impl Modality {
    /// File stem of the extracted feature store.
    pub fn store_name(self) -> &'static str {
        match self {
            Modality::Acoustic { group, .. } => match group {
                AcousticGroup::Spectral => "acoustic_s",
                AcousticGroup::Prosody => "acoustic_p",
                AcousticGroup::VoiceQuality => "acoustic_vq",
                AcousticGroup::Merged => "acoustic_m",
            },
            Modality::Behavioral => "behavioral",
            Modality::Text(TextFeatures::Bool) => "text_bool",
            Modality::Text(TextFeatures::Tfidf) => "text_tfidf",
            Modality::Text(TextFeatures::Embedding) => "text_we",
            Modality::Visual => "visual_windows",
        }
    }

    pub fn default_model(self) -> ModelKind {
        match self {
            Modality::Acoustic { .. } => ModelKind::Svr,
            Modality::Behavioral => ModelKind::RepTree,
            Modality::Text(_) => ModelKind::Svr,
            Modality::Visual => ModelKind::Lstm,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modality::Acoustic { group, select } => {
                let g = match group {
                    AcousticGroup::Spectral => "S",
                    AcousticGroup::Prosody => "P",
                    AcousticGroup::VoiceQuality => "VQ",
                    AcousticGroup::Merged => "M",
                };
                write!(f, "acoustic:{g}{}", if *select { "+FS" } else { "" })
            }
            Modality::Behavioral => f.write_str("behavioral"),
            Modality::Text(t) => f.write_str(match t {
                TextFeatures::Bool => "text:BOOL",
                TextFeatures::Tfidf => "text:TFIDF",
                TextFeatures::Embedding => "text:WE",
            }),
            Modality::Visual => f.write_str("visual"),
        }
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, variant) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let bad = || Error::Config(format!("unknown modality {s:?}"));
        match (family, variant) {
            ("acoustic", Some(v)) => {
                let (g, select) = match v.strip_suffix("+FS") {
                    Some(g) => (g, true),
                    None => (v, false),
                };
                let group = match g {
                    "S" => AcousticGroup::Spectral,
                    "P" => AcousticGroup::Prosody,
                    "VQ" => AcousticGroup::VoiceQuality,
                    "M" => AcousticGroup::Merged,
                    _ => return Err(bad()),
                };
                if select && group != AcousticGroup::Merged {
                    return Err(Error::Config("feature selection applies to acoustic:M only".into()));
                }
                Ok(Modality::Acoustic { group, select })
            }
            ("behavioral", None) => Ok(Modality::Behavioral),
            ("text", Some("BOOL")) => Ok(Modality::Text(TextFeatures::Bool)),
            ("text", Some("TFIDF")) => Ok(Modality::Text(TextFeatures::Tfidf)),
            ("text", Some("WE")) => Ok(Modality::Text(TextFeatures::Embedding)),
            ("visual", None) => Ok(Modality::Visual),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svr,
    RepTree,
    Lstm,
    Mean,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svr => "svr",
            ModelKind::RepTree => "reptree",
            ModelKind::Lstm => "lstm",
            ModelKind::Mean => "mean",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svr" => Ok(ModelKind::Svr),
            "reptree" => Ok(ModelKind::RepTree),
            "lstm" => Ok(ModelKind::Lstm),
            "mean" => Ok(ModelKind::Mean),
            _ => Err(Error::Config(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrSection {
    /// `rbf` or `linear`; empty picks the modality default.
    pub kernel: String,
    pub gamma: f64,
    pub c: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SvrSection {
    fn default() -> Self {
        let d = SvrParams::<f64>::default();
        SvrSection {
            kernel: String::new(),
            gamma: 0.01,
            c: d.c,
            epsilon: d.epsilon,
            tolerance: d.tolerance,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepTreeSection {
    pub min_leaf: usize,
    pub prune_fraction: f64,
}

impl Default for RepTreeSection {
    fn default() -> Self {
        let d = RepTreeParams::default();
        RepTreeSection {
            min_leaf: d.min_leaf,
            prune_fraction: d.prune_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LstmSection {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub clip_norm: f64,
    pub dropout: f64,
    /// Share of training sessions held out for early stopping.
    pub validation_fraction: f64,
}

impl Default for LstmSection {
    fn default() -> Self {
        let d = LstmConfig::default();
        LstmSection {
            hidden: d.hidden,
            epochs: d.epochs,
            batch_size: d.batch_size,
            learning_rate: d.learning_rate,
            clip_norm: d.clip_norm,
            dropout: d.dropout,
            validation_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReliefSection {
    /// Tune (threshold, k) by cross-validation before training.
    pub tune: bool,
    pub threshold: f64,
    pub k: usize,
    pub max_features: usize,
    pub folds: usize,
    pub threshold_grid: Vec<f64>,
    pub k_grid: Vec<usize>,
}

impl Default for ReliefSection {
    fn default() -> Self {
        ReliefSection {
            tune: true,
            threshold: DEFAULT_THRESHOLD,
            k: DEFAULT_K,
            max_features: DEFAULT_MAX_FEATURES,
            folds: 3,
            threshold_grid: THRESHOLD_GRID.to_vec(),
            k_grid: K_GRID.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisualSection {
    pub window: usize,
    pub overlap: usize,
    pub variance_keep: f64,
    /// Cap on training samples fed to PCA; larger sets are subsampled evenly.
    pub pca_rows: usize,
}

impl Default for VisualSection {
    fn default() -> Self {
        VisualSection {
            window: phq_core::face::DEFAULT_WINDOW,
            overlap: phq_core::face::DEFAULT_OVERLAP,
            variance_keep: phq_core::face::DEFAULT_VARIANCE_KEEP,
            pca_rows: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub output: PathBuf,
    /// Feature store directory; defaults to `<output>/features`.
    pub features: Option<PathBuf>,
    pub seed: u64,
    pub modality: String,
    /// Empty picks the modality's default model.
    pub model: String,
    /// Optional lexicon override file for behavioral features.
    pub lexicons: Option<PathBuf>,
    /// Word vectors for `text:WE`.
    pub embeddings: Option<PathBuf>,
    pub svr: SvrSection,
    pub reptree: RepTreeSection,
    pub lstm: LstmSection,
    pub relief: ReliefSection,
    pub visual: VisualSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: PathBuf::from("corpus"),
            output: PathBuf::from("out"),
            features: None,
            seed: 1,
            modality: "behavioral".into(),
            model: String::new(),
            lexicons: None,
            embeddings: None,
            svr: SvrSection::default(),
            reptree: RepTreeSection::default(),
            lstm: LstmSection::default(),
            relief: ReliefSection::default(),
            visual: VisualSection::default(),
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks modality, model and that the seed fits a TOML integer.
    pub fn validate(&self) -> Result<()> {
        self.modality()?;
        self.model_kind()?;
        if i64::try_from(self.seed).is_err() {
            return Err(Error::Config(format!("seed {} exceeds {}", self.seed, i64::MAX)));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn modality(&self) -> Result<Modality> {
        self.modality.parse()
    }

    /// Configured model, or the modality default. Overrides are allowed but
    /// logged because they leave the default pairing.
    pub fn model_kind(&self) -> Result<ModelKind> {
        let default = self.modality()?.default_model();
        if self.model.is_empty() {
            return Ok(default);
        }
        let kind: ModelKind = self.model.parse()?;
        if kind == ModelKind::Lstm && self.modality()? != Modality::Visual {
            return Err(Error::Config("the LSTM consumes visual windows only".into()));
        }
        if kind != ModelKind::Lstm && kind != ModelKind::Mean && self.modality()? == Modality::Visual {
            return Err(Error::Config("visual windows need the lstm (or mean) model".into()));
        }
        if kind != default {
            log::warn!(
                "model {} overrides the default {} for {}",
                kind.name(),
                default.name(),
                self.modality
            );
        }
        Ok(kind)
    }

    pub fn svr_params(&self) -> Result<SvrParams<f64>> {
        let kernel = match self.svr.kernel.as_str() {
            "" => match self.modality()? {
                Modality::Text(_) => Kernel::Linear,
                _ => Kernel::Rbf { gamma: self.svr.gamma },
            },
            "rbf" => Kernel::Rbf { gamma: self.svr.gamma },
            "linear" => Kernel::Linear,
            k => return Err(Error::Config(format!("unknown kernel {k:?}"))),
        };
        Ok(SvrParams {
            kernel,
            c: self.svr.c,
            epsilon: self.svr.epsilon,
            tolerance: self.svr.tolerance,
            max_iter: self.svr.max_iter,
        })
    }

    pub fn reptree_params(&self) -> RepTreeParams {
        RepTreeParams {
            min_leaf: self.reptree.min_leaf,
            prune_fraction: self.reptree.prune_fraction,
            seed: self.seed,
        }
    }

    pub fn lstm_config(&self) -> LstmConfig {
        LstmConfig {
            hidden: self.lstm.hidden,
            epochs: self.lstm.epochs,
            batch_size: self.lstm.batch_size,
            learning_rate: self.lstm.learning_rate,
            clip_norm: self.lstm.clip_norm,
            dropout: self.lstm.dropout,
            seed: self.seed,
            ..LstmConfig::default()
        }
    }

    pub fn tune_spec(&self) -> TuneSpec {
        TuneSpec {
            thresholds: self.relief.threshold_grid.clone(),
            ks: self.relief.k_grid.clone(),
            folds: self.relief.folds,
            n_max: self.relief.max_features,
            seed: self.seed,
        }
    }

    pub fn features_dir(&self) -> PathBuf {
        self.features.clone().unwrap_or_else(|| self.output.join("features"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modality_strings_round_trip() {
        for s in ["acoustic:S", "acoustic:P", "acoustic:VQ", "acoustic:M", "acoustic:M+FS", "behavioral", "text:BOOL", "text:TFIDF", "text:WE", "visual"] {
            assert_eq!(s.parse::<Modality>().unwrap().to_string(), s);
        }
        assert!("acoustic:S+FS".parse::<Modality>().is_err());
        assert!("audio".parse::<Modality>().is_err());
    }

    #[test]
    fn defaults_follow_the_modality() {
        let mut cfg = PipelineConfig::default();
        assert_eq!(cfg.model_kind().unwrap(), ModelKind::RepTree);
        cfg.modality = "text:TFIDF".into();
        assert_eq!(cfg.model_kind().unwrap(), ModelKind::Svr);
        assert_eq!(cfg.svr_params().unwrap().kernel, Kernel::Linear);
        cfg.modality = "acoustic:M".into();
        assert_eq!(cfg.svr_params().unwrap().kernel, Kernel::Rbf { gamma: 0.01 });
        cfg.model = "lstm".into();
        assert!(cfg.model_kind().is_err());
    }

    #[test]
    fn toml_round_trip_and_unknown_keys() {
        let cfg = PipelineConfig::default();
        assert_eq!(PipelineConfig::parse(&cfg.to_toml()).unwrap(), cfg);
        assert!(PipelineConfig::parse("sede = 3").is_err());
        let partial = PipelineConfig::parse("seed = 9\n[svr]\nc = 2.0\n").unwrap();
        assert_eq!((partial.seed, partial.svr.c, partial.svr.gamma), (9, 2.0, 0.01));
    }
}
