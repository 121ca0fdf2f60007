use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use phq_pipeline::config::PipelineConfig;
use phq_pipeline::corpus::Split;
use phq_pipeline::cv::{run_cv, CvScheme};
use phq_pipeline::error::{Error, Result};
use phq_pipeline::eval::run_eval;
use phq_pipeline::extract::run_extract;
use phq_pipeline::synth::{generate, SynthSpec};
use phq_pipeline::train::{run_train, run_tune_relief};

#[derive(Parser)]
#[command(name = "phq", version, about = "PHQ-8 severity regression from interview recordings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config; every key is optional.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    /// acoustic:S|P|VQ|M|M+FS, behavioral, text:BOOL|TFIDF|WE or visual
    #[arg(long)]
    modality: Option<String>,
    /// svr, reptree, lstm or mean
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = &self.corpus {
            cfg.corpus = v.clone();
        }
        if let Some(v) = &self.output {
            cfg.output = v.clone();
        }
        if let Some(v) = &self.features {
            cfg.features = Some(v.clone());
        }
        if let Some(v) = &self.modality {
            cfg.modality = v.clone();
        }
        if let Some(v) = &self.model {
            cfg.model = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract per-session features into <output>/features.
    Extract(Common),
    /// Train the configured model on the training split.
    Train(Common),
    /// Score a trained run on a labeled split.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "dev")]
        split: String,
    },
    /// Cross-validate on the training split.
    Cv {
        #[command(flatten)]
        common: Common,
        /// kfold, kfold:<k> or loso
        #[arg(long, default_value = "kfold")]
        scheme: String,
    },
    /// Grid-search Relief threshold and neighbor count.
    TuneRelief(Common),
    /// Write a synthetic corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// TOML generator spec; every key is optional.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        dev: Option<usize>,
        #[arg(long)]
        train_depressed: Option<usize>,
        #[arg(long)]
        dev_depressed: Option<usize>,
        /// Transcripts and labels only.
        #[arg(long)]
        no_audio: bool,
        #[arg(long)]
        no_landmarks: bool,
    },
    /// Print the default configuration.
    ShowConfig {
        /// Print the synthetic corpus defaults instead.
        #[arg(long)]
        synth: bool,
    },
}

fn timed<T>(output: &Path, verb: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t0 = Instant::now();
    let out = f()?;
    let secs = t0.elapsed().as_secs_f64();
    log::info!("{verb} took {secs:.2} s");
    if output.is_dir() {
        let path = output.join(format!("timing_{verb}.txt"));
        std::fs::write(&path, format!("{secs:.3}\n")).map_err(|e| Error::io(&path, e))?;
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(c) => {
            let cfg = c.resolve()?;
            let s = timed(&cfg.output.clone(), "extract", || run_extract(&cfg))?;
            println!(
                "{}: {} sessions x {} features, {} skipped",
                s.store.display(),
                s.sessions,
                s.dim,
                s.skipped.len()
            );
        }
        Command::Train(c) => {
            let cfg = c.resolve()?;
            let s = timed(&cfg.output.clone(), "train", || run_train(&cfg))?;
            println!(
                "{} model on {} sessions written to {}",
                s.record.model,
                s.record.train_sessions.len(),
                s.model_path.display()
            );
        }
        Command::Eval { common, split } => {
            let cfg = common.resolve()?;
            let split: Split = split.parse()?;
            let r = timed(&cfg.output.clone(), &format!("eval_{split}"), || run_eval(&cfg, split))?;
            print!("{}", r.to_text().split("\nconfig\n").next().unwrap_or(""));
            println!();
        }
        Command::Cv { common, scheme } => {
            let cfg = common.resolve()?;
            let scheme: CvScheme = scheme.parse()?;
            let s = timed(&cfg.output.clone(), &format!("cv_{}", scheme.tag()), || run_cv(&cfg, scheme))?;
            let evs = s.pooled.evs.map_or_else(|| "NA".into(), |v| format!("{v:.4}"));
            println!(
                "{} folds, pooled over {} sessions: RMSE {:.4} MAE {:.4} EVS {evs}",
                s.folds.len(),
                s.pooled.n,
                s.pooled.rmse,
                s.pooled.mae
            );
        }
        Command::TuneRelief(c) => {
            let cfg = c.resolve()?;
            let t = timed(&cfg.output.clone(), "tune_relief", || run_tune_relief(&cfg))?;
            println!("threshold {} k {} cv MAE {:.4}", t.threshold, t.k, t.mae);
        }
        Command::Synth {
            out,
            seed,
            spec,
            train,
            dev,
            train_depressed,
            dev_depressed,
            no_audio,
            no_landmarks,
        } => {
            let mut s = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                    toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
                }
                None => SynthSpec::default(),
            };
            s.train = train.unwrap_or(s.train);
            s.dev = dev.unwrap_or(s.dev);
            s.train_depressed = train_depressed.unwrap_or(s.train_depressed);
            s.dev_depressed = dev_depressed.unwrap_or(s.dev_depressed);
            s.audio &= !no_audio;
            s.landmarks &= !no_landmarks;
            generate(&s, seed, &out)?;
            println!("{} train / {} dev / {} test sessions in {}", s.train, s.dev, s.test, out.display());
        }
        Command::ShowConfig { synth } => {
            if synth {
                print!("{}", toml::to_string(&SynthSpec::default()).expect("spec serializes"));
            } else {
                print!("{}", PipelineConfig::default().to_toml());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            ExitCode::FAILURE
        }
    }
}
