//! Corpus directory layout:
//!
//! ```text
//! <root>/train_split.csv        Participant_ID,PHQ8_Binary,PHQ8_Score
//! <root>/dev_split.csv
//! <root>/test_split.csv         optional
//! <root>/sessions/<id>/<id>_TRANSCRIPT.csv
//! <root>/sessions/<id>/<id>_AUDIO.wav
//! <root>/sessions/<id>/<id>_CLNF_features3D.txt
//! ```
//!
//! A split file may carry only the `Participant_ID` column, in which case its
//! sessions are unlabeled.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use phq_core::io::{load_labels, load_landmarks, load_transcript, load_wav};
use phq_core::model::{Phq8, Session};

use crate::error::{read, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}_split.csv", self.name())
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Split::ALL
            .into_iter()
            .find(|sp| sp.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown split {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitEntry {
    pub id: String,
    pub label: Option<Phq8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inputs {
    pub transcript: bool,
    pub audio: bool,
    pub landmarks: bool,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub train: Vec<SplitEntry>,
    pub dev: Vec<SplitEntry>,
    pub test: Vec<SplitEntry>,
}

fn load_split(path: &Path) -> Result<Vec<SplitEntry>> {
    let text = read(path)?;
    let header = text.lines().next().unwrap_or("");
    if header.split(',').any(|c| c.trim() == "PHQ8_Score") {
        return Ok(load_labels(path)?
            .into_iter()
            .map(|r| SplitEntry {
                id: r.participant_id,
                label: Some(r.score),
            })
            .collect());
    }
    let col = header
        .split(',')
        .position(|c| c.trim() == "Participant_ID")
        .ok_or_else(|| Error::Corpus(format!("{}: missing Participant_ID column", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let id = line.split(',').nth(col).map(str::trim).unwrap_or("");
        if id.is_empty() {
            return Err(Error::Corpus(format!("{}:{}: missing participant id", path.display(), i + 1)));
        }
        out.push(SplitEntry {
            id: id.to_string(),
            label: None,
        });
    }
    Ok(out)
}

impl Corpus {
    /// Reads the split files. Train is required, dev and test are optional.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        if !root.is_dir() {
            return Err(Error::Corpus(format!("{} is not a directory", root.display())));
        }
        let mut corpus = Corpus {
            root,
            train: Vec::new(),
            dev: Vec::new(),
            test: Vec::new(),
        };
        for split in Split::ALL {
            let path = corpus.root.join(split.file_name());
            if path.exists() {
                *corpus.split_mut(split) = load_split(&path)?;
            } else if split == Split::Train {
                return Err(Error::Corpus(format!("missing {}", path.display())));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in corpus.all() {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Corpus(format!("session {} listed twice", e.id)));
            }
        }
        Ok(corpus)
    }

    pub fn split(&self, split: Split) -> &[SplitEntry] {
        match split {
            Split::Train => &self.train,
            Split::Dev => &self.dev,
            Split::Test => &self.test,
        }
    }

    fn split_mut(&mut self, split: Split) -> &mut Vec<SplitEntry> {
        match split {
            Split::Train => &mut self.train,
            Split::Dev => &mut self.dev,
            Split::Test => &mut self.test,
        }
    }

    /// Every listed session in split order.
    pub fn all(&self) -> impl Iterator<Item = &SplitEntry> {
        self.train.iter().chain(&self.dev).chain(&self.test)
    }

    pub fn session_dir(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(id)
    }

    pub fn transcript_path(&self, id: &str) -> PathBuf {
        self.session_dir(id).join(format!("{id}_TRANSCRIPT.csv"))
    }

    pub fn audio_path(&self, id: &str) -> PathBuf {
        self.session_dir(id).join(format!("{id}_AUDIO.wav"))
    }

    pub fn landmarks_path(&self, id: &str) -> PathBuf {
        self.session_dir(id).join(format!("{id}_CLNF_features3D.txt"))
    }

    /// Loads the requested inputs of one session. A missing file is an error
    /// naming the path, so callers can log it as a skip reason.
    pub fn load_session(&self, id: &str, inputs: Inputs) -> Result<Session<f64>> {
        let need = |p: PathBuf| {
            if p.exists() {
                Ok(p)
            } else {
                Err(Error::Corpus(format!("missing {}", p.display())))
            }
        };
        let turns = if inputs.transcript {
            load_transcript(need(self.transcript_path(id))?)?
        } else {
            Vec::new()
        };
        let mut session = Session::new(id, turns)?;
        if inputs.audio {
            session = session.with_audio(load_wav(need(self.audio_path(id))?)?);
        }
        if inputs.landmarks {
            session = session.with_landmarks(load_landmarks(need(self.landmarks_path(id))?)?);
        }
        Ok(session)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unlabeled_split_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("train_split.csv"), "Participant_ID,PHQ8_Binary,PHQ8_Score\n300,0,4\n301,1,12\n").unwrap();
        std::fs::write(dir.path().join("dev_split.csv"), "Participant_ID\n302\n").unwrap();
        let c = Corpus::open(dir.path()).unwrap();
        assert_eq!(c.train[1].label.unwrap().score(), 12);
        assert_eq!(c.dev, vec![SplitEntry { id: "302".into(), label: None }]);
        assert!(c.test.is_empty());
    }

    #[test]
    fn duplicate_sessions_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("train_split.csv"), "Participant_ID\n300\n").unwrap();
        std::fs::write(dir.path().join("dev_split.csv"), "Participant_ID\n300\n").unwrap();
        assert!(Corpus::open(dir.path()).is_err());
    }
}
