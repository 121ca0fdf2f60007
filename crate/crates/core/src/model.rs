//! Session-level data model shared by every feature pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of tracked facial keypoints per frame.
pub const LANDMARK_COUNT: usize = 68;

/// Largest PHQ-8 score.
pub const PHQ8_MAX: u8 = 24;

/// PHQ-8 score at or above which a participant counts as depressed.
pub const PHQ8_DEPRESSED_CUTOFF: u8 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Speaker {
    Agent,
    Participant,
}

impl Speaker {
    /// Maps a transcript speaker field. The virtual interviewer is called Ellie.
    pub fn parse(s: &str) -> Option<Speaker> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ellie" | "agent" => Some(Speaker::Agent),
            "participant" => Some(Speaker::Participant),
            _ => None,
        }
    }

    pub fn transcript_name(self) -> &'static str {
        match self {
            Speaker::Agent => "Ellie",
            Speaker::Participant => "Participant",
        }
    }
}

/// One speaker turn. Times are in seconds from the start of the session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub start: f64,
    pub stop: f64,
    pub speaker: Speaker,
    pub tokens: Vec<String>,
}

impl TurnRecord {
    pub fn new(start: f64, stop: f64, speaker: Speaker, text: &str) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite()) {
            return Err(Error::InvalidArgument("turn times must be finite".into()));
        }
        if stop <= start {
            return Err(Error::InvalidArgument(format!(
                "turn stop {stop} must exceed start {start}"
            )));
        }
        Ok(TurnRecord {
            start,
            stop,
            speaker,
            tokens: tokenize(text),
        })
    }

    pub fn is_participant(&self) -> bool {
        self.speaker == Speaker::Participant
    }

    pub fn duration(&self) -> f64 {
        self.stop - self.start
    }
}

/// Splits utterance text into lowercase tokens.
///
/// Any `<...>` span is one token even when it contains spaces, so `<deep breath>`
/// survives intact. Everything else splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if !current.is_empty() {
            tokens.push(current.to_lowercase());
            current.clear();
        }
    };
    while let Some(c) = chars.next() {
        if c == '<' {
            let rest: String = chars.clone().collect();
            if let Some(close) = rest.find('>') {
                flush(&mut current, &mut tokens);
                let inner = &rest[..close];
                tokens.push(format!("<{}>", inner.to_lowercase()));
                for _ in 0..inner.chars().count() + 1 {
                    chars.next();
                }
                continue;
            }
            current.push(c);
        } else if c.is_whitespace() {
            flush(&mut current, &mut tokens);
        } else {
            current.push(c);
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// True for tokens of the form `<...>`.
pub fn is_annotation(token: &str) -> bool {
    token.len() >= 2 && token.starts_with('<') && token.ends_with('>')
}

/// Mono PCM audio.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal<T> {
    pub samples: Vec<T>,
    pub sample_rate: u32,
}

impl<T: Real> AudioSignal<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Self {
        AudioSignal {
            samples,
            sample_rate,
        }
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// One tracked face frame: 68 3D points in millimeters.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame<T> {
    pub timestamp: f64,
    pub confidence: T,
    pub success: bool,
    pub points: Vec<[T; 3]>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LandmarkSequence<T> {
    pub frames: Vec<LandmarkFrame<T>>,
}

impl<T: Real> LandmarkSequence<T> {
    /// Checks the sequence invariants: strictly increasing timestamps and 68 points per frame.
    pub fn new(frames: Vec<LandmarkFrame<T>>) -> Result<Self> {
        for (i, f) in frames.iter().enumerate() {
            if f.points.len() != LANDMARK_COUNT {
                return Err(Error::DimensionMismatch {
                    expected: LANDMARK_COUNT,
                    got: f.points.len(),
                });
            }
            if i > 0 && f.timestamp <= frames[i - 1].timestamp {
                return Err(Error::InvalidArgument(format!(
                    "landmark timestamps not strictly increasing at frame {i}"
                )));
            }
        }
        Ok(LandmarkSequence { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// PHQ-8 severity score, 0 to 24.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Phq8(u8);

impl Phq8 {
    pub fn new(score: u8) -> Result<Self> {
        if score > PHQ8_MAX {
            return Err(Error::InvalidArgument(format!(
                "PHQ-8 score {score} outside 0..=24"
            )));
        }
        Ok(Phq8(score))
    }

    pub fn score(self) -> u8 {
        self.0
    }

    pub fn is_depressed(self) -> bool {
        self.0 >= PHQ8_DEPRESSED_CUTOFF
    }
}

/// One interview.
#[derive(Debug, Clone)]
pub struct Session<T> {
    pub id: String,
    pub audio: Option<AudioSignal<T>>,
    pub turns: Vec<TurnRecord>,
    pub landmarks: Option<LandmarkSequence<T>>,
    pub label: Option<Phq8>,
}

impl<T: Real> Session<T> {
    pub fn new(id: impl Into<String>, turns: Vec<TurnRecord>) -> Result<Self> {
        for w in turns.windows(2) {
            if w[1].start < w[0].start {
                return Err(Error::InvalidArgument(
                    "turns must be sorted by start time".into(),
                ));
            }
        }
        Ok(Session {
            id: id.into(),
            audio: None,
            turns,
            landmarks: None,
            label: None,
        })
    }

    pub fn with_audio(mut self, audio: AudioSignal<T>) -> Self {
        self.audio = Some(audio);
        self
    }

    pub fn with_landmarks(mut self, landmarks: LandmarkSequence<T>) -> Self {
        self.landmarks = Some(landmarks);
        self
    }

    pub fn with_label(mut self, label: Phq8) -> Self {
        self.label = Some(label);
        self
    }

    pub fn participant_turns(&self) -> impl Iterator<Item = &TurnRecord> {
        self.turns.iter().filter(|t| t.is_participant())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_keeps_annotations() {
        assert_eq!(
            tokenize("i feel <laughter> fine"),
            vec!["i", "feel", "<laughter>", "fine"]
        );
        assert_eq!(tokenize("OK<Deep Breath>yes"), vec!["ok", "<deep breath>", "yes"]);
        assert_eq!(tokenize("  "), Vec::<String>::new());
        assert_eq!(tokenize("a < b"), vec!["a", "<", "b"]);
    }

    #[test]
    fn speaker_mapping_is_case_insensitive() {
        assert_eq!(Speaker::parse("ELLIE"), Some(Speaker::Agent));
        assert_eq!(Speaker::parse("participant"), Some(Speaker::Participant));
        assert_eq!(Speaker::parse("Bob"), None);
    }

    #[test]
    fn phq8_range() {
        assert!(Phq8::new(24).is_ok());
        assert!(Phq8::new(25).is_err());
        assert!(Phq8::new(10).unwrap().is_depressed());
        assert!(!Phq8::new(9).unwrap().is_depressed());
    }

    #[test]
    fn turn_rejects_empty_span() {
        assert!(TurnRecord::new(1.0, 1.0, Speaker::Agent, "hi").is_err());
    }
}
