//! Behavioral features from transcripts: non-vocal behavior (3), turn-taking
//! timing (6) and answers to previous-diagnosis queries (3).

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{is_annotation, Speaker, TurnRecord};
use crate::scalar::Real;

pub const BEHAVIORAL_DIM: usize = 12;

pub const BEHAVIORAL_NAMES: [&str; BEHAVIORAL_DIM] = [
    "nb_laughter_freq",
    "nb_disfluency_pct",
    "nb_inconvenience_count",
    "tb_response_q1",
    "tb_response_median",
    "tb_response_q3",
    "tb_pause_q1",
    "tb_pause_median",
    "tb_pause_q3",
    "pdi_ptsd",
    "pdi_dep",
    "pdi_mb",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topic {
    Ptsd,
    Depression,
    Military,
}

impl Topic {
    pub const ALL: [Topic; 3] = [Topic::Ptsd, Topic::Depression, Topic::Military];

    pub fn key(self) -> &'static str {
        match self {
            Topic::Ptsd => "ptsd",
            Topic::Depression => "dep",
            Topic::Military => "mb",
        }
    }
}

/// Word lists driving the transcript features.
///
/// Multi-word entries (`i have`) match consecutive tokens. Topic keywords match
/// as substrings of the lowercased agent utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicons {
    pub laughter: String,
    pub disfluencies: Vec<String>,
    pub inconvenience_cues: Vec<String>,
    pub topics: [(Topic, Vec<String>); 3],
    pub affirmations: Vec<String>,
    pub negations: Vec<String>,
}

fn words(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons {
            laughter: "<laughter>".into(),
            disfluencies: words(&["um", "uh", "er", "mm", "mhm", "hmm", "uh-huh", "<disfluency>"]),
            inconvenience_cues: words(&[
                "<sigh>",
                "<whistling>",
                "<whisper>",
                "<deep_breath>",
                "<mumble>",
                "<clears_throat>",
            ]),
            topics: [
                (Topic::Ptsd, words(&["ptsd", "post traumatic"])),
                (Topic::Depression, words(&["depress"])),
                (Topic::Military, words(&["military", "served", "deployment"])),
            ],
            affirmations: words(&["yes", "yeah", "yep", "i have", "i do"]),
            negations: words(&["no", "nope", "never", "i haven't", "i don't"]),
        }
    }
}

impl Lexicons {
    /// Reads overrides from `key = item, item, ...` lines; `#` starts a comment.
    ///
    /// Keys: `laughter`, `disfluencies`, `inconvenience_cues`, `topic.ptsd`,
    /// `topic.dep`, `topic.mb`, `affirmations`, `negations`. Keys not present
    /// keep their defaults.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lex = Lexicons::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, idx + 1, "expected key = values"))?;
            let items: Vec<String> = value
                .split(',')
                .map(|s| s.trim().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect();
            match key.trim() {
                "laughter" => {
                    lex.laughter = items
                        .into_iter()
                        .next()
                        .ok_or_else(|| Error::parse(origin, idx + 1, "empty laughter token"))?
                }
                "disfluencies" => lex.disfluencies = items,
                "inconvenience_cues" => lex.inconvenience_cues = items,
                "affirmations" => lex.affirmations = items,
                "negations" => lex.negations = items,
                k => {
                    let topic = Topic::ALL
                        .into_iter()
                        .find(|t| k == format!("topic.{}", t.key()))
                        .ok_or_else(|| Error::parse(origin, idx + 1, format!("unknown key {k:?}")))?;
                    for entry in lex.topics.iter_mut() {
                        if entry.0 == topic {
                            entry.1 = items.clone();
                        }
                    }
                }
            }
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn keywords(&self, topic: Topic) -> &[String] {
        &self.topics.iter().find(|e| e.0 == topic).unwrap().1
    }
}

/// Full 12-value behavioral vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BehavioralVector<T> {
    pub nb: [T; 3],
    pub tb: [T; 6],
    pub pdi: [i8; 3],
    /// Topics whose answers matched neither lexicon.
    pub ambiguous: Vec<Topic>,
}

impl<T: Real> BehavioralVector<T> {
    pub fn values(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(BEHAVIORAL_DIM);
        v.extend_from_slice(&self.nb);
        v.extend_from_slice(&self.tb);
        v.extend(self.pdi.iter().map(|&p| T::lit(p as f64)));
        v
    }
}

pub fn behavioral_vector<T: Real>(turns: &[TurnRecord], lex: &Lexicons) -> Result<BehavioralVector<T>> {
    let nb = nonvocal_features(turns, lex)?;
    let tb = turn_taking_features(turns)?;
    let pdi = pdi_features(turns, lex);
    Ok(BehavioralVector {
        nb,
        tb,
        pdi: pdi.values,
        ambiguous: pdi.ambiguous,
    })
}

/// Laughter per participant turn, disfluency percentage of participant tokens,
/// and the count of inconvenience cue annotations.
pub fn nonvocal_features<T: Real>(turns: &[TurnRecord], lex: &Lexicons) -> Result<[T; 3]> {
    let participant: Vec<&TurnRecord> = turns.iter().filter(|t| t.is_participant()).collect();
    if participant.is_empty() {
        return Err(Error::EmptyInput("no participant turns".into()));
    }
    let tokens = || participant.iter().flat_map(|t| t.tokens.iter());
    let laughs = tokens().filter(|t| **t == lex.laughter).count();
    let total = tokens().count();
    let disfluent = tokens().filter(|t| lex.disfluencies.contains(t)).count();
    let cues = tokens()
        .filter(|t| is_annotation(t) && lex.inconvenience_cues.contains(t))
        .count();
    let pct = if total == 0 {
        T::zero()
    } else {
        T::lit(100.0) * T::from_usize_lossy(disfluent) / T::from_usize_lossy(total)
    };
    Ok([
        T::from_usize_lossy(laughs) / T::from_usize_lossy(participant.len()),
        pct,
        T::from_usize_lossy(cues),
    ])
}

/// Quantile by linear interpolation between order statistics, position `q (n - 1)`.
pub fn quantile<T: Real>(sorted: &[T], q: f64) -> T {
    match sorted.len() {
        0 => T::zero(),
        1 => sorted[0],
        n => {
            let pos = q * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = T::lit(pos - lo as f64);
            sorted[lo] + (sorted[hi] - sorted[lo]) * frac
        }
    }
}

/// Q1, median, Q3; all zero for an empty sample.
pub fn quartiles<T: Real>(values: &[T]) -> [T; 3] {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75)]
}

/// Participant response latencies after agent turns, clamped at 0.
pub fn response_times(turns: &[TurnRecord]) -> Vec<f64> {
    turns
        .windows(2)
        .filter(|w| w[0].speaker == Speaker::Agent && w[1].speaker == Speaker::Participant)
        .map(|w| (w[1].start - w[0].stop).max(0.0))
        .collect()
}

/// Gaps between adjacent participant turns with no agent turn between them.
pub fn within_speaker_pauses(turns: &[TurnRecord]) -> Vec<f64> {
    turns
        .windows(2)
        .filter(|w| w[0].is_participant() && w[1].is_participant())
        .map(|w| (w[1].start - w[0].stop).max(0.0))
        .collect()
}

/// Quartiles of response times followed by quartiles of within-speaker pauses.
pub fn turn_taking_features<T: Real>(turns: &[TurnRecord]) -> Result<[T; 6]> {
    if turns.is_empty() {
        return Err(Error::EmptyInput("empty transcript".into()));
    }
    let conv = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
    let r = quartiles(&conv(response_times(turns)));
    let p = quartiles(&conv(within_speaker_pauses(turns)));
    Ok([r[0], r[1], r[2], p[0], p[1], p[2]])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdiOutcome {
    /// ptsd, dep, mb: -1 not asked, 0 denied, 1 confirmed.
    pub values: [i8; 3],
    pub ambiguous: Vec<Topic>,
}

fn normalize_word(token: &str) -> String {
    token
        .chars()
        .filter(|c| c.is_alphanumeric() || *c == '\'' || *c == '-')
        .collect()
}

/// Position of the earliest match of any phrase in `words`.
fn first_match(words: &[String], phrases: &[String]) -> Option<usize> {
    phrases
        .iter()
        .filter_map(|phrase| {
            let parts: Vec<&str> = phrase.split_whitespace().collect();
            if parts.is_empty() || parts.len() > words.len() {
                return None;
            }
            words
                .windows(parts.len())
                .position(|w| w.iter().zip(&parts).all(|(a, b)| a == b))
        })
        .min()
}

/// 1 when the answer affirms, 0 when it denies, `None` when neither lexicon
/// matches. The earlier match wins when both do.
pub fn classify_answer(tokens: &[String], lex: &Lexicons) -> Option<i8> {
    let words: Vec<String> = tokens
        .iter()
        .filter(|t| !is_annotation(t))
        .map(|t| normalize_word(t))
        .filter(|w| !w.is_empty())
        .collect();
    match (first_match(&words, &lex.affirmations), first_match(&words, &lex.negations)) {
        (Some(a), Some(n)) => Some(if a < n { 1 } else { 0 }),
        (Some(_), None) => Some(1),
        (None, Some(_)) => Some(0),
        (None, None) => None,
    }
}

/// For each topic, finds agent turns mentioning it and classifies the next
/// participant turn. A topic never raised is -1; a topic whose answers are all
/// unclassifiable is also -1 and reported as ambiguous.
pub fn pdi_features(turns: &[TurnRecord], lex: &Lexicons) -> PdiOutcome {
    let mut values = [-1i8; 3];
    let mut ambiguous = Vec::new();
    for (slot, topic) in Topic::ALL.into_iter().enumerate() {
        let keywords = lex.keywords(topic);
        let mut asked = false;
        for (i, turn) in turns.iter().enumerate() {
            if turn.speaker != Speaker::Agent {
                continue;
            }
            let text = turn.tokens.join(" ");
            if !keywords.iter().any(|k| text.contains(k.as_str())) {
                continue;
            }
            asked = true;
            let answer = turns[i + 1..].iter().find(|t| t.is_participant());
            if let Some(v) = answer.and_then(|a| classify_answer(&a.tokens, lex)) {
                values[slot] = v;
                break;
            }
        }
        if asked && values[slot] == -1 {
            ambiguous.push(topic);
        }
    }
    PdiOutcome { values, ambiguous }
}
