//! Readers and writers for the corpus file formats.
//!
//! * transcripts: tab-separated `start_time stop_time speaker value`
//! * landmarks: comma-separated `frame, timestamp, confidence, success, X0..X67, Y0..Y67, Z0..Z67`
//! * labels: `Participant_ID,PHQ8_Binary,PHQ8_Score`
//! * audio: 16-bit PCM WAV, mono

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{
    AudioSignal, LandmarkFrame, LandmarkSequence, Phq8, Speaker, TurnRecord, LANDMARK_COUNT,
};
use crate::scalar::Real;

const TRANSCRIPT_HEADER: [&str; 4] = ["start_time", "stop_time", "speaker", "value"];
const LANDMARK_COLUMNS: usize = 4 + 3 * LANDMARK_COUNT;

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_string(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

pub fn load_transcript(path: impl AsRef<Path>) -> Result<Vec<TurnRecord>> {
    let path = path.as_ref();
    parse_transcript(&read_to_string(path)?, path)
}

/// Parses transcript text. `origin` only labels errors.
pub fn parse_transcript(content: &str, origin: &Path) -> Result<Vec<TurnRecord>> {
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, header)) => {
            let fields: Vec<&str> = header.split('\t').map(str::trim).collect();
            if fields != TRANSCRIPT_HEADER {
                return Err(Error::parse(origin, 1, format!("unexpected header {header:?}")));
            }
        }
        None => return Err(Error::parse(origin, 1, "missing header")),
    }

    let mut turns: Vec<TurnRecord> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(4, '\t');
        let mut next = |name: &str| {
            fields
                .next()
                .ok_or_else(|| Error::parse(origin, lineno, format!("missing {name} column")))
        };
        let start = parse_time(next("start_time")?, origin, lineno)?;
        let stop = parse_time(next("stop_time")?, origin, lineno)?;
        let speaker_field = next("speaker")?;
        let speaker = Speaker::parse(speaker_field).ok_or_else(|| {
            Error::parse(origin, lineno, format!("unknown speaker {speaker_field:?}"))
        })?;
        let text = fields.next().unwrap_or("");
        if stop <= start {
            return Err(Error::parse(
                origin,
                lineno,
                format!("stop time {stop} not after start time {start}"),
            ));
        }
        if let Some(prev) = turns.last() {
            if start < prev.start {
                return Err(Error::parse(origin, lineno, "turns not sorted by start time"));
            }
        }
        let turn = TurnRecord::new(start, stop, speaker, text)
            .map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        turns.push(turn);
    }
    Ok(turns)
}

fn parse_time(field: &str, origin: &Path, line: usize) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(origin, line, format!("non-numeric time {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(origin, line, format!("non-finite time {field:?}")));
    }
    Ok(v)
}

pub fn format_transcript(turns: &[TurnRecord]) -> String {
    let mut out = TRANSCRIPT_HEADER.join("\t");
    out.push('\n');
    for t in turns {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            t.start,
            t.stop,
            t.speaker.transcript_name(),
            t.tokens.join(" ")
        );
    }
    out
}

pub fn save_transcript(path: impl AsRef<Path>, turns: &[TurnRecord]) -> Result<()> {
    write_string(path.as_ref(), &format_transcript(turns))
}

pub fn load_landmarks<T: Real>(path: impl AsRef<Path>) -> Result<LandmarkSequence<T>> {
    let path = path.as_ref();
    parse_landmarks(&read_to_string(path)?, path)
}

/// Parses landmark CSV. A first row whose first field is not numeric is a header.
pub fn parse_landmarks<T: Real>(content: &str, origin: &Path) -> Result<LandmarkSequence<T>> {
    let mut frames: Vec<LandmarkFrame<T>> = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if idx == 0 && fields[0].parse::<f64>().is_err() {
            continue;
        }
        if fields.len() != LANDMARK_COLUMNS {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected {LANDMARK_COLUMNS} columns, found {}", fields.len()),
            ));
        }
        let num = |i: usize| -> Result<T> {
            fields[i]
                .parse::<T>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::parse(origin, lineno, format!("bad number {:?} in column {}", fields[i], i + 1))
                })
        };
        let timestamp = parse_time(fields[1], origin, lineno)?;
        let confidence = num(2)?;
        let success = match fields[3] {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::parse(origin, lineno, format!("success flag {other:?} not 0/1")))
            }
        };
        let mut points = Vec::with_capacity(LANDMARK_COUNT);
        for p in 0..LANDMARK_COUNT {
            points.push([
                num(4 + p)?,
                num(4 + LANDMARK_COUNT + p)?,
                num(4 + 2 * LANDMARK_COUNT + p)?,
            ]);
        }
        if let Some(prev) = frames.last() {
            if timestamp <= prev.timestamp {
                return Err(Error::parse(origin, lineno, "timestamps not strictly increasing"));
            }
        }
        frames.push(LandmarkFrame {
            timestamp,
            confidence,
            success,
            points,
        });
    }
    LandmarkSequence::new(frames)
}

pub fn format_landmarks<T: Real>(seq: &LandmarkSequence<T>) -> String {
    let mut out = String::from("frame, timestamp, confidence, success");
    for axis in ["X", "Y", "Z"] {
        for p in 0..LANDMARK_COUNT {
            let _ = write!(out, ", {axis}{p}");
        }
    }
    out.push('\n');
    for (i, f) in seq.frames.iter().enumerate() {
        let _ = write!(
            out,
            "{}, {}, {}, {}",
            i + 1,
            f.timestamp,
            f.confidence,
            u8::from(f.success)
        );
        for axis in 0..3 {
            for p in &f.points {
                let _ = write!(out, ", {}", p[axis]);
            }
        }
        out.push('\n');
    }
    out
}

pub fn save_landmarks<T: Real>(path: impl AsRef<Path>, seq: &LandmarkSequence<T>) -> Result<()> {
    write_string(path.as_ref(), &format_landmarks(seq))
}

/// One row of a split label file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRow {
    pub participant_id: String,
    /// Parsed for completeness; the score alone drives everything downstream.
    pub binary: u8,
    pub score: Phq8,
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<LabelRow>> {
    let path = path.as_ref();
    let content = read_to_string(path)?;
    let mut lines = content.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header"))?
        .1;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::parse(path, 1, format!("missing column {name}")))
    };
    let (id_col, bin_col, score_col) = (
        find("Participant_ID")?,
        find("PHQ8_Binary")?,
        find("PHQ8_Score")?,
    );
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |c: usize| {
            fields
                .get(c)
                .copied()
                .ok_or_else(|| Error::parse(path, lineno, "too few columns"))
        };
        let binary: u8 = get(bin_col)?
            .parse()
            .map_err(|_| Error::parse(path, lineno, "PHQ8_Binary not an integer"))?;
        let score: u8 = get(score_col)?
            .parse()
            .map_err(|_| Error::parse(path, lineno, "PHQ8_Score not an integer"))?;
        let score = Phq8::new(score).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        rows.push(LabelRow {
            participant_id: get(id_col)?.to_string(),
            binary,
            score,
        });
    }
    Ok(rows)
}

pub fn save_labels(path: impl AsRef<Path>, rows: &[LabelRow]) -> Result<()> {
    let mut out = String::from("Participant_ID,PHQ8_Binary,PHQ8_Score\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.participant_id, r.binary, r.score.score());
    }
    write_string(path.as_ref(), &out)
}

/// Loads 16-bit PCM mono WAV, scaling samples to [-1, 1).
pub fn load_wav<T: Real>(path: impl AsRef<Path>) -> Result<AudioSignal<T>> {
    let path = path.as_ref();
    let wav_err = |message: String| Error::Wav {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = hound::WavReader::open(path).map_err(|e| wav_err(e.to_string()))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(wav_err(format!("expected mono, found {} channels", spec.channels)));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(wav_err("expected 16-bit PCM".into()));
    }
    let scale = T::lit(1.0 / 32768.0);
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| T::lit(v as f64) * scale))
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| wav_err(e.to_string()))?;
    Ok(AudioSignal::new(samples, spec.sample_rate))
}

/// Writes 16-bit PCM mono WAV; samples are clipped to [-1, 1].
pub fn save_wav<T: Real>(path: impl AsRef<Path>, audio: &AudioSignal<T>) -> Result<()> {
    let path = path.as_ref();
    let wav_err = |e: hound::Error| Error::Wav {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in &audio.samples {
        let v = (s.as_f64().clamp(-1.0, 1.0) * 32767.0).round() as i16;
        writer.write_sample(v).map_err(wav_err)?;
    }
    writer.finalize().map_err(wav_err)
}
