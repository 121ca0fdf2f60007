use crate::error::{Error, Result};
use crate::model::{AudioSignal, TurnRecord};
use crate::scalar::Real;

pub const FRAME_SECONDS: f64 = 0.025;
pub const HOP_SECONDS: f64 = 0.010;
pub const MIN_SAMPLE_RATE: u32 = 8000;

/// One analysis frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    /// Index of the first sample in the source signal.
    pub start: usize,
    /// Unwindowed samples.
    pub raw: Vec<T>,
    /// Hamming-windowed samples.
    pub windowed: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet<T> {
    pub sample_rate: u32,
    pub frame_len: usize,
    pub frames: Vec<Frame<T>>,
}

impl<T> FrameSet<T> {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

pub fn frame_len(sample_rate: u32) -> usize {
    (FRAME_SECONDS * sample_rate as f64).round() as usize
}

pub fn hop_len(sample_rate: u32) -> usize {
    (HOP_SECONDS * sample_rate as f64).round() as usize
}

pub fn hamming<T: Real>(n: usize) -> Vec<T> {
    if n == 1 {
        return vec![T::one()];
    }
    (0..n)
        .map(|i| {
            let phase = 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64;
            T::lit(0.54 - 0.46 * phase.cos())
        })
        .collect()
}

/// Number of whole frames that fit in `span` samples.
pub fn frames_in_span(span: usize, frame_len: usize, hop: usize) -> usize {
    if span < frame_len {
        0
    } else {
        (span - frame_len) / hop + 1
    }
}

/// Cuts 25 ms Hamming frames with a 10 ms hop from participant turns only.
///
/// Each turn is framed independently, so no frame straddles a turn boundary.
pub fn frame_signal<T: Real>(audio: &AudioSignal<T>, turns: &[TurnRecord]) -> Result<FrameSet<T>> {
    if audio.sample_rate < MIN_SAMPLE_RATE {
        return Err(Error::InvalidArgument(format!(
            "sample rate {} below {MIN_SAMPLE_RATE} Hz",
            audio.sample_rate
        )));
    }
    let participant: Vec<&TurnRecord> = turns.iter().filter(|t| t.is_participant()).collect();
    if participant.is_empty() {
        return Err(Error::EmptyInput("no participant turns".into()));
    }
    let sr = audio.sample_rate as f64;
    let flen = frame_len(audio.sample_rate);
    let hop = hop_len(audio.sample_rate);
    let window = hamming::<T>(flen);
    let total = audio.samples.len();

    let mut frames = Vec::new();
    for turn in participant {
        let begin = ((turn.start * sr).round().max(0.0) as usize).min(total);
        let end = ((turn.stop * sr).round().max(0.0) as usize).min(total);
        if end <= begin {
            continue;
        }
        for k in 0..frames_in_span(end - begin, flen, hop) {
            let start = begin + k * hop;
            let raw = audio.samples[start..start + flen].to_vec();
            let windowed = raw.iter().zip(&window).map(|(&x, &w)| x * w).collect();
            frames.push(Frame {
                start,
                raw,
                windowed,
            });
        }
    }
    Ok(FrameSet {
        sample_rate: audio.sample_rate,
        frame_len: flen,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Speaker;

    fn audio(seconds: f64, sr: u32) -> AudioSignal<f64> {
        AudioSignal::new(vec![0.1; (seconds * sr as f64) as usize], sr)
    }

    fn turn(start: f64, stop: f64, speaker: Speaker) -> TurnRecord {
        TurnRecord::new(start, stop, speaker, "x").unwrap()
    }

    #[test]
    fn frame_count_for_one_turn() {
        let a = audio(3.0, 16000);
        let fs = frame_signal(&a, &[turn(0.5, 1.525, Speaker::Participant)]).unwrap();
        assert_eq!(fs.len(), 101);
        assert_eq!(fs.frame_len, 400);
    }

    #[test]
    fn short_turn_yields_nothing() {
        let a = audio(1.0, 16000);
        let fs = frame_signal(&a, &[turn(0.1, 0.12, Speaker::Participant)]).unwrap();
        assert!(fs.is_empty());
    }

    #[test]
    fn turns_are_framed_separately() {
        let a = audio(5.0, 16000);
        let turns = [
            turn(0.0, 1.025, Speaker::Participant),
            turn(1.1, 1.5, Speaker::Agent),
            turn(1.525, 2.0, Speaker::Participant),
        ];
        let fs = frame_signal(&a, &turns).unwrap();
        let second = frames_in_span(7600, 400, 160);
        assert_eq!(fs.len(), 101 + second);
    }

    #[test]
    fn errors() {
        let a = audio(1.0, 16000);
        assert!(matches!(
            frame_signal(&a, &[turn(0.0, 0.5, Speaker::Agent)]),
            Err(Error::EmptyInput(_))
        ));
        let low = audio(1.0, 4000);
        assert!(frame_signal(&low, &[turn(0.0, 0.5, Speaker::Participant)]).is_err());
    }
}
