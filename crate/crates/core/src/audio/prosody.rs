use super::frames::{hamming, FrameSet};
use super::{LldGroup, LldTrack};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const F0_MIN_HZ: f64 = 55.0;
pub const F0_MAX_HZ: f64 = 400.0;
/// Normalized autocorrelation peak a frame needs to count as voiced.
pub const VOICING_THRESHOLD: f64 = 0.5;
/// Frames with RMS below this are treated as silence.
pub const SILENCE_RMS: f64 = 1e-6;
/// Mean-square floor for the log-energy of silent frames.
pub const ENERGY_FLOOR: f64 = 1e-12;
/// Candidate peaks within this share of the best one are preferred at shorter lags.
const OCTAVE_TOLERANCE: f64 = 0.9;

pub const PROSODIC_LLD_NAMES: [&str; 4] = ["f0", "f0_env", "loudness", "voicing"];

/// Pitch estimate for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchEstimate<T> {
    /// Hz; 0 when unvoiced.
    pub f0: T,
    /// Normalized autocorrelation height at the selected lag, clamped to [0, 1].
    pub voicing: T,
}

/// Autocorrelation `r(τ) = Σ x[n] x[n+τ]` for `τ` in `0..=max_lag`.
pub(crate) fn autocorrelation<T: Real>(x: &[T], max_lag: usize) -> Vec<T> {
    (0..=max_lag.min(x.len().saturating_sub(1)))
        .map(|lag| x.iter().zip(&x[lag..]).map(|(&a, &b)| a * b).sum())
        .collect()
}

/// Windowed-signal autocorrelation divided by the window's own autocorrelation,
/// which removes the taper bias toward short lags.
pub(crate) struct NormalizedAcf<T> {
    window_acf: Vec<T>,
    min_lag: usize,
    max_lag: usize,
}

impl<T: Real> NormalizedAcf<T> {
    pub(crate) fn new(frame_len: usize, sample_rate: u32) -> Self {
        let sr = sample_rate as f64;
        let window = hamming::<T>(frame_len);
        // Lags beyond two thirds of the frame get too little window overlap to trust.
        let max_lag = ((sr / F0_MIN_HZ).ceil() as usize).min(2 * frame_len / 3);
        let min_lag = ((sr / F0_MAX_HZ).floor() as usize).max(1);
        let wa = autocorrelation(&window, max_lag + 1);
        let w0 = wa[0];
        NormalizedAcf {
            window_acf: wa.into_iter().map(|v| v / w0).collect(),
            min_lag,
            max_lag,
        }
    }

    /// Normalized autocorrelation for lags `0..=max_lag + 1`; `None` for silent frames.
    pub(crate) fn curve(&self, windowed: &[T]) -> Option<Vec<T>> {
        let r = autocorrelation(windowed, self.max_lag + 1);
        let r0 = r[0];
        let n = T::from_usize_lossy(windowed.len());
        if r0 <= T::zero() || (r0 / n).sqrt() < T::lit(SILENCE_RMS) {
            return None;
        }
        Some(
            r.iter()
                .zip(&self.window_acf)
                .map(|(&v, &w)| if w > T::zero() { v / r0 / w } else { T::zero() })
                .collect(),
        )
    }

    pub(crate) fn estimate(&self, windowed: &[T], sample_rate: u32) -> PitchEstimate<T> {
        let unvoiced = PitchEstimate {
            f0: T::zero(),
            voicing: T::zero(),
        };
        let Some(rho) = self.curve(windowed) else {
            return unvoiced;
        };
        let top = self.max_lag.min(rho.len().saturating_sub(2));
        let mut peaks: Vec<(T, T)> = Vec::new();
        for lag in self.min_lag.max(1)..=top {
            if rho[lag] > rho[lag - 1] && rho[lag] >= rho[lag + 1] {
                let (offset, height) = parabolic_peak(rho[lag - 1], rho[lag], rho[lag + 1]);
                // heights above 1 are window-normalization artifacts at long lags
                peaks.push((T::from_usize_lossy(lag) + offset, height.min(T::one())));
            }
        }
        let Some(best) = peaks.iter().map(|p| p.1).reduce(T::max) else {
            return unvoiced;
        };
        let (lag, height) = *peaks
            .iter()
            .find(|p| p.1 >= T::lit(OCTAVE_TOLERANCE) * best)
            .expect("best peak is itself a candidate");
        let voicing = height.max(T::zero()).min(T::one());
        if voicing < T::lit(VOICING_THRESHOLD) {
            return PitchEstimate { f0: T::zero(), voicing };
        }
        PitchEstimate {
            f0: T::lit(sample_rate as f64) / lag,
            voicing,
        }
    }
}

/// Vertex of the parabola through three equally spaced samples: (offset, height).
pub(crate) fn parabolic_peak<T: Real>(left: T, mid: T, right: T) -> (T, T) {
    let denom = left - T::lit(2.0) * mid + right;
    if denom >= T::zero() {
        return (T::zero(), mid);
    }
    let offset = T::lit(0.5) * (left - right) / denom;
    let height = mid - T::lit(0.25) * (left - right) * offset;
    (offset, height)
}

/// Pitch per frame via normalized autocorrelation peak search in 55 to 400 Hz.
pub fn pitch_track<T: Real>(frames: &FrameSet<T>) -> Vec<PitchEstimate<T>> {
    let acf = NormalizedAcf::new(frames.frame_len, frames.sample_rate);
    frames
        .frames
        .iter()
        .map(|f| acf.estimate(&f.windowed, frames.sample_rate))
        .collect()
}

/// f0 held through unvoiced gaps; 0 before the first voiced frame.
pub fn f0_envelope<T: Real>(f0: &[T]) -> Vec<T> {
    let mut last = T::zero();
    f0.iter()
        .map(|&v| {
            if v > T::zero() {
                last = v;
            }
            last
        })
        .collect()
}

/// Natural log of the frame's mean-square energy, floored for silence.
pub fn log_energy<T: Real>(windowed: &[T]) -> T {
    let n = T::from_usize_lossy(windowed.len().max(1));
    let ms = windowed.iter().map(|&x| x * x).sum::<T>() / n;
    ms.max(T::lit(ENERGY_FLOOR)).ln()
}

/// f0, f0 envelope, loudness and voicing probability tracks.
pub fn prosodic_llds<T: Real>(frames: &FrameSet<T>) -> Result<Vec<LldTrack<T>>> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("no frames".into()));
    }
    let pitch = pitch_track(frames);
    let f0: Vec<T> = pitch.iter().map(|p| p.f0).collect();
    let env = f0_envelope(&f0);
    let loudness = frames.frames.iter().map(|f| log_energy(&f.windowed)).collect();
    let voicing = pitch.iter().map(|p| p.voicing).collect();
    Ok([f0, env, loudness, voicing]
        .into_iter()
        .zip(PROSODIC_LLD_NAMES)
        .map(|(v, name)| LldTrack::new(name, LldGroup::Prosody, v))
        .collect())
}
