use super::frames::FrameSet;
use super::prosody::{parabolic_peak, NormalizedAcf};
use super::{LldGroup, LldTrack};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const VOICE_QUALITY_LLD_NAMES: [&str; 4] = ["jitter_local", "jitter_ddp", "shimmer_local", "log_hnr"];

/// Pitch-mark search window around the expected next period, as a fraction of T0.
const MARK_SEARCH: f64 = 0.2;
/// Bound on |logHNR| in dB.
const HNR_LIMIT_DB: f64 = 60.0;

/// Peak positions (fractional samples) and heights of successive glottal cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchMarks<T> {
    pub positions: Vec<T>,
    pub amplitudes: Vec<T>,
}

impl<T: Real> PitchMarks<T> {
    pub fn periods(&self) -> Vec<T> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn argmax<T: Real>(x: &[T], lo: usize, hi: usize) -> usize {
    (lo..hi).fold(lo, |best, i| if x[i] > x[best] { i } else { best })
}

/// Locates one positive peak per cycle, stepping outward from the frame maximum
/// in steps of `period` samples. Peaks on the frame edge are not true maxima and
/// are dropped.
pub fn pitch_marks<T: Real>(x: &[T], period: T) -> PitchMarks<T> {
    let n = x.len();
    let mut marks = PitchMarks {
        positions: Vec::new(),
        amplitudes: Vec::new(),
    };
    if n < 3 || period <= T::zero() {
        return marks;
    }
    let t0 = period.as_f64();
    let half = (MARK_SEARCH * t0).ceil() as isize;
    let anchor = argmax(x, 0, n);
    let interior = |i: usize| i > 0 && i + 1 < n;

    let mut idx = vec![anchor];
    for dir in [-1isize, 1] {
        let mut cur = anchor as isize;
        loop {
            let centre = cur as f64 + dir as f64 * t0;
            let lo = (centre.round() as isize - half).max(0);
            let hi = (centre.round() as isize + half).min(n as isize - 1);
            if lo > hi || centre < 0.0 || centre > (n - 1) as f64 {
                break;
            }
            let next = argmax(x, lo as usize, hi as usize + 1);
            if next as isize == cur {
                break;
            }
            idx.push(next);
            cur = next as isize;
        }
    }
    idx.sort_unstable();
    idx.dedup();
    for i in idx.into_iter().filter(|&i| interior(i)) {
        let (off, h) = parabolic_peak(x[i - 1], x[i], x[i + 1]);
        marks.positions.push(T::from_usize_lossy(i) + off);
        marks.amplitudes.push(h);
    }
    marks
}

/// Mean absolute difference of consecutive values relative to their mean.
fn local_perturbation<T: Real>(values: &[T]) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let m = values.iter().copied().sum::<T>() / T::from_usize_lossy(values.len());
    if m <= T::zero() {
        return T::zero();
    }
    let d: T = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    d / T::from_usize_lossy(values.len() - 1) / m
}

/// Mean absolute second difference of periods relative to the mean period.
fn ddp<T: Real>(periods: &[T]) -> T {
    if periods.len() < 3 {
        return T::zero();
    }
    let m = periods.iter().copied().sum::<T>() / T::from_usize_lossy(periods.len());
    let d: T = periods
        .windows(3)
        .map(|w| ((w[2] - w[1]) - (w[1] - w[0])).abs())
        .sum();
    d / T::from_usize_lossy(periods.len() - 2) / m
}

/// Jitter (local, DDP), shimmer (local) and logHNR per frame; all zero when f0 is 0.
pub fn voice_quality_llds<T: Real>(frames: &FrameSet<T>, f0: &[T]) -> Result<Vec<LldTrack<T>>> {
    if f0.len() != frames.len() {
        return Err(Error::DimensionMismatch {
            expected: frames.len(),
            got: f0.len(),
        });
    }
    let sr = T::lit(frames.sample_rate as f64);
    let acf = NormalizedAcf::new(frames.frame_len, frames.sample_rate);
    let mut cols: Vec<Vec<T>> = (0..4).map(|_| Vec::with_capacity(f0.len())).collect();
    for (frame, &pitch) in frames.frames.iter().zip(f0) {
        let row = if pitch > T::zero() {
            let marks = pitch_marks(&frame.raw, sr / pitch);
            let periods = marks.periods();
            let hnr = log_hnr(&acf, &frame.windowed, (sr / pitch).as_f64());
            [
                local_perturbation(&periods),
                ddp(&periods),
                local_perturbation(&marks.amplitudes),
                hnr,
            ]
        } else {
            [T::zero(); 4]
        };
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    Ok(cols
        .into_iter()
        .zip(VOICE_QUALITY_LLD_NAMES)
        .map(|(v, name)| LldTrack::new(name, LldGroup::VoiceQuality, v))
        .collect())
}

/// `10 log10(r(T0) / (r(0) - r(T0)))` on the normalized autocorrelation, where
/// r(T0) is the best value within one sample of the period lag.
fn log_hnr<T: Real>(acf: &NormalizedAcf<T>, windowed: &[T], period: f64) -> T {
    let Some(rho) = acf.curve(windowed) else {
        return T::zero();
    };
    let lag = period.round() as usize;
    let lo = lag.saturating_sub(1).max(1);
    let hi = (lag + 1).min(rho.len() - 1);
    if lo > hi {
        return T::zero();
    }
    let r = (lo..=hi).map(|l| rho[l]).fold(T::neg_infinity(), T::max);
    let eps = T::lit(10f64.powf(-HNR_LIMIT_DB / 10.0));
    let r = r.max(eps).min(T::one() - eps);
    T::lit(10.0) * (r / (T::one() - r)).log10()
}
