use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::frames::FrameSet;
use super::{LldGroup, LldTrack};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Band edges in Hz, inclusive on both sides.
pub const BANDS: [(f64, f64); 4] = [(0.0, 250.0), (0.0, 650.0), (250.0, 650.0), (1000.0, 4000.0)];
pub const ROLLOFF_POINTS: [f64; 4] = [0.25, 0.50, 0.70, 0.90];

pub const SPECTRAL_LLD_NAMES: [&str; 12] = [
    "band_0_250",
    "band_0_650",
    "band_250_650",
    "band_1000_4000",
    "rolloff_25",
    "rolloff_50",
    "rolloff_70",
    "rolloff_90",
    "centroid",
    "flux",
    "max_pos",
    "min_pos",
];

/// One-sided magnitude spectrum (bins `0..=n/2`) of a windowed frame.
pub(crate) struct SpectrumAnalyzer<T: Real> {
    fft: std::sync::Arc<dyn rustfft::Fft<T>>,
    buffer: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> SpectrumAnalyzer<T> {
    pub(crate) fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n);
        let scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        SpectrumAnalyzer {
            fft,
            buffer: vec![Complex::new(T::zero(), T::zero()); n],
            scratch,
        }
    }

    pub(crate) fn magnitudes(&mut self, frame: &[T]) -> Vec<T> {
        for (b, &x) in self.buffer.iter_mut().zip(frame) {
            *b = Complex::new(x, T::zero());
        }
        self.fft.process_with_scratch(&mut self.buffer, &mut self.scratch);
        self.buffer[..frame.len() / 2 + 1]
            .iter()
            .map(|c| c.norm())
            .collect()
    }
}

/// Per-frame spectral descriptors computed from a magnitude spectrum.
///
/// Band energies and roll-offs use the power spectrum; centroid and the
/// max/min positions use magnitudes. An all-zero frame yields zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFrame<T> {
    pub bands: [T; 4],
    pub rolloffs: [T; 4],
    pub centroid: T,
    pub max_pos: T,
    pub min_pos: T,
}

pub fn describe_spectrum<T: Real>(magnitudes: &[T], bin_hz: T) -> SpectralFrame<T> {
    let freq = |k: usize| T::from_usize_lossy(k) * bin_hz;
    let power: Vec<T> = magnitudes.iter().map(|&m| m * m).collect();
    let total: T = power.iter().copied().sum();

    let mut bands = [T::zero(); 4];
    for (b, &(lo, hi)) in bands.iter_mut().zip(&BANDS) {
        let (lo, hi) = (T::lit(lo), T::lit(hi));
        *b = power
            .iter()
            .enumerate()
            .filter(|&(k, _)| freq(k) >= lo && freq(k) <= hi)
            .map(|(_, &p)| p)
            .sum();
    }

    let mut rolloffs = [T::zero(); 4];
    if total > T::zero() {
        for (r, &pct) in rolloffs.iter_mut().zip(&ROLLOFF_POINTS) {
            let target = T::lit(pct) * total;
            let mut acc = T::zero();
            for (k, &p) in power.iter().enumerate() {
                acc += p;
                if acc >= target {
                    *r = freq(k);
                    break;
                }
            }
        }
    }

    let mag_sum: T = magnitudes.iter().copied().sum();
    let centroid = if mag_sum > T::zero() {
        magnitudes
            .iter()
            .enumerate()
            .map(|(k, &m)| freq(k) * m)
            .sum::<T>()
            / mag_sum
    } else {
        T::zero()
    };

    let (mut imax, mut imin) = (0, 0);
    for (k, &m) in magnitudes.iter().enumerate() {
        if m > magnitudes[imax] {
            imax = k;
        }
        if m < magnitudes[imin] {
            imin = k;
        }
    }

    SpectralFrame {
        bands,
        rolloffs,
        centroid,
        max_pos: freq(imax),
        min_pos: freq(imin),
    }
}

/// L2 distance between two spectra after each is scaled to unit sum.
pub fn spectral_flux<T: Real>(prev: &[T], cur: &[T]) -> T {
    let norm = |s: &[T]| {
        let total: T = s.iter().copied().sum();
        if total > T::zero() {
            s.iter().map(|&v| v / total).collect::<Vec<T>>()
        } else {
            vec![T::zero(); s.len()]
        }
    };
    let (a, b) = (norm(prev), norm(cur));
    a.iter()
        .zip(&b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

/// The twelve spectral descriptor tracks, in `SPECTRAL_LLD_NAMES` order.
pub fn spectral_llds<T: Real>(frames: &FrameSet<T>) -> Result<Vec<LldTrack<T>>> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("no frames".into()));
    }
    let n = frames.frame_len;
    let bin_hz = T::lit(frames.sample_rate as f64 / n as f64);
    let mut analyzer = SpectrumAnalyzer::new(n);
    let mut cols: Vec<Vec<T>> = (0..12).map(|_| Vec::with_capacity(frames.len())).collect();
    let mut prev: Option<Vec<T>> = None;
    for frame in &frames.frames {
        let mags = analyzer.magnitudes(&frame.windowed);
        let d = describe_spectrum(&mags, bin_hz);
        let flux = prev.as_deref().map_or(T::zero(), |p| spectral_flux(p, &mags));
        let row = [
            d.bands[0],
            d.bands[1],
            d.bands[2],
            d.bands[3],
            d.rolloffs[0],
            d.rolloffs[1],
            d.rolloffs[2],
            d.rolloffs[3],
            d.centroid,
            flux,
            d.max_pos,
            d.min_pos,
        ];
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
        prev = Some(mags);
    }
    Ok(cols
        .into_iter()
        .zip(SPECTRAL_LLD_NAMES)
        .map(|(values, name)| LldTrack::new(name, LldGroup::Spectral, values))
        .collect())
}
