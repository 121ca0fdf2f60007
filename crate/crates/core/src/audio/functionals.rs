//! Projection of a descriptor track onto 24 scalar functionals.
//!
//! Frame index `t = 0..n-1` is the time axis for every positional and
//! regression functional.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const FUNCTIONAL_COUNT: usize = 24;

/// Output order of [`apply_functionals`].
pub const FUNCTIONAL_NAMES: [&str; FUNCTIONAL_COUNT] = [
    "range",
    "maxpos",
    "minpos",
    "lin_slope",
    "lin_offset",
    "lin_err",
    "quad_a",
    "quad_b",
    "quad_c",
    "quad_err",
    "zcr",
    "num_peaks",
    "mean_peak_dist",
    "mean_peak",
    "geo_mean_nz",
    "num_nz",
    "centroid",
    "variance",
    "stddev",
    "skewness",
    "kurtosis",
    "mean",
    "max",
    "min",
];

pub const MIN_FUNCTIONAL_LEN: usize = 3;

/// Computes the 24 functionals in [`FUNCTIONAL_NAMES`] order.
///
/// * errors are mean squared residuals of the least-squares fits
/// * zcr is sign changes per frame step, with 0 counted as positive
/// * peaks are strict local maxima above the track mean; peak distance is in
///   frames and is 0 with fewer than two peaks
/// * moments are population estimates; kurtosis is not excess; skewness and
///   kurtosis are 0 for constant tracks
pub fn apply_functionals<T: Real>(x: &[T]) -> Result<[T; FUNCTIONAL_COUNT]> {
    let n = x.len();
    if n < MIN_FUNCTIONAL_LEN {
        return Err(Error::InvalidArgument(format!(
            "functionals need at least {MIN_FUNCTIONAL_LEN} values, got {n}"
        )));
    }
    let nf = T::from_usize_lossy(n);
    let zero = T::zero();

    let (mut imax, mut imin) = (0, 0);
    for i in 1..n {
        if x[i] > x[imax] {
            imax = i;
        }
        if x[i] < x[imin] {
            imin = i;
        }
    }
    let (max, min) = (x[imax], x[imin]);
    let constant = max == min;
    let mean = if constant { max } else { x.iter().copied().sum::<T>() / nf };

    let (lin_slope, lin_offset, lin_err) = linear_fit(x);
    let (qa, qb, qc, quad_err) = quadratic_fit(x);

    let crossings = x
        .windows(2)
        .filter(|w| (w[0] < zero) != (w[1] < zero))
        .count();
    let zcr = T::from_usize_lossy(crossings) / T::from_usize_lossy(n - 1);

    let peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| x[i] > x[i - 1] && x[i] > x[i + 1] && x[i] > mean)
        .collect();
    let mean_peak_dist = if peaks.len() >= 2 {
        T::from_usize_lossy(peaks[peaks.len() - 1] - peaks[0]) / T::from_usize_lossy(peaks.len() - 1)
    } else {
        zero
    };
    let mean_peak = if peaks.is_empty() {
        zero
    } else {
        peaks.iter().map(|&i| x[i]).sum::<T>() / T::from_usize_lossy(peaks.len())
    };

    let nonzero: Vec<T> = x.iter().filter(|v| **v != zero).map(|v| v.abs()).collect();
    let geo_mean = if nonzero.is_empty() {
        zero
    } else {
        (nonzero.iter().map(|v| v.ln()).sum::<T>() / T::from_usize_lossy(nonzero.len())).exp()
    };

    let sum: T = x.iter().copied().sum();
    let abs_sum: T = x.iter().map(|v| v.abs()).sum();
    let centroid = if sum.abs() > T::epsilon() * abs_sum && sum != zero {
        x.iter()
            .enumerate()
            .map(|(t, &v)| T::from_usize_lossy(t) * v)
            .sum::<T>()
            / sum
    } else {
        zero
    };

    let (variance, skewness, kurtosis) = if constant {
        (zero, zero, zero)
    } else {
        let m2 = x.iter().map(|&v| (v - mean).powi(2)).sum::<T>() / nf;
        let m3 = x.iter().map(|&v| (v - mean).powi(3)).sum::<T>() / nf;
        let m4 = x.iter().map(|&v| (v - mean).powi(4)).sum::<T>() / nf;
        if m2 > zero {
            (m2, m3 / m2.powf(T::lit(1.5)), m4 / (m2 * m2))
        } else {
            (zero, zero, zero)
        }
    };

    Ok([
        max - min,
        T::from_usize_lossy(imax),
        T::from_usize_lossy(imin),
        lin_slope,
        lin_offset,
        lin_err,
        qa,
        qb,
        qc,
        quad_err,
        zcr,
        T::from_usize_lossy(peaks.len()),
        mean_peak_dist,
        mean_peak,
        geo_mean,
        T::from_usize_lossy(nonzero.len()),
        centroid,
        variance,
        variance.sqrt(),
        skewness,
        kurtosis,
        mean,
        max,
        min,
    ])
}

/// Centered, scaled time axis `u = (t - c) / s`, symmetric about zero.
fn scaled_axis<T: Real>(n: usize) -> (Vec<T>, T, T) {
    let c = T::lit((n - 1) as f64 / 2.0);
    let s = c.max(T::one());
    let u = (0..n).map(|t| (T::from_usize_lossy(t) - c) / s).collect();
    (u, c, s)
}

/// `x ≈ slope * t + offset`; returns (slope, offset, mse).
fn linear_fit<T: Real>(x: &[T]) -> (T, T, T) {
    let n = T::from_usize_lossy(x.len());
    let (u, c, s) = scaled_axis::<T>(x.len());
    let suu: T = u.iter().map(|&v| v * v).sum();
    let mean = x.iter().copied().sum::<T>() / n;
    let b = u.iter().zip(x).map(|(&ui, &xi)| ui * xi).sum::<T>() / suu;
    let err = u
        .iter()
        .zip(x)
        .map(|(&ui, &xi)| (xi - (b * ui + mean)).powi(2))
        .sum::<T>()
        / n;
    let slope = b / s;
    (slope, mean - slope * c, err)
}

/// `x ≈ a t² + b t + c`; returns (a, b, c, mse).
fn quadratic_fit<T: Real>(x: &[T]) -> (T, T, T, T) {
    let n = T::from_usize_lossy(x.len());
    let (u, c, s) = scaled_axis::<T>(x.len());
    // Odd moments of the symmetric axis vanish, decoupling the linear term.
    let s2: T = u.iter().map(|&v| v * v).sum();
    let s4: T = u.iter().map(|&v| v.powi(4)).sum();
    let sy: T = x.iter().copied().sum();
    let suy: T = u.iter().zip(x).map(|(&ui, &xi)| ui * xi).sum();
    let su2y: T = u.iter().zip(x).map(|(&ui, &xi)| ui * ui * xi).sum();
    let qa = (n * su2y - s2 * sy) / (n * s4 - s2 * s2);
    let qb = suy / s2;
    let qc = (sy - s2 * qa) / n;
    let err = u
        .iter()
        .zip(x)
        .map(|(&ui, &xi)| (xi - (qa * ui * ui + qb * ui + qc)).powi(2))
        .sum::<T>()
        / n;
    let two = T::lit(2.0);
    let a = qa / (s * s);
    let b = qb / s - two * qa * c / (s * s);
    let cc = qa * c * c / (s * s) - qb * c / s + qc;
    (a, b, cc, err)
}
