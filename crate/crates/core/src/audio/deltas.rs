use crate::error::{Error, Result};
use crate::scalar::Real;

/// Half-width of the delta regression window.
pub const DELTA_WINDOW: usize = 2;
pub const MIN_DELTA_LEN: usize = 5;

/// Regression-window slope `Σ n (x[t+n] - x[t-n]) / (2 Σ n²)` over `n = 1..=2`,
/// with edge frames replicated.
pub fn delta<T: Real>(track: &[T]) -> Vec<T> {
    let len = track.len() as isize;
    let at = |i: isize| track[i.clamp(0, len - 1) as usize];
    let denom = T::from_usize_lossy(2 * (1..=DELTA_WINDOW).map(|n| n * n).sum::<usize>());
    (0..len)
        .map(|t| {
            (1..=DELTA_WINDOW as isize)
                .map(|n| T::from_usize_lossy(n as usize) * (at(t + n) - at(t - n)))
                .sum::<T>()
                / denom
        })
        .collect()
}

/// First and second order deltas.
pub fn add_derivatives<T: Real>(track: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    if track.len() < MIN_DELTA_LEN {
        return Err(Error::InvalidArgument(format!(
            "delta needs at least {MIN_DELTA_LEN} frames, got {}",
            track.len()
        )));
    }
    let d = delta(track);
    let dd = delta(&d);
    Ok((d, dd))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_track_has_zero_delta() {
        let (d, dd) = add_derivatives(&[4.0; 8]).unwrap();
        assert!(d.iter().chain(&dd).all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_interior_delta_is_slope() {
        let track: Vec<f64> = (0..10).map(|i| 1.5 * i as f64 - 2.0).collect();
        let (d, _) = add_derivatives(&track).unwrap();
        for v in &d[2..8] {
            assert!((v - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn too_short() {
        assert!(add_derivatives(&[1.0, 2.0, 3.0, 4.0]).is_err());
    }
}
