//! RMSE, MAE and explained variance score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics<T> {
    pub rmse: T,
    pub mae: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport<T> {
    pub rmse: T,
    pub mae: T,
    pub evs: T,
}

fn check_lengths<T>(y: &[T], yhat: &[T]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} targets vs {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::InvalidArgument("need at least two values".into()));
    }
    Ok(())
}

/// RMSE and MAE; defined whenever the lengths match.
pub fn error_metrics<T: Real>(y: &[T], yhat: &[T]) -> Result<ErrorMetrics<T>> {
    check_lengths(y, yhat)?;
    let n = T::from_usize_lossy(y.len());
    let (sq, abs) = y
        .iter()
        .zip(yhat)
        .fold((T::zero(), T::zero()), |(sq, abs), (&a, &b)| {
            let r = a - b;
            (sq + r * r, abs + r.abs())
        });
    Ok(ErrorMetrics {
        rmse: (sq / n).sqrt(),
        mae: abs / n,
    })
}

/// Population variance as `Σ_{i<j} (x_i - x_j)² / n²`. No mean is formed, so
/// adding a constant that leaves every value exact leaves the result
/// bit-identical.
fn pairwise_variance<T: Real>(x: &[T]) -> T {
    let mut acc = T::zero();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = x[i] - x[j];
            acc += d * d;
        }
    }
    let n = T::from_usize_lossy(x.len());
    acc / (n * n)
}

/// `1 - Var(y - yhat) / Var(y)` with population variances.
pub fn explained_variance<T: Real>(y: &[T], yhat: &[T]) -> Result<T> {
    check_lengths(y, yhat)?;
    let var_y = pairwise_variance(y);
    if var_y <= T::zero() {
        return Err(Error::UndefinedEvs);
    }
    let residuals: Vec<T> = y.iter().zip(yhat).map(|(&a, &b)| a - b).collect();
    Ok(T::one() - pairwise_variance(&residuals) / var_y)
}

pub fn compute_metrics<T: Real>(y: &[T], yhat: &[T]) -> Result<MetricReport<T>> {
    let ErrorMetrics { rmse, mae } = error_metrics(y, yhat)?;
    let evs = explained_variance(y, yhat)?;
    Ok(MetricReport { rmse, mae, evs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let y = [3.0, 7.0, 11.0];
        let m = compute_metrics(&y, &y).unwrap();
        assert_eq!((m.rmse, m.mae, m.evs), (0.0, 0.0, 1.0));
    }

    #[test]
    fn constant_shift() {
        let m = compute_metrics(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert_eq!((m.rmse, m.mae, m.evs), (1.0, 1.0, 1.0));
    }

    #[test]
    fn two_point_case() {
        // residuals [0, 2]: Var = 1; Var(y) = 1 -> evs 0
        let m = compute_metrics(&[0.0, 2.0], &[0.0, 0.0]).unwrap();
        assert!((m.rmse - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.mae, 1.0);
        assert_eq!(m.evs, 0.0);
    }

    #[test]
    fn errors() {
        assert!(compute_metrics(&[1.0, 2.0], &[1.0]).is_err());
        assert!(matches!(
            compute_metrics(&[2.0, 2.0], &[1.0, 3.0]),
            Err(Error::UndefinedEvs)
        ));
        let e = error_metrics(&[2.0f32, 2.0], &[1.0, 3.0]).unwrap();
        assert_eq!(e.mae, 1.0);
    }
}
