//! Relief feature weighting, threshold selection and grid tuning.

use serde::{Deserialize, Serialize};

use crate::cv::{complement, stratified_folds};
use crate::error::{Error, Result};
use crate::model::PHQ8_DEPRESSED_CUTOFF;
use crate::scalar::Real;

pub const DEFAULT_THRESHOLD: f64 = 0.02;
pub const DEFAULT_K: usize = 20;
pub const DEFAULT_MAX_FEATURES: usize = 20;
pub const THRESHOLD_GRID: [f64; 3] = [0.02, 0.0, -0.02];
pub const K_GRID: [usize; 4] = [5, 10, 15, 20];

/// Depressed class used for neighbor search: PHQ-8 at or above the cutoff.
pub fn binarize<T: Real>(scores: &[T]) -> Vec<bool> {
    scores
        .iter()
        .map(|s| s.as_f64() >= PHQ8_DEPRESSED_CUTOFF as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliefWeights<T> {
    pub weights: Vec<T>,
    pub k: usize,
    pub min: Vec<T>,
    pub max: Vec<T>,
}

fn class_name(c: bool) -> &'static str {
    if c {
        "depressed"
    } else {
        "not-depressed"
    }
}

/// Multi-neighbor Relief with Manhattan distance on min-max normalized
/// features. Ties in distance resolve to the lower instance index.
pub fn relief_weights<T: Real>(x: &[Vec<T>], classes: &[bool], k: usize) -> Result<ReliefWeights<T>> {
    let n = x.len();
    if n != classes.len() {
        return Err(Error::InvalidArgument(format!("{n} rows but {} labels", classes.len())));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if n == 0 {
        return Err(Error::EmptyInput("no instances".into()));
    }
    for c in [true, false] {
        let count = classes.iter().filter(|&&v| v == c).count();
        if count < k + 1 {
            return Err(Error::ClassTooSmall {
                class: class_name(c).into(),
                count,
                needed: k + 1,
            });
        }
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("ragged feature matrix".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("relief input".into()));
    }
    let mut min = vec![T::infinity(); d];
    let mut max = vec![T::neg_infinity(); d];
    for row in x {
        for j in 0..d {
            min[j] = min[j].min(row[j]);
            max[j] = max[j].max(row[j]);
        }
    }
    let norm: Vec<Vec<T>> = x
        .iter()
        .map(|row| {
            (0..d)
                .map(|j| {
                    let range = max[j] - min[j];
                    if range > T::zero() {
                        (row[j] - min[j]) / range
                    } else {
                        T::zero()
                    }
                })
                .collect()
        })
        .collect();
    let dist = |a: usize, b: usize| -> T {
        norm[a].iter().zip(&norm[b]).map(|(&u, &v)| (u - v).abs()).sum()
    };
    let mut weights = vec![T::zero(); d];
    let scale = T::from_usize_lossy(n * k);
    for i in 0..n {
        let mut others: Vec<(T, usize)> = (0..n).filter(|&j| j != i).map(|j| (dist(i, j), j)).collect();
        others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let hits = others.iter().filter(|o| classes[o.1] == classes[i]).take(k);
        let misses = others.iter().filter(|o| classes[o.1] != classes[i]).take(k);
        for &(_, h) in hits {
            for j in 0..d {
                weights[j] -= (norm[i][j] - norm[h][j]).abs() / scale;
            }
        }
        for &(_, m) in misses {
            for j in 0..d {
                weights[j] += (norm[i][j] - norm[m][j]).abs() / scale;
            }
        }
    }
    Ok(ReliefWeights { weights, k, min, max })
}

/// Indices of features with weight above `threshold`, strongest first, at
/// most `n_max`. Equal weights keep their original order.
pub fn select_top<T: Real>(weights: &[T], threshold: T, n_max: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).filter(|&j| weights[j] > threshold).collect();
    idx.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
    idx.truncate(n_max);
    idx
}

pub fn project_columns<T: Real>(x: &[Vec<T>], columns: &[usize]) -> Vec<Vec<T>> {
    x.iter().map(|r| columns.iter().map(|&j| r[j]).collect()).collect()
}

/// Trains a regressor on the first pair and predicts the rows of the second.
pub type FitPredict<'a, T> = dyn Fn(&[Vec<T>], &[T], &[Vec<T>]) -> Result<Vec<T>> + Sync + 'a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub threshold: f64,
    pub k: usize,
    /// Mean fold MAE; `None` when the point was skipped.
    pub mae: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub threshold: f64,
    pub k: usize,
    pub mae: f64,
    pub points: Vec<GridPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneSpec {
    pub thresholds: Vec<f64>,
    pub ks: Vec<usize>,
    pub folds: usize,
    pub n_max: usize,
    pub seed: u64,
}

impl Default for TuneSpec {
    fn default() -> Self {
        TuneSpec {
            thresholds: THRESHOLD_GRID.to_vec(),
            ks: K_GRID.to_vec(),
            folds: 3,
            n_max: DEFAULT_MAX_FEATURES,
            seed: 1,
        }
    }
}

/// Picks the (threshold, k) pair with the lowest mean fold MAE. Relief and
/// selection are refit on every fold's training part. Points whose Relief
/// fit fails on a fold, or whose selection comes out empty, are skipped.
/// Ties keep the earlier grid point.
pub fn tune_relief<T: Real>(
    x: &[Vec<T>],
    y: &[T],
    spec: &TuneSpec,
    fit_predict: &FitPredict<'_, T>,
) -> Result<TuneResult> {
    if spec.thresholds.is_empty() || spec.ks.is_empty() {
        return Err(Error::InvalidArgument("empty tuning grid".into()));
    }
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("rows and targets differ in length".into()));
    }
    let classes = binarize(y);
    let folds = stratified_folds(&classes, spec.folds, spec.seed)?;
    let mut points = Vec::new();
    for &threshold in &spec.thresholds {
        for &k in &spec.ks {
            let mut point = GridPoint {
                threshold,
                k,
                mae: None,
                skipped: None,
            };
            match fold_mae(x, y, &classes, &folds, threshold, k, spec.n_max, fit_predict) {
                Ok(mae) => point.mae = Some(mae),
                Err(Skip::Reason(r)) => point.skipped = Some(r),
                Err(Skip::Fatal(e)) => return Err(e),
            }
            points.push(point);
        }
    }
    let best = points
        .iter()
        .filter_map(|p| p.mae.map(|m| (p, m)))
        .fold(None::<(&GridPoint, f64)>, |acc, (p, m)| match acc {
            Some((_, bm)) if bm <= m => acc,
            _ => Some((p, m)),
        });
    let (p, mae) = best.ok_or_else(|| Error::InvalidArgument("every grid point was skipped".into()))?;
    Ok(TuneResult {
        threshold: p.threshold,
        k: p.k,
        mae,
        points: points.clone(),
    })
}

enum Skip {
    Reason(String),
    Fatal(Error),
}

#[allow(clippy::too_many_arguments)]
fn fold_mae<T: Real>(
    x: &[Vec<T>],
    y: &[T],
    classes: &[bool],
    folds: &[Vec<usize>],
    threshold: f64,
    k: usize,
    n_max: usize,
    fit_predict: &FitPredict<'_, T>,
) -> std::result::Result<f64, Skip> {
    let mut total = 0.0;
    for test in folds {
        let train = complement(x.len(), test);
        let xt: Vec<Vec<T>> = train.iter().map(|&i| x[i].clone()).collect();
        let yt: Vec<T> = train.iter().map(|&i| y[i]).collect();
        let ct: Vec<bool> = train.iter().map(|&i| classes[i]).collect();
        let w = match relief_weights(&xt, &ct, k) {
            Ok(w) => w,
            Err(e @ Error::ClassTooSmall { .. }) => return Err(Skip::Reason(e.to_string())),
            Err(e) => return Err(Skip::Fatal(e)),
        };
        let cols = select_top(&w.weights, T::lit(threshold), n_max);
        if cols.is_empty() {
            return Err(Skip::Reason("empty selection".into()));
        }
        let xs: Vec<Vec<T>> = test.iter().map(|&i| cols.iter().map(|&j| x[i][j]).collect()).collect();
        let pred = fit_predict(&project_columns(&xt, &cols), &yt, &xs).map_err(Skip::Fatal)?;
        let fold: f64 = test
            .iter()
            .zip(&pred)
            .map(|(&i, &p)| (y[i] - p).abs().as_f64())
            .sum::<f64>()
            / test.len() as f64;
        total += fold;
    }
    Ok(total / folds.len() as f64)
}
