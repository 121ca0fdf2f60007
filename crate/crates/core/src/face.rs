//! Geometric facial features: landmark normalization, pairwise-distance
//! descriptors, PCA reduction and 0-tolerance sliding windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::model::{LandmarkSequence, LANDMARK_COUNT};
use crate::scalar::Real;

/// `68 * 3 + C(68, 2)`.
pub const GEOMETRIC_DIM: usize = 3 * LANDMARK_COUNT + LANDMARK_COUNT * (LANDMARK_COUNT - 1) / 2;
pub const DEFAULT_VARIANCE_KEEP: f64 = 0.995;
pub const DEFAULT_WINDOW: usize = 60;
pub const DEFAULT_OVERLAP: usize = 30;

/// Removes the centroid and rescales so the mean distance to the origin is 1.
pub fn normalize_landmarks<T: Real>(points: &[[T; 3]]) -> Result<Vec<[T; 3]>> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no landmarks".into()));
    }
    let n = T::from_usize_lossy(points.len());
    let mut centroid = [T::zero(); 3];
    for p in points {
        for a in 0..3 {
            centroid[a] += p[a];
        }
    }
    centroid.iter_mut().for_each(|c| *c /= n);
    let centered: Vec<[T; 3]> = points
        .iter()
        .map(|p| [p[0] - centroid[0], p[1] - centroid[1], p[2] - centroid[2]])
        .collect();
    let mean_norm = centered.iter().map(norm3).sum::<T>() / n;
    if !(mean_norm > T::zero()) || !mean_norm.is_finite() {
        return Err(Error::DegenerateFrame);
    }
    Ok(centered
        .into_iter()
        .map(|p| [p[0] / mean_norm, p[1] / mean_norm, p[2] / mean_norm])
        .collect())
}

fn norm3<T: Real>(p: &[T; 3]) -> T {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// All x coordinates, then all y, then all z, then the distances of every
/// pair `i < j` in lexicographic order.
pub fn geometric_vector<T: Real>(normalized: &[[T; 3]]) -> Vec<T> {
    let n = normalized.len();
    let mut out = Vec::with_capacity(3 * n + n * (n.saturating_sub(1)) / 2);
    for a in 0..3 {
        out.extend(normalized.iter().map(|p| p[a]));
    }
    for i in 0..n {
        for j in i + 1..n {
            let (p, q) = (&normalized[i], &normalized[j]);
            out.push(norm3(&[p[0] - q[0], p[1] - q[1], p[2] - q[2]]));
        }
    }
    out
}

/// Normalization followed by the geometric descriptor.
pub fn frame_descriptor<T: Real>(points: &[[T; 3]]) -> Result<Vec<T>> {
    Ok(geometric_vector(&normalize_landmarks(points)?))
}

/// Principal subspace retaining a requested share of variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection<T> {
    pub mean: Vec<T>,
    /// Orthonormal rows, by descending eigenvalue.
    pub components: Vec<Vec<T>>,
    pub eigenvalues: Vec<T>,
    /// Retained share of total variance.
    pub explained: T,
}

impl<T: Real> PcaProjection<T> {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        Ok(self
            .components
            .iter()
            .map(|c| {
                c.iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(&w, (&v, &m))| w * (v - m))
                    .sum()
            })
            .collect())
    }

    pub fn reconstruct(&self, z: &[T]) -> Vec<T> {
        let mut out = self.mean.clone();
        for (c, &s) in self.components.iter().zip(z) {
            for (o, &w) in out.iter_mut().zip(c) {
                *o += s * w;
            }
        }
        out
    }
}

/// Fits PCA on rows, keeping the smallest number of components whose
/// cumulative explained variance reaches `variance_keep`.
///
/// Uses the sample covariance (1/(n-1)), or the Gram matrix of the centered
/// rows when there are fewer rows than columns.
pub fn fit_pca<T: Real>(rows: &[Vec<T>], variance_keep: f64) -> Result<PcaProjection<T>> {
    if rows.len() < 2 {
        return Err(Error::InvalidArgument("PCA needs at least two rows".into()));
    }
    if !(variance_keep > 0.0 && variance_keep <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "variance_keep {variance_keep} outside (0, 1]"
        )));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("ragged PCA input".into()));
    }
    let n = rows.len();
    let nf = T::from_usize_lossy(n);
    let mut mean = vec![T::zero(); d];
    for r in rows {
        for (m, &v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);
    let centered: Vec<Vec<T>> = rows
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(&v, &m)| v - m).collect())
        .collect();
    let denom = T::from_usize_lossy(n - 1);
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();

    let (eigenvalues, vectors): (Vec<T>, Vec<Vec<T>>) = if n < d {
        let mut gram = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = dot(&centered[i], &centered[j]) / denom;
                gram[i][j] = v;
                gram[j][i] = v;
            }
        }
        let eig = symmetric_eigen(&gram)?;
        let mut vectors = Vec::with_capacity(n);
        for (lambda, u) in eig.values.iter().zip(&eig.vectors) {
            let mut v = vec![T::zero(); d];
            for (ui, row) in u.iter().zip(&centered) {
                for (vk, &x) in v.iter_mut().zip(row) {
                    *vk += *ui * x;
                }
            }
            let norm = dot(&v, &v).sqrt();
            if *lambda > T::zero() && norm > T::zero() {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            vectors.push(v);
        }
        (eig.values, vectors)
    } else {
        let mut cov = vec![vec![T::zero(); d]; d];
        for row in &centered {
            for i in 0..d {
                let ri = row[i];
                for j in 0..=i {
                    cov[i][j] += ri * row[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..=i {
                cov[i][j] /= denom;
                cov[j][i] = cov[i][j];
            }
        }
        let eig = symmetric_eigen(&cov)?;
        (eig.values, eig.vectors)
    };

    let eigenvalues: Vec<T> = eigenvalues.into_iter().map(|l| l.max(T::zero())).collect();
    let total: T = eigenvalues.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::InvalidArgument("PCA input has zero variance".into()));
    }
    // Eigenvalues at rounding level carry no signal and must not be kept.
    let floor = eigenvalues[0] * T::epsilon() * T::from_usize_lossy(d.max(n));
    let keep = T::lit(variance_keep);
    let mut acc = T::zero();
    let mut q = 0;
    for &l in &eigenvalues {
        if q > 0 && l <= floor {
            break;
        }
        acc += l;
        q += 1;
        if acc / total >= keep {
            break;
        }
    }
    let mut components: Vec<Vec<T>> = vectors.into_iter().take(q).collect();
    orthonormalize(&mut components);
    Ok(PcaProjection {
        mean,
        components,
        eigenvalues: eigenvalues[..q].to_vec(),
        explained: acc / total,
    })
}

/// Modified Gram-Schmidt, in place.
fn orthonormalize<T: Real>(rows: &mut [Vec<T>]) {
    for i in 0..rows.len() {
        for j in 0..i {
            let proj: T = rows[i].iter().zip(&rows[j]).map(|(&a, &b)| a * b).sum();
            let (head, tail) = rows.split_at_mut(i);
            for (a, &b) in tail[0].iter_mut().zip(&head[j]) {
                *a -= proj * b;
            }
        }
        let norm = rows[i].iter().map(|&a| a * a).sum::<T>().sqrt();
        if norm > T::zero() {
            rows[i].iter_mut().for_each(|a| *a /= norm);
        }
    }
}

/// One sample per integer second: the frame nearest to each second between the
/// first and last timestamps (earlier frame on ties). Returns frame indices.
pub fn downsample_to_seconds<T: Real>(landmarks: &LandmarkSequence<T>) -> Vec<usize> {
    let frames = &landmarks.frames;
    if frames.is_empty() {
        return Vec::new();
    }
    let first = frames[0].timestamp.ceil() as i64;
    let last = frames[frames.len() - 1].timestamp.floor() as i64;
    let mut out = Vec::new();
    let mut j = 0usize;
    for sec in first..=last {
        let t = sec as f64;
        while j + 1 < frames.len() && (frames[j + 1].timestamp - t).abs() < (frames[j].timestamp - t).abs() {
            j += 1;
        }
        out.push(j);
    }
    out
}

/// Window start offsets over `n` samples. Windows hold `window` samples and
/// consecutive windows share `overlap` samples.
pub fn window_starts(n: usize, window: usize, overlap: usize) -> Vec<usize> {
    if window == 0 || overlap >= window || n < window {
        return Vec::new();
    }
    (0..=(n - window)).step_by(window - overlap).collect()
}

/// Start offsets of windows containing no failed sample.
pub fn clean_window_starts(success: &[bool], window: usize, overlap: usize) -> Vec<usize> {
    window_starts(success.len(), window, overlap)
        .into_iter()
        .filter(|&s| success[s..s + window].iter().all(|&ok| ok))
        .collect()
}

/// A fixed-length sequence of PCA-projected samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window<T> {
    pub session_id: String,
    /// Offset of the first sample in the 1 Hz sequence.
    pub start: usize,
    pub samples: Vec<Vec<T>>,
    pub label: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WindowBatch<T> {
    pub window: usize,
    pub overlap: usize,
    pub dim: usize,
    pub windows: Vec<Window<T>>,
}

impl<T: Real> WindowBatch<T> {
    pub fn new(window: usize, overlap: usize, dim: usize) -> Self {
        WindowBatch {
            window,
            overlap,
            dim,
            windows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn extend(&mut self, other: WindowBatch<T>) -> Result<()> {
        if (other.window, other.overlap, other.dim) != (self.window, self.overlap, self.dim) {
            return Err(Error::InvalidArgument("window batch shapes differ".into()));
        }
        self.windows.extend(other.windows);
        Ok(())
    }

    pub fn labels(&self) -> Option<Vec<T>> {
        self.windows.iter().map(|w| w.label).collect()
    }
}

/// Geometric descriptors of the 1 Hz samples of a sequence, with success flags.
/// Failed or degenerate frames yield `None`.
pub fn second_descriptors<T: Real>(landmarks: &LandmarkSequence<T>) -> Vec<Option<Vec<T>>> {
    downsample_to_seconds(landmarks)
        .into_iter()
        .map(|i| {
            let f = &landmarks.frames[i];
            if f.success {
                frame_descriptor(&f.points).ok()
            } else {
                None
            }
        })
        .collect()
}

/// Downsamples to 1 Hz, cuts windows, drops any window touching a failed
/// frame and projects each remaining sample with `pca`.
pub fn window_sequence<T: Real>(
    session_id: &str,
    landmarks: &LandmarkSequence<T>,
    label: Option<T>,
    pca: &PcaProjection<T>,
    window: usize,
    overlap: usize,
) -> Result<WindowBatch<T>> {
    if overlap >= window {
        return Err(Error::InvalidArgument(format!(
            "overlap {overlap} must be smaller than window {window}"
        )));
    }
    let descriptors = second_descriptors(landmarks);
    let ok: Vec<bool> = descriptors.iter().map(Option::is_some).collect();
    let mut batch = WindowBatch::new(window, overlap, pca.dim());
    let mut projected: Vec<Option<Vec<T>>> = vec![None; descriptors.len()];
    for start in clean_window_starts(&ok, window, overlap) {
        let mut samples = Vec::with_capacity(window);
        for i in start..start + window {
            if projected[i].is_none() {
                projected[i] = Some(pca.project(descriptors[i].as_ref().unwrap())?);
            }
            samples.push(projected[i].clone().unwrap());
        }
        batch.windows.push(Window {
            session_id: session_id.to_string(),
            start,
            samples,
            label,
        });
    }
    Ok(batch)
}

/// Session-level score from window predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate<T> {
    pub score: T,
    /// Set when no window survived and the fallback was used.
    pub used_fallback: bool,
}

/// Mean of window predictions, or `fallback` (the training-label mean) when
/// the session produced no windows.
pub fn aggregate_predictions<T: Real>(predictions: &[T], fallback: T) -> Aggregate<T> {
    if predictions.is_empty() {
        return Aggregate {
            score: fallback,
            used_fallback: true,
        };
    }
    Aggregate {
        score: predictions.iter().copied().sum::<T>() / T::from_usize_lossy(predictions.len()),
        used_fallback: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LandmarkFrame;

    #[test]
    fn two_point_normalization() {
        let out = normalize_landmarks(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        assert_eq!(out, vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
    }

    #[test]
    fn degenerate_frame() {
        assert!(matches!(
            normalize_landmarks(&[[1.0, 2.0, 3.0]; 68]),
            Err(Error::DegenerateFrame)
        ));
    }

    #[test]
    fn geometric_layout() {
        let pts: Vec<[f64; 3]> = (0..68).map(|i| [i as f64, (i * i) as f64 * 0.1, 1.0]).collect();
        let g = frame_descriptor(&pts).unwrap();
        assert_eq!(g.len(), GEOMETRIC_DIM);
        assert_eq!(GEOMETRIC_DIM, 2482);
        assert_eq!(GEOMETRIC_DIM - 204, 2278);
    }

    #[test]
    fn window_arithmetic() {
        assert_eq!(window_starts(120, 60, 30), vec![0, 30, 60]);
        assert!(window_starts(59, 60, 30).is_empty());
        let mut ok = vec![true; 120];
        ok[45] = false;
        assert_eq!(clean_window_starts(&ok, 60, 30), vec![60]);
        assert_eq!(window_starts(100, 10, 2), vec![0, 8, 16, 24, 32, 40, 48, 56, 64, 72, 80, 88]);
    }

    #[test]
    fn nearest_frame_per_second() {
        let frames = (0..25)
            .map(|i| LandmarkFrame {
                timestamp: 0.25 + i as f64 * 0.2,
                confidence: 1.0,
                success: true,
                points: vec![[0.0; 3]; 68],
            })
            .collect();
        let seq: LandmarkSequence<f64> = LandmarkSequence::new(frames).unwrap();
        // timestamps 0.25 .. 5.05; seconds 1..=5
        let idx = downsample_to_seconds(&seq);
        let ts: Vec<f64> = idx.iter().map(|&i| seq.frames[i].timestamp).collect();
        let want = [1.05, 2.05, 3.05, 4.05, 5.05];
        for (a, b) in ts.iter().zip(want) {
            assert!((a - b).abs() < 1e-9, "{ts:?}");
        }
    }

    #[test]
    fn aggregation() {
        assert_eq!(aggregate_predictions(&[4.0, 6.0], 0.0).score, 5.0);
        assert_eq!(aggregate_predictions(&[3.5], 0.0).score, 3.5);
        let fb = aggregate_predictions(&[], 7.25);
        assert!(fb.used_fallback);
        assert_eq!(fb.score, 7.25);
    }
}
