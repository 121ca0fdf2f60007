//! Independent reference implementations used to check the library.
//! Each one takes the slow, direct route on purpose.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct-summation DFT magnitudes for bins `0..=n/2`.
pub fn dft_magnitudes(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

pub fn centroid_oracle(mags: &[f64], bin_hz: f64) -> f64 {
    let num: f64 = mags.iter().enumerate().map(|(k, m)| k as f64 * bin_hz * m).sum();
    num / mags.iter().sum::<f64>()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Least-squares polynomial fit over t = 0..n via normal equations.
/// Returns coefficients highest power first and the mean squared residual.
pub fn polyfit(x: &[f64], degree: usize) -> (Vec<f64>, f64) {
    let m = degree + 1;
    let mut ata = vec![vec![0.0; m]; m];
    let mut atb = vec![0.0; m];
    for (t, &v) in x.iter().enumerate() {
        let pow: Vec<f64> = (0..m).map(|p| (t as f64).powi((degree - p) as i32)).collect();
        for i in 0..m {
            atb[i] += pow[i] * v;
            for j in 0..m {
                ata[i][j] += pow[i] * pow[j];
            }
        }
    }
    let c = solve(ata, atb).unwrap();
    let err = x
        .iter()
        .enumerate()
        .map(|(t, &v)| {
            let fit: f64 = (0..m).map(|p| c[p] * (t as f64).powi((degree - p) as i32)).sum();
            (v - fit).powi(2)
        })
        .sum::<f64>()
        / x.len() as f64;
    (c, err)
}

/// Delta by explicit edge padding.
pub fn delta_oracle(x: &[f64]) -> Vec<f64> {
    let mut padded = vec![x[0], x[0]];
    padded.extend_from_slice(x);
    padded.push(x[x.len() - 1]);
    padded.push(x[x.len() - 1]);
    (0..x.len())
        .map(|t| {
            let c = t + 2;
            (1.0 * (padded[c + 1] - padded[c - 1]) + 2.0 * (padded[c + 2] - padded[c - 2])) / 10.0
        })
        .collect()
}

/// RMSE, MAE and EVS with two-pass formulas and no shared helpers.
pub fn metrics_oracle(y: &[f64], p: &[f64]) -> (f64, f64, f64) {
    let n = y.len() as f64;
    let mut sq = 0.0;
    let mut ab = 0.0;
    for i in 0..y.len() {
        sq += (y[i] - p[i]) * (y[i] - p[i]);
        ab += (y[i] - p[i]).abs();
    }
    let my = y.iter().sum::<f64>() / n;
    let r: Vec<f64> = y.iter().zip(p).map(|(a, b)| a - b).collect();
    let mr = r.iter().sum::<f64>() / n;
    let vy = y.iter().map(|v| (v - my).powi(2)).sum::<f64>() / n;
    let vr = r.iter().map(|v| (v - mr).powi(2)).sum::<f64>() / n;
    ((sq / n).sqrt(), ab / n, 1.0 - vr / vy)
}

/// Relief by repeated nearest-neighbor extraction instead of sorting.
pub fn relief_oracle(x: &[Vec<f64>], cls: &[bool], k: usize) -> Vec<f64> {
    let n = x.len();
    let d = x[0].len();
    let lo: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let diff = |j: usize, a: usize, b: usize| {
        let range = hi[j] - lo[j];
        if range == 0.0 {
            0.0
        } else {
            (x[a][j] - x[b][j]).abs() / range
        }
    };
    let dist = |a: usize, b: usize| (0..d).map(|j| diff(j, a, b)).sum::<f64>();
    let mut w = vec![0.0; d];
    for i in 0..n {
        for same in [true, false] {
            let mut taken = vec![false; n];
            for _ in 0..k {
                let mut best: Option<usize> = None;
                for c in 0..n {
                    if c == i || taken[c] || (cls[c] == cls[i]) != same {
                        continue;
                    }
                    if best.is_none_or(|b| dist(i, c) < dist(i, b)) {
                        best = Some(c);
                    }
                }
                let b = best.unwrap();
                taken[b] = true;
                for j in 0..d {
                    let v = diff(j, i, b) / (n * k) as f64;
                    if same {
                        w[j] -= v;
                    } else {
                        w[j] += v;
                    }
                }
            }
        }
    }
    w
}

/// Exact minimum of the epsilon-SVR dual
/// `½ θᵀKθ - yᵀθ + ε|θ|₁` subject to `Σθ = 0`, `-C ≤ θ ≤ C`,
/// found by enumerating every assignment of each θ_i to {-C, C, 0, free>0,
/// free<0} and solving the stationarity system of the free set.
pub fn svr_dual_oracle(k: &[Vec<f64>], y: &[f64], c: f64, eps: f64) -> f64 {
    let n = y.len();
    let objective = |t: &[f64]| {
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += t[i] * t[j] * k[i][j];
            }
        }
        0.5 * q - (0..n).map(|i| y[i] * t[i]).sum::<f64>() + eps * t.iter().map(|v| v.abs()).sum::<f64>()
    };
    let mut best = f64::INFINITY;
    let total = 5usize.pow(n as u32);
    for code in 0..total {
        let mut state = vec![0u8; n];
        let mut cc = code;
        for s in state.iter_mut() {
            *s = (cc % 5) as u8;
            cc /= 5;
        }
        let mut theta = vec![0.0; n];
        let free: Vec<usize> = (0..n).filter(|&i| state[i] >= 3).collect();
        for i in 0..n {
            theta[i] = match state[i] {
                0 => -c,
                1 => c,
                _ => 0.0,
            };
        }
        let fixed_sum: f64 = theta.iter().sum();
        if free.is_empty() {
            if fixed_sum.abs() < 1e-12 {
                best = best.min(objective(&theta));
            }
            continue;
        }
        let m = free.len();
        let mut a = vec![vec![0.0; m + 1]; m + 1];
        let mut b = vec![0.0; m + 1];
        for (r, &i) in free.iter().enumerate() {
            let sign = if state[i] == 3 { 1.0 } else { -1.0 };
            for (s, &j) in free.iter().enumerate() {
                a[r][s] = k[i][j];
            }
            a[r][m] = 1.0;
            let bound: f64 = (0..n).filter(|j| state[*j] < 3).map(|j| k[i][j] * theta[j]).sum();
            b[r] = y[i] - eps * sign - bound;
        }
        for s in 0..m {
            a[m][s] = 1.0;
        }
        b[m] = -fixed_sum;
        let Some(sol) = solve(a, b) else { continue };
        let ok = free.iter().enumerate().all(|(r, &i)| {
            let v = sol[r];
            if state[i] == 3 {
                v >= 0.0 && v <= c
            } else {
                v <= 0.0 && v >= -c
            }
        });
        if ok {
            for (r, &i) in free.iter().enumerate() {
                theta[i] = sol[r];
            }
            best = best.min(objective(&theta));
        }
    }
    best
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>()).exp()
}

/// Min-max scaling with training ranges, constant columns to 0.
pub fn minmax(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = x[0].len();
    let lo: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
    x.iter()
        .map(|r| {
            (0..d)
                .map(|j| if hi[j] > lo[j] { (r[j] - lo[j]) / (hi[j] - lo[j]) } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Seeded binary data set with one informative feature at index `informative`.
pub fn relief_dataset(seed: u64, n: usize, d: usize, informative: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cls: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    let x = cls
        .iter()
        .map(|&c| {
            (0..d)
                .map(|j| {
                    if j == informative {
                        (if c { 1.0 } else { 0.0 }) + rng.gen_range(-0.6..0.6)
                    } else {
                        rng.gen_range(0.0..1.0)
                    }
                })
                .collect()
        })
        .collect();
    (x, cls)
}

/// Number of windows of length `w` with step `w - o` over `n` samples.
pub fn window_count(n: usize, w: usize, o: usize) -> usize {
    if n < w {
        0
    } else {
        (n - w) / (w - o) + 1
    }
}

/// Window starts that survive 0-tolerance filtering, by enumeration.
pub fn clean_windows_oracle(ok: &[bool], w: usize, o: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut s = 0;
    while s + w <= ok.len() {
        let mut clean = true;
        for i in s..s + w {
            if !ok[i] {
                clean = false;
            }
        }
        if clean {
            out.push(s);
        }
        s += w - o;
    }
    out
}

/// Frames of an `r`-dimensional latent process embedded in `d` dimensions.
pub fn low_rank_rows(seed: u64, rows: usize, d: usize, r: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis: Vec<Vec<f64>> = (0..r).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let offset: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
    (0..rows)
        .map(|_| {
            let z: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (0..d)
                .map(|j| offset[j] + (0..r).map(|q| z[q] * basis[q][j]).sum::<f64>())
                .collect()
        })
        .collect()
}
