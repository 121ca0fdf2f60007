//! ε-support vector regression trained by sequential minimal optimization.
//!
//! The dual over the pair `(α, α*)` is solved as one problem in `2n` variables
//! `β = (α, α*)` with signs `s = (+1.., -1..)`:
//!
//! ```text
//! min ½ βᵀQβ + pᵀβ   s.t.  sᵀβ = 0,  0 ≤ β ≤ C
//! Q_tu = s_t s_u K(x_t, x_u),   p = (ε - y, ε + y)
//! ```
//!
//! Working pairs are chosen by maximal violation with second-order gain, and
//! iterations stop once the violation drops below the tolerance.

use serde::{Deserialize, Serialize};

use super::{check_dim, check_training_set, MinMaxScaler, Regressor};
use crate::error::{Error, Result};
use crate::scalar::Real;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel<T> {
    Linear,
    Rbf { gamma: T },
}

impl<T: Real> Kernel<T> {
    pub fn eval(&self, a: &[T], b: &[T]) -> T {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(&x, &y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams<T> {
    pub kernel: Kernel<T>,
    pub c: T,
    pub epsilon: T,
    /// Maximal KKT violation accepted at convergence.
    pub tolerance: T,
    pub max_iter: usize,
}

impl<T: Real> SvrParams<T> {
    pub fn rbf(gamma: f64, c: f64) -> Self {
        SvrParams {
            kernel: Kernel::Rbf { gamma: T::lit(gamma) },
            c: T::lit(c),
            ..Self::linear(c)
        }
    }

    pub fn linear(c: f64) -> Self {
        SvrParams {
            kernel: Kernel::Linear,
            c: T::lit(c),
            epsilon: T::lit(1e-3),
            tolerance: T::lit(1e-3),
            max_iter: 1_000_000,
        }
    }
}

impl<T: Real> Default for SvrParams<T> {
    /// RBF kernel with γ = 0.01 and C = 1.
    fn default() -> Self {
        Self::rbf(0.01, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel<T> {
    pub params: SvrParams<T>,
    pub scaler: MinMaxScaler<T>,
    /// Training rows after scaling.
    pub rows: Vec<Vec<T>>,
    pub alpha: Vec<T>,
    pub alpha_star: Vec<T>,
    pub bias: T,
    pub iterations: usize,
}

impl<T: Real> SvrModel<T> {
    pub fn train(x: &[Vec<T>], y: &[T], params: SvrParams<T>) -> Result<Self> {
        check_training_set(x, y, 2)?;
        if !(params.c > T::zero()) {
            return Err(Error::InvalidArgument("C must be positive".into()));
        }
        if !(params.epsilon >= T::zero()) {
            return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
        }
        let scaler = MinMaxScaler::fit(x);
        let rows: Vec<Vec<T>> = x.iter().map(|r| scaler.transform(r)).collect();
        let n = rows.len();
        let mut kernel = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                let k = params.kernel.eval(&rows[i], &rows[j]);
                kernel[i][j] = k;
                kernel[j][i] = k;
            }
        }
        let sol = solve(&kernel, y, &params)?;
        let mut alpha = Vec::with_capacity(n);
        let mut alpha_star = Vec::with_capacity(n);
        for i in 0..n {
            // Both members of a pair can stay slightly positive within tolerance;
            // keeping only the net coefficient preserves predictions and the
            // equality constraint while restoring complementarity.
            let net = sol.beta[i] - sol.beta[i + n];
            alpha.push(net.max(T::zero()));
            alpha_star.push((-net).max(T::zero()));
        }
        Ok(SvrModel {
            params,
            scaler,
            rows,
            alpha,
            alpha_star,
            bias: sol.bias,
            iterations: sol.iterations,
        })
    }

    pub fn coefficients(&self) -> Vec<T> {
        self.alpha.iter().zip(&self.alpha_star).map(|(&a, &b)| a - b).collect()
    }

    pub fn support_count(&self) -> usize {
        self.coefficients().iter().filter(|c| **c != T::zero()).count()
    }

    /// `½ θᵀKθ + ε Σ(α + α*) - yᵀθ` with `θ = α - α*`, evaluated on the
    /// stored solution against the given training targets.
    pub fn dual_objective(&self, y: &[T]) -> T {
        let theta = self.coefficients();
        let n = theta.len();
        let mut quad = T::zero();
        for i in 0..n {
            for j in 0..n {
                quad += theta[i] * theta[j] * self.params.kernel.eval(&self.rows[i], &self.rows[j]);
            }
        }
        let l1: T = self.alpha.iter().zip(&self.alpha_star).map(|(&a, &b)| a + b).sum();
        let lin: T = theta.iter().zip(y).map(|(&t, &v)| t * v).sum();
        T::lit(0.5) * quad + self.params.epsilon * l1 - lin
    }
}

impl<T: Real> Regressor<T> for SvrModel<T> {
    fn input_dim(&self) -> usize {
        self.scaler.min.len()
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        check_dim(self.input_dim(), x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prediction input".into()));
        }
        let z = self.scaler.transform(x);
        Ok(self
            .rows
            .iter()
            .zip(self.alpha.iter().zip(&self.alpha_star))
            .filter(|(_, (a, b))| **a != **b)
            .map(|(r, (&a, &b))| (a - b) * self.params.kernel.eval(r, &z))
            .sum::<T>()
            + self.bias)
    }
}

struct Solution<T> {
    beta: Vec<T>,
    bias: T,
    iterations: usize,
}

fn solve<T: Real>(kernel: &[Vec<T>], y: &[T], params: &SvrParams<T>) -> Result<Solution<T>> {
    let n = y.len();
    let l = 2 * n;
    let c = params.c;
    let zero = T::zero();
    let tau = T::lit(TAU);
    let sign = |t: usize| if t < n { T::one() } else { -T::one() };
    let q = |t: usize, u: usize| sign(t) * sign(u) * kernel[t % n][u % n];
    let qd: Vec<T> = (0..l).map(|t| kernel[t % n][t % n]).collect();

    let mut beta = vec![zero; l];
    let mut grad: Vec<T> = (0..l)
        .map(|t| if t < n { params.epsilon - y[t] } else { params.epsilon + y[t - n] })
        .collect();

    let mut iterations = 0;
    loop {
        if iterations >= params.max_iter {
            return Err(Error::NonConvergence(format!(
                "SVR stopped after {iterations} iterations (n = {n}, C = {c}, tol = {})",
                params.tolerance
            )));
        }

        let mut gmax = T::neg_infinity();
        let mut i_sel = None;
        for t in 0..l {
            if sign(t) > zero {
                if beta[t] < c && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = Some(t);
                }
            } else if beta[t] > zero && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else { break };

        let mut gmax2 = T::neg_infinity();
        let mut j_sel = None;
        let mut best_obj = T::infinity();
        for t in 0..l {
            let qit = q(i, t);
            if sign(t) > zero {
                if beta[t] > zero {
                    let diff = gmax + grad[t];
                    if grad[t] >= gmax2 {
                        gmax2 = grad[t];
                    }
                    if diff > zero {
                        let mut quad = qd[i] + qd[t] - T::lit(2.0) * sign(i) * qit;
                        if quad <= zero {
                            quad = tau;
                        }
                        let obj = -(diff * diff) / quad;
                        if obj <= best_obj {
                            best_obj = obj;
                            j_sel = Some(t);
                        }
                    }
                }
            } else if beta[t] < c {
                let diff = gmax - grad[t];
                if -grad[t] >= gmax2 {
                    gmax2 = -grad[t];
                }
                if diff > zero {
                    let mut quad = qd[i] + qd[t] + T::lit(2.0) * sign(i) * qit;
                    if quad <= zero {
                        quad = tau;
                    }
                    let obj = -(diff * diff) / quad;
                    if obj <= best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let Some(j) = j_sel else { break };
        if gmax + gmax2 < params.tolerance {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (beta[i], beta[j]);
        let qij = q(i, j);
        if sign(i) != sign(j) {
            let mut quad = qd[i] + qd[j] + T::lit(2.0) * qij;
            if quad <= zero {
                quad = tau;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if diff > zero {
                if beta[j] < zero {
                    beta[j] = zero;
                    beta[i] = diff;
                }
            } else if beta[i] < zero {
                beta[i] = zero;
                beta[j] = -diff;
            }
            if diff > zero {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let mut quad = qd[i] + qd[j] - T::lit(2.0) * qij;
            if quad <= zero {
                quad = tau;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
            } else if beta[j] < zero {
                beta[j] = zero;
                beta[i] = sum;
            }
            if sum > c {
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else if beta[i] < zero {
                beta[i] = zero;
                beta[j] = sum;
            }
        }

        let (di, dj) = (beta[i] - old_i, beta[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }

    // Bias from free variables, or the midpoint of the feasible interval.
    let mut ub = T::infinity();
    let mut lb = T::neg_infinity();
    let mut free_sum = zero;
    let mut free = 0usize;
    for t in 0..l {
        let yg = sign(t) * grad[t];
        if beta[t] >= c {
            if sign(t) < zero {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if beta[t] <= zero {
            if sign(t) > zero {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / T::from_usize_lossy(free)
    } else {
        (ub + lb) / T::lit(2.0)
    };
    Ok(Solution {
        beta,
        bias: -rho,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target_gives_constant_model() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let y = vec![4.5; 8];
        let m = SvrModel::train(&x, &y, SvrParams::default()).unwrap();
        assert!(m.alpha.iter().chain(&m.alpha_star).all(|&a| a == 0.0));
        assert!((m.bias - 4.5).abs() < 1e-12);
        assert!((m.predict(&[100.0, -3.0]).unwrap() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn linear_target_fits_inside_tube() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 19.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| 0.8 * r[0] + 0.3).collect();
        let params = SvrParams {
            epsilon: 0.1,
            tolerance: 1e-9,
            ..SvrParams::linear(1.0)
        };
        let m = SvrModel::train(&x, &y, params).unwrap();
        for (r, &t) in x.iter().zip(&y) {
            assert!((m.predict(r).unwrap() - t).abs() <= 0.1 + 1e-6);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let x = vec![vec![1.0], vec![f64::NAN]];
        assert!(matches!(
            SvrModel::train(&x, &[1.0, 2.0], SvrParams::default()),
            Err(Error::NonFinite(_))
        ));
        let x = vec![vec![1.0], vec![2.0]];
        let m = SvrModel::train(&x, &[1.0, 2.0], SvrParams::default()).unwrap();
        assert!(matches!(m.predict(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }
}
