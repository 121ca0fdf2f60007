//! Two-layer LSTM sequence regressor: last hidden state of the second layer
//! goes through batch normalization, dropout and a linear dense head.
//!
//! Parameters live in one flat vector so the optimizer, gradient check and
//! snapshotting can treat them uniformly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::face::WindowBatch;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LstmConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    /// Global gradient-norm clip.
    pub clip_norm: f64,
    pub dropout: f64,
    pub bn_momentum: f64,
    pub bn_epsilon: f64,
    pub forget_bias: f64,
    pub seed: u64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            hidden: 16,
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-7,
            clip_norm: 5.0,
            dropout: 0.5,
            bn_momentum: 0.99,
            bn_epsilon: 1e-3,
            forget_bias: 1.0,
            seed: 1,
        }
    }
}

impl LstmConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.hidden == 0 {
            return bad("hidden size must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.bn_momentum) {
            return bad("batch-norm momentum must be in [0, 1)");
        }
        if !(self.bn_epsilon > 0.0) || !(self.clip_norm > 0.0) {
            return bad("batch-norm epsilon and clip norm must be positive");
        }
        Ok(())
    }
}

/// Offsets of each parameter block in the flat vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub input: usize,
    pub hidden: usize,
}

impl Layout {
    fn layer_len(&self, layer: usize) -> usize {
        let inp = if layer == 0 { self.input } else { self.hidden };
        4 * self.hidden * (inp + self.hidden + 1)
    }

    /// Start of the (W, U, b) block of `layer`.
    pub fn layer(&self, layer: usize) -> usize {
        if layer == 0 {
            0
        } else {
            self.layer_len(0)
        }
    }

    pub fn gamma(&self) -> usize {
        self.layer_len(0) + self.layer_len(1)
    }

    pub fn beta(&self) -> usize {
        self.gamma() + self.hidden
    }

    pub fn dense_w(&self) -> usize {
        self.beta() + self.hidden
    }

    pub fn dense_b(&self) -> usize {
        self.dense_w() + self.hidden
    }

    pub fn len(&self) -> usize {
        self.dense_b() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord<T> {
    pub epoch: usize,
    pub train_loss: T,
    pub val_loss: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmModel<T> {
    pub config: LstmConfig,
    pub input_dim: usize,
    pub params: Vec<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    /// Targets are standardized for training; predictions are mapped back.
    pub target_mean: T,
    pub target_std: T,
    pub history: Vec<EpochRecord<T>>,
    /// Epoch whose parameters were kept (lowest validation loss).
    pub best_epoch: usize,
}

/// Gate activations of one forward pass, per layer and timestep.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    pub input_gate: Vec<Vec<Vec<T>>>,
    pub forget_gate: Vec<Vec<Vec<T>>>,
    pub output_gate: Vec<Vec<Vec<T>>>,
    pub candidate: Vec<Vec<Vec<T>>>,
}

fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Per-timestep state of one layer, kept for backpropagation.
struct LayerCache<T> {
    i: Vec<Vec<T>>,
    f: Vec<Vec<T>>,
    g: Vec<Vec<T>>,
    o: Vec<Vec<T>>,
    c: Vec<Vec<T>>,
    h: Vec<Vec<T>>,
}

fn layer_forward<T: Real>(p: &[T], inp: usize, hid: usize, xs: &[Vec<T>]) -> LayerCache<T> {
    let (w, rest) = p.split_at(4 * hid * inp);
    let (u, b) = rest.split_at(4 * hid * hid);
    let steps = xs.len();
    let mut cache = LayerCache {
        i: Vec::with_capacity(steps),
        f: Vec::with_capacity(steps),
        g: Vec::with_capacity(steps),
        o: Vec::with_capacity(steps),
        c: Vec::with_capacity(steps),
        h: Vec::with_capacity(steps),
    };
    let mut h = vec![T::zero(); hid];
    let mut c = vec![T::zero(); hid];
    let mut a = vec![T::zero(); 4 * hid];
    for x in xs {
        for r in 0..4 * hid {
            let wr = &w[r * inp..(r + 1) * inp];
            let ur = &u[r * hid..(r + 1) * hid];
            let mut s = b[r];
            for k in 0..inp {
                s += wr[k] * x[k];
            }
            for k in 0..hid {
                s += ur[k] * h[k];
            }
            a[r] = s;
        }
        let i: Vec<T> = a[..hid].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<T> = a[hid..2 * hid].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<T> = a[2 * hid..3 * hid].iter().map(|&v| v.tanh()).collect();
        let o: Vec<T> = a[3 * hid..].iter().map(|&v| sigmoid(v)).collect();
        for k in 0..hid {
            c[k] = f[k] * c[k] + i[k] * g[k];
            h[k] = o[k] * c[k].tanh();
        }
        cache.i.push(i);
        cache.f.push(f);
        cache.g.push(g);
        cache.o.push(o);
        cache.c.push(c.clone());
        cache.h.push(h.clone());
    }
    cache
}

/// Backpropagation through time for one layer. `dh_ext[t]` is the loss
/// gradient arriving at `h_t` from above; gradients are accumulated into
/// `grad` and the gradient with respect to each input is returned.
fn layer_backward<T: Real>(
    p: &[T],
    grad: &mut [T],
    inp: usize,
    hid: usize,
    xs: &[Vec<T>],
    cache: &LayerCache<T>,
    dh_ext: &[Vec<T>],
) -> Vec<Vec<T>> {
    let (w, rest) = p.split_at(4 * hid * inp);
    let u = &rest[..4 * hid * hid];
    let (gw, grest) = grad.split_at_mut(4 * hid * inp);
    let (gu, gb) = grest.split_at_mut(4 * hid * hid);
    let steps = xs.len();
    let mut dx = vec![vec![T::zero(); inp]; steps];
    let mut dh_next = vec![T::zero(); hid];
    let mut dc_next = vec![T::zero(); hid];
    let mut da = vec![T::zero(); 4 * hid];
    let zero = vec![T::zero(); hid];
    for t in (0..steps).rev() {
        let c_prev = if t > 0 { &cache.c[t - 1] } else { &zero };
        let h_prev = if t > 0 { &cache.h[t - 1] } else { &zero };
        let (i, f, g, o) = (&cache.i[t], &cache.f[t], &cache.g[t], &cache.o[t]);
        for k in 0..hid {
            let dh = dh_ext[t][k] + dh_next[k];
            let tc = cache.c[t][k].tanh();
            let dc = dh * o[k] * (T::one() - tc * tc) + dc_next[k];
            da[k] = dc * g[k] * i[k] * (T::one() - i[k]);
            da[hid + k] = dc * c_prev[k] * f[k] * (T::one() - f[k]);
            da[2 * hid + k] = dc * i[k] * (T::one() - g[k] * g[k]);
            da[3 * hid + k] = dh * tc * o[k] * (T::one() - o[k]);
            dc_next[k] = dc * f[k];
        }
        dh_next.iter_mut().for_each(|v| *v = T::zero());
        for r in 0..4 * hid {
            let d = da[r];
            if d == T::zero() {
                continue;
            }
            gb[r] += d;
            for k in 0..inp {
                gw[r * inp + k] += d * xs[t][k];
                dx[t][k] += d * w[r * inp + k];
            }
            for k in 0..hid {
                gu[r * hid + k] += d * h_prev[k];
                dh_next[k] += d * u[r * hid + k];
            }
        }
    }
    dx
}

struct SeqCache<T> {
    l0: LayerCache<T>,
    l1: LayerCache<T>,
}

impl<T: Real> LstmModel<T> {
    /// Untrained model with seeded uniform fan-in initialization.
    pub fn new(input_dim: usize, config: LstmConfig) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 {
            return Err(Error::InvalidArgument("input dimension must be positive".into()));
        }
        let hid = config.hidden;
        let layout = Layout {
            input: input_dim,
            hidden: hid,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = vec![T::zero(); layout.len()];
        let fill = |slice: &mut [T], fan_in: usize, rng: &mut ChaCha8Rng| {
            let limit = 1.0 / (fan_in as f64).sqrt();
            for v in slice {
                *v = T::lit(rng.gen_range(-limit..limit));
            }
        };
        for layer in 0..2 {
            let inp = if layer == 0 { input_dim } else { hid };
            let start = layout.layer(layer);
            let w_end = start + 4 * hid * inp;
            let u_end = w_end + 4 * hid * hid;
            fill(&mut params[start..w_end], inp, &mut rng);
            fill(&mut params[w_end..u_end], hid, &mut rng);
            for k in 0..hid {
                params[u_end + hid + k] = T::lit(config.forget_bias);
            }
        }
        for k in 0..hid {
            params[layout.gamma() + k] = T::one();
        }
        let dw = layout.dense_w();
        fill(&mut params[dw..dw + hid], hid, &mut rng);
        Ok(LstmModel {
            config,
            input_dim,
            params,
            running_mean: vec![T::zero(); hid],
            running_var: vec![T::one(); hid],
            target_mean: T::zero(),
            target_std: T::one(),
            history: Vec::new(),
            best_epoch: 0,
        })
    }

    pub fn layout(&self) -> Layout {
        Layout {
            input: self.input_dim,
            hidden: self.config.hidden,
        }
    }

    fn check_window(&self, window: &[Vec<T>]) -> Result<()> {
        if window.is_empty() {
            return Err(Error::EmptyInput("window has no samples".into()));
        }
        for s in window {
            if s.len() != self.input_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.input_dim,
                    got: s.len(),
                });
            }
        }
        Ok(())
    }

    fn run(&self, params: &[T], window: &[Vec<T>]) -> SeqCache<T> {
        let lay = self.layout();
        let hid = lay.hidden;
        let l0 = layer_forward(&params[lay.layer(0)..lay.layer(1)], lay.input, hid, window);
        let l1 = layer_forward(&params[lay.layer(1)..lay.gamma()], hid, hid, &l0.h);
        SeqCache { l0, l1 }
    }

    /// Network output in standardized target units, inference mode.
    fn net_output(&self, params: &[T], window: &[Vec<T>]) -> T {
        let lay = self.layout();
        let cache = self.run(params, window);
        let h = cache.l1.h.last().unwrap();
        let eps = T::lit(self.config.bn_epsilon);
        let mut out = params[lay.dense_b()];
        for k in 0..lay.hidden {
            let xhat = (h[k] - self.running_mean[k]) / (self.running_var[k] + eps).sqrt();
            let y = params[lay.gamma() + k] * xhat + params[lay.beta() + k];
            out += params[lay.dense_w() + k] * y;
        }
        out
    }

    /// Deterministic prediction: dropout off, batch-norm uses running statistics.
    pub fn predict_window(&self, window: &[Vec<T>]) -> Result<T> {
        self.check_window(window)?;
        Ok(self.target_mean + self.target_std * self.net_output(&self.params, window))
    }

    pub fn predict_batch(&self, batch: &WindowBatch<T>) -> Result<Vec<T>> {
        batch.windows.iter().map(|w| self.predict_window(&w.samples)).collect()
    }

    pub fn forward_trace(&self, window: &[Vec<T>]) -> Result<ForwardTrace<T>> {
        self.check_window(window)?;
        let cache = self.run(&self.params, window);
        let both = |f: fn(&LayerCache<T>) -> &Vec<Vec<T>>| vec![f(&cache.l0).clone(), f(&cache.l1).clone()];
        Ok(ForwardTrace {
            input_gate: both(|c| &c.i),
            forget_gate: both(|c| &c.f),
            output_gate: both(|c| &c.o),
            candidate: both(|c| &c.g),
        })
    }

    /// Loss `weight * (predict(window) - target)^2` in inference mode.
    pub fn loss(&self, window: &[Vec<T>], target: T, weight: T) -> Result<T> {
        let r = self.predict_window(window)? - target;
        Ok(weight * r * r)
    }

    /// Analytic gradient of [`LstmModel::loss`] with respect to every parameter.
    pub fn loss_gradient(&self, window: &[Vec<T>], target: T, weight: T) -> Result<Vec<T>> {
        self.check_window(window)?;
        let lay = self.layout();
        let hid = lay.hidden;
        let p = &self.params;
        let cache = self.run(p, window);
        let h = cache.l1.h.last().unwrap();
        let eps = T::lit(self.config.bn_epsilon);
        let mut grad = vec![T::zero(); lay.len()];
        let xhat: Vec<T> = (0..hid)
            .map(|k| (h[k] - self.running_mean[k]) / (self.running_var[k] + eps).sqrt())
            .collect();
        let mut out = p[lay.dense_b()];
        for k in 0..hid {
            out += p[lay.dense_w() + k] * (p[lay.gamma() + k] * xhat[k] + p[lay.beta() + k]);
        }
        let pred = self.target_mean + self.target_std * out;
        let dout = T::lit(2.0) * weight * (pred - target) * self.target_std;
        grad[lay.dense_b()] = dout;
        let mut dh_last = vec![T::zero(); hid];
        for k in 0..hid {
            let y = p[lay.gamma() + k] * xhat[k] + p[lay.beta() + k];
            grad[lay.dense_w() + k] = dout * y;
            let dy = dout * p[lay.dense_w() + k];
            grad[lay.gamma() + k] = dy * xhat[k];
            grad[lay.beta() + k] = dy;
            dh_last[k] = dy * p[lay.gamma() + k] / (self.running_var[k] + eps).sqrt();
        }
        self.backprop_layers(&mut grad, window, &cache, dh_last);
        Ok(grad)
    }

    fn backprop_layers(&self, grad: &mut [T], window: &[Vec<T>], cache: &SeqCache<T>, dh_last: Vec<T>) {
        let lay = self.layout();
        let hid = lay.hidden;
        let p = &self.params;
        let steps = window.len();
        let mut dh1 = vec![vec![T::zero(); hid]; steps];
        dh1[steps - 1] = dh_last;
        let (g0, g1) = grad[..lay.gamma()].split_at_mut(lay.layer(1));
        let dh0 = layer_backward(
            &p[lay.layer(1)..lay.gamma()],
            g1,
            hid,
            hid,
            &cache.l0.h,
            &cache.l1,
            &dh1,
        );
        layer_backward(&p[..lay.layer(1)], g0, lay.input, hid, window, &cache.l0, &dh0);
    }

    /// Trains on `train` windows (labels required), keeping the parameters of
    /// the epoch with the lowest loss on `validation`, or on the training
    /// windows when no validation batch is given.
    pub fn train(
        train: &WindowBatch<T>,
        validation: Option<&WindowBatch<T>>,
        config: LstmConfig,
    ) -> Result<Self> {
        let x: Vec<&[Vec<T>]> = train.windows.iter().map(|w| w.samples.as_slice()).collect();
        let y = train
            .labels()
            .ok_or_else(|| Error::InvalidArgument("training window without label".into()))?;
        let val = match validation {
            Some(v) if !v.is_empty() => {
                let vy = v
                    .labels()
                    .ok_or_else(|| Error::InvalidArgument("validation window without label".into()))?;
                let vx: Vec<&[Vec<T>]> = v.windows.iter().map(|w| w.samples.as_slice()).collect();
                Some((vx, vy))
            }
            _ => None,
        };
        let val_ref = val.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()));
        Self::train_sequences(train.dim, &x, &y, val_ref, config)
    }

    pub fn train_sequences(
        input_dim: usize,
        x: &[&[Vec<T>]],
        y: &[T],
        validation: Option<(&[&[Vec<T>]], &[T])>,
        config: LstmConfig,
    ) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput("no training windows".into()));
        }
        if x.len() != y.len() {
            return Err(Error::InvalidArgument("window and target counts differ".into()));
        }
        let mut model = Self::new(input_dim, config)?;
        for w in x.iter().chain(validation.iter().flat_map(|v| v.0.iter())) {
            model.check_window(w)?;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("training targets".into()));
        }
        let n = T::from_usize_lossy(y.len());
        let mean = y.iter().copied().sum::<T>() / n;
        let var = y.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        model.target_mean = mean;
        model.target_std = if var > T::zero() { var.sqrt() } else { T::one() };
        let ys: Vec<T> = y.iter().map(|&v| (v - mean) / model.target_std).collect();

        let cfg = model.config.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
        let mut adam = Adam::new(model.params.len());
        let mut order: Vec<usize> = (0..x.len()).collect();

        let evaluate = |m: &LstmModel<T>| -> Result<(T, Option<T>)> {
            let tl = m.mean_loss(x, y);
            let vl = validation.map(|(vx, vy)| m.mean_loss(vx, vy));
            if !tl.is_finite() || vl.is_some_and(|v| !v.is_finite()) {
                return Err(Error::Divergence(format!("loss became non-finite; config {cfg:?}")));
            }
            Ok((tl, vl))
        };
        let (tl, vl) = evaluate(&model)?;
        model.history.push(EpochRecord {
            epoch: 0,
            train_loss: tl,
            val_loss: vl,
        });
        let mut best = (vl.unwrap_or(tl), model.snapshot(), 0);

        for epoch in 1..=cfg.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.batch_size) {
                let (grad, loss) = model.batch_gradient(x, &ys, chunk, &mut rng);
                if !loss.is_finite() {
                    return Err(Error::Divergence(format!(
                        "batch loss {loss} at epoch {epoch}; config {cfg:?}"
                    )));
                }
                adam.step(&mut model.params, grad, &cfg);
            }
            let (tl, vl) = evaluate(&model)?;
            model.history.push(EpochRecord {
                epoch,
                train_loss: tl,
                val_loss: vl,
            });
            let score = vl.unwrap_or(tl);
            if score < best.0 {
                best = (score, model.snapshot(), epoch);
            }
        }
        let (params, running_mean, running_var) = best.1;
        model.params = params;
        model.running_mean = running_mean;
        model.running_var = running_var;
        model.best_epoch = best.2;
        Ok(model)
    }

    fn snapshot(&self) -> (Vec<T>, Vec<T>, Vec<T>) {
        (self.params.clone(), self.running_mean.clone(), self.running_var.clone())
    }

    /// Inference-mode mean squared error in target units.
    fn mean_loss(&self, x: &[&[Vec<T>]], y: &[T]) -> T {
        let total: T = x
            .iter()
            .zip(y)
            .map(|(w, &t)| {
                let r = self.target_mean + self.target_std * self.net_output(&self.params, w) - t;
                r * r
            })
            .sum();
        total / T::from_usize_lossy(y.len())
    }

    /// Training-mode minibatch step: batch statistics, dropout, MSE on the
    /// standardized targets. Updates the running statistics and returns the
    /// gradient with the batch loss.
    fn batch_gradient(
        &mut self,
        x: &[&[Vec<T>]],
        ys: &[T],
        rows: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> (Vec<T>, T) {
        let lay = self.layout();
        let hid = lay.hidden;
        let cfg = &self.config;
        let b = rows.len();
        let bt = T::from_usize_lossy(b);
        let caches: Vec<SeqCache<T>> = rows.iter().map(|&r| self.run(&self.params, x[r])).collect();
        let hs: Vec<&Vec<T>> = caches.iter().map(|c| c.l1.h.last().unwrap()).collect();
        let eps = T::lit(cfg.bn_epsilon);
        let mut mu = vec![T::zero(); hid];
        let mut var = vec![T::zero(); hid];
        for k in 0..hid {
            mu[k] = hs.iter().map(|h| h[k]).sum::<T>() / bt;
            var[k] = hs.iter().map(|h| (h[k] - mu[k]) * (h[k] - mu[k])).sum::<T>() / bt;
        }
        let keep = 1.0 - cfg.dropout;
        let scale = T::lit(1.0 / keep);
        let masks: Vec<Vec<T>> = (0..b)
            .map(|_| {
                (0..hid)
                    .map(|_| if rng.gen::<f64>() < keep { scale } else { T::zero() })
                    .collect()
            })
            .collect();
        let p = &self.params;
        let inv_std: Vec<T> = var.iter().map(|&v| T::one() / (v + eps).sqrt()).collect();
        let xhat: Vec<Vec<T>> = hs
            .iter()
            .map(|h| (0..hid).map(|k| (h[k] - mu[k]) * inv_std[k]).collect())
            .collect();
        let mut grad = vec![T::zero(); lay.len()];
        let mut loss = T::zero();
        let mut dxhat = vec![vec![T::zero(); hid]; b];
        for s in 0..b {
            let z: Vec<T> = (0..hid)
                .map(|k| (p[lay.gamma() + k] * xhat[s][k] + p[lay.beta() + k]) * masks[s][k])
                .collect();
            let out = p[lay.dense_b()] + (0..hid).map(|k| p[lay.dense_w() + k] * z[k]).sum::<T>();
            let r = out - ys[rows[s]];
            loss += r * r / bt;
            let dout = T::lit(2.0) * r / bt;
            grad[lay.dense_b()] += dout;
            for k in 0..hid {
                grad[lay.dense_w() + k] += dout * z[k];
                let dy = dout * p[lay.dense_w() + k] * masks[s][k];
                grad[lay.gamma() + k] += dy * xhat[s][k];
                grad[lay.beta() + k] += dy;
                dxhat[s][k] = dy * p[lay.gamma() + k];
            }
        }
        for k in 0..hid {
            let sum_d: T = (0..b).map(|s| dxhat[s][k]).sum();
            let sum_dx: T = (0..b).map(|s| dxhat[s][k] * xhat[s][k]).sum();
            for s in 0..b {
                dxhat[s][k] = inv_std[k] / bt * (bt * dxhat[s][k] - sum_d - xhat[s][k] * sum_dx);
            }
        }
        for (s, &r) in rows.iter().enumerate() {
            let dh = std::mem::take(&mut dxhat[s]);
            self.backprop_layers(&mut grad, x[r], &caches[s], dh);
        }
        let m = T::lit(cfg.bn_momentum);
        for k in 0..hid {
            self.running_mean[k] = m * self.running_mean[k] + (T::one() - m) * mu[k];
            self.running_var[k] = m * self.running_var[k] + (T::one() - m) * var[k];
        }
        (grad, loss)
    }
}

struct Adam<T> {
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Real> Adam<T> {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [T], mut grad: Vec<T>, cfg: &LstmConfig) {
        let norm = grad.iter().map(|&g| g * g).sum::<T>().sqrt();
        let clip = T::lit(cfg.clip_norm);
        if norm > clip {
            let s = clip / norm;
            grad.iter_mut().for_each(|g| *g *= s);
        }
        self.t += 1;
        let (b1, b2) = (T::lit(cfg.beta1), T::lit(cfg.beta2));
        let c1 = T::one() - b1.powi(self.t);
        let c2 = T::one() - b2.powi(self.t);
        let lr = T::lit(cfg.learning_rate);
        let eps = T::lit(cfg.adam_epsilon);
        for j in 0..params.len() {
            self.m[j] = b1 * self.m[j] + (T::one() - b1) * grad[j];
            self.v[j] = b2 * self.v[j] + (T::one() - b2) * grad[j] * grad[j];
            params[j] -= lr * (self.m[j] / c1) / ((self.v[j] / c2).sqrt() + eps);
        }
    }
}

/// Largest relative difference between the analytic gradient and central
/// finite differences with step `h`, over every parameter.
///
/// The relative error of one parameter is `|a - n| / max(|a|, |n|, s)` with
/// `s = 1e-6 * max_j |a_j|`: components that small sit below the roundoff
/// resolution of central differences.
pub fn gradient_check<T: Real>(model: &LstmModel<T>, window: &[Vec<T>], target: T, h: T) -> Result<T> {
    if !(h > T::zero()) {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let analytic = model.loss_gradient(window, target, T::one())?;
    let mut probe = model.clone();
    let mut worst = T::zero();
    let largest = analytic.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = (T::lit(1e-6) * largest).max(T::min_positive_value());
    for j in 0..probe.params.len() {
        let orig = probe.params[j];
        probe.params[j] = orig + h;
        let up = probe.loss(window, target, T::one())?;
        probe.params[j] = orig - h;
        let down = probe.loss(window, target, T::one())?;
        probe.params[j] = orig;
        let numeric = (up - down) / (h + h);
        let a = analytic[j];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
        worst = worst.max(rel);
    }
    Ok(worst)
}
