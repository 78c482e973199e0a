use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;

use super::{Normalizer, PredictorError, WindowSample};
use crate::rng::{stream, stream_rng};
use crate::scalar::sigmoid;
use crate::Real;

/// Borrowed view of one direction's LSTM weights.
///
/// `weights` is `4h × (1 + h)` row-major; column 0 multiplies the scalar
/// input, the rest the previous hidden state. Row blocks are the input,
/// forget, output and candidate gates, in that order.
#[derive(Debug, Clone, Copy)]
pub struct LstmCell<'a, T> {
    pub hidden: usize,
    pub weights: &'a [T],
    pub bias: &'a [T],
}

/// Both LSTM directions plus the linear head over their concatenated final
/// hidden states, stored as one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmParams<T> {
    window: usize,
    hidden: usize,
    theta: Vec<T>,
}

/// Gradient with the same flat layout as [`BiLstmParams::theta`].
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmGrads<T>(pub Vec<T>);

fn cell_len(h: usize) -> usize {
    4 * h * (1 + h) + 4 * h
}

fn param_len(h: usize) -> usize {
    2 * cell_len(h) + 2 * h + 1
}

/// Activations kept from the forward pass for BPTT.
struct StepCache<T> {
    x: T,
    h_prev: Vec<T>,
    c_prev: Vec<T>,
    /// i, f, o, g gate activations, `4h` long.
    gates: Vec<T>,
    tanh_c: Vec<T>,
}

fn run_cell<T: Real>(
    cell: LstmCell<'_, T>,
    xs: impl Iterator<Item = T>,
    mut cache: Option<&mut Vec<StepCache<T>>>,
) -> Vec<T> {
    let h = cell.hidden;
    let cols = 1 + h;
    let mut hs = vec![T::zero(); h];
    let mut cs = vec![T::zero(); h];
    let mut gates = vec![T::zero(); 4 * h];
    let mut tanh_c = vec![T::zero(); h];
    for x in xs {
        for (r, g) in gates.iter_mut().enumerate() {
            let row = &cell.weights[r * cols..(r + 1) * cols];
            let mut acc = cell.bias[r] + row[0] * x;
            for (w, hv) in row[1..].iter().zip(&hs) {
                acc = acc + *w * *hv;
            }
            *g = if r < 3 * h { sigmoid(acc) } else { acc.tanh() };
        }
        let prev = cache.as_ref().map(|_| (hs.clone(), cs.clone()));
        for j in 0..h {
            cs[j] = gates[h + j] * cs[j] + gates[j] * gates[3 * h + j];
            tanh_c[j] = cs[j].tanh();
            hs[j] = gates[2 * h + j] * tanh_c[j];
        }
        if let (Some(c), Some((h_prev, c_prev))) = (cache.as_deref_mut(), prev) {
            c.push(StepCache { x, h_prev, c_prev, gates: gates.clone(), tanh_c: tanh_c.clone() });
        }
    }
    hs
}

/// Accumulates the cell's parameter gradient into `grad` (same layout as
/// the cell: weights then bias) given dL/dh at the final step.
fn backprop_cell<T: Real>(cell: LstmCell<'_, T>, cache: &[StepCache<T>], dh_final: &[T], grad: &mut [T]) {
    let h = cell.hidden;
    let cols = 1 + h;
    let (gw, gb) = grad.split_at_mut(4 * h * cols);
    let one = T::one();
    let mut dh = dh_final.to_vec();
    let mut dc = vec![T::zero(); h];
    let mut da = vec![T::zero(); 4 * h];
    for step in cache.iter().rev() {
        let g = &step.gates;
        for j in 0..h {
            let (gi, gf, go, gg) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
            let tc = step.tanh_c[j];
            dc[j] = dc[j] + dh[j] * go * (one - tc * tc);
            da[j] = dc[j] * gg * gi * (one - gi);
            da[h + j] = dc[j] * step.c_prev[j] * gf * (one - gf);
            da[2 * h + j] = dh[j] * tc * go * (one - go);
            da[3 * h + j] = dc[j] * gi * (one - gg * gg);
            dc[j] = dc[j] * gf;
        }
        let mut dh_prev = vec![T::zero(); h];
        for (r, &d) in da.iter().enumerate() {
            let row = &cell.weights[r * cols..(r + 1) * cols];
            let grow = &mut gw[r * cols..(r + 1) * cols];
            grow[0] = grow[0] + d * step.x;
            for k in 0..h {
                grow[1 + k] = grow[1 + k] + d * step.h_prev[k];
                dh_prev[k] = dh_prev[k] + row[1 + k] * d;
            }
            gb[r] = gb[r] + d;
        }
        dh = dh_prev;
    }
}

impl<T: Real> BiLstmParams<T> {
    pub fn zeros(window: usize, hidden: usize) -> Self {
        Self { window, hidden, theta: vec![T::zero(); param_len(hidden)] }
    }

    pub fn from_theta(window: usize, hidden: usize, theta: Vec<T>) -> Result<Self, PredictorError> {
        if window == 0 || hidden == 0 {
            return Err(PredictorError::InvalidConfig("window and hidden size must be positive".into()));
        }
        if theta.len() != param_len(hidden) {
            return Err(PredictorError::ShapeMismatch { expected: param_len(hidden), got: theta.len() });
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(PredictorError::InvalidConfig("non-finite parameter".into()));
        }
        Ok(Self { window, hidden, theta })
    }

    /// Uniform `±1/√h` weights, zero biases except a forget-gate bias of 1.
    pub fn init(window: usize, hidden: usize, seed: u64) -> Self {
        let mut p = Self::zeros(window, hidden);
        let k = 1.0 / (hidden as f64).sqrt();
        let dist = Uniform::new_inclusive(-k, k);
        let mut rng = stream_rng(seed, stream::INIT);
        let h = hidden;
        let wlen = 4 * h * (1 + h);
        for dir in 0..2 {
            let base = dir * cell_len(h);
            for v in &mut p.theta[base..base + wlen] {
                *v = T::lit(dist.sample(&mut rng));
            }
            for v in &mut p.theta[base + wlen + h..base + wlen + 2 * h] {
                *v = T::one();
            }
        }
        let head = 2 * cell_len(h);
        for v in &mut p.theta[head..head + 2 * h] {
            *v = T::lit(dist.sample(&mut rng));
        }
        p
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [T] {
        &mut self.theta
    }

    fn cell(&self, dir: usize) -> LstmCell<'_, T> {
        let h = self.hidden;
        let base = dir * cell_len(h);
        let wlen = 4 * h * (1 + h);
        LstmCell {
            hidden: h,
            weights: &self.theta[base..base + wlen],
            bias: &self.theta[base + wlen..base + cell_len(h)],
        }
    }

    pub fn forward_cell(&self) -> LstmCell<'_, T> {
        self.cell(0)
    }

    pub fn backward_cell(&self) -> LstmCell<'_, T> {
        self.cell(1)
    }

    /// `2h` weights: forward direction first.
    pub fn head_weights(&self) -> &[T] {
        let s = 2 * cell_len(self.hidden);
        &self.theta[s..s + 2 * self.hidden]
    }

    pub fn head_bias(&self) -> T {
        self.theta[self.theta.len() - 1]
    }

    fn check(&self, window: &[T]) -> Result<(), PredictorError> {
        if window.len() != self.window {
            return Err(PredictorError::ShapeMismatch { expected: self.window, got: window.len() });
        }
        Ok(())
    }

    fn head(&self, hf: &[T], hb: &[T]) -> T {
        let w = self.head_weights();
        hf.iter().chain(hb).zip(w).fold(self.head_bias(), |acc, (h, w)| acc + *h * *w)
    }

    /// Output for a normalized window, in normalized units.
    pub fn forward(&self, window: &[T]) -> Result<T, PredictorError> {
        self.check(window)?;
        let hf = run_cell(self.forward_cell(), window.iter().copied(), None);
        let hb = run_cell(self.backward_cell(), window.iter().rev().copied(), None);
        Ok(self.head(&hf, &hb))
    }

    /// Prediction in kbps for a window in kbps.
    pub fn predict_kbps(&self, norm: &Normalizer<T>, window_kbps: &[T]) -> Result<T, PredictorError> {
        let w: Vec<T> = window_kbps.iter().map(|&v| norm.normalize(v)).collect();
        Ok(norm.denormalize(self.forward(&w)?))
    }

    /// Squared error `(y − target)²` on one normalized sample and its
    /// gradient by backpropagation through time.
    pub fn loss_and_grad(&self, sample: &WindowSample<T>) -> Result<(T, BiLstmGrads<T>), PredictorError> {
        self.check(&sample.history)?;
        let h = self.hidden;
        let mut fcache = Vec::with_capacity(self.window);
        let mut bcache = Vec::with_capacity(self.window);
        let hf = run_cell(self.forward_cell(), sample.history.iter().copied(), Some(&mut fcache));
        let hb = run_cell(self.backward_cell(), sample.history.iter().rev().copied(), Some(&mut bcache));
        let y = self.head(&hf, &hb);
        let err = y - sample.target;
        let dy = T::lit(2.0) * err;

        let mut g = vec![T::zero(); self.theta.len()];
        let cl = cell_len(h);
        let head_w = self.head_weights();
        let dhf: Vec<T> = head_w[..h].iter().map(|w| dy * *w).collect();
        let dhb: Vec<T> = head_w[h..].iter().map(|w| dy * *w).collect();
        backprop_cell(self.forward_cell(), &fcache, &dhf, &mut g[..cl]);
        backprop_cell(self.backward_cell(), &bcache, &dhb, &mut g[cl..2 * cl]);
        for (j, hv) in hf.iter().chain(&hb).enumerate() {
            g[2 * cl + j] = dy * *hv;
        }
        let last = g.len() - 1;
        g[last] = dy;
        Ok((err * err, BiLstmGrads(g)))
    }
}

/// Prediction in kbps, with the normalizer stored alongside the model.
pub fn bilstm_forward<T: Real>(
    params: &BiLstmParams<T>,
    norm: &Normalizer<T>,
    window_kbps: &[T],
) -> Result<T, PredictorError> {
    params.predict_kbps(norm, window_kbps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmConfig {
    pub window: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Global gradient-norm clip; 0 disables clipping.
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for BiLstmConfig {
    fn default() -> Self {
        Self { window: 10, hidden: 16, epochs: 200, learning_rate: 0.01, clip_norm: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmFit<T> {
    pub params: BiLstmParams<T>,
    /// Mean squared error of each epoch, accumulated before each update.
    pub epoch_losses: Vec<T>,
}

/// Per-sample SGD with BPTT, samples reshuffled every epoch.
pub fn bilstm_train<T: Real>(
    samples: &[WindowSample<T>],
    config: &BiLstmConfig,
) -> Result<BiLstmFit<T>, PredictorError> {
    if samples.is_empty() {
        return Err(PredictorError::EmptyDataset);
    }
    if config.window == 0 || config.hidden == 0 {
        return Err(PredictorError::InvalidConfig("window and hidden size must be positive".into()));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) || config.clip_norm.is_nan() || config.clip_norm < 0.0 {
        return Err(PredictorError::InvalidConfig("learning rate must be positive, clip non-negative".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.history.len() != config.window) {
        return Err(PredictorError::ShapeMismatch { expected: config.window, got: s.history.len() });
    }

    let mut params = BiLstmParams::init(config.window, config.hidden, config.seed);
    let lr = T::lit(config.learning_rate);
    let clip = T::lit(config.clip_norm);
    let mut rng = stream_rng(config.seed, stream::SHUFFLE);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let count = T::from_usize(samples.len()).expect("sample count fits");

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = T::zero();
        for &i in &order {
            let (loss, BiLstmGrads(mut g)) = params.loss_and_grad(&samples[i])?;
            total = total + loss;
            if clip > T::zero() {
                let norm = g.iter().fold(T::zero(), |a, v| a + *v * *v).sqrt();
                if norm > clip {
                    let s = clip / norm;
                    g.iter_mut().for_each(|v| *v = *v * s);
                }
            }
            for (p, d) in params.theta.iter_mut().zip(&g) {
                *p = *p - lr * *d;
            }
        }
        let mse = total / count;
        log::trace!("bilstm epoch {epoch}: mse {mse}");
        epoch_losses.push(mse);
    }
    if params.theta.iter().any(|v| !v.is_finite()) {
        return Err(PredictorError::InvalidConfig("training diverged to non-finite parameters".into()));
    }
    Ok(BiLstmFit { params, epoch_losses })
}
