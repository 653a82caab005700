//! Variance-preserving score-based diffusion over log-signature vectors:
//! closed-form forward perturbation, denoising score matching with exact
//! reverse-mode gradients, Adam training, and probability-flow-ODE
//! sampling with a fixed-step RK4 scheme.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;

/// Training-time lower bound on the diffusion time, avoiding the vanishing
/// conditional variance at t = 0.
pub const T_FLOOR: f64 = 1e-5;

/// Probability-flow ODE discretisation steps.
pub const ODE_STEPS: usize = 128;

/// Linear noise schedule `beta(t) = beta_min + t (beta_max - beta_min)` on
/// t in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self { beta_min: 0.1, beta_max: 5.0 }
    }
}

impl NoiseSchedule {
    pub fn new(beta_min: f64, beta_max: f64) -> Result<Self> {
        if !(beta_min > 0.0 && beta_min <= beta_max) {
            return Err(Error::Domain(format!(
                "noise schedule needs 0 < beta_min <= beta_max, got ({beta_min}, {beta_max})"
            )));
        }
        Ok(Self { beta_min, beta_max })
    }

    pub fn beta(&self, t: f64) -> f64 {
        self.beta_min + t * (self.beta_max - self.beta_min)
    }

    /// `B(t) = int_0^t beta(s) ds`, in closed form.
    pub fn beta_integral(&self, t: f64) -> f64 {
        self.beta_min * t + 0.5 * (self.beta_max - self.beta_min) * t * t
    }

    /// Mean shrink factor `exp(-B(t)/2)` of the VP marginal.
    pub fn mean_factor(&self, t: f64) -> f64 {
        (-0.5 * self.beta_integral(t)).exp()
    }

    /// Marginal standard deviation `sqrt(1 - exp(-B(t)))`.
    pub fn sigma(&self, t: f64) -> f64 {
        (1.0 - (-self.beta_integral(t)).exp()).sqrt()
    }
}

/// Closed-form VP forward marginal: perturbs `x0` to time `t` using the
/// provided standard-normal noise vector. Returns the perturbed state and
/// the scale `1/sigma(t)` multiplying `-noise` in the denoising
/// score-matching target (infinite at t = 0, where the conditional
/// distribution degenerates).
pub fn forward_perturb(
    x0: &[f64],
    t: f64,
    schedule: &NoiseSchedule,
    noise: &[f64],
) -> Result<(Vec<f64>, f64)> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("diffusion time {t} outside [0, 1]")));
    }
    if x0.len() != noise.len() {
        return Err(Error::Shape(format!(
            "state width {} does not match noise width {}",
            x0.len(),
            noise.len()
        )));
    }
    let mf = schedule.mean_factor(t);
    let sigma = schedule.sigma(t);
    let xt = x0.iter().zip(noise.iter()).map(|(&x, &z)| x * mf + sigma * z).collect();
    Ok((xt, 1.0 / sigma))
}

/// Two-hidden-layer fully connected score network with tanh activations
/// and a sinusoidal embedding of the diffusion time concatenated to the
/// input. Parameters live in one flat vector so optimizers and
/// finite-difference checks can treat the network generically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreNet {
    pub data_width: usize,
    pub hidden: usize,
    pub emb_width: usize,
    pub params: Vec<f64>,
}

impl ScoreNet {
    pub fn param_count(data_width: usize, hidden: usize, emb_width: usize) -> usize {
        let input = data_width + emb_width;
        hidden * input + hidden + hidden * hidden + hidden + data_width * hidden + data_width
    }

    /// Xavier-uniform initialization from the given RNG.
    pub fn init(data_width: usize, hidden: usize, emb_width: usize, rng: &mut ChaCha12Rng) -> Self {
        assert!(data_width > 0 && hidden > 0, "network widths must be positive");
        let input = data_width + emb_width;
        let mut params = Vec::with_capacity(Self::param_count(data_width, hidden, emb_width));
        let mut layer = |fan_in: usize, fan_out: usize, params: &mut Vec<f64>| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(rng.gen_range(-limit..limit));
            }
            for _ in 0..fan_out {
                params.push(0.0);
            }
        };
        layer(input, hidden, &mut params);
        layer(hidden, hidden, &mut params);
        layer(hidden, data_width, &mut params);
        ScoreNet { data_width, hidden, emb_width, params }
    }

    fn time_embedding(&self, t: f64, out: &mut [f64]) {
        let pairs = self.emb_width / 2;
        for i in 0..pairs {
            let exponent = if pairs > 1 { i as f64 / (pairs - 1) as f64 } else { 0.0 };
            let freq = 1000f64.powf(exponent);
            out[2 * i] = (freq * t).sin();
            out[2 * i + 1] = (freq * t).cos();
        }
        if self.emb_width % 2 == 1 {
            out[self.emb_width - 1] = t;
        }
    }

    // parameter block offsets: (w1, b1, w2, b2, w3, b3)
    fn offsets(&self) -> (usize, usize, usize, usize, usize, usize) {
        let input = self.data_width + self.emb_width;
        let w1 = 0;
        let b1 = w1 + self.hidden * input;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden * self.hidden;
        let w3 = b2 + self.hidden;
        let b3 = w3 + self.data_width * self.hidden;
        (w1, b1, w2, b2, w3, b3)
    }

    fn forward_cached(&self, t: f64, x: &[f64]) -> NetActivations {
        debug_assert_eq!(x.len(), self.data_width);
        let input = self.data_width + self.emb_width;
        let mut z0 = vec![0.0; input];
        z0[..self.data_width].copy_from_slice(x);
        self.time_embedding(t, &mut z0[self.data_width..]);
        let (w1, b1, w2, b2, w3, b3) = self.offsets();
        let p = &self.params;

        let mut h1 = vec![0.0; self.hidden];
        for r in 0..self.hidden {
            let mut acc = p[b1 + r];
            let row = w1 + r * input;
            for c in 0..input {
                acc += p[row + c] * z0[c];
            }
            h1[r] = acc.tanh();
        }
        let mut h2 = vec![0.0; self.hidden];
        for r in 0..self.hidden {
            let mut acc = p[b2 + r];
            let row = w2 + r * self.hidden;
            for c in 0..self.hidden {
                acc += p[row + c] * h1[c];
            }
            h2[r] = acc.tanh();
        }
        let mut out = vec![0.0; self.data_width];
        for r in 0..self.data_width {
            let mut acc = p[b3 + r];
            let row = w3 + r * self.hidden;
            for c in 0..self.hidden {
                acc += p[row + c] * h2[c];
            }
            out[r] = acc;
        }
        NetActivations { z0, h1, h2, out }
    }

    /// Score estimate `s(t, x)`.
    pub fn forward(&self, t: f64, x: &[f64]) -> Vec<f64> {
        self.forward_cached(t, x).out
    }

    // reverse-mode accumulation of d<dout, out>/dparams into `grad`
    fn backward(&self, acts: &NetActivations, dout: &[f64], grad: &mut [f64]) {
        let input = self.data_width + self.emb_width;
        let (w1, b1, w2, b2, w3, b3) = self.offsets();
        let p = &self.params;

        // output layer
        let mut dh2 = vec![0.0; self.hidden];
        for r in 0..self.data_width {
            let row = w3 + r * self.hidden;
            grad[b3 + r] += dout[r];
            for c in 0..self.hidden {
                grad[row + c] += dout[r] * acts.h2[c];
                dh2[c] += dout[r] * p[row + c];
            }
        }
        // second hidden layer (tanh' = 1 - h^2)
        let mut dh1 = vec![0.0; self.hidden];
        for r in 0..self.hidden {
            let dpre = dh2[r] * (1.0 - acts.h2[r] * acts.h2[r]);
            let row = w2 + r * self.hidden;
            grad[b2 + r] += dpre;
            for c in 0..self.hidden {
                grad[row + c] += dpre * acts.h1[c];
                dh1[c] += dpre * p[row + c];
            }
        }
        // first hidden layer
        for r in 0..self.hidden {
            let dpre = dh1[r] * (1.0 - acts.h1[r] * acts.h1[r]);
            let row = w1 + r * input;
            grad[b1 + r] += dpre;
            for c in 0..input {
                grad[row + c] += dpre * acts.z0[c];
            }
        }
    }
}

struct NetActivations {
    z0: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
    out: Vec<f64>,
}

/// Denoising score-matching loss over a batch and its exact gradient.
///
/// Per example: draw `t ~ U[T_FLOOR, 1]`, then a standard-normal noise
/// vector (in that order); perturb with the closed-form VP marginal; the
/// regression target is the conditional score `-noise / sigma(t)`. The
/// squared error is weighted by `sigma(t)^2` (the standard VP weighting,
/// equivalently `|sigma s + noise|^2`), which keeps the per-time
/// contributions bounded; the unweighted target variance grows like
/// `1/sigma^2` near t = 0 and swamps the gradient signal.
pub fn dsm_loss_and_grads(
    net: &ScoreNet,
    batch: &[Vec<f64>],
    schedule: &NoiseSchedule,
    rng: &mut ChaCha12Rng,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::Input("empty batch".into()));
    }
    let w = net.data_width;
    if let Some(bad) = batch.iter().find(|x| x.len() != w) {
        return Err(Error::Shape(format!(
            "batch entry of width {} does not match network width {w}",
            bad.len()
        )));
    }
    let mut grad = vec![0.0; net.params.len()];
    let mut loss = 0.0;
    let denom = (batch.len() * w) as f64;
    let mut noise = vec![0.0; w];
    for x0 in batch {
        let t = T_FLOOR + (1.0 - T_FLOOR) * rng.gen::<f64>();
        for z in noise.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        let (xt, scale) = forward_perturb(x0, t, schedule, &noise)?;
        let sigma = 1.0 / scale;
        let acts = net.forward_cached(t, &xt);
        // residual sigma * (out - target) = sigma * out + noise;
        // d(loss)/d(out_r) = 2 sigma^2 (out_r - target_r) / (batch * width)
        let mut dout = vec![0.0; w];
        for r in 0..w {
            let resid = sigma * acts.out[r] + noise[r];
            loss += resid * resid / denom;
            dout[r] = 2.0 * sigma * resid / denom;
        }
        net.backward(&acts, &dout, &mut grad);
    }
    Ok((loss, grad))
}

/// Training hyperparameters. Defaults follow the pipeline configuration:
/// Adam at learning rate 1e-3, batch 128, 1200 epochs, hidden width 64.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    pub emb_width: usize,
    pub schedule: NoiseSchedule,
    pub seed: u64,
    /// Coordinate-system identifier recorded in the checkpoint (the Lyndon
    /// fingerprint when training on log-signature embeddings).
    pub fingerprint: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1200,
            batch_size: 128,
            learning_rate: 1e-3,
            hidden: 64,
            emb_width: 16,
            schedule: NoiseSchedule::default(),
            seed: 0,
            fingerprint: String::new(),
        }
    }
}

/// Persisted generative model: network weights, schedule, per-coordinate
/// normalization, and provenance. Serialized as versioned JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreCheckpoint {
    pub version: u32,
    pub schedule: NoiseSchedule,
    pub data_width: usize,
    pub hidden: usize,
    pub emb_width: usize,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub params: Vec<f64>,
    pub fingerprint: String,
    pub seed: u64,
    pub epochs: usize,
    pub loss_history: Vec<f64>,
}

pub const CHECKPOINT_VERSION: u32 = 1;

impl ScoreCheckpoint {
    pub fn net(&self) -> ScoreNet {
        ScoreNet {
            data_width: self.data_width,
            hidden: self.hidden,
            emb_width: self.emb_width,
            params: self.params.clone(),
        }
    }
}

/// Standardize coordinates, train the score network with Adam over
/// shuffled minibatches, and return the checkpoint. Deterministic given
/// the config seed.
pub fn train(data: &[Vec<f64>], cfg: &TrainConfig) -> Result<ScoreCheckpoint> {
    if data.is_empty() {
        return Err(Error::Input("training data is empty".into()));
    }
    let w = data[0].len();
    if w == 0 || data.iter().any(|x| x.len() != w) {
        return Err(Error::Input("training vectors must share a positive width".into()));
    }
    for (i, x) in data.iter().enumerate() {
        if let Some(c) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value in training vector {i}, coordinate {c}"
            )));
        }
    }

    let n = data.len() as f64;
    let mut mean = vec![0.0; w];
    for x in data {
        for (m, v) in mean.iter_mut().zip(x.iter()) {
            *m += v / n;
        }
    }
    let mut scale = vec![0.0; w];
    for x in data {
        for c in 0..w {
            let d = x[c] - mean[c];
            scale[c] += d * d / n;
        }
    }
    for s in scale.iter_mut() {
        *s = s.sqrt();
        // constant coordinates (e.g. the deterministic time-channel
        // increment) keep scale 1 so they stay strictly positive
        if !(*s > 1e-12) {
            *s = 1.0;
        }
    }
    let normalized: Vec<Vec<f64>> = data
        .iter()
        .map(|x| x.iter().zip(mean.iter().zip(scale.iter())).map(|(v, (m, s))| (v - m) / s).collect())
        .collect();

    let mut init_rng = stream(cfg.seed, "diffusion:init");
    let mut net = ScoreNet::init(w, cfg.hidden, cfg.emb_width, &mut init_rng);

    let mut shuffle_rng = stream(cfg.seed, "diffusion:shuffle");
    let mut dsm_rng = stream(cfg.seed, "diffusion:dsm");
    let np = net.params.len();
    let mut m1 = vec![0.0; np];
    let mut m2 = vec![0.0; np];
    let (b1, b2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
    let mut step = 0usize;
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let batch_size = cfg.batch_size.max(1);

    for _epoch in 0..cfg.epochs {
        // Fisher-Yates shuffle
        for i in (1..order.len()).rev() {
            let j = shuffle_rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(batch_size) {
            let batch: Vec<Vec<f64>> = chunk.iter().map(|&i| normalized[i].clone()).collect();
            let (loss, grad) = dsm_loss_and_grads(&net, &batch, &cfg.schedule, &mut dsm_rng)?;
            step += 1;
            let bc1 = 1.0 - b1.powi(step as i32);
            let bc2 = 1.0 - b2.powi(step as i32);
            for i in 0..np {
                m1[i] = b1 * m1[i] + (1.0 - b1) * grad[i];
                m2[i] = b2 * m2[i] + (1.0 - b2) * grad[i] * grad[i];
                let mhat = m1[i] / bc1;
                let vhat = m2[i] / bc2;
                net.params[i] -= cfg.learning_rate * mhat / (vhat.sqrt() + eps);
            }
            epoch_loss += loss;
            batches += 1;
        }
        loss_history.push(epoch_loss / batches as f64);
    }

    Ok(ScoreCheckpoint {
        version: CHECKPOINT_VERSION,
        schedule: cfg.schedule,
        data_width: w,
        hidden: cfg.hidden,
        emb_width: cfg.emb_width,
        mean,
        scale,
        params: net.params,
        fingerprint: cfg.fingerprint.clone(),
        seed: cfg.seed,
        epochs: cfg.epochs,
        loss_history,
    })
}

/// Integrate the probability-flow ODE `dx = -1/2 beta(t) [x + s(t, x)] dt`
/// from t = 1 to t = 0 with fixed-step classic RK4, starting from standard
/// normal draws. The score function acts in the (normalized) sampling
/// space.
pub fn sample_with_score<F>(
    score: F,
    width: usize,
    count: usize,
    steps: usize,
    schedule: &NoiseSchedule,
    rng: &mut ChaCha12Rng,
) -> Vec<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let h = -1.0 / steps as f64;
    let drift = |t: f64, x: &[f64]| -> Vec<f64> {
        let s = score(t, x);
        let half_beta = 0.5 * schedule.beta(t);
        x.iter().zip(s.iter()).map(|(&xi, &si)| -half_beta * (xi + si)).collect()
    };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x: Vec<f64> = (0..width).map(|_| rng.sample(StandardNormal)).collect();
        let mut t = 1.0;
        for _ in 0..steps {
            let k1 = drift(t, &x);
            let x2: Vec<f64> =
                x.iter().zip(k1.iter()).map(|(&xi, &k)| xi + 0.5 * h * k).collect();
            let k2 = drift(t + 0.5 * h, &x2);
            let x3: Vec<f64> =
                x.iter().zip(k2.iter()).map(|(&xi, &k)| xi + 0.5 * h * k).collect();
            let k3 = drift(t + 0.5 * h, &x3);
            let x4: Vec<f64> = x.iter().zip(k3.iter()).map(|(&xi, &k)| xi + h * k).collect();
            let k4 = drift(t + h, &x4);
            for i in 0..width {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
        }
        out.push(x);
    }
    out
}

/// Draw `count` vectors from a trained checkpoint (de-normalized back to
/// data coordinates). Deterministic given the RNG state.
pub fn sample(ckpt: &ScoreCheckpoint, count: usize, rng: &mut ChaCha12Rng) -> Vec<Vec<f64>> {
    let net = ckpt.net();
    let mut raw = sample_with_score(
        |t, x| net.forward(t, x),
        ckpt.data_width,
        count,
        ODE_STEPS,
        &ckpt.schedule,
        rng,
    );
    for x in raw.iter_mut() {
        for (i, v) in x.iter_mut().enumerate() {
            *v = *v * ckpt.scale[i] + ckpt.mean[i];
        }
    }
    raw
}
