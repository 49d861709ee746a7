//! Small frame-level speaker encoder with temporal statistics pooling.
//!
//! `features (T x in) -> [affine + tanh] x L -> pool over time -> affine -> embedding`
//!
//! Gradients are derived by hand and checked against finite differences in
//! the test suite. Because pooling is order-free, the whole encoder is
//! invariant to permutations of the input frames.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::FeatureMatrix;
use crate::error::{Error, Result};

pub type Embedding = Array1<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    /// Per-dimension temporal standard deviation.
    Std,
    /// Temporal mean concatenated with standard deviation.
    MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub embed_dim: usize,
    pub pooling: Pooling,
    /// Added to the variance before the square root.
    pub std_floor: f64,
    pub init_seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            input_dim: 64,
            hidden: vec![64, 64],
            embed_dim: 32,
            pooling: Pooling::Std,
            std_floor: 1e-8,
            init_seed: 0,
        }
    }
}

impl EncoderConfig {
    fn pooled_dim(&self) -> usize {
        let width = *self.hidden.last().unwrap_or(&self.input_dim);
        match self.pooling {
            Pooling::Std => width,
            Pooling::MeanStd => 2 * width,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.embed_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::InvalidParam("encoder dimensions must be positive".into()));
        }
        if !(self.std_floor >= 0.0) {
            return Err(Error::InvalidParam("std_floor must be non-negative".into()));
        }
        Ok(())
    }
}

/// Affine map `y = x W + b` with `W` stored `in x out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    fn zeros(inp: usize, out: usize) -> Self {
        Self {
            weight: Array2::zeros((inp, out)),
            bias: Array1::zeros(out),
        }
    }

    fn uniform<R: Rng>(inp: usize, out: usize, rng: &mut R) -> Self {
        let a = (1.0 / inp as f64).sqrt();
        Self {
            weight: Array2::from_shape_simple_fn((inp, out), || rng.gen_range(-a..=a)),
            bias: Array1::zeros(out),
        }
    }
}

/// Trainable encoder weights plus the architecture they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub config: EncoderConfig,
    pub layers: Vec<Dense>,
    pub projection: Dense,
}

/// Gradient buffers mirroring [`EncoderParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderGrads {
    pub layers: Vec<Dense>,
    pub projection: Dense,
}

fn layer_dims(cfg: &EncoderConfig) -> Vec<(usize, usize)> {
    let mut dims = Vec::new();
    let mut inp = cfg.input_dim;
    for &h in &cfg.hidden {
        dims.push((inp, h));
        inp = h;
    }
    dims
}

impl EncoderParams {
    /// Seeded uniform initialization in `[-sqrt(1/fan_in), sqrt(1/fan_in)]`, zero biases.
    pub fn init(config: EncoderConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.init_seed);
        let layers = layer_dims(&config)
            .into_iter()
            .map(|(i, o)| Dense::uniform(i, o, &mut rng))
            .collect();
        let projection = Dense::uniform(config.pooled_dim(), config.embed_dim, &mut rng);
        Ok(Self {
            config,
            layers,
            projection,
        })
    }

    pub fn zeros(config: EncoderConfig) -> Result<Self> {
        config.validate()?;
        let layers = layer_dims(&config).into_iter().map(|(i, o)| Dense::zeros(i, o)).collect();
        let projection = Dense::zeros(config.pooled_dim(), config.embed_dim);
        Ok(Self {
            config,
            layers,
            projection,
        })
    }

    pub fn zero_grads(&self) -> EncoderGrads {
        EncoderGrads {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.weight.nrows(), l.weight.ncols()))
                .collect(),
            projection: Dense::zeros(self.projection.weight.nrows(), self.projection.weight.ncols()),
        }
    }

    pub fn embed_dim(&self) -> usize {
        self.config.embed_dim
    }

    /// All tensors in a fixed order: per layer weight then bias, projection last.
    pub fn tensors(&self) -> Vec<ArrayView2<'_, f64>> {
        dense_views(&self.layers, &self.projection)
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        dense_slices_mut(&mut self.layers, &mut self.projection)
    }

    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for i in 0..self.layers.len() {
            names.push(format!("layer{i}.weight"));
            names.push(format!("layer{i}.bias"));
        }
        names.push("projection.weight".into());
        names.push("projection.bias".into());
        names
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Rebuilds parameters from tensors in [`EncoderParams::tensors`] order.
    pub fn from_tensors(config: EncoderConfig, tensors: Vec<Array2<f64>>) -> Result<Self> {
        let mut p = Self::zeros(config)?;
        let expected: Vec<(usize, usize)> = p.tensors().iter().map(|t| t.dim()).collect();
        if tensors.len() != expected.len() {
            return Err(Error::Shape(format!(
                "expected {} encoder tensors, got {}",
                expected.len(),
                tensors.len()
            )));
        }
        for (i, (t, dim)) in tensors.iter().zip(&expected).enumerate() {
            if t.dim() != *dim {
                return Err(Error::Shape(format!("tensor {i}: expected {dim:?}, got {:?}", t.dim())));
            }
        }
        for (dst, src) in p.tensors_mut().into_iter().zip(&tensors) {
            dst.copy_from_slice(src.as_slice().expect("standard layout"));
        }
        Ok(p)
    }
}

impl EncoderGrads {
    pub fn tensors(&self) -> Vec<ArrayView2<'_, f64>> {
        dense_views(&self.layers, &self.projection)
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        dense_slices_mut(&mut self.layers, &mut self.projection)
    }

    pub fn fill(&mut self, v: f64) {
        for t in self.tensors_mut() {
            t.fill(v);
        }
    }

    pub fn add_assign(&mut self, other: &EncoderGrads) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += y;
            }
        }
    }
}

fn dense_views<'a>(layers: &'a [Dense], projection: &'a Dense) -> Vec<ArrayView2<'a, f64>> {
    let mut out = Vec::with_capacity(2 * layers.len() + 2);
    for l in layers.iter().chain(std::iter::once(projection)) {
        out.push(l.weight.view());
        out.push(l.bias.view().insert_axis(Axis(0)));
    }
    out
}

fn dense_slices_mut<'a>(layers: &'a mut [Dense], projection: &'a mut Dense) -> Vec<&'a mut [f64]> {
    let mut out = Vec::with_capacity(2 * layers.len() + 2);
    for l in layers.iter_mut().chain(std::iter::once(projection)) {
        out.push(l.weight.as_slice_mut().expect("standard layout"));
        out.push(l.bias.as_slice_mut().expect("standard layout"));
    }
    out
}

/// Temporal pooling of a `T x width` activation matrix.
///
/// Uses the population variance; `floor` is added under the square root.
/// A single frame has zero variance.
pub fn pool_stats(act: ArrayView2<'_, f64>, mode: Pooling, floor: f64) -> Result<Array1<f64>> {
    let (mean, std) = mean_std(act, floor)?;
    Ok(match mode {
        Pooling::Std => std,
        Pooling::MeanStd => ndarray::concatenate(Axis(0), &[mean.view(), std.view()]).expect("1-d"),
    })
}

fn mean_std(act: ArrayView2<'_, f64>, floor: f64) -> Result<(Array1<f64>, Array1<f64>)> {
    let t = act.nrows();
    if t == 0 {
        return Err(Error::Shape("pooling needs at least one frame".into()));
    }
    let mean = act.mean_axis(Axis(0)).expect("non-empty");
    let centered = &act - &mean;
    let var = centered.mapv(|v| v * v).sum_axis(Axis(0)) / t as f64;
    Ok((mean, var.mapv(|v| (v + floor).sqrt())))
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Array2<f64>,
    /// Post-tanh activations, one per frame layer.
    activations: Vec<Array2<f64>>,
    mean: Array1<f64>,
    std: Array1<f64>,
    pooled: Array1<f64>,
}

impl ForwardCache {
    pub fn pooled(&self) -> &Array1<f64> {
        &self.pooled
    }
}

fn check_input(features: &FeatureMatrix, params: &EncoderParams) -> Result<()> {
    if features.n_bins() != params.config.input_dim {
        return Err(Error::Shape(format!(
            "features have {} bins, encoder expects {}",
            features.n_bins(),
            params.config.input_dim
        )));
    }
    if features.n_frames() == 0 {
        return Err(Error::Shape("features have no frames".into()));
    }
    Ok(())
}

/// Hyperbolic tangent within 4e-16 absolute of `f64::tanh`, branch-free so
/// that activation maps vectorize. `exp` uses Cody-Waite reduction by ln 2
/// and a degree-12 Taylor polynomial on |r| <= ln(2) / 2; |x| is clamped to
/// 20, where tanh rounds to +-1.
#[inline(always)]
pub fn tanh(x: f64) -> f64 {
    const LN2_HI: f64 = 6.931_471_803_691_238e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    // 1.5 * 2^52: adding it rounds to an integer held in the low mantissa bits
    const SHIFT: f64 = 6_755_399_441_055_744.0;
    const INV_FACT: [f64; 13] = [
        1.0 / 479_001_600.0,
        1.0 / 39_916_800.0,
        1.0 / 3_628_800.0,
        1.0 / 362_880.0,
        1.0 / 40_320.0,
        1.0 / 5_040.0,
        1.0 / 720.0,
        1.0 / 120.0,
        1.0 / 24.0,
        1.0 / 6.0,
        0.5,
        1.0,
        1.0,
    ];
    let y = 2.0 * x.clamp(-20.0, 20.0);
    let shifted = y * std::f64::consts::LOG2_E + SHIFT;
    let k = shifted - SHIFT;
    let r = (y - k * LN2_HI) - k * LN2_LO;
    let mut p = INV_FACT[0];
    for c in &INV_FACT[1..] {
        p = p * r + c;
    }
    // k sits in the low mantissa bits; shifting (k + 1023) into the exponent
    // field builds 2^k for |k| <= 58
    let e = p * f64::from_bits(shifted.to_bits().wrapping_add(1023) << 52);
    (e - 1.0) / (e + 1.0)
}

pub fn forward(features: &FeatureMatrix, params: &EncoderParams) -> Result<Embedding> {
    Ok(forward_cached(features, params)?.0)
}

pub fn forward_cached(features: &FeatureMatrix, params: &EncoderParams) -> Result<(Embedding, ForwardCache)> {
    check_input(features, params)?;
    let input = features.values().to_owned();
    let mut activations: Vec<Array2<f64>> = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let prev = activations.last().unwrap_or(&input);
        let mut z = prev.dot(&layer.weight);
        z += &layer.bias;
        z.mapv_inplace(tanh);
        activations.push(z);
    }
    let last = activations.last().unwrap_or(&input);
    let (mean, std) = mean_std(last.view(), params.config.std_floor)?;
    let pooled = match params.config.pooling {
        Pooling::Std => std.clone(),
        Pooling::MeanStd => ndarray::concatenate(Axis(0), &[mean.view(), std.view()]).expect("1-d"),
    };
    let mut emb = pooled.dot(&params.projection.weight);
    emb += &params.projection.bias;
    Ok((
        emb,
        ForwardCache {
            input,
            activations,
            mean,
            std,
            pooled,
        },
    ))
}

/// Back-propagates `upstream = dL/d(embedding)`, accumulating parameter
/// gradients into `grads`. Returns `dL/d(features)` when requested.
pub fn backward_into(
    cache: &ForwardCache,
    params: &EncoderParams,
    upstream: ArrayView1<'_, f64>,
    grads: &mut EncoderGrads,
    want_input_grad: bool,
) -> Option<Array2<f64>> {
    let pooled_col = cache.pooled.view().insert_axis(Axis(1));
    let up_row = upstream.insert_axis(Axis(0));
    general_mat_mul(1.0, &pooled_col, &up_row, 1.0, &mut grads.projection.weight);
    grads.projection.bias += &upstream;
    let d_pooled = params.projection.weight.dot(&upstream);

    let width = cache.std.len();
    let (d_mean, d_std) = match params.config.pooling {
        Pooling::Std => (None, d_pooled.view()),
        Pooling::MeanStd => (Some(d_pooled.slice(s![..width])), d_pooled.slice(s![width..])),
    };
    let last = cache.activations.last().unwrap_or(&cache.input);
    let t = last.nrows() as f64;
    // d std_k / d h_tk = (h_tk - mean_k) / (T std_k)
    let coef = &d_std / &(cache.std.mapv(|s| s * t));
    let mut d_act = (last - &cache.mean) * &coef;
    if let Some(dm) = d_mean {
        d_act += &(dm.mapv(|v| v / t));
    }

    for (l, layer) in params.layers.iter().enumerate().rev() {
        let act = &cache.activations[l];
        // tanh' = 1 - h^2
        let mut dz = d_act;
        dz.zip_mut_with(act, |d, &h| *d *= 1.0 - h * h);
        let prev = if l == 0 { &cache.input } else { &cache.activations[l - 1] };
        general_mat_mul(1.0, &prev.t(), &dz, 1.0, &mut grads.layers[l].weight);
        grads.layers[l].bias += &dz.sum_axis(Axis(0));
        if l == 0 && !want_input_grad {
            return None;
        }
        d_act = dz.dot(&layer.weight.t());
    }
    // no frame layers: d_act is already the input gradient
    want_input_grad.then_some(d_act)
}

/// Fresh gradients of `upstream . embedding` with respect to every
/// parameter and the input features.
pub fn backward(
    features: &FeatureMatrix,
    params: &EncoderParams,
    upstream: ArrayView1<'_, f64>,
) -> Result<(EncoderGrads, Array2<f64>)> {
    if upstream.len() != params.embed_dim() {
        return Err(Error::Shape(format!(
            "upstream gradient has {} entries, embedding has {}",
            upstream.len(),
            params.embed_dim()
        )));
    }
    let (_, cache) = forward_cached(features, params)?;
    let mut grads = params.zero_grads();
    let dx = backward_into(&cache, params, upstream, &mut grads, true).expect("requested");
    Ok((grads, dx))
}
