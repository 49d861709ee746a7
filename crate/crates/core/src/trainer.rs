//! Plain SGD training of the encoder and AAM head, either on single samples
//! or on Siamese `(x, x')` pairs with the combined objective.
//!
//! One generator drives everything random in a run (epoch order, partner
//! choice, segment positions, crops, masks), so a run is fully determined
//! by its seed, configuration and corpus, and resuming from an
//! end-of-epoch checkpoint continues bit-exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{build_pair, CopyPasteConfig, CorpusIndex, CpScheme, FeatureBank, Sample, TrainPair, Utterance};
use crate::dsp::{mean_normalize, LogMel, MelConfig};
use crate::encoder::{backward_into, forward, forward_cached, Embedding, EncoderConfig, EncoderGrads, EncoderParams};
use crate::error::{Error, Result};
use crate::masking::{apply_em, partition_zones, random_mask_plan, select_mask_centers, MaskConfig, MaskPlan, ZoneThresholds};
use crate::objective::{aam_softmax_loss, erl_loss, margin_schedule, AamHead, ErlConfig};

/// CopyPaste setting for a run; `None` trains on plain samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairScheme {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "S-CP")]
    Same,
    #[serde(rename = "D-CP")]
    Different,
    #[serde(rename = "S+D-CP")]
    Both,
}

impl PairScheme {
    pub fn copy_paste(self) -> Option<CpScheme> {
        match self {
            PairScheme::None => None,
            PairScheme::Same => Some(CpScheme::Same),
            PairScheme::Different => Some(CpScheme::Different),
            PairScheme::Both => Some(CpScheme::Both),
        }
    }
}

impl fmt::Display for PairScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.copy_paste() {
            None => f.write_str("none"),
            Some(s) => s.fmt(f),
        }
    }
}

impl FromStr for PairScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("none") {
            return Ok(PairScheme::None);
        }
        Ok(match s.parse::<CpScheme>()? {
            CpScheme::Same => PairScheme::Same,
            CpScheme::Different => PairScheme::Different,
            CpScheme::Both => PairScheme::Both,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Masking {
    None,
    /// Energy-aware: centers from the dominant RMS zone.
    Em,
    /// Random: centers uniform over all frames.
    Rm,
}

impl fmt::Display for Masking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Masking::None => "none",
            Masking::Em => "EM",
            Masking::Rm => "RM",
        })
    }
}

impl FromStr for Masking {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Masking::None),
            "em" => Ok(Masking::Em),
            "rm" => Ok(Masking::Rm),
            other => Err(Error::InvalidParam(format!(
                "unknown masking {other:?}; allowed: none, em, rm"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// AAM-Softmax on single samples.
    Aam,
    /// AAM on both pair members plus the weighted cosine term.
    Erl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Samples per step, or pairs per step under the pair objective.
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub momentum: f64,
    /// Multiply the learning rate by this factor every `lr_decay_every` steps
    /// (`0` disables).
    pub lr_decay_factor: f64,
    pub lr_decay_every: u64,
    pub epochs: u64,
    pub scheme: PairScheme,
    pub objective: Objective,
    /// Chance of replacing a sample by its CopyPaste version under the
    /// single-sample objective.
    pub cp_probability: f64,
    pub masking: Masking,
    pub mask: MaskConfig,
    pub zones: ZoneThresholds,
    pub erl: ErlConfig,
    pub scale: f64,
    pub margin: f64,
    pub margin_warmup_steps: u64,
    pub crop_secs: f64,
    pub copy_paste: CopyPasteConfig,
    pub encoder: EncoderConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 90,
            learning_rate: 0.001,
            weight_decay: 2e-5,
            momentum: 0.0,
            lr_decay_factor: 1.0,
            lr_decay_every: 0,
            epochs: 100,
            scheme: PairScheme::None,
            objective: Objective::Aam,
            cp_probability: 0.5,
            masking: Masking::None,
            mask: MaskConfig::default(),
            zones: ZoneThresholds::default(),
            erl: ErlConfig::default(),
            scale: 32.0,
            margin: 0.15,
            margin_warmup_steps: 0,
            crop_secs: 2.0,
            copy_paste: CopyPasteConfig::default(),
            encoder: EncoderConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate >= 0.0) || !(self.weight_decay >= 0.0) {
            return bad("learning_rate and weight_decay must be non-negative");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if !(self.crop_secs > 0.0) {
            return bad("crop_secs must be positive");
        }
        if !(0.0..=1.0).contains(&self.cp_probability) {
            return bad("cp_probability must lie in [0, 1]");
        }
        if self.masking != Masking::None && self.scheme == PairScheme::None {
            return bad("masking requires a CopyPaste scheme");
        }
        if self.objective == Objective::Erl && self.scheme == PairScheme::None {
            return bad("the pair objective requires a CopyPaste scheme");
        }
        if !(self.scale > 0.0) || !(self.margin >= 0.0) {
            return bad("scale must be positive and margin non-negative");
        }
        Ok(())
    }
}

/// Training corpus with cached features and speaker-to-class mapping.
#[derive(Debug, Clone)]
pub struct TrainData {
    pub index: CorpusIndex,
    pub bank: FeatureBank,
    /// Speaker label to AAM class index.
    pub classes: BTreeMap<u32, usize>,
}

impl TrainData {
    pub fn new(utterances: Vec<Utterance>, mel: &MelConfig) -> Result<Self> {
        let index = CorpusIndex::new(utterances)?;
        let bank = FeatureBank::new(index.utterances(), LogMel::new(mel.clone())?)?;
        let classes = index.speakers().into_iter().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self { index, bank, classes })
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn crop_frames(&self, cfg: &TrainConfig) -> Result<usize> {
        self.bank.logmel().config().frames_for_secs(cfg.crop_secs)
    }

    /// CopyPaste settings with segment starts on the feature hop grid.
    pub fn copy_paste_config(&self, cfg: &TrainConfig) -> CopyPasteConfig {
        CopyPasteConfig {
            align: self.bank.logmel().frame_spec().hop,
            ..cfg.copy_paste
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub encoder: EncoderParams,
    pub head: AamHead,
    pub step: u64,
    pub epoch: u64,
    pub rng: ChaCha8Rng,
    /// Momentum buffers (encoder, head) when momentum is enabled.
    pub velocity: Option<(EncoderGrads, Array2<f64>)>,
    /// Speaker labels in class order.
    pub speakers: Vec<u32>,
}

impl TrainState {
    pub fn init(data: &TrainData, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let encoder = EncoderParams::init(cfg.encoder.clone())?;
        let mut head_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        head_rng.set_stream(1);
        let d = cfg.encoder.embed_dim;
        let a = (1.0 / d as f64).sqrt();
        let weight = Array2::from_shape_simple_fn((d, data.num_classes()), || head_rng.gen_range(-a..=a));
        let head = AamHead::new(weight, cfg.scale, cfg.margin)?;
        let velocity = (cfg.momentum > 0.0).then(|| (encoder.zero_grads(), Array2::zeros(head.weight.dim())));
        Ok(Self {
            encoder,
            head,
            step: 0,
            epoch: 0,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            velocity,
            speakers: data.classes.keys().copied().collect(),
        })
    }

    /// Starts a new run of `cfg` from these parameters: step and epoch
    /// counters reset, the batch RNG is reseeded from `cfg.seed` and momentum
    /// buffers start at zero. The encoder layout (all of `cfg.encoder` except
    /// `init_seed`) and the speaker set must match.
    pub fn restart(self, data: &TrainData, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let layout = EncoderConfig {
            init_seed: self.encoder.config.init_seed,
            ..cfg.encoder.clone()
        };
        if self.encoder.config != layout {
            return Err(Error::Config("starting encoder layout differs from the configuration".into()));
        }
        if !self.speakers.iter().copied().eq(data.classes.keys().copied()) {
            return Err(Error::Config("starting model was trained on a different speaker set".into()));
        }
        let head = AamHead::new(self.head.weight, cfg.scale, cfg.margin)?;
        let velocity = (cfg.momentum > 0.0).then(|| (self.encoder.zero_grads(), Array2::zeros(head.weight.dim())));
        Ok(Self {
            head,
            step: 0,
            epoch: 0,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            velocity,
            ..self
        })
    }
}

/// One training batch.
#[derive(Debug, Clone)]
pub enum Batch {
    Plain(Vec<Sample>),
    Pairs(Vec<TrainPair>),
}

impl Batch {
    pub fn len(&self) -> usize {
        match self {
            Batch::Plain(v) => v.len(),
            Batch::Pairs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn mask_plan<R: Rng + ?Sized>(energy: &crate::dsp::RmsProfile, n_frames: usize, cfg: &TrainConfig, rng: &mut R) -> MaskPlan {
    match cfg.masking {
        Masking::None => MaskPlan::empty(n_frames, cfg.mask.span),
        Masking::Em => select_mask_centers(&partition_zones(energy, cfg.zones), cfg.mask, rng),
        Masking::Rm => random_mask_plan(n_frames, cfg.mask, rng),
    }
}

/// Featurizes the utterances `ids` into a batch. Under the pair objective
/// each `x` gets a CopyPaste partner `x'`; masking touches `x` only.
pub fn build_batch<R: Rng + ?Sized>(data: &TrainData, ids: &[usize], cfg: &TrainConfig, rng: &mut R) -> Result<Batch> {
    if data.index.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let crop = data.crop_frames(cfg)?;
    let cp = data.copy_paste_config(cfg);
    match (cfg.objective, cfg.scheme.copy_paste()) {
        (Objective::Erl, Some(scheme)) => {
            let mut pairs = Vec::with_capacity(ids.len());
            for &x in ids {
                let mut pair = build_pair(x, &data.index, &data.bank, scheme, &cp, crop, rng)?;
                let plan = mask_plan(&pair.x_energy, pair.x.n_frames(), cfg, rng);
                pair.x = apply_em(&pair.x, &plan);
                pair.x_mask = plan;
                pairs.push(pair);
            }
            Ok(Batch::Pairs(pairs))
        }
        (Objective::Erl, None) => Err(Error::Config("the pair objective requires a CopyPaste scheme".into())),
        (Objective::Aam, scheme) => {
            let mut samples = Vec::with_capacity(ids.len());
            for &x in ids {
                let speaker = data.index.get(x).speaker;
                match scheme {
                    Some(scheme) if rng.gen_bool(cfg.cp_probability) => {
                        let pair = build_pair(x, &data.index, &data.bank, scheme, &cp, crop, rng)?;
                        samples.push(Sample {
                            features: pair.xprime,
                            energy: pair.x_energy,
                            speaker,
                        });
                    }
                    _ => {
                        let mut s = data.bank.sample(x, speaker, crop, rng)?;
                        let plan = mask_plan(&s.energy, s.features.n_frames(), cfg, rng);
                        s.features = apply_em(&s.features, &plan);
                        samples.push(s);
                    }
                }
            }
            Ok(Batch::Plain(samples))
        }
    }
}

/// Loss terms of one step (before the update).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLoss {
    pub total: f64,
    pub aam_x: f64,
    pub aam_xprime: Option<f64>,
    pub cos: Option<f64>,
}

/// Gradients of one batch, before weight decay.
#[derive(Debug, Clone)]
pub struct BatchGrads {
    pub loss: StepLoss,
    pub encoder: EncoderGrads,
    pub head: Array2<f64>,
}

fn class_of(state: &TrainState, speaker: u32) -> Result<usize> {
    state
        .speakers
        .binary_search(&speaker)
        .map_err(|_| Error::InvalidParam(format!("speaker {speaker} is not a training class")))
}

fn stack(rows: &[Embedding]) -> Array2<f64> {
    let views: Vec<_> = rows.iter().map(|r| r.view().insert_axis(Axis(0))).collect();
    ndarray::concatenate(Axis(0), &views).expect("equal embedding sizes")
}

fn check_finite(what: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    let mut it = values.into_iter();
    if let Some(bad) = it.find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{what} (value {bad})")));
    }
    Ok(())
}

/// Loss and gradients for a batch at the current parameters. Both sides of
/// a pair run through the same encoder parameters and their gradients add.
pub fn batch_gradients(state: &TrainState, batch: &Batch, cfg: &TrainConfig) -> Result<BatchGrads> {
    let head = AamHead {
        margin: margin_schedule(state.step, cfg.margin_warmup_steps, cfg.margin),
        ..state.head.clone()
    };
    let mut grads = state.encoder.zero_grads();
    let (loss, head_grad) = match batch {
        Batch::Plain(samples) => {
            let mut embs = Vec::with_capacity(samples.len());
            let mut caches = Vec::with_capacity(samples.len());
            let mut labels = Vec::with_capacity(samples.len());
            for s in samples {
                let (e, c) = forward_cached(&s.features, &state.encoder)?;
                embs.push(e);
                caches.push(c);
                labels.push(class_of(state, s.speaker)?);
            }
            let out = aam_softmax_loss(stack(&embs).view(), &labels, &head, cfg.erl.reduction)?;
            for (c, g) in caches.iter().zip(out.grad_emb.rows()) {
                backward_into(c, &state.encoder, g, &mut grads, false);
            }
            let loss = StepLoss {
                total: out.loss,
                aam_x: out.loss,
                aam_xprime: None,
                cos: None,
            };
            (loss, out.grad_weight)
        }
        Batch::Pairs(pairs) => {
            let n = pairs.len();
            let mut xs = Vec::with_capacity(n);
            let mut xps = Vec::with_capacity(n);
            let mut caches = Vec::with_capacity(2 * n);
            let mut labels = Vec::with_capacity(n);
            for p in pairs {
                let (e, c) = forward_cached(&p.x, &state.encoder)?;
                xs.push(e);
                caches.push(c);
                let (e, c) = forward_cached(&p.xprime, &state.encoder)?;
                xps.push(e);
                caches.push(c);
                labels.push(class_of(state, p.speaker)?);
            }
            let out = erl_loss(stack(&xs).view(), stack(&xps).view(), &labels, &head, &cfg.erl)?;
            for i in 0..n {
                backward_into(&caches[2 * i], &state.encoder, out.grad_x.row(i), &mut grads, false);
                backward_into(&caches[2 * i + 1], &state.encoder, out.grad_xprime.row(i), &mut grads, false);
            }
            let loss = StepLoss {
                total: out.total,
                aam_x: out.aam_x,
                aam_xprime: Some(out.aam_xprime),
                cos: Some(out.cos),
            };
            (loss, out.grad_weight)
        }
    };
    check_finite("loss", [loss.total])?;
    check_finite(
        "encoder gradient",
        grads.tensors().iter().flat_map(|t| t.iter().copied().collect::<Vec<_>>()),
    )?;
    check_finite("head gradient", head_grad.iter().copied())?;
    Ok(BatchGrads {
        loss,
        encoder: grads,
        head: head_grad,
    })
}

/// Learning rate at `step` under the optional step decay.
pub fn learning_rate_at(cfg: &TrainConfig, step: u64) -> f64 {
    match step.checked_div(cfg.lr_decay_every) {
        None => cfg.learning_rate,
        Some(decays) => cfg.learning_rate * cfg.lr_decay_factor.powi(decays as i32),
    }
}

fn update(param: &mut [f64], grad: &[f64], velocity: Option<&mut [f64]>, lr: f64, wd: f64, momentum: f64) {
    match velocity {
        None => {
            for (p, g) in param.iter_mut().zip(grad) {
                *p -= lr * (g + wd * *p);
            }
        }
        Some(v) => {
            for ((p, g), v) in param.iter_mut().zip(grad).zip(v.iter_mut()) {
                *v = momentum * *v + g + wd * *p;
                *p -= lr * *v;
            }
        }
    }
}

/// Applies `params <- params - lr * (grad + wd * params)` (with optional
/// momentum) to the encoder and head.
pub fn apply_gradients(state: &mut TrainState, grads: &BatchGrads, cfg: &TrainConfig) {
    let lr = learning_rate_at(cfg, state.step);
    let (wd, mu) = (cfg.weight_decay, cfg.momentum);
    let enc_grads = grads.encoder.tensors();
    match state.velocity.as_mut() {
        None => {
            for (p, g) in state.encoder.tensors_mut().into_iter().zip(&enc_grads) {
                update(p, g.as_slice().expect("contiguous"), None, lr, wd, mu);
            }
            update(
                state.head.weight.as_slice_mut().expect("contiguous"),
                grads.head.as_slice().expect("contiguous"),
                None,
                lr,
                wd,
                mu,
            );
        }
        Some((venc, vhead)) => {
            for ((p, g), v) in state
                .encoder
                .tensors_mut()
                .into_iter()
                .zip(&enc_grads)
                .zip(venc.tensors_mut())
            {
                update(p, g.as_slice().expect("contiguous"), Some(v), lr, wd, mu);
            }
            update(
                state.head.weight.as_slice_mut().expect("contiguous"),
                grads.head.as_slice().expect("contiguous"),
                Some(vhead.as_slice_mut().expect("contiguous")),
                lr,
                wd,
                mu,
            );
        }
    }
    state.step += 1;
}

/// One SGD step; returns the loss measured before the update.
pub fn sgd_step(state: &mut TrainState, batch: &Batch, cfg: &TrainConfig) -> Result<StepLoss> {
    let grads = batch_gradients(state, batch, cfg)?;
    apply_gradients(state, &grads, cfg);
    Ok(grads.loss)
}

/// Mean loss terms over one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: u64,
    pub step: u64,
    pub total: f64,
    pub aam_x: f64,
    pub aam_xprime: Option<f64>,
    pub cos: Option<f64>,
}

impl EpochLog {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

/// One pass over the training utterances in shuffled order.
pub fn run_epoch(state: &mut TrainState, data: &TrainData, cfg: &TrainConfig) -> Result<EpochLog> {
    let mut order: Vec<usize> = (0..data.index.len()).collect();
    order.shuffle(&mut state.rng);
    let mut sums = (0.0, 0.0, 0.0, 0.0);
    let mut n_steps = 0usize;
    let mut paired = false;
    for ids in order.chunks(cfg.batch_size) {
        let mut rng = state.rng.clone();
        let batch = build_batch(data, ids, cfg, &mut rng)?;
        state.rng = rng;
        let loss = sgd_step(state, &batch, cfg)?;
        sums.0 += loss.total;
        sums.1 += loss.aam_x;
        if let (Some(a), Some(c)) = (loss.aam_xprime, loss.cos) {
            paired = true;
            sums.2 += a;
            sums.3 += c;
        }
        n_steps += 1;
    }
    state.epoch += 1;
    let k = 1.0 / n_steps.max(1) as f64;
    Ok(EpochLog {
        epoch: state.epoch,
        step: state.step,
        total: sums.0 * k,
        aam_x: sums.1 * k,
        aam_xprime: paired.then_some(sums.2 * k),
        cos: paired.then_some(sums.3 * k),
    })
}

/// Trains until `cfg.epochs` epochs have run, starting from `start` (a
/// resumed checkpoint) or a fresh state. `on_epoch` runs after every epoch,
/// e.g. to write checkpoints.
pub fn train(
    data: &TrainData,
    cfg: &TrainConfig,
    start: Option<TrainState>,
    mut on_epoch: impl FnMut(&TrainState, &EpochLog) -> Result<()>,
) -> Result<(TrainState, Vec<EpochLog>)> {
    cfg.validate()?;
    let mut state = match start {
        Some(s) => s,
        None => TrainState::init(data, cfg)?,
    };
    let mut log = Vec::new();
    while state.epoch < cfg.epochs {
        let entry = run_epoch(&mut state, data, cfg)?;
        on_epoch(&state, &entry)?;
        log.push(entry);
    }
    Ok((state, log))
}

/// Evaluation embedding: full-length, mean-normalized, unmasked features.
pub fn embed_utterance(encoder: &EncoderParams, logmel: &LogMel, utt: &Utterance) -> Result<Embedding> {
    let feats = mean_normalize(&logmel.extract(&utt.audio)?);
    forward(&feats, encoder)
}
