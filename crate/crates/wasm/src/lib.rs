//! Browser bindings: energy-zone masking view, CopyPaste preview and an
//! EER / FAR-FRR explorer. Every function is deterministic in its seed.

use emosv_core::augment::{plan_copy_paste, render_copy_paste, CopyPasteConfig, CpKind, Emotion, Utterance};
use emosv_core::dsp::{normalize_rms, rms_energy, FrameSpec, Waveform};
use emosv_core::eval::compute_eer;
use emosv_core::masking::{partition_zones, random_mask_plan, select_mask_centers, Dominance, MaskConfig, ZoneThresholds};
use emosv_core::synth::{render_utterance, SpeakerVoice, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Errors stay plain strings until the export boundary so the logic also
/// runs (and is tested) off the browser.
type Res<T> = std::result::Result<T, String>;

fn msg(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_js<T>(r: Res<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

fn demo_spec(sample_rate: u32) -> SynthSpec {
    SynthSpec {
        sample_rate,
        ..SynthSpec::default()
    }
}

/// One synthetic clip of speaker `speaker_seed` in `emotion`.
fn clip(speaker_seed: u64, emotion: Emotion, secs: f64, clip_seed: u64, sample_rate: u32) -> Waveform {
    let spec = demo_spec(sample_rate);
    let voice = SpeakerVoice::sample(&spec, &mut ChaCha8Rng::seed_from_u64(speaker_seed));
    let mut rng = ChaCha8Rng::seed_from_u64(clip_seed);
    render_utterance(&voice, spec.emotions.get(emotion), &spec, secs, &mut rng)
}

/// Renders a synthetic utterance (`emotion`: angry, positive, neutral or sad).
#[wasm_bindgen]
pub fn synth_clip(emotion: &str, speaker_seed: u64, clip_seed: u64, secs: f64, sample_rate: u32) -> Result<Vec<f32>, JsError> {
    to_js(synth_clip_impl(emotion, speaker_seed, clip_seed, secs, sample_rate))
}

fn synth_clip_impl(emotion: &str, speaker_seed: u64, clip_seed: u64, secs: f64, sample_rate: u32) -> Res<Vec<f32>> {
    let e: Emotion = emotion.parse().map_err(msg)?;
    if !(secs > 0.0 && secs <= 10.0) || sample_rate == 0 {
        return Err("secs must be in (0, 10] and sample_rate positive".into());
    }
    Ok(clip(speaker_seed, e, secs, clip_seed, sample_rate).samples().to_vec())
}

/// Per-frame energy zones and the frames a mask plan would blank.
#[wasm_bindgen(getter_with_clone)]
pub struct MaskView {
    /// Normalized RMS energy per frame.
    pub energy: Vec<f64>,
    /// Zone per frame: 0 noise, 1 low, 2 high.
    pub zones: Vec<u8>,
    /// "intense", "subdued" or "none".
    pub dominant: String,
    pub centers: Vec<u32>,
    pub masked: Vec<u32>,
}

/// Emotion-aware (`random = false`) or random masking of 25 ms / 10 ms frames.
#[wasm_bindgen]
pub fn mask_view(
    samples: &[f32],
    sample_rate: u32,
    count: usize,
    span: usize,
    random: bool,
    seed: u64,
) -> Result<MaskView, JsError> {
    to_js(mask_view_impl(samples, sample_rate, count, span, random, seed))
}

fn mask_view_impl(samples: &[f32], sample_rate: u32, count: usize, span: usize, random: bool, seed: u64) -> Res<MaskView> {
    let wave = Waveform::new(samples.to_vec(), sample_rate).map_err(msg)?;
    let spec = FrameSpec::from_millis(sample_rate, 25.0, 10.0).map_err(msg)?;
    let energy = normalize_rms(&rms_energy(&wave, spec).map_err(msg)?);
    let z = partition_zones(&energy, ZoneThresholds::default());
    let mut zones = vec![0u8; energy.len()];
    z.low.iter().for_each(|&f| zones[f] = 1);
    z.high.iter().for_each(|&f| zones[f] = 2);
    let cfg = MaskConfig { count, span };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = if random {
        random_mask_plan(energy.len(), cfg, &mut rng)
    } else {
        select_mask_centers(&z, cfg, &mut rng)
    };
    Ok(MaskView {
        energy: energy.values().to_vec(),
        zones,
        dominant: match z.dominant {
            Dominance::Intense => "intense",
            Dominance::Subdued => "subdued",
            Dominance::None => "none",
        }
        .into(),
        centers: plan.centers.iter().map(|&c| c as u32).collect(),
        masked: plan.masked_frames().into_iter().map(|f| f as u32).collect(),
    })
}

/// Two source clips of one speaker and their CopyPaste result.
#[wasm_bindgen(getter_with_clone)]
pub struct CopyPasteView {
    pub a: Vec<f32>,
    pub b: Vec<f32>,
    pub out: Vec<f32>,
    /// "S-CP" or "D-CP".
    pub kind: String,
    pub a_start: u32,
    pub b_start: u32,
    pub a_first: bool,
    /// Emotion tags of the result, comma separated.
    pub emotions: String,
}

/// CopyPaste of two clips by the same synthetic speaker. Equal emotions give
/// S-CP, different ones D-CP.
#[wasm_bindgen]
pub fn copy_paste_preview(
    emotion_a: &str,
    emotion_b: &str,
    speaker_seed: u64,
    seed: u64,
    sample_rate: u32,
) -> Result<CopyPasteView, JsError> {
    to_js(copy_paste_preview_impl(emotion_a, emotion_b, speaker_seed, seed, sample_rate))
}

fn copy_paste_preview_impl(
    emotion_a: &str,
    emotion_b: &str,
    speaker_seed: u64,
    seed: u64,
    sample_rate: u32,
) -> Res<CopyPasteView> {
    if sample_rate == 0 {
        return Err("sample_rate must be positive".into());
    }
    let (ea, eb): (Emotion, Emotion) = (emotion_a.parse().map_err(msg)?, emotion_b.parse().map_err(msg)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (la, lb) = (rng.gen_range(1.2..2.2), rng.gen_range(1.2..2.2));
    let a = Utterance::new("a", 0, ea, clip(speaker_seed, ea, la, rng.gen(), sample_rate));
    let b = Utterance::new("b", 0, eb, clip(speaker_seed, eb, lb, rng.gen(), sample_rate));
    let kind = if ea == eb { CpKind::Same } else { CpKind::Different };
    let plan = plan_copy_paste(&a, &b, kind, &CopyPasteConfig::default(), &mut rng).map_err(msg)?;
    let out = render_copy_paste(&a, &b, &plan);
    Ok(CopyPasteView {
        a: a.audio.samples().to_vec(),
        b: b.audio.samples().to_vec(),
        out: out.audio.samples().to_vec(),
        kind: kind.to_string(),
        a_start: plan.a.start as u32,
        b_start: plan.b.start as u32,
        a_first: plan.a_first,
        emotions: out.emotions.iter().map(Emotion::name).collect::<Vec<_>>().join(","),
    })
}

/// FAR and FRR at every distinct score plus the interpolated EER.
#[wasm_bindgen(getter_with_clone)]
pub struct EerView {
    pub thresholds: Vec<f64>,
    pub far: Vec<f64>,
    pub frr: Vec<f64>,
    pub eer: f64,
    pub threshold: f64,
}

/// `targets[i]` is nonzero for target trials.
#[wasm_bindgen]
pub fn eer_curve(scores: &[f64], targets: &[u8]) -> Result<EerView, JsError> {
    to_js(eer_curve_impl(scores, targets))
}

fn eer_curve_impl(scores: &[f64], targets: &[u8]) -> Res<EerView> {
    let labels: Vec<bool> = targets.iter().map(|&t| t != 0).collect();
    let r = compute_eer(scores, &labels).map_err(msg)?;
    let mut thresholds = scores.to_vec();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let (nt, nn) = (r.n_target as f64, r.n_nontarget as f64);
    let (far, frr) = thresholds
        .iter()
        .map(|&t| {
            let fa = scores.iter().zip(&labels).filter(|(&s, &y)| !y && s >= t).count() as f64 / nn;
            let fr = scores.iter().zip(&labels).filter(|(&s, &y)| y && s < t).count() as f64 / nt;
            (fa, fr)
        })
        .unzip();
    Ok(EerView {
        thresholds,
        far,
        frr,
        eer: r.eer,
        threshold: r.threshold,
    })
}

/// Gaussian-like synthetic scores: targets centered at `separation`,
/// nontargets at 0, unit spread. Returns scores then labels (1/0) as one
/// array of length `2 * (n_target + n_nontarget)`.
#[wasm_bindgen]
pub fn sample_scores(n_target: usize, n_nontarget: usize, separation: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // sum of four uniforms: mean 0, variance 1/3 scaled to 1
    let mut noise = move || (0..4).map(|_| rng.gen_range(-1.0..1.0)).sum::<f64>() * 0.75f64.sqrt();
    let n = n_target + n_nontarget;
    let mut scores = Vec::with_capacity(2 * n);
    scores.extend((0..n_target).map(|_| separation + noise()));
    scores.extend((0..n_nontarget).map(|_| noise()));
    scores.extend((0..n).map(|i| if i < n_target { 1.0 } else { 0.0 }));
    scores
}
