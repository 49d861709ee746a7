//! Synthetic emotional-speech corpus.
//!
//! Each speaker owns a fundamental frequency and a set of formant
//! resonances; an utterance is a harmonic stack (one pitch period rendered
//! into a wavetable) shaped by an emotion-specific loudness envelope, plus
//! low-level white noise. Emotions also move pitch, pitch variability and
//! spectral tilt, so they act as a nuisance factor for speaker identity.
//!
//! Intense emotions (angry, positive) use envelopes that sit near their
//! peak most of the time; sad speech idles at roughly a third of its peak
//! with sparse louder syllables; neutral sits in between.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::augment::Emotion;
use crate::dsp::Waveform;
use crate::error::{Error, Result};
use crate::manifest::{Manifest, ManifestRow, Split};

/// Per-emotion rendering parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmotionStyle {
    /// Peak amplitude.
    pub gain: f64,
    /// Idle envelope level as a fraction of the peak.
    pub floor: f64,
    /// Louder syllables per second.
    pub syllable_rate: f64,
    /// Syllable pulse length in seconds.
    pub syllable_secs: f64,
    /// Multiplier on the speaker's fundamental.
    pub pitch_ratio: f64,
    /// Relative depth of slow pitch movement.
    pub pitch_wobble: f64,
    /// Spectral tilt in dB per octave above 500 Hz (negative = darker).
    pub tilt_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmotionStyles {
    pub angry: EmotionStyle,
    pub positive: EmotionStyle,
    pub neutral: EmotionStyle,
    pub sad: EmotionStyle,
}

impl EmotionStyles {
    pub fn get(&self, e: Emotion) -> &EmotionStyle {
        match e {
            Emotion::Angry => &self.angry,
            Emotion::Positive => &self.positive,
            Emotion::Neutral => &self.neutral,
            Emotion::Sad => &self.sad,
        }
    }
}

impl Default for EmotionStyles {
    fn default() -> Self {
        Self {
            angry: EmotionStyle {
                gain: 0.8,
                floor: 0.75,
                syllable_rate: 4.0,
                syllable_secs: 0.12,
                pitch_ratio: 1.3,
                pitch_wobble: 0.08,
                tilt_db: -3.0,
            },
            positive: EmotionStyle {
                gain: 0.6,
                floor: 0.65,
                syllable_rate: 3.5,
                syllable_secs: 0.12,
                pitch_ratio: 1.18,
                pitch_wobble: 0.1,
                tilt_db: -5.0,
            },
            neutral: EmotionStyle {
                gain: 0.4,
                floor: 0.45,
                syllable_rate: 2.5,
                syllable_secs: 0.1,
                pitch_ratio: 1.0,
                pitch_wobble: 0.03,
                tilt_db: -8.0,
            },
            sad: EmotionStyle {
                gain: 0.25,
                floor: 0.33,
                syllable_rate: 1.2,
                syllable_secs: 0.08,
                pitch_ratio: 0.88,
                pitch_wobble: 0.02,
                tilt_db: -12.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub n_train_speakers: usize,
    pub n_test_speakers: usize,
    pub utts_per_cell: usize,
    pub sample_rate: u32,
    pub min_secs: f64,
    pub max_secs: f64,
    /// Standard deviation of the additive white noise.
    pub noise_level: f64,
    /// Range of speaker fundamentals in Hz.
    pub f0_range: (f64, f64),
    /// Per-utterance random spread of pitch and formants (relative).
    pub utterance_jitter: f64,
    pub emotions: EmotionStyles,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_train_speakers: 20,
            n_test_speakers: 8,
            utts_per_cell: 25,
            sample_rate: 16_000,
            min_secs: 1.2,
            max_secs: 2.2,
            noise_level: 0.002,
            f0_range: (90.0, 240.0),
            utterance_jitter: 0.03,
            emotions: EmotionStyles::default(),
            seed: 0,
        }
    }
}

/// Fixed vocal traits of one speaker.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerVoice {
    pub f0: f64,
    /// (center Hz, bandwidth Hz, gain) per formant.
    pub formants: Vec<(f64, f64, f64)>,
    pub phases: Vec<f64>,
}

const MAX_HARMONICS: usize = 96;

impl SpeakerVoice {
    pub fn sample<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> Self {
        let (lo, hi) = spec.f0_range;
        // log-uniform pitch
        let f0 = (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp();
        let formants = vec![
            (rng.gen_range(300.0..900.0), rng.gen_range(60.0..120.0), 1.0),
            (
                rng.gen_range(900.0..2400.0),
                rng.gen_range(80.0..160.0),
                rng.gen_range(0.4..0.9),
            ),
            (
                rng.gen_range(2300.0..3500.0),
                rng.gen_range(120.0..220.0),
                rng.gen_range(0.2..0.6),
            ),
            (
                rng.gen_range(3500.0..5000.0),
                rng.gen_range(180.0..300.0),
                rng.gen_range(0.1..0.35),
            ),
        ];
        let phases = (0..MAX_HARMONICS).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        Self { f0, formants, phases }
    }

    fn envelope(&self, hz: f64, formant_scale: f64, tilt_db: f64) -> f64 {
        let resonance: f64 = self
            .formants
            .iter()
            .map(|&(c, bw, g)| {
                let c = c * formant_scale;
                g / (1.0 + ((hz - c) / bw).powi(2))
            })
            .sum();
        let octaves = (hz / 500.0).log2().max(0.0);
        (resonance + 0.02) * 10f64.powf(tilt_db * octaves / 20.0)
    }
}

const TABLE_LEN: usize = 2048;

/// Renders one utterance.
pub fn render_utterance<R: Rng + ?Sized>(
    voice: &SpeakerVoice,
    style: &EmotionStyle,
    spec: &SynthSpec,
    secs: f64,
    rng: &mut R,
) -> Waveform {
    let sr = spec.sample_rate as f64;
    let n = (secs * sr).round().max(1.0) as usize;
    let jitter = spec.utterance_jitter;
    let f0 = voice.f0 * style.pitch_ratio * (1.0 + rng.gen_range(-jitter..=jitter));
    let formant_scale = 1.0 + rng.gen_range(-jitter..=jitter);

    // one pitch period of the harmonic stack
    let (sin_t, cos_t): (Vec<f64>, Vec<f64>) = (0..TABLE_LEN)
        .map(|i| (2.0 * PI * i as f64 / TABLE_LEN as f64).sin_cos())
        .unzip();
    let mut table = vec![0.0f64; TABLE_LEN];
    let n_harm = ((0.45 * sr / f0) as usize).clamp(1, MAX_HARMONICS);
    for k in 1..=n_harm {
        let amp = voice.envelope(k as f64 * f0, formant_scale, style.tilt_db);
        let (sp, cp) = voice.phases[k - 1].sin_cos();
        // sin(a + p) = sin a cos p + cos a sin p with a = 2 pi k i / TABLE_LEN
        for (i, t) in table.iter_mut().enumerate() {
            let j = (k * i) % TABLE_LEN;
            *t += amp * (sin_t[j] * cp + cos_t[j] * sp);
        }
    }
    let peak = table.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    table.iter_mut().for_each(|v| *v /= peak);

    // syllable pulses at roughly Poisson times
    let mut pulses = Vec::new();
    let mut t = rng.gen_range(0.0..0.3);
    while t < secs {
        pulses.push(t);
        t += -(1.0 - rng.gen::<f64>()).ln() / style.syllable_rate.max(1e-3);
    }
    let wobble_rate = rng.gen_range(2.0..5.0);
    let wobble_phase = rng.gen_range(0.0..2.0 * PI);
    let noise = Normal::new(0.0, spec.noise_level.max(0.0)).expect("finite std");
    let half = style.syllable_secs / 2.0;
    let ramp = 0.03;

    let mut phase = rng.gen::<f64>();
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let time = i as f64 / sr;
        let mut bump: f64 = 0.0;
        for &p in &pulses {
            let d = (time - p).abs();
            if d < half {
                bump = bump.max(0.5 + 0.5 * (PI * d / half).cos());
            }
        }
        let edge = (time / ramp).min((secs - time) / ramp).clamp(0.0, 1.0);
        let env = edge * (style.floor + (1.0 - style.floor) * bump);
        let pitch = f0 * (1.0 + style.pitch_wobble * (2.0 * PI * wobble_rate * time + wobble_phase).sin());
        phase = (phase + pitch / sr).fract();
        let pos = phase * TABLE_LEN as f64;
        let k = pos as usize % TABLE_LEN;
        let frac = pos - pos.floor();
        let wave = table[k] * (1.0 - frac) + table[(k + 1) % TABLE_LEN] * frac;
        let s = style.gain * env * wave + noise.sample(rng);
        samples.push(s.clamp(-1.0, 1.0) as f32);
    }
    Waveform::new(samples, spec.sample_rate).expect("positive sample rate")
}

/// A generated clip with its manifest row.
#[derive(Debug, Clone)]
pub struct SynthUtterance {
    pub row: ManifestRow,
    pub audio: Waveform,
}

/// Generates the whole corpus in memory. Speakers `0..n_train` form the
/// training split and the next `n_test` the test split. Every clip uses its
/// own seeded generator, so output depends only on the spec.
pub fn synth_corpus(spec: &SynthSpec) -> Result<Vec<SynthUtterance>> {
    if spec.sample_rate == 0 || !(spec.min_secs > 0.0) || spec.max_secs < spec.min_secs {
        return Err(Error::InvalidParam(
            "synth spec needs sample_rate > 0 and 0 < min_secs <= max_secs".into(),
        ));
    }
    if spec.f0_range.0 <= 0.0 || spec.f0_range.1 < spec.f0_range.0 {
        return Err(Error::InvalidParam("f0_range must be positive and ordered".into()));
    }
    let n_speakers = spec.n_train_speakers + spec.n_test_speakers;
    let mut out = Vec::with_capacity(n_speakers * 4 * spec.utts_per_cell);
    for spk in 0..n_speakers {
        let mut voice_rng = ChaCha8Rng::seed_from_u64(spec.seed);
        voice_rng.set_stream(spk as u64);
        let voice = SpeakerVoice::sample(spec, &mut voice_rng);
        let split = if spk < spec.n_train_speakers {
            Split::Train
        } else {
            Split::Test
        };
        for emotion in Emotion::ALL {
            for k in 0..spec.utts_per_cell {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_c0de);
                rng.set_stream(((spk as u64) << 32) | ((emotion as u64) << 24) | k as u64);
                let secs = rng.gen_range(spec.min_secs..=spec.max_secs);
                let audio = render_utterance(&voice, spec.emotions.get(emotion), spec, secs, &mut rng);
                let id = format!("spk{spk:03}-{}-{k:03}", emotion.name());
                out.push(SynthUtterance {
                    row: ManifestRow {
                        audio_path: format!("wav/{id}.wav"),
                        utterance_id: id,
                        speaker: spk as u32,
                        emotion,
                        duration: audio.duration_secs(),
                        split,
                    },
                    audio,
                });
            }
        }
    }
    Ok(out)
}

/// Writes WAV files under `out_dir/wav/` and `out_dir/manifest.csv`.
pub fn write_corpus(corpus: &[SynthUtterance], out_dir: &Path) -> Result<Manifest> {
    for u in corpus {
        crate::io::write_wav(out_dir.join(&u.row.audio_path), &u.audio)?;
    }
    let manifest = Manifest::new(corpus.iter().map(|u| u.row.clone()).collect(), out_dir)?;
    manifest.save(out_dir.join("manifest.csv"))?;
    Ok(manifest)
}
