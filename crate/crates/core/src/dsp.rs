//! Signal front end: framing, RMS energy, log-mel features, per-utterance
//! normalization and temporal cropping.
//!
//! Every frame-indexed quantity in the toolkit (RMS profiles, feature rows,
//! mask plans) lives on the same frame grid so that indices line up one to
//! one. A signal shorter than one frame yields a single zero-padded frame.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Axis};
use rand::Rng;
use realfft::{RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mono audio. Samples are nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParam("sample_rate must be positive".into()));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Returns a copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f32) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Frame length and hop, both in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub frame_len: usize,
    pub hop: usize,
}

impl FrameSpec {
    pub fn new(frame_len: usize, hop: usize) -> Result<Self> {
        if frame_len == 0 || hop == 0 {
            return Err(Error::InvalidParam(format!(
                "frame_len and hop must be positive (got {frame_len}, {hop})"
            )));
        }
        Ok(Self { frame_len, hop })
    }

    /// Frame spec for durations given in milliseconds.
    pub fn from_millis(sample_rate: u32, frame_ms: f64, hop_ms: f64) -> Result<Self> {
        let frame_len = (sample_rate as f64 * frame_ms / 1000.0).round() as usize;
        let hop = (sample_rate as f64 * hop_ms / 1000.0).round() as usize;
        Self::new(frame_len, hop)
    }

    pub fn grid(&self, n_samples: usize) -> FrameGrid {
        FrameGrid {
            frame_len: self.frame_len,
            hop: self.hop,
            n_frames: n_frames(n_samples, self.frame_len, self.hop),
        }
    }
}

/// Number of frames covering `n_samples`; at least one.
pub fn n_frames(n_samples: usize, frame_len: usize, hop: usize) -> usize {
    if n_samples >= frame_len {
        (n_samples - frame_len) / hop + 1
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameGrid {
    pub frame_len: usize,
    pub hop: usize,
    pub n_frames: usize,
}

impl FrameGrid {
    pub fn start(&self, frame: usize) -> usize {
        frame * self.hop
    }
}

/// Splits a waveform into frames; frame `f` covers `[f*hop, f*hop + frame_len)`.
pub fn frame_signal(wave: &Waveform, spec: FrameSpec) -> Result<Vec<Vec<f64>>> {
    if wave.is_empty() {
        return Err(Error::EmptyWaveform);
    }
    let grid = spec.grid(wave.len());
    Ok((0..grid.n_frames)
        .map(|f| {
            let mut frame = vec![0.0; spec.frame_len];
            copy_frame(wave.samples(), grid.start(f), &mut frame);
            frame
        })
        .collect())
}

// Zero-fills whatever lies past the end of the signal.
fn copy_frame(samples: &[f32], start: usize, out: &mut [f64]) {
    let end = (start + out.len()).min(samples.len());
    let avail = end.saturating_sub(start);
    for (o, &s) in out[..avail].iter_mut().zip(&samples[start..end]) {
        *o = s as f64;
    }
    out[avail..].iter_mut().for_each(|o| *o = 0.0);
}

/// Per-frame RMS energy.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsProfile {
    values: Vec<f64>,
    normalized: bool,
    silent: bool,
    grid: FrameGrid,
}

impl RmsProfile {
    pub fn from_values(values: Vec<f64>, grid: FrameGrid) -> Self {
        Self {
            values,
            normalized: false,
            silent: false,
            grid,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// True when normalization found an all-zero profile.
    pub fn is_silent(&self) -> bool {
        self.silent
    }

    pub fn grid(&self) -> FrameGrid {
        self.grid
    }

    /// Restricts the profile to a crop window (frames taken in window order).
    pub fn select(&self, window: &CropWindow) -> RmsProfile {
        let values = window.indices().map(|i| self.values[i]).collect::<Vec<_>>();
        RmsProfile {
            grid: FrameGrid {
                n_frames: values.len(),
                ..self.grid
            },
            values,
            normalized: false,
            silent: false,
        }
    }
}

/// `RMS(f) = sqrt(1/L * sum_l |S_f(l)|^2)` with `L = frame_len` (padding included).
pub fn rms_energy(wave: &Waveform, spec: FrameSpec) -> Result<RmsProfile> {
    if wave.is_empty() {
        return Err(Error::EmptyWaveform);
    }
    let grid = spec.grid(wave.len());
    let samples = wave.samples();
    let values = (0..grid.n_frames)
        .map(|f| {
            let start = grid.start(f);
            let end = (start + spec.frame_len).min(samples.len());
            let sum_sq: f64 = samples[start..end].iter().map(|&s| (s as f64) * (s as f64)).sum();
            (sum_sq / spec.frame_len as f64).sqrt()
        })
        .collect();
    Ok(RmsProfile::from_values(values, grid))
}

/// Divides by the profile maximum. An all-zero profile stays zero and is
/// flagged silent.
pub fn normalize_rms(profile: &RmsProfile) -> RmsProfile {
    let max = profile.values.iter().copied().fold(0.0_f64, f64::max);
    let (values, silent) = if max > 0.0 {
        (profile.values.iter().map(|v| v / max).collect(), false)
    } else {
        (vec![0.0; profile.values.len()], true)
    };
    RmsProfile {
        values,
        normalized: true,
        silent,
        grid: profile.grid,
    }
}

/// Log-mel front-end parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MelConfig {
    pub sample_rate: u32,
    pub n_mels: usize,
    pub frame_ms: f64,
    pub hop_ms: f64,
    /// FFT size; `0` picks the next power of two above the frame length.
    pub n_fft: usize,
    pub f_min: f64,
    /// Upper band edge; `0` means Nyquist.
    pub f_max: f64,
    pub log_floor: f64,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            n_mels: 64,
            frame_ms: 25.0,
            hop_ms: 10.0,
            n_fft: 0,
            f_min: 0.0,
            f_max: 0.0,
            log_floor: 1e-10,
        }
    }
}

impl MelConfig {
    pub fn frame_spec(&self) -> Result<FrameSpec> {
        FrameSpec::from_millis(self.sample_rate, self.frame_ms, self.hop_ms)
    }

    /// Number of feature frames produced for a clip of `secs` seconds.
    pub fn frames_for_secs(&self, secs: f64) -> Result<usize> {
        let spec = self.frame_spec()?;
        let n = (secs * self.sample_rate as f64).round() as usize;
        Ok(n_frames(n, spec.frame_len, spec.hop))
    }
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

#[derive(Debug, Clone)]
struct MelFilter {
    first_bin: usize,
    weights: Vec<f64>,
}

/// Triangular HTK-scale filterbank over a power spectrum.
fn mel_filters(n_mels: usize, n_fft: usize, sample_rate: u32, f_min: f64, f_max: f64) -> Vec<MelFilter> {
    let n_bins = n_fft / 2 + 1;
    let lo = hz_to_mel(f_min);
    let hi = hz_to_mel(f_max);
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz = sample_rate as f64 / n_fft as f64;
    (0..n_mels)
        .map(|m| {
            let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
            let mut first_bin = None;
            let mut weights = Vec::new();
            for k in 0..n_bins {
                let f = k as f64 * bin_hz;
                let w = if f > left && f <= center {
                    (f - left) / (center - left)
                } else if f > center && f < right {
                    (right - f) / (right - center)
                } else {
                    0.0
                };
                if w > 0.0 {
                    first_bin.get_or_insert(k);
                    weights.push(w);
                } else if first_bin.is_some() {
                    break;
                }
            }
            MelFilter {
                first_bin: first_bin.unwrap_or(0),
                weights,
            }
        })
        .collect()
}

/// Reusable log-mel extractor (window, FFT plan and filterbank built once).
#[derive(Clone)]
pub struct LogMel {
    config: MelConfig,
    spec: FrameSpec,
    n_fft: usize,
    window: Vec<f64>,
    fft: Arc<dyn RealToComplex<f64>>,
    filters: Vec<MelFilter>,
}

impl std::fmt::Debug for LogMel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LogMel")
            .field("config", &self.config)
            .field("n_fft", &self.n_fft)
            .finish()
    }
}

struct FrameScratch {
    input: Vec<f64>,
    spectrum: Vec<realfft::num_complex::Complex<f64>>,
    scratch: Vec<realfft::num_complex::Complex<f64>>,
    frame: Vec<f64>,
}

impl LogMel {
    pub fn new(config: MelConfig) -> Result<Self> {
        let spec = config.frame_spec()?;
        if config.n_mels == 0 {
            return Err(Error::InvalidParam("n_mels must be positive".into()));
        }
        if !(config.log_floor > 0.0) {
            return Err(Error::InvalidParam("log_floor must be positive".into()));
        }
        let n_fft = if config.n_fft == 0 {
            spec.frame_len.next_power_of_two()
        } else {
            config.n_fft
        };
        if n_fft < spec.frame_len {
            return Err(Error::InvalidParam(format!(
                "n_fft {n_fft} shorter than frame length {}",
                spec.frame_len
            )));
        }
        let nyquist = config.sample_rate as f64 / 2.0;
        let f_max = if config.f_max <= 0.0 { nyquist } else { config.f_max };
        if config.f_min < 0.0 || f_max > nyquist || config.f_min >= f_max {
            return Err(Error::InvalidParam(format!(
                "mel range [{}, {f_max}] invalid for sample rate {}",
                config.f_min, config.sample_rate
            )));
        }
        // periodic Hann
        let window = (0..spec.frame_len)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / spec.frame_len as f64).cos())
            .collect();
        let fft = RealFftPlanner::<f64>::new().plan_fft_forward(n_fft);
        let filters = mel_filters(config.n_mels, n_fft, config.sample_rate, config.f_min, f_max);
        Ok(Self {
            config,
            spec,
            n_fft,
            window,
            fft,
            filters,
        })
    }

    pub fn config(&self) -> &MelConfig {
        &self.config
    }

    pub fn frame_spec(&self) -> FrameSpec {
        self.spec
    }

    pub fn n_mels(&self) -> usize {
        self.config.n_mels
    }

    fn scratch(&self) -> FrameScratch {
        FrameScratch {
            input: self.fft.make_input_vec(),
            spectrum: self.fft.make_output_vec(),
            scratch: self.fft.make_scratch_vec(),
            frame: vec![0.0; self.spec.frame_len],
        }
    }

    fn frame_into(&self, buf: &mut FrameScratch, out: &mut [f64]) {
        for (dst, (&s, &w)) in buf.input.iter_mut().zip(buf.frame.iter().zip(&self.window)) {
            *dst = s * w;
        }
        buf.input[self.spec.frame_len..].iter_mut().for_each(|v| *v = 0.0);
        self.fft
            .process_with_scratch(&mut buf.input, &mut buf.spectrum, &mut buf.scratch)
            .expect("fft buffers sized by the plan");
        for (o, filter) in out.iter_mut().zip(&self.filters) {
            let energy: f64 = filter
                .weights
                .iter()
                .zip(&buf.spectrum[filter.first_bin..])
                .map(|(w, c)| w * c.norm_sqr())
                .sum();
            *o = energy.max(self.config.log_floor).ln();
        }
    }

    /// Log-mel features of a whole waveform, shape `(n_frames, n_mels)`.
    pub fn extract(&self, wave: &Waveform) -> Result<FeatureMatrix> {
        if wave.is_empty() {
            return Err(Error::EmptyWaveform);
        }
        if wave.sample_rate() != self.config.sample_rate {
            return Err(Error::InvalidParam(format!(
                "waveform sample rate {} does not match extractor rate {}",
                wave.sample_rate(),
                self.config.sample_rate
            )));
        }
        let grid = self.spec.grid(wave.len());
        let mut data = Array2::zeros((grid.n_frames, self.config.n_mels));
        let mut buf = self.scratch();
        for (f, mut row) in data.axis_iter_mut(Axis(0)).enumerate() {
            copy_frame(wave.samples(), grid.start(f), &mut buf.frame);
            self.frame_into(&mut buf, row.as_slice_mut().expect("row-major"));
        }
        Ok(FeatureMatrix::new(data))
    }

    /// Log-mel vector of the frame starting at `start` in `samples`
    /// (zero-padded past the end). Bit-identical to the matching row of
    /// [`LogMel::extract`].
    pub fn extract_frame(&self, samples: &[f32], start: usize) -> Vec<f64> {
        let mut buf = self.scratch();
        copy_frame(samples, start, &mut buf.frame);
        let mut out = vec![0.0; self.config.n_mels];
        self.frame_into(&mut buf, &mut out);
        out
    }
}

/// Convenience wrapper building a [`LogMel`] for one call.
pub fn logmel(wave: &Waveform, config: &MelConfig) -> Result<FeatureMatrix> {
    LogMel::new(config.clone())?.extract(wave)
}

/// Time × bins matrix of log-domain features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Array2<f64>,
    mean_normalized: bool,
}

impl FeatureMatrix {
    pub fn new(data: Array2<f64>) -> Self {
        Self {
            data,
            mean_normalized: false,
        }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn into_values(self) -> Array2<f64> {
        self.data
    }

    pub fn n_frames(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_mean_normalized(&self) -> bool {
        self.mean_normalized
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Gathers frames in window order.
    pub fn select(&self, window: &CropWindow) -> FeatureMatrix {
        let idx: Vec<usize> = window.indices().collect();
        FeatureMatrix {
            data: self.data.select(Axis(0), &idx),
            mean_normalized: self.mean_normalized,
        }
    }

    /// Stacks frames of several matrices with the same bin count.
    pub fn from_rows(rows: &[&[f64]]) -> Result<FeatureMatrix> {
        let bins = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != bins) {
            return Err(Error::Shape("ragged feature rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        let data = Array2::from_shape_vec((rows.len(), bins), flat).map_err(|e| Error::Shape(e.to_string()))?;
        Ok(FeatureMatrix::new(data))
    }
}

/// Subtracts each bin's temporal mean.
pub fn mean_normalize(features: &FeatureMatrix) -> FeatureMatrix {
    let mut data = features.data.clone();
    if data.nrows() > 0 {
        let mean = data.mean_axis(Axis(0)).expect("non-empty");
        data -= &mean;
    }
    FeatureMatrix {
        data,
        mean_normalized: true,
    }
}

/// A contiguous (cyclic when padding) window of frame indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropWindow {
    pub start: usize,
    pub len: usize,
    pub source_len: usize,
}

impl CropWindow {
    /// Frame indices into the source; wraps when the source is shorter
    /// than the window.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |i| (self.start + i) % self.source_len)
    }
}

/// Draws a crop window of `target` frames from a source of `source_len`
/// frames. Short sources are tiled by repetition first.
pub fn crop_window<R: Rng + ?Sized>(source_len: usize, target: usize, rng: &mut R) -> Result<CropWindow> {
    if target == 0 {
        return Err(Error::InvalidParam("crop target must be positive".into()));
    }
    if source_len == 0 {
        return Err(Error::InvalidParam("cannot crop an empty matrix".into()));
    }
    let tiled = if source_len >= target {
        source_len
    } else {
        target.div_ceil(source_len) * source_len
    };
    let start = rng.gen_range(0..=tiled - target);
    Ok(CropWindow {
        start,
        len: target,
        source_len,
    })
}

pub fn random_crop<R: Rng + ?Sized>(features: &FeatureMatrix, target: usize, rng: &mut R) -> Result<FeatureMatrix> {
    let window = crop_window(features.n_frames(), target, rng)?;
    Ok(features.select(&window))
}
