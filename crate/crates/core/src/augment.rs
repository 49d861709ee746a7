//! CopyPaste augmentation: building same-speaker parallel utterances by
//! concatenating segments of two source clips, and turning them into
//! Siamese training pairs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::{crop_window, mean_normalize, normalize_rms, rms_energy, FeatureMatrix, LogMel, RmsProfile, Waveform};
use crate::error::{Error, Result};
use crate::masking::MaskPlan;

/// Emotion categories of the source corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Angry,
    Positive,
    Neutral,
    Sad,
}

impl Emotion {
    pub const ALL: [Emotion; 4] = [Emotion::Angry, Emotion::Positive, Emotion::Neutral, Emotion::Sad];

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Angry => "angry",
            Emotion::Positive => "positive",
            Emotion::Neutral => "neutral",
            Emotion::Sad => "sad",
        }
    }

    /// One-letter code used in trial buckets.
    pub fn letter(self) -> char {
        match self {
            Emotion::Angry => 'A',
            Emotion::Positive => 'P',
            Emotion::Neutral => 'N',
            Emotion::Sad => 'S',
        }
    }

    pub fn from_letter(c: char) -> Option<Emotion> {
        Emotion::ALL.into_iter().find(|e| e.letter() == c)
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParam(format!("unknown emotion {s:?}; allowed: angry, positive, neutral, sad")))
    }
}

/// Small set of emotion tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EmotionSet(u8);

impl EmotionSet {
    pub fn single(e: Emotion) -> Self {
        Self(e.bit())
    }

    pub fn contains(self, e: Emotion) -> bool {
        self.0 & e.bit() != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Emotion> {
        Emotion::ALL.into_iter().filter(move |e| self.contains(*e))
    }

    /// The tag when the set holds exactly one.
    pub fn only(self) -> Option<Emotion> {
        if self.len() == 1 {
            self.iter().next()
        } else {
            None
        }
    }
}

impl FromIterator<Emotion> for EmotionSet {
    fn from_iter<I: IntoIterator<Item = Emotion>>(iter: I) -> Self {
        Self(iter.into_iter().fold(0, |acc, e| acc | e.bit()))
    }
}

impl fmt::Display for EmotionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.iter().map(Emotion::name).collect();
        f.write_str(&names.join("+"))
    }
}

/// An identified clip with its speaker label and emotion tags.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub id: String,
    pub speaker: u32,
    pub emotions: EmotionSet,
    pub audio: Arc<Waveform>,
}

impl Utterance {
    pub fn new(id: impl Into<String>, speaker: u32, emotion: Emotion, audio: Waveform) -> Self {
        Self {
            id: id.into(),
            speaker,
            emotions: EmotionSet::single(emotion),
            audio: Arc::new(audio),
        }
    }

    pub fn duration_secs(&self) -> f64 {
        self.audio.duration_secs()
    }
}

/// Which CopyPaste variant produced an utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CpKind {
    /// Same emotion category, same speaker.
    Same,
    /// Different emotion categories, same speaker.
    Different,
}

impl fmt::Display for CpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CpKind::Same => "S-CP",
            CpKind::Different => "D-CP",
        })
    }
}

/// Pairing scheme requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CpScheme {
    #[serde(rename = "S-CP")]
    Same,
    #[serde(rename = "D-CP")]
    Different,
    #[serde(rename = "S+D-CP")]
    Both,
}

impl fmt::Display for CpScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CpScheme::Same => "S-CP",
            CpScheme::Different => "D-CP",
            CpScheme::Both => "S+D-CP",
        })
    }
}

impl FromStr for CpScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S-CP" | "S" | "SAME" => Ok(CpScheme::Same),
            "D-CP" | "D" | "DIFFERENT" => Ok(CpScheme::Different),
            "S+D-CP" | "SD" | "S+D" | "BOTH" => Ok(CpScheme::Both),
            _ => Err(Error::InvalidParam(format!(
                "unknown CopyPaste scheme {s:?}; allowed: S-CP, D-CP, S+D-CP"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CopyPasteConfig {
    /// Length of each pasted segment.
    pub segment_secs: f64,
    /// Segment start offsets are multiples of this many samples.
    pub align: usize,
}

impl Default for CopyPasteConfig {
    fn default() -> Self {
        Self {
            segment_secs: 1.0,
            align: 1,
        }
    }
}

impl CopyPasteConfig {
    pub fn segment_samples(&self, sample_rate: u32) -> usize {
        (self.segment_secs * sample_rate as f64).round() as usize
    }
}

/// A (possibly cyclic) window into one source clip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
    pub source_len: usize,
}

impl Segment {
    /// True when the source was shorter than the segment and got wrap-padded.
    pub fn wraps(&self) -> bool {
        self.source_len < self.len
    }

    fn extend_from(&self, samples: &[f32], out: &mut Vec<f32>) {
        if self.wraps() {
            out.extend((0..self.len).map(|i| samples[(self.start + i) % self.source_len]));
        } else {
            out.extend_from_slice(&samples[self.start..self.start + self.len]);
        }
    }
}

/// Everything random about one CopyPaste call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyPastePlan {
    pub kind: CpKind,
    pub a: Segment,
    pub b: Segment,
    /// Whether the segment of `a` comes first.
    pub a_first: bool,
}

impl CopyPastePlan {
    pub fn render(&self, a: &Waveform, b: &Waveform) -> Waveform {
        let mut out = Vec::with_capacity(self.a.len + self.b.len);
        let (first, first_src, second, second_src) = self.ordered(a, b);
        first.extend_from(first_src.samples(), &mut out);
        second.extend_from(second_src.samples(), &mut out);
        Waveform::new(out, a.sample_rate()).expect("sample rate validated by the source")
    }

    fn ordered<'w>(&self, a: &'w Waveform, b: &'w Waveform) -> (Segment, &'w Waveform, Segment, &'w Waveform) {
        if self.a_first {
            (self.a, a, self.b, b)
        } else {
            (self.b, b, self.a, a)
        }
    }
}

fn pick_segment<R: Rng + ?Sized>(source_len: usize, seg: usize, align: usize, rng: &mut R) -> Segment {
    let start = if source_len >= seg {
        align * rng.gen_range(0..=(source_len - seg) / align)
    } else {
        0
    };
    Segment {
        start,
        len: seg,
        source_len,
    }
}

fn check_pair(a: &Utterance, b: &Utterance, kind: CpKind) -> Result<()> {
    if a.speaker != b.speaker {
        return Err(Error::CopyPaste(format!("speakers differ ({} vs {})", a.speaker, b.speaker)));
    }
    if a.audio.sample_rate() != b.audio.sample_rate() {
        return Err(Error::CopyPaste("sample rates differ".into()));
    }
    if a.audio.is_empty() || b.audio.is_empty() {
        return Err(Error::EmptyWaveform);
    }
    match kind {
        CpKind::Same => {
            if a.emotions.len() != 1 || a.emotions != b.emotions {
                return Err(Error::CopyPaste(format!(
                    "S-CP needs one shared emotion tag (got {} and {})",
                    a.emotions, b.emotions
                )));
            }
        }
        CpKind::Different => {
            if a.emotions.is_empty() || b.emotions.is_empty() || !a.emotions.is_disjoint(b.emotions) {
                return Err(Error::CopyPaste(format!(
                    "D-CP needs disjoint emotion tags (got {} and {})",
                    a.emotions, b.emotions
                )));
            }
        }
    }
    Ok(())
}

/// Validates preconditions and draws segment positions and order.
pub fn plan_copy_paste<R: Rng + ?Sized>(
    a: &Utterance,
    b: &Utterance,
    kind: CpKind,
    cfg: &CopyPasteConfig,
    rng: &mut R,
) -> Result<CopyPastePlan> {
    check_pair(a, b, kind)?;
    if !(cfg.segment_secs > 0.0) || cfg.align == 0 {
        return Err(Error::InvalidParam("segment_secs and align must be positive".into()));
    }
    let seg = cfg.segment_samples(a.audio.sample_rate());
    let seg_a = pick_segment(a.audio.len(), seg, cfg.align, rng);
    let seg_b = pick_segment(b.audio.len(), seg, cfg.align, rng);
    let a_first = rng.gen_bool(0.5);
    Ok(CopyPastePlan {
        kind,
        a: seg_a,
        b: seg_b,
        a_first,
    })
}

/// Materializes a plan into a new utterance carrying the shared speaker label.
pub fn render_copy_paste(a: &Utterance, b: &Utterance, plan: &CopyPastePlan) -> Utterance {
    Utterance {
        id: format!("{}+{}", a.id, b.id),
        speaker: a.speaker,
        emotions: a.emotions.union(b.emotions),
        audio: Arc::new(plan.render(&a.audio, &b.audio)),
    }
}

/// Same-emotion CopyPaste.
pub fn s_cp<R: Rng + ?Sized>(a: &Utterance, b: &Utterance, cfg: &CopyPasteConfig, rng: &mut R) -> Result<Utterance> {
    let plan = plan_copy_paste(a, b, CpKind::Same, cfg, rng)?;
    Ok(render_copy_paste(a, b, &plan))
}

/// Different-emotion CopyPaste; the result carries both emotion tags.
pub fn d_cp<R: Rng + ?Sized>(a: &Utterance, b: &Utterance, cfg: &CopyPasteConfig, rng: &mut R) -> Result<Utterance> {
    let plan = plan_copy_paste(a, b, CpKind::Different, cfg, rng)?;
    Ok(render_copy_paste(a, b, &plan))
}

/// Lookup of source utterances by (speaker, emotion).
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    utterances: Vec<Utterance>,
    cells: BTreeMap<(u32, Emotion), Vec<usize>>,
}

impl CorpusIndex {
    /// Every utterance must carry exactly one emotion tag.
    pub fn new(utterances: Vec<Utterance>) -> Result<Self> {
        if utterances.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut cells: BTreeMap<(u32, Emotion), Vec<usize>> = BTreeMap::new();
        for (i, u) in utterances.iter().enumerate() {
            let e = u
                .emotions
                .only()
                .ok_or_else(|| Error::InvalidParam(format!("utterance {} must carry exactly one emotion", u.id)))?;
            cells.entry((u.speaker, e)).or_default().push(i);
        }
        Ok(Self { utterances, cells })
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn get(&self, i: usize) -> &Utterance {
        &self.utterances[i]
    }

    pub fn cell(&self, speaker: u32, emotion: Emotion) -> &[usize] {
        self.cells.get(&(speaker, emotion)).map_or(&[], Vec::as_slice)
    }

    /// Sorted distinct speaker labels.
    pub fn speakers(&self) -> Vec<u32> {
        let mut s: Vec<u32> = self.cells.keys().map(|(s, _)| *s).collect();
        s.dedup();
        s
    }

    /// Emotions of `speaker` other than `except` that have at least one clip.
    pub fn other_emotions(&self, speaker: u32, except: Emotion) -> Vec<Emotion> {
        Emotion::ALL
            .into_iter()
            .filter(|&e| e != except && !self.cell(speaker, e).is_empty())
            .collect()
    }

    /// Picks a CopyPaste partner for utterance `x`.
    ///
    /// S-CP draws from the same cell excluding `x` itself unless `x` is alone
    /// in it. D-CP draws a different emotion of the same speaker uniformly,
    /// then a clip from that cell. S+D-CP flips a fair coin when both are
    /// feasible and falls back to S-CP otherwise.
    pub fn choose_partner<R: Rng + ?Sized>(&self, x: usize, scheme: CpScheme, rng: &mut R) -> Result<(usize, CpKind)> {
        let u = &self.utterances[x];
        let emotion = u.emotions.only().expect("checked at construction");
        let others = self.other_emotions(u.speaker, emotion);
        let kind = match scheme {
            CpScheme::Same => CpKind::Same,
            CpScheme::Different if others.is_empty() => {
                return Err(Error::NoPartner(format!(
                    "speaker {} has no emotion other than {emotion} for D-CP",
                    u.speaker
                )))
            }
            CpScheme::Different => CpKind::Different,
            CpScheme::Both if others.is_empty() => CpKind::Same,
            CpScheme::Both => {
                if rng.gen_bool(0.5) {
                    CpKind::Same
                } else {
                    CpKind::Different
                }
            }
        };
        let partner = match kind {
            CpKind::Same => {
                let cell: Vec<usize> = self.cell(u.speaker, emotion).iter().copied().filter(|&i| i != x).collect();
                cell.choose(rng).copied().unwrap_or(x)
            }
            CpKind::Different => {
                let e = *others.choose(rng).expect("non-empty");
                *self.cell(u.speaker, e).choose(rng).expect("non-empty cell")
            }
        };
        Ok((partner, kind))
    }
}

/// Cached per-utterance log-mel features and RMS energies on the shared
/// frame grid.
#[derive(Debug, Clone)]
pub struct FeatureBank {
    logmel: LogMel,
    features: Vec<Array2<f64>>,
    energies: Vec<RmsProfile>,
}

/// One Siamese training unit. Only `x` is ever masked.
#[derive(Debug, Clone)]
pub struct TrainPair {
    pub x: FeatureMatrix,
    /// Normalized RMS energy aligned with the frames of `x`.
    pub x_energy: RmsProfile,
    pub xprime: FeatureMatrix,
    pub speaker: u32,
    pub kind: CpKind,
    pub partner: usize,
    /// Mask applied to `x` (empty unless masking is enabled).
    pub x_mask: MaskPlan,
}

/// A single featurized sample for plain (non-paired) training.
#[derive(Debug, Clone)]
pub struct Sample {
    pub features: FeatureMatrix,
    pub energy: RmsProfile,
    pub speaker: u32,
}

impl FeatureBank {
    pub fn new(utterances: &[Utterance], logmel: LogMel) -> Result<Self> {
        let spec = logmel.frame_spec();
        let mut features = Vec::with_capacity(utterances.len());
        let mut energies = Vec::with_capacity(utterances.len());
        for u in utterances {
            features.push(logmel.extract(&u.audio)?.into_values());
            energies.push(rms_energy(&u.audio, spec)?);
        }
        Ok(Self {
            logmel,
            features,
            energies,
        })
    }

    pub fn logmel(&self) -> &LogMel {
        &self.logmel
    }

    /// Raw (un-normalized) log-mel features of utterance `i`.
    pub fn features(&self, i: usize) -> FeatureMatrix {
        FeatureMatrix::new(self.features[i].clone())
    }

    pub fn energy(&self, i: usize) -> &RmsProfile {
        &self.energies[i]
    }

    /// Mean-normalized, randomly cropped features of utterance `i` with the
    /// matching normalized energy profile.
    pub fn sample<R: Rng + ?Sized>(&self, i: usize, speaker: u32, crop: usize, rng: &mut R) -> Result<Sample> {
        let norm = mean_normalize(&self.features(i));
        let window = crop_window(norm.n_frames(), crop, rng)?;
        Ok(Sample {
            features: norm.select(&window),
            energy: normalize_rms(&self.energies[i].select(&window)),
            speaker,
        })
    }

    /// Raw log-mel features of a rendered CopyPaste utterance.
    ///
    /// Frames lying entirely inside one hop-aligned, unwrapped segment are
    /// read from the cache; frames straddling the join are recomputed. The
    /// result is bit-identical to extracting features from the rendered
    /// waveform.
    pub fn copy_paste_features(&self, index: &CorpusIndex, a: usize, b: usize, plan: &CopyPastePlan) -> Result<FeatureMatrix> {
        let (ua, ub) = (index.get(a), index.get(b));
        let rendered = plan.render(&ua.audio, &ub.audio);
        let spec = self.logmel.frame_spec();
        let (first, first_idx, second, second_idx) = if plan.a_first {
            (plan.a, a, plan.b, b)
        } else {
            (plan.b, b, plan.a, a)
        };
        let aligned = |s: &Segment| !s.wraps() && s.start.is_multiple_of(spec.hop);
        if !(aligned(&first) && aligned(&second) && first.len % spec.hop == 0) {
            return self.logmel.extract(&rendered);
        }
        let grid = spec.grid(rendered.len());
        let bins = self.logmel.n_mels();
        let mut data = Array2::zeros((grid.n_frames, bins));
        for f in 0..grid.n_frames {
            let s = grid.start(f);
            let cached = if s + spec.frame_len <= first.len {
                Some((first_idx, (first.start + s) / spec.hop))
            } else if s >= first.len && s + spec.frame_len <= first.len + second.len {
                Some((second_idx, (second.start + s - first.len) / spec.hop))
            } else {
                None
            };
            match cached {
                Some((u, k)) => data.row_mut(f).assign(&self.features[u].row(k)),
                None => data
                    .row_mut(f)
                    .assign(&ndarray::ArrayView1::from(&self.logmel.extract_frame(rendered.samples(), s))),
            }
        }
        Ok(FeatureMatrix::new(data))
    }
}

/// Builds one `(x, x')` pair: `x'` is a CopyPaste of `x` with a partner
/// chosen by `scheme`; both sides are mean-normalized and cropped to
/// `crop` frames.
pub fn build_pair<R: Rng + ?Sized>(
    x: usize,
    index: &CorpusIndex,
    bank: &FeatureBank,
    scheme: CpScheme,
    cp: &CopyPasteConfig,
    crop: usize,
    rng: &mut R,
) -> Result<TrainPair> {
    let (partner, kind) = index.choose_partner(x, scheme, rng)?;
    let ux = index.get(x);
    let plan = plan_copy_paste(ux, index.get(partner), kind, cp, rng)?;
    let xs = bank.sample(x, ux.speaker, crop, rng)?;
    let raw = bank.copy_paste_features(index, x, partner, &plan)?;
    let norm = mean_normalize(&raw);
    let window = crop_window(norm.n_frames(), crop, rng)?;
    Ok(TrainPair {
        x: xs.features,
        x_energy: xs.energy,
        xprime: norm.select(&window),
        speaker: ux.speaker,
        kind,
        partner,
        x_mask: MaskPlan::empty(crop, 0),
    })
}
