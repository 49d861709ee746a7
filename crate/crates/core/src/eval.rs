//! Verification trials over emotion buckets, cosine scoring and EER.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use ndarray::ArrayView1;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augment::Emotion;
use crate::error::{Error, Result};

/// Unordered emotion pair; stored with the lower emotion first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bucket(Emotion, Emotion);

impl Bucket {
    pub fn new(a: Emotion, b: Emotion) -> Self {
        if a <= b {
            Bucket(a, b)
        } else {
            Bucket(b, a)
        }
    }

    pub fn emotions(self) -> (Emotion, Emotion) {
        (self.0, self.1)
    }

    pub fn is_same_emotion(self) -> bool {
        self.0 == self.1
    }
}

use Emotion::{Angry as A, Neutral as N, Positive as P, Sad as S};

/// Report order: four same-emotion buckets, then six cross-emotion buckets.
pub const GRID_ORDER: [Bucket; 10] = [
    Bucket(A, A),
    Bucket(P, P),
    Bucket(N, N),
    Bucket(S, S),
    Bucket(A, P),
    Bucket(A, N),
    Bucket(A, S),
    Bucket(P, N),
    Bucket(P, S),
    Bucket(N, S),
];

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0.letter(), self.1.letter())
    }
}

impl FromStr for Bucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParam(format!("bad bucket {s:?}; expected e.g. A-P"));
        let mut it = s.trim().split('-');
        let (a, b) = (it.next().ok_or_else(bad)?, it.next().ok_or_else(bad)?);
        if it.next().is_some() || a.len() != 1 || b.len() != 1 {
            return Err(bad());
        }
        let letter = |x: &str| Emotion::from_letter(x.chars().next().unwrap().to_ascii_uppercase()).ok_or_else(bad);
        Ok(Bucket::new(letter(a)?, letter(b)?))
    }
}

/// Minimal view of a test utterance for trial construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestItem {
    pub id: String,
    pub speaker: u32,
    pub emotion: Emotion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub enroll: String,
    pub test: String,
    pub target: bool,
    pub bucket: Bucket,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialLimits {
    /// Per-bucket cap; `0` disables subsampling.
    pub max_per_bucket: usize,
    pub seed: u64,
}

impl Default for TrialLimits {
    fn default() -> Self {
        Self {
            max_per_bucket: 50_000,
            seed: 0,
        }
    }
}

/// Trials grouped by bucket. Every grid bucket is present, possibly empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub buckets: BTreeMap<Bucket, Vec<Trial>>,
    pub warnings: Vec<String>,
}

impl TrialSet {
    /// All trials in grid order.
    pub fn merged(&self) -> impl Iterator<Item = &Trial> {
        GRID_ORDER.iter().flat_map(move |b| self.buckets[b].iter())
    }

    pub fn len(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Enumerates every unordered pair of distinct utterances, assigns it to the
/// bucket of its two emotions and marks same-speaker pairs as targets.
/// Buckets over the cap are subsampled uniformly (seeded), keeping
/// enumeration order.
pub fn build_trials(items: &[TestItem], limits: TrialLimits) -> TrialSet {
    let mut buckets: BTreeMap<Bucket, Vec<Trial>> = GRID_ORDER.iter().map(|b| (*b, Vec::new())).collect();
    for (i, a) in items.iter().enumerate() {
        for b in &items[i + 1..] {
            if a.id == b.id {
                continue;
            }
            let bucket = Bucket::new(a.emotion, b.emotion);
            buckets.get_mut(&bucket).expect("grid covers all pairs").push(Trial {
                enroll: a.id.clone(),
                test: b.id.clone(),
                target: a.speaker == b.speaker,
                bucket,
            });
        }
    }
    let mut warnings = Vec::new();
    for (ordinal, bucket) in GRID_ORDER.iter().enumerate() {
        let trials = buckets.get_mut(bucket).expect("present");
        if trials.is_empty() {
            warnings.push(format!("bucket {bucket} has no eligible pairs"));
        } else if limits.max_per_bucket > 0 && trials.len() > limits.max_per_bucket {
            let mut rng = ChaCha8Rng::seed_from_u64(limits.seed);
            rng.set_stream(ordinal as u64);
            let mut keep = index::sample(&mut rng, trials.len(), limits.max_per_bucket).into_vec();
            keep.sort_unstable();
            *trials = keep.into_iter().map(|k| trials[k].clone()).collect();
        }
    }
    TrialSet { buckets, warnings }
}

/// Cosine similarity of two embeddings.
pub fn cosine_score(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("embedding sizes {} and {}", a.len(), b.len())));
    }
    let (na, nb) = (a.dot(&a).sqrt(), b.dot(&b).sqrt());
    if !(na > 0.0) || !(nb > 0.0) {
        return Err(Error::ZeroNorm("scored embedding"));
    }
    Ok((a.dot(&b) / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EerResult {
    pub eer: f64,
    pub threshold: f64,
    pub n_target: usize,
    pub n_nontarget: usize,
}

/// Equal error rate.
///
/// At threshold `t`, false accepts are non-targets scoring `>= t` and false
/// rejects are targets scoring `< t`. Operating points are evaluated at
/// every distinct score and at `+inf`; between the two points bracketing the
/// FAR/FRR crossing the rates are interpolated linearly.
pub fn compute_eer(scores: &[f64], targets: &[bool]) -> Result<EerResult> {
    if scores.len() != targets.len() {
        return Err(Error::Shape(format!("{} scores but {} labels", scores.len(), targets.len())));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("scores".into()));
    }
    let n_target = targets.iter().filter(|&&t| t).count();
    let n_nontarget = targets.len() - n_target;
    if n_target == 0 || n_nontarget == 0 {
        return Err(Error::SingleClass {
            targets: n_target,
            nontargets: n_nontarget,
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let (nt, nn) = (n_target as f64, n_nontarget as f64);
    let mut below_t = 0usize;
    let mut below_n = 0usize;
    let mut prev: Option<(f64, f64, f64)> = None;
    let mut k = 0;
    loop {
        let threshold = if k < order.len() { scores[order[k]] } else { f64::INFINITY };
        let frr = below_t as f64 / nt;
        let far = (n_nontarget - below_n) as f64 / nn;
        let d = frr - far;
        if d >= 0.0 {
            return Ok(match prev {
                Some((t0, far0, frr0)) if d > 0.0 => {
                    let d0 = frr0 - far0;
                    let lambda = d0 / (d0 - d);
                    let eer = far0 + lambda * (far - far0);
                    let threshold = if threshold.is_finite() {
                        t0 + lambda * (threshold - t0)
                    } else {
                        t0
                    };
                    EerResult {
                        eer,
                        threshold,
                        n_target,
                        n_nontarget,
                    }
                }
                _ => EerResult {
                    eer: far,
                    threshold,
                    n_target,
                    n_nontarget,
                },
            });
        }
        prev = Some((threshold, far, frr));
        // advance past every score equal to this threshold
        while k < order.len() && scores[order[k]] == threshold {
            if targets[order[k]] {
                below_t += 1;
            } else {
                below_n += 1;
            }
            k += 1;
        }
    }
}

/// A trial with its score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTrial {
    pub trial: Trial,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub eer: Option<EerResult>,
}

/// Eleven-entry EER grid: A-A, P-P, N-N, S-S, A-P, A-N, A-S, P-N, P-S, N-S, Merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

pub const MERGED_LABEL: &str = "Merged";

fn eer_or_none(scored: &[&ScoredTrial]) -> Option<EerResult> {
    let scores: Vec<f64> = scored.iter().map(|s| s.score).collect();
    let targets: Vec<bool> = scored.iter().map(|s| s.trial.target).collect();
    compute_eer(&scores, &targets).ok()
}

/// EER over the pooled scores of the buckets accepted by `keep`.
pub fn pooled_eer(scored: &[ScoredTrial], keep: impl Fn(Bucket) -> bool) -> Option<EerResult> {
    let sel: Vec<&ScoredTrial> = scored.iter().filter(|s| keep(s.trial.bucket)).collect();
    eer_or_none(&sel)
}

/// Per-bucket EERs plus the merged EER on pooled scores. Buckets without
/// both classes are reported as absent.
pub fn report_grid(scored: &[ScoredTrial]) -> Report {
    let mut per_bucket: BTreeMap<Bucket, Vec<&ScoredTrial>> = BTreeMap::new();
    for s in scored {
        per_bucket.entry(s.trial.bucket).or_default().push(s);
    }
    let mut rows: Vec<ReportRow> = GRID_ORDER
        .iter()
        .map(|b| ReportRow {
            label: b.to_string(),
            eer: per_bucket.get(b).and_then(|v| eer_or_none(v)),
        })
        .collect();
    let pooled: Vec<&ScoredTrial> = GRID_ORDER
        .iter()
        .filter(|b| rows[GRID_ORDER.iter().position(|g| g == *b).unwrap()].eer.is_some())
        .flat_map(|b| per_bucket.get(b).into_iter().flatten().copied())
        .collect();
    rows.push(ReportRow {
        label: MERGED_LABEL.into(),
        eer: eer_or_none(&pooled),
    });
    Report { rows }
}

impl Report {
    pub fn merged(&self) -> Option<EerResult> {
        self.rows.last().and_then(|r| r.eer)
    }

    pub fn get(&self, label: &str) -> Option<EerResult> {
        self.rows.iter().find(|r| r.label == label).and_then(|r| r.eer)
    }

    /// One JSON object per row.
    pub fn to_jsonl(&self) -> String {
        self.rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain data") + "\n")
            .collect()
    }
}

fn pct(e: Option<EerResult>) -> String {
    e.map_or_else(|| "-".to_string(), |r| format!("{:.2}%", 100.0 * r.eer))
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.rows.iter().map(|r| r.label.as_str()).collect();
        writeln!(f, "{:>8} | Same-emotion / Cross-emotion / Merged EER", "")?;
        for l in &labels {
            write!(f, "{l:>8}")?;
        }
        writeln!(f)?;
        for r in &self.rows {
            write!(f, "{:>8}", pct(r.eer))?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "(Merged pools the scores of all non-empty buckets; it is not an average of bucket EERs.)"
        )
    }
}

/// Writes `label enroll test bucket` lines.
pub fn write_trials<W: Write>(mut w: W, trials: impl IntoIterator<Item = impl std::borrow::Borrow<Trial>>) -> Result<()> {
    for t in trials {
        let t = t.borrow();
        writeln!(w, "{} {} {} {}", u8::from(t.target), t.enroll, t.test, t.bucket)?;
    }
    Ok(())
}

pub fn read_trials<R: BufRead>(r: R) -> Result<Vec<Trial>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() || fields[0].starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let target = match fields[0] {
            "1" => true,
            "0" => false,
            other => return Err(err(format!("label must be 0 or 1, found {other:?}"))),
        };
        out.push(Trial {
            enroll: fields[1].to_string(),
            test: fields[2].to_string(),
            target,
            bucket: fields[3].parse().map_err(|e: Error| err(e.to_string()))?,
        });
    }
    Ok(out)
}

/// Writes `enroll test score` lines; scores use round-trip formatting.
pub fn write_scores<W: Write>(mut w: W, scored: &[ScoredTrial]) -> Result<()> {
    for s in scored {
        writeln!(w, "{} {} {:?}", s.trial.enroll, s.trial.test, s.score)?;
    }
    Ok(())
}

pub fn read_scores<R: BufRead>(r: R) -> Result<Vec<(String, String, f64)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() || fields[0].starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        }
        let score: f64 = fields[2].parse().map_err(|_| err(format!("bad score {:?}", fields[2])))?;
        out.push((fields[0].to_string(), fields[1].to_string(), score));
    }
    Ok(out)
}

/// Joins scores onto trials by `(enroll, test)`.
pub fn attach_scores(trials: &[Trial], scores: &[(String, String, f64)]) -> Result<Vec<ScoredTrial>> {
    let lookup: BTreeMap<(&str, &str), f64> = scores.iter().map(|(e, t, s)| ((e.as_str(), t.as_str()), *s)).collect();
    trials
        .iter()
        .map(|t| {
            lookup
                .get(&(t.enroll.as_str(), t.test.as_str()))
                .map(|&score| ScoredTrial { trial: t.clone(), score })
                .ok_or_else(|| Error::InvalidParam(format!("no score for trial {} {}", t.enroll, t.test)))
        })
        .collect()
}
