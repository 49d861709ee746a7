//! Randomized invariants of framing, masking, CopyPaste and evaluation.
//! Each `*_case` checks one generated input; `run` drives a case function
//! over a deterministic proptest runner.

use std::collections::BTreeSet;

use emosv_core::augment::{d_cp, plan_copy_paste, s_cp, CopyPasteConfig, CpKind, Emotion, Utterance};
use emosv_core::dsp::{normalize_rms, rms_energy, FeatureMatrix, FrameGrid, FrameSpec, RmsProfile, Waveform};
use emosv_core::eval::{build_trials, report_grid, Bucket, ScoredTrial, TestItem, TrialLimits};
use emosv_core::masking::{
    apply_em, partition_zones, random_mask_plan, select_mask_centers, Dominance, MaskConfig, ZoneThresholds,
};
use ndarray::Array2;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Runs `case` on `cases` inputs from `strategy` with a fixed-seed runner.
pub fn run<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    case: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<String, String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&strategy, case)
        .map(|()| format!("{name}: {cases} cases"))
        .map_err(|e| format!("{name}: {e}"))
}

pub fn grid(n: usize) -> FrameGrid {
    FrameGrid {
        frame_len: 4,
        hop: 2,
        n_frames: n,
    }
}

/// Normalized profile built from raw non-negative energies.
pub fn profile(raw: &[f64]) -> RmsProfile {
    normalize_rms(&RmsProfile::from_values(raw.to_vec(), grid(raw.len())))
}

/// Raw energies biased toward the zone boundaries and exact ties.
pub fn raw_energies() -> impl Strategy<Value = Vec<f64>> {
    let value = prop_oneof![
        0.0..1.0f64,
        Just(0.0),
        Just(0.2),
        Just(0.5),
        Just(1.0),
        (0u32..=10).prop_map(|k| k as f64 / 10.0),
    ];
    prop::collection::vec(value, 1..240)
}

pub fn zones_case(raw: Vec<f64>) -> Result<(), TestCaseError> {
    let p = profile(&raw);
    let z = partition_zones(&p, ZoneThresholds::default());
    let mut all: Vec<usize> = z.high.iter().chain(&z.low).chain(&z.noise).copied().collect();
    all.sort_unstable();
    prop_assert_eq!(all, (0..raw.len()).collect::<Vec<_>>());
    for &f in &z.high {
        prop_assert!(p.values()[f] > 0.5 && p.values()[f] <= 1.0);
    }
    for &f in &z.low {
        prop_assert!(p.values()[f] > 0.2 && p.values()[f] <= 0.5);
    }
    for &f in &z.noise {
        prop_assert!(p.values()[f] >= 0.0 && p.values()[f] <= 0.2);
    }
    let expected = if z.high.len() > z.low.len() {
        Dominance::Intense
    } else if z.low.is_empty() {
        Dominance::None
    } else {
        Dominance::Subdued
    };
    prop_assert_eq!(z.dominant, expected);
    if !z.low.is_empty() && z.high.len() == z.low.len() {
        prop_assert_eq!(z.dominant, Dominance::Subdued);
    }
    Ok(())
}

pub fn em_case((raw, m, t, seed): (Vec<f64>, usize, usize, u64)) -> Result<(), TestCaseError> {
    let p = profile(&raw);
    let z = partition_zones(&p, ZoneThresholds::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = select_mask_centers(&z, MaskConfig { count: m, span: t }, &mut rng);
    let zone: BTreeSet<usize> = z.dominant_frames().iter().copied().collect();
    prop_assert_eq!(plan.centers.len(), m.min(zone.len()));
    prop_assert_eq!(plan.centers.iter().collect::<BTreeSet<_>>().len(), plan.centers.len());
    for c in &plan.centers {
        prop_assert!(zone.contains(c));
        match z.dominant {
            Dominance::Intense => prop_assert!(p.values()[*c] > 0.5),
            Dominance::Subdued => prop_assert!(p.values()[*c] > 0.2 && p.values()[*c] <= 0.5),
            Dominance::None => prop_assert!(false, "no centers without a dominant zone"),
        }
    }
    let masked = plan.masked_frames();
    prop_assert!(masked.len() <= m * t);
    let half = t.saturating_sub(1) / 2;
    for f in &masked {
        prop_assert!(*f < raw.len());
        prop_assert!(plan.centers.iter().any(|&c| c.abs_diff(*f) <= half + 1));
    }

    let feats = FeatureMatrix::new(Array2::from_shape_fn((raw.len(), 3), |(i, j)| (i * 3 + j) as f64 + 1.0));
    let out = apply_em(&feats, &plan);
    for f in 0..raw.len() {
        let zeroed = out.values().row(f).iter().all(|v| *v == 0.0);
        prop_assert_eq!(zeroed, masked.contains(&f));
        if !masked.contains(&f) {
            prop_assert_eq!(out.values().row(f), feats.values().row(f));
        }
    }
    if z.dominant == Dominance::None {
        prop_assert_eq!(out, feats);
    }
    Ok(())
}

pub fn scaling_case((raw, k): (Vec<f64>, i32)) -> Result<(), TestCaseError> {
    let scaled: Vec<f64> = raw.iter().map(|v| v * 2f64.powi(k)).collect();
    let a = partition_zones(&profile(&raw), ZoneThresholds::default());
    let b = partition_zones(&profile(&scaled), ZoneThresholds::default());
    prop_assert_eq!(a, b);
    Ok(())
}

pub fn rm_case((n, m, t, seed): (usize, usize, usize, u64)) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = random_mask_plan(n, MaskConfig { count: m, span: t }, &mut rng);
    prop_assert_eq!(plan.centers.len(), m.min(n));
    prop_assert!(plan.masked_frames().len() <= m * t);
    prop_assert!(plan.masked_frames().iter().all(|&f| f < n));
    Ok(())
}

pub fn rms_case((samples, frame_len, hop): (Vec<f32>, usize, usize)) -> Result<(), TestCaseError> {
    let wave = Waveform::new(samples.clone(), 8000).unwrap();
    let spec = FrameSpec::new(frame_len, hop).unwrap();
    let rms = rms_energy(&wave, spec).unwrap();
    for (f, &v) in rms.values().iter().enumerate() {
        let start = f * hop;
        let sum_sq: f64 = (0..frame_len)
            .map(|i| samples.get(start + i).map_or(0.0, |&s| s as f64 * s as f64))
            .sum();
        let direct = (sum_sq / frame_len as f64).sqrt();
        prop_assert!((v - direct).abs() <= 1e-12, "frame {}: {} vs {}", f, v, direct);
    }
    let norm = normalize_rms(&rms);
    prop_assert!(norm.values().iter().all(|v| (0.0..=1.0).contains(v)));
    if rms.values().iter().any(|v| *v > 0.0) {
        prop_assert_eq!(norm.values().iter().cloned().fold(0.0, f64::max), 1.0);
    }
    Ok(())
}

pub fn em_strategy() -> impl Strategy<Value = (Vec<f64>, usize, usize, u64)> {
    (raw_energies(), 0usize..5, 0usize..12, any::<u64>())
}

pub fn scaling_strategy() -> impl Strategy<Value = (Vec<f64>, i32)> {
    (raw_energies(), -8i32..8)
}

pub fn rm_strategy() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..300, 0usize..5, 0usize..12, any::<u64>())
}

pub fn rms_strategy() -> impl Strategy<Value = (Vec<f32>, usize, usize)> {
    (prop::collection::vec(-1.0f32..1.0, 1..2000), 1usize..64, 1usize..32)
}

const SR: u32 = 1000;

pub fn emotion(i: u8) -> Emotion {
    Emotion::ALL[i as usize % 4]
}

/// A clip whose samples encode their own index: `sign * (index + 1)`.
pub fn traceable(id: &str, speaker: u32, e: Emotion, len: usize, sign: f32) -> Utterance {
    let samples = (0..len).map(|i| sign * (i + 1) as f32).collect();
    Utterance::new(id, speaker, e, Waveform::new(samples, SR).unwrap())
}

/// Checks that `out` is one contiguous cyclic run of one source followed by
/// one of the other, each exactly one segment long.
pub fn assert_traceable(out: &[f32], len_a: usize, len_b: usize, seg: usize) -> Result<(), TestCaseError> {
    prop_assert_eq!(out.len(), 2 * seg);
    let halves = [&out[..seg], &out[seg..]];
    let signs: Vec<f32> = halves.iter().map(|h| h[0].signum()).collect();
    prop_assert!(signs[0] != signs[1], "one half from each source");
    for h in halves {
        let sign = h[0].signum();
        let src_len = if sign > 0.0 { len_a } else { len_b };
        let start = (h[0].abs() as usize) - 1;
        for (i, v) in h.iter().enumerate() {
            prop_assert_eq!(v.signum(), sign);
            prop_assert_eq!(v.abs() as usize - 1, (start + i) % src_len);
        }
        if src_len >= seg {
            prop_assert!(start + seg <= src_len, "no wrap when the source is long enough");
        }
    }
    Ok(())
}

pub fn copy_paste_case((len_a, len_b, speaker, e1, shift, seed): (usize, usize, u32, u8, u8, u64)) -> Result<(), TestCaseError> {
    let cfg = CopyPasteConfig::default();
    let seg = cfg.segment_samples(SR);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let a = traceable("a", speaker, emotion(e1), len_a, 1.0);
    let b = traceable("b", speaker, emotion(e1), len_b, -1.0);
    let same = s_cp(&a, &b, &cfg, &mut rng).unwrap();
    prop_assert_eq!(same.speaker, speaker);
    prop_assert_eq!(same.emotions.len(), 1);
    prop_assert_eq!(same.audio.len(), 2 * SR as usize);
    assert_traceable(same.audio.samples(), len_a, len_b, seg)?;

    let c = traceable("c", speaker, emotion(e1 + shift), len_b, -1.0);
    let diff = d_cp(&a, &c, &cfg, &mut rng).unwrap();
    prop_assert_eq!(diff.speaker, speaker);
    prop_assert_eq!(diff.emotions.len(), 2);
    prop_assert!(diff.emotions.contains(emotion(e1)) && diff.emotions.contains(emotion(e1 + shift)));
    prop_assert!((diff.duration_secs() - 2.0).abs() < 1e-12);
    assert_traceable(diff.audio.samples(), len_a, len_b, seg)?;
    Ok(())
}

pub fn copy_paste_reject_case((speaker, other, e1, shift, seed): (u32, u32, u8, u8, u64)) -> Result<(), TestCaseError> {
    let cfg = CopyPasteConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = traceable("a", speaker, emotion(e1), 1500, 1.0);
    let stranger = traceable("b", speaker + other, emotion(e1), 1500, -1.0);
    prop_assert!(s_cp(&a, &stranger, &cfg, &mut rng).is_err());
    prop_assert!(d_cp(
        &a,
        &traceable("b", speaker + other, emotion(e1 + shift), 1500, -1.0),
        &cfg,
        &mut rng
    )
    .is_err());
    let same_emotion = traceable("b", speaker, emotion(e1), 1500, -1.0);
    prop_assert!(d_cp(&a, &same_emotion, &cfg, &mut rng).is_err());
    let other_emotion = traceable("b", speaker, emotion(e1 + shift), 1500, -1.0);
    prop_assert!(s_cp(&a, &other_emotion, &cfg, &mut rng).is_err());
    let mixed = d_cp(&a, &other_emotion, &cfg, &mut rng).unwrap();
    prop_assert!(s_cp(&mixed, &mixed, &cfg, &mut rng).is_err());
    let resampled = Utterance::new("r", speaker, emotion(e1), Waveform::new(vec![0.5; 3000], 2 * SR).unwrap());
    prop_assert!(plan_copy_paste(&a, &resampled, CpKind::Same, &cfg, &mut rng).is_err());
    Ok(())
}

pub fn copy_paste_strategy() -> impl Strategy<Value = (usize, usize, u32, u8, u8, u64)> {
    (1usize..3000, 1usize..3000, 0u32..1000, 0u8..4, 1u8..4, any::<u64>())
}

pub fn copy_paste_reject_strategy() -> impl Strategy<Value = (u32, u32, u8, u8, u64)> {
    (0u32..1000, 1u32..1000, 0u8..4, 1u8..4, any::<u64>())
}

pub fn items(n_speakers: u32, per_cell: usize) -> Vec<TestItem> {
    let mut out = Vec::new();
    for s in 0..n_speakers {
        for e in Emotion::ALL {
            for k in 0..per_cell {
                out.push(TestItem {
                    id: format!("s{s}-{}-{k}", e.letter()),
                    speaker: s,
                    emotion: e,
                });
            }
        }
    }
    out
}

pub fn trials_case((n, per, seed, cap): (u32, usize, u64, usize)) -> Result<(), TestCaseError> {
    let its = items(n, per);
    let limits = TrialLimits {
        max_per_bucket: cap,
        seed,
    };
    let set = build_trials(&its, limits);
    let merged: Vec<_> = set.merged().collect();
    prop_assert_eq!(merged.len(), set.len());
    prop_assert!(set.buckets.values().all(|b| b.len() <= cap));
    let mut seen = BTreeSet::new();
    for t in &merged {
        let (a, b) = (
            its.iter().find(|i| i.id == t.enroll).unwrap(),
            its.iter().find(|i| i.id == t.test).unwrap(),
        );
        prop_assert!(a.id != b.id);
        prop_assert_eq!(t.target, a.speaker == b.speaker);
        prop_assert_eq!(t.bucket, Bucket::new(a.emotion, b.emotion));
        let key = if a.id < b.id {
            (a.id.clone(), b.id.clone())
        } else {
            (b.id.clone(), a.id.clone())
        };
        prop_assert!(seen.insert(key), "duplicate trial");
    }
    let again = build_trials(&its, limits);
    prop_assert_eq!(again.merged().collect::<Vec<_>>(), merged);
    Ok(())
}

pub fn report_case((n, seed): (u32, u64)) -> Result<(), TestCaseError> {
    use rand::Rng;
    let its = items(n, 2);
    let set = build_trials(&its, TrialLimits { max_per_bucket: 0, seed });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scored: Vec<ScoredTrial> = set
        .merged()
        .map(|t| ScoredTrial {
            trial: t.clone(),
            score: rng.gen_range(-1.0..1.0) + if t.target { 0.3 } else { 0.0 },
        })
        .collect();
    let report = report_grid(&scored);
    let labels: Vec<&str> = report.rows.iter().map(|r| r.label.as_str()).collect();
    prop_assert_eq!(
        labels,
        ["A-A", "P-P", "N-N", "S-S", "A-P", "A-N", "A-S", "P-N", "P-S", "N-S", "Merged"]
    );
    let scores: Vec<f64> = scored.iter().map(|s| s.score).collect();
    let targets: Vec<bool> = scored.iter().map(|s| s.trial.target).collect();
    let pooled = emosv_core::eval::compute_eer(&scores, &targets).unwrap();
    prop_assert_eq!(report.merged(), Some(pooled));
    Ok(())
}

pub fn trials_strategy() -> impl Strategy<Value = (u32, usize, u64, usize)> {
    (2u32..5, 1usize..3, any::<u64>(), 1usize..40)
}

pub fn report_strategy() -> impl Strategy<Value = (u32, u64)> {
    (2u32..4, any::<u64>())
}
