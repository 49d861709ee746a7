//! Energy-aware time masking and its random-position baseline.
//!
//! Frames are classified by max-normalized RMS energy into three zones:
//! high `(high, 1]`, low `(low, high]` and noise `[0, low]`. Whichever of
//! high and low holds more frames dominates (ties go to low). Mask centers
//! are sampled from the dominant zone and each mask blanks `span` frames.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::{FeatureMatrix, RmsProfile};

/// Zone boundaries on normalized RMS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZoneThresholds {
    pub high: f64,
    pub low: f64,
}

impl Default for ZoneThresholds {
    fn default() -> Self {
        Self { high: 0.5, low: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dominance {
    Intense,
    Subdued,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyZones {
    pub high: Vec<usize>,
    pub low: Vec<usize>,
    pub noise: Vec<usize>,
    pub dominant: Dominance,
    pub n_frames: usize,
}

impl EnergyZones {
    /// Frame indices of the dominant zone; empty when nothing dominates.
    pub fn dominant_frames(&self) -> &[usize] {
        match self.dominant {
            Dominance::Intense => &self.high,
            Dominance::Subdued => &self.low,
            Dominance::None => &[],
        }
    }
}

pub fn partition_zones(profile: &RmsProfile, thresholds: ZoneThresholds) -> EnergyZones {
    debug_assert!(profile.is_normalized(), "zones expect a normalized profile");
    let mut zones = EnergyZones {
        high: Vec::new(),
        low: Vec::new(),
        noise: Vec::new(),
        dominant: Dominance::None,
        n_frames: profile.len(),
    };
    for (i, &v) in profile.values().iter().enumerate() {
        if v > thresholds.high {
            zones.high.push(i);
        } else if v > thresholds.low {
            zones.low.push(i);
        } else {
            zones.noise.push(i);
        }
    }
    zones.dominant = if zones.high.len() > zones.low.len() {
        Dominance::Intense
    } else if !zones.low.is_empty() {
        Dominance::Subdued
    } else {
        Dominance::None
    };
    zones
}

/// Number and width of masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskConfig {
    pub count: usize,
    pub span: usize,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self { count: 2, span: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskPlan {
    pub centers: Vec<usize>,
    pub span: usize,
    pub n_frames: usize,
}

impl MaskPlan {
    pub fn empty(n_frames: usize, span: usize) -> Self {
        Self {
            centers: Vec::new(),
            span,
            n_frames,
        }
    }

    /// Inclusive frame range covered by the mask centered at `c`, clamped
    /// to the utterance. Even spans put the extra frame on the right.
    pub fn range(&self, c: usize) -> Option<(usize, usize)> {
        if self.span == 0 || self.n_frames == 0 {
            return None;
        }
        let left = (self.span - 1) / 2;
        let right = self.span - 1 - left;
        Some((c.saturating_sub(left), (c + right).min(self.n_frames - 1)))
    }

    pub fn masked_frames(&self) -> BTreeSet<usize> {
        self.centers
            .iter()
            .filter_map(|&c| self.range(c))
            .flat_map(|(lo, hi)| lo..=hi)
            .collect()
    }
}

/// Samples up to `cfg.count` distinct centers from the dominant zone.
pub fn select_mask_centers<R: Rng + ?Sized>(zones: &EnergyZones, cfg: MaskConfig, rng: &mut R) -> MaskPlan {
    let pool = zones.dominant_frames();
    MaskPlan {
        centers: sample_distinct(pool, cfg.count, rng),
        span: cfg.span,
        n_frames: zones.n_frames,
    }
}

fn sample_distinct<R: Rng + ?Sized>(pool: &[usize], m: usize, rng: &mut R) -> Vec<usize> {
    if pool.len() <= m {
        return pool.to_vec();
    }
    let mut picked: Vec<usize> = index::sample(rng, pool.len(), m).into_iter().map(|i| pool[i]).collect();
    picked.sort_unstable();
    picked
}

/// Overwrites masked frames (all bins) with `fill`; other frames untouched.
pub fn apply_mask(features: &FeatureMatrix, plan: &MaskPlan, fill: f64) -> FeatureMatrix {
    let mut out = features.clone();
    let n = out.n_frames();
    for f in plan.masked_frames() {
        if f < n {
            out.values_mut().row_mut(f).fill(fill);
        }
    }
    out
}

/// Emotion-aware masking; `fill` is 0 for mean-normalized features.
pub fn apply_em(features: &FeatureMatrix, plan: &MaskPlan) -> FeatureMatrix {
    apply_mask(features, plan, 0.0)
}

/// Random-masking plan: centers uniform over all frames.
pub fn random_mask_plan<R: Rng + ?Sized>(n_frames: usize, cfg: MaskConfig, rng: &mut R) -> MaskPlan {
    let all: Vec<usize> = (0..n_frames).collect();
    MaskPlan {
        centers: sample_distinct(&all, cfg.count, rng),
        span: cfg.span,
        n_frames,
    }
}

pub fn apply_rm<R: Rng + ?Sized>(features: &FeatureMatrix, cfg: MaskConfig, rng: &mut R) -> FeatureMatrix {
    let plan = random_mask_plan(features.n_frames(), cfg, rng);
    apply_em(features, &plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{normalize_rms, FrameSpec};
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn profile(values: &[f64]) -> RmsProfile {
        let grid = FrameSpec::new(4, 4).unwrap().grid(4 * values.len());
        normalize_rms(&RmsProfile::from_values(values.to_vec(), grid))
    }

    fn ramp(frames: usize) -> FeatureMatrix {
        FeatureMatrix::new(Array2::from_shape_fn((frames, 3), |(t, b)| 1.0 + t as f64 + b as f64 * 0.1))
    }

    #[test]
    fn partition_examples() {
        let z = partition_zones(&profile(&[1.0, 0.55, 0.5, 0.21, 0.2, 0.0]), ZoneThresholds::default());
        assert_eq!(z.high, vec![0, 1]);
        assert_eq!(z.low, vec![2, 3]);
        assert_eq!(z.noise, vec![4, 5]);
        assert_eq!(z.dominant, Dominance::Subdued);
        let z = partition_zones(&profile(&[1.0, 0.9, 0.3]), ZoneThresholds::default());
        assert_eq!((z.high.clone(), z.low.clone()), (vec![0, 1], vec![2]));
        assert_eq!(z.dominant, Dominance::Intense);
        let z = partition_zones(&profile(&[0.0; 5]), ZoneThresholds::default());
        assert_eq!(z.noise.len(), 5);
        assert_eq!(z.dominant, Dominance::None);
    }

    fn zones_with(dominant: Dominance, frames: Vec<usize>, n: usize) -> EnergyZones {
        EnergyZones {
            high: if dominant == Dominance::Intense {
                frames.clone()
            } else {
                vec![]
            },
            low: if dominant == Dominance::Subdued { frames } else { vec![] },
            noise: vec![],
            dominant,
            n_frames: n,
        }
    }

    #[test]
    fn center_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = MaskConfig::default();
        let z = zones_with(Dominance::Intense, vec![3, 9, 14], 20);
        for _ in 0..20 {
            let plan = select_mask_centers(&z, cfg, &mut rng);
            assert_eq!(plan.centers.len(), 2);
            assert_ne!(plan.centers[0], plan.centers[1]);
            assert!(plan.centers.iter().all(|c| [3, 9, 14].contains(c)));
        }
        let z = zones_with(Dominance::Subdued, vec![5], 20);
        assert_eq!(select_mask_centers(&z, cfg, &mut rng).centers, vec![5]);
        let z = zones_with(Dominance::None, vec![], 20);
        assert!(select_mask_centers(&z, cfg, &mut rng).centers.is_empty());
    }

    #[test]
    fn em_spans() {
        let f = ramp(20);
        assert_eq!(apply_em(&f, &MaskPlan::empty(20, 7)), f);
        let plan = MaskPlan {
            centers: vec![10],
            span: 7,
            n_frames: 20,
        };
        let out = apply_em(&f, &plan);
        for t in 0..20 {
            let masked = (7..=13).contains(&t);
            assert_eq!(out.values().row(t).iter().all(|&v| v == 0.0), masked, "frame {t}");
            if !masked {
                assert_eq!(out.values().row(t), f.values().row(t));
            }
        }
        let edge = MaskPlan {
            centers: vec![1],
            span: 7,
            n_frames: 20,
        };
        assert_eq!(edge.masked_frames().into_iter().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
        let even = MaskPlan {
            centers: vec![10],
            span: 6,
            n_frames: 20,
        };
        assert_eq!(even.range(10), Some((8, 13)));
    }

    #[test]
    fn rm_examples() {
        let f = ramp(200);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let none = MaskConfig { count: 0, span: 7 };
        assert_eq!(apply_rm(&f, none, &mut rng), f);
        let a = apply_rm(&f, MaskConfig::default(), &mut ChaCha8Rng::seed_from_u64(4));
        let b = apply_rm(&f, MaskConfig::default(), &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        for seed in 0..200 {
            let out = apply_rm(&f, MaskConfig::default(), &mut ChaCha8Rng::seed_from_u64(seed));
            let changed = (0..200).filter(|&t| out.values().row(t) != f.values().row(t)).count();
            assert!((4..=14).contains(&changed), "{changed}");
        }
    }
}
