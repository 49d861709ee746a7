//! Analytic gradients against central finite differences (step 1e-5).

use emosv_core::augment::{CpKind, TrainPair};
use emosv_core::dsp::{FeatureMatrix, FrameGrid, RmsProfile};
use emosv_core::encoder::{EncoderConfig, EncoderParams, Pooling};
use emosv_core::masking::MaskPlan;
use emosv_core::objective::{aam_softmax_loss, cosine_loss, AamHead, ErlConfig, Reduction};
use emosv_core::trainer::{batch_gradients, Batch, Objective, PairScheme, TrainConfig, TrainState};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;
const TOL: f64 = 1e-4;

/// Norm-wise relative error `|a - n| / max(|a|, |n|)`.
fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let scale = analytic
        .iter()
        .map(|a| a * a)
        .sum::<f64>()
        .sqrt()
        .max(numeric.iter().map(|n| n * n).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn numeric_grad(values: &mut [f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            let orig = values[i];
            values[i] = orig + STEP;
            let up = f(values);
            values[i] = orig - STEP;
            let down = f(values);
            values[i] = orig;
            (up - down) / (2.0 * STEP)
        })
        .collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-1.0..1.0))
}

fn reduction(rng: &mut ChaCha8Rng) -> Reduction {
    if rng.gen_bool(0.5) {
        Reduction::Sum
    } else {
        Reduction::Mean
    }
}

fn verdict(worst: f64, instances: usize) -> Result<String, String> {
    let detail = format!("{instances} instances, worst relative error {worst:.1e}");
    if worst <= TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Gradients of the AAM loss with respect to embeddings and head.
pub fn aam(instances: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (n, d, c) = (rng.gen_range(1..5), rng.gen_range(2..6), rng.gen_range(2..6));
        let emb = random_matrix(&mut rng, n, d);
        let weight = random_matrix(&mut rng, d, c);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let head = AamHead::new(weight.clone(), rng.gen_range(1.0..16.0), rng.gen_range(0.0..0.5)).unwrap();
        let red = reduction(&mut rng);
        let out = aam_softmax_loss(emb.view(), &labels, &head, red).unwrap();

        let mut e = emb.clone().into_raw_vec_and_offset().0;
        let num_e = numeric_grad(&mut e, |v| {
            let m = Array2::from_shape_vec((n, d), v.to_vec()).unwrap();
            aam_softmax_loss(m.view(), &labels, &head, red).unwrap().loss
        });
        let mut w = weight.into_raw_vec_and_offset().0;
        let num_w = numeric_grad(&mut w, |v| {
            let h = AamHead {
                weight: Array2::from_shape_vec((d, c), v.to_vec()).unwrap(),
                ..head.clone()
            };
            aam_softmax_loss(emb.view(), &labels, &h, red).unwrap().loss
        });
        let err_e = rel_err(out.grad_emb.as_slice().unwrap(), &num_e);
        let err_w = rel_err(out.grad_weight.as_slice().unwrap(), &num_w);
        worst = worst.max(err_e).max(err_w);
    }
    verdict(worst, instances)
}

/// Gradients of the cosine loss with respect to both sides.
pub fn cosine(instances: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (n, d) = (rng.gen_range(1..5), rng.gen_range(2..6));
        let v = random_matrix(&mut rng, n, d);
        let vp = random_matrix(&mut rng, n, d);
        let red = reduction(&mut rng);
        let out = cosine_loss(v.view(), vp.view(), red).unwrap();
        let mut a = v.clone().into_raw_vec_and_offset().0;
        let num_v = numeric_grad(&mut a, |x| {
            let m = Array2::from_shape_vec((n, d), x.to_vec()).unwrap();
            cosine_loss(m.view(), vp.view(), red).unwrap().loss
        });
        let mut b = vp.clone().into_raw_vec_and_offset().0;
        let num_vp = numeric_grad(&mut b, |x| {
            let m = Array2::from_shape_vec((n, d), x.to_vec()).unwrap();
            cosine_loss(v.view(), m.view(), red).unwrap().loss
        });
        worst = worst
            .max(rel_err(out.grad_v.as_slice().unwrap(), &num_v))
            .max(rel_err(out.grad_vp.as_slice().unwrap(), &num_vp));
    }
    verdict(worst, instances)
}

fn features(rng: &mut ChaCha8Rng, frames: usize, bins: usize) -> FeatureMatrix {
    FeatureMatrix::new(random_matrix(rng, frames, bins))
}

fn pair(rng: &mut ChaCha8Rng, frames: usize, bins: usize, speaker: u32) -> TrainPair {
    let grid = FrameGrid {
        frame_len: 400,
        hop: 160,
        n_frames: frames,
    };
    TrainPair {
        x: features(rng, frames, bins),
        x_energy: RmsProfile::from_values(vec![1.0; frames], grid),
        xprime: features(rng, frames, bins),
        speaker,
        kind: CpKind::Same,
        partner: 0,
        x_mask: MaskPlan::empty(frames, 0),
    }
}

/// Full pair objective through the shared encoder: both pair members, the
/// head and the cosine term, as computed by the trainer.
pub fn pair_objective(instances: u64, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for instance in 0..instances {
        let bins = rng.gen_range(2..5);
        let classes = rng.gen_range(2..4);
        let encoder_cfg = EncoderConfig {
            input_dim: bins,
            hidden: (0..rng.gen_range(1..3)).map(|_| rng.gen_range(2..5)).collect(),
            embed_dim: rng.gen_range(2..5),
            pooling: if rng.gen_bool(0.5) { Pooling::Std } else { Pooling::MeanStd },
            std_floor: 1e-8,
            init_seed: instance,
        };
        let cfg = TrainConfig {
            scheme: PairScheme::Both,
            objective: Objective::Erl,
            erl: ErlConfig {
                alpha: rng.gen_range(0.0..2.0),
                reduction: reduction(&mut rng),
            },
            margin: rng.gen_range(0.0..0.4),
            scale: rng.gen_range(1.0..8.0),
            encoder: encoder_cfg.clone(),
            ..TrainConfig::default()
        };
        let mut encoder = EncoderParams::init(encoder_cfg.clone()).unwrap();
        // non-zero biases so their gradients are exercised from a generic point
        for t in encoder.tensors_mut() {
            t.iter_mut().for_each(|v| *v += rng.gen_range(-0.3..0.3));
        }
        let head = AamHead::new(random_matrix(&mut rng, encoder_cfg.embed_dim, classes), cfg.scale, cfg.margin).unwrap();
        let speakers: Vec<u32> = (0..classes as u32).collect();
        let n_pairs = rng.gen_range(1..4);
        let frames = rng.gen_range(3..7);
        let pairs: Vec<TrainPair> = (0..n_pairs)
            .map(|_| {
                let s = rng.gen_range(0..classes as u32);
                pair(&mut rng, frames, bins, s)
            })
            .collect();
        let batch = Batch::Pairs(pairs);
        let state = TrainState {
            encoder,
            head,
            step: 0,
            epoch: 0,
            rng: ChaCha8Rng::seed_from_u64(0),
            velocity: None,
            speakers,
        };
        let grads = batch_gradients(&state, &batch, &cfg).unwrap();

        let mut analytic: Vec<f64> = grads
            .encoder
            .tensors()
            .iter()
            .flat_map(|t| t.iter().copied().collect::<Vec<_>>())
            .collect();
        analytic.extend(grads.head.iter().copied());

        let shapes: Vec<(usize, usize)> = state.encoder.tensors().iter().map(|t| t.dim()).collect();
        let mut flat: Vec<f64> = state
            .encoder
            .tensors()
            .iter()
            .flat_map(|t| t.iter().copied().collect::<Vec<_>>())
            .collect();
        let n_enc = flat.len();
        flat.extend(state.head.weight.iter().copied());
        let numeric = numeric_grad(&mut flat, |v| {
            let mut offset = 0;
            let tensors = shapes
                .iter()
                .map(|&(r, c)| {
                    let t = Array2::from_shape_vec((r, c), v[offset..offset + r * c].to_vec()).unwrap();
                    offset += r * c;
                    t
                })
                .collect();
            let s = TrainState {
                encoder: EncoderParams::from_tensors(encoder_cfg.clone(), tensors).unwrap(),
                head: AamHead {
                    weight: Array2::from_shape_vec(state.head.weight.dim(), v[n_enc..].to_vec()).unwrap(),
                    ..state.head.clone()
                },
                ..state.clone()
            };
            batch_gradients(&s, &batch, &cfg).unwrap().loss.total
        });
        worst = worst.max(rel_err(&analytic, &numeric));
    }
    verdict(worst, instances as usize)
}
