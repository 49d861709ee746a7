//! Independent reference implementations for the losses and the EER, and
//! the randomized comparisons against them.

use emosv_core::eval::compute_eer;
use emosv_core::objective::{aam_softmax_loss, cosine_loss, AamHead, Reduction};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-2.0..2.0))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn raw_cosines(emb: &Array2<f64>, weight: &Array2<f64>, i: usize) -> Vec<f64> {
    let e: Vec<f64> = emb.row(i).to_vec();
    (0..weight.ncols())
        .map(|j| {
            let w: Vec<f64> = weight.column(j).to_vec();
            e.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / (norm(&e) * norm(&w))
        })
        .collect()
}

/// Textbook AAM: acos, add the margin, cos back, plain exponentials.
pub fn brute_force_aam(emb: &Array2<f64>, labels: &[usize], weight: &Array2<f64>, s: f64, m: f64) -> f64 {
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let cos = raw_cosines(emb, weight, i);
        let theta = cos[y].clamp(-1.0, 1.0).acos();
        let target = if theta + m <= std::f64::consts::PI {
            (theta + m).cos()
        } else {
            cos[y] - m * m.sin()
        };
        let num = (s * target).exp();
        let den: f64 = num + (0..cos.len()).filter(|&j| j != y).map(|j| (s * cos[j]).exp()).sum::<f64>();
        total -= (num / den).ln();
    }
    total
}

pub fn softmax_cross_entropy(logits: &[f64], y: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    lse - logits[y]
}

/// EER by direct counting at every candidate threshold.
pub fn sweep_eer(scores: &[f64], targets: &[bool]) -> f64 {
    let nt = targets.iter().filter(|&&t| t).count() as f64;
    let nn = targets.len() as f64 - nt;
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    thresholds.push(f64::INFINITY);
    let rates = |t: f64| {
        let far = scores.iter().zip(targets).filter(|(&s, &y)| !y && s >= t).count() as f64 / nn;
        let frr = scores.iter().zip(targets).filter(|(&s, &y)| y && s < t).count() as f64 / nt;
        (far, frr)
    };
    let mut prev: Option<(f64, f64)> = None;
    for &t in &thresholds {
        let (far, frr) = rates(t);
        if frr >= far {
            return match prev {
                Some((far0, frr0)) if frr > far => {
                    let (d0, d1) = (frr0 - far0, frr - far);
                    far0 + d0 / (d0 - d1) * (far - far0)
                }
                _ => far,
            };
        }
        prev = Some((far, frr));
    }
    unreachable!("FRR reaches 1 and FAR reaches 0 at +inf")
}

/// AAM with zero margin and unit scale against softmax cross-entropy.
pub fn aam_is_cross_entropy(cases: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let (n, d, c) = (rng.gen_range(1..6), rng.gen_range(2..8), rng.gen_range(2..8));
        let emb = random_matrix(&mut rng, n, d);
        let weight = random_matrix(&mut rng, d, c);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let head = AamHead::new(weight.clone(), 1.0, 0.0).unwrap();
        let got = aam_softmax_loss(emb.view(), &labels, &head, Reduction::Sum)
            .map_err(|e| e.to_string())?
            .loss;
        let expected: f64 = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| softmax_cross_entropy(&raw_cosines(&emb, &weight, i), y))
            .sum();
        worst = worst.max((got - expected).abs());
        if (got - expected).abs() > 1e-12 {
            return Err(format!("case {case}: {got} vs {expected}"));
        }
    }
    Ok(format!("{cases} cases, worst abs error {worst:.1e}"))
}

/// AAM against the brute-force form over random scales and margins, and
/// mean reduction against sum / N.
pub fn aam_is_brute_force(cases: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let (n, d, c) = (rng.gen_range(1..6), rng.gen_range(2..8), rng.gen_range(2..8));
        let emb = random_matrix(&mut rng, n, d);
        let weight = random_matrix(&mut rng, d, c);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let (s, m) = (rng.gen_range(1.0..32.0), rng.gen_range(0.0..0.6));
        let head = AamHead::new(weight.clone(), s, m).unwrap();
        let got = aam_softmax_loss(emb.view(), &labels, &head, Reduction::Sum)
            .map_err(|e| e.to_string())?
            .loss;
        let expected = brute_force_aam(&emb, &labels, &weight, s, m);
        let err = (got - expected).abs() / expected.abs().max(1.0);
        worst = worst.max(err);
        if err > 1e-9 {
            return Err(format!("case {case}: {got} vs {expected}"));
        }
        let mean = aam_softmax_loss(emb.view(), &labels, &head, Reduction::Mean)
            .map_err(|e| e.to_string())?
            .loss;
        if (mean * n as f64 - got).abs() > 1e-9 * got.abs().max(1.0) {
            return Err(format!("case {case}: mean {mean} is not sum {got} / {n}"));
        }
    }
    Ok(format!("{cases} cases, worst rel error {worst:.1e}"))
}

/// Identical, opposite and orthogonal pairs give exactly -N, +N and 0.
pub fn cosine_trivial_values(cases: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let (n, d) = (rng.gen_range(1..8), rng.gen_range(2..8));
        let v = random_matrix(&mut rng, n, d);
        let loss = |a: &Array2<f64>, b: &Array2<f64>| cosine_loss(a.view(), b.view(), Reduction::Sum).unwrap().loss;
        let same = loss(&v, &v);
        let opposite = loss(&v, &v.mapv(|x| -x));
        // rows [a, 0, ...] against [0, b, ...] are exactly orthogonal
        let mut a = Array2::zeros((n, d));
        let mut b = Array2::zeros((n, d));
        for i in 0..n {
            a[[i, 0]] = rng.gen_range(0.1..3.0);
            b[[i, 1]] = rng.gen_range(0.1..3.0);
        }
        let orthogonal = loss(&a, &b);
        if (same, opposite, orthogonal) != (-(n as f64), n as f64, 0.0) {
            return Err(format!("case {case}: N={n} gave {same}, {opposite}, {orthogonal}"));
        }
    }
    Ok(format!("{cases} cases exact"))
}

/// `compute_eer` against the exhaustive sweep; even cases draw from a
/// coarse grid to force ties.
pub fn eer_is_sweep(cases: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let n = rng.gen_range(2..60);
        let mut targets: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        targets[0] = true;
        targets[1] = false;
        let scores: Vec<f64> = if case % 2 == 0 {
            (0..n).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect()
        } else {
            (0..n)
                .map(|i| rng.gen_range(-1.0..1.0) + if targets[i] { 0.4 } else { 0.0 })
                .collect()
        };
        let got = compute_eer(&scores, &targets).map_err(|e| e.to_string())?.eer;
        let expected = sweep_eer(&scores, &targets);
        worst = worst.max((got - expected).abs());
        if (got - expected).abs() > 1e-9 {
            return Err(format!("case {case}: {got} vs {expected}"));
        }
    }
    Ok(format!("{cases} score sets, worst abs error {worst:.1e}"))
}

/// Targets 0.9, 0.7, 0.3 against nontargets 0.8, 0.2, 0.1.
pub fn eer_one_third() -> Result<String, String> {
    let r = compute_eer(&[0.9, 0.7, 0.3, 0.8, 0.2, 0.1], &[true, true, true, false, false, false]).map_err(|e| e.to_string())?;
    if r.eer == 1.0 / 3.0 {
        Ok("EER = 1/3 exactly".into())
    } else {
        Err(format!("EER {} instead of 1/3", r.eer))
    }
}
