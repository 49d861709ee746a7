//! Training objectives: additive angular margin softmax, pairwise cosine
//! similarity loss, and their weighted combination for Siamese pairs.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How per-sample terms are combined over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Sum,
    Mean,
}

impl Reduction {
    fn factor(self, n: usize) -> f64 {
        match self {
            Reduction::Sum => 1.0,
            Reduction::Mean => 1.0 / n as f64,
        }
    }
}

const COS_CLAMP: f64 = 1e-7;

/// Class-weight matrix (`D x classes`) with scale and angular margin.
#[derive(Debug, Clone, PartialEq)]
pub struct AamHead {
    pub weight: Array2<f64>,
    pub scale: f64,
    pub margin: f64,
}

impl AamHead {
    pub fn new(weight: Array2<f64>, scale: f64, margin: f64) -> Result<Self> {
        if !(scale > 0.0) || !(margin >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "AAM needs scale > 0 and margin >= 0 (got {scale}, {margin})"
            )));
        }
        Ok(Self { weight, scale, margin })
    }

    pub fn num_classes(&self) -> usize {
        self.weight.ncols()
    }
}

#[derive(Debug, Clone)]
pub struct AamOutput {
    pub loss: f64,
    pub grad_emb: Array2<f64>,
    pub grad_weight: Array2<f64>,
}

/// Row-normalizes `m` (rows as vectors), returning unit rows and norms.
fn unit_rows(m: ArrayView2<'_, f64>, what: &'static str) -> Result<(Array2<f64>, Array1<f64>)> {
    let norms = m.map_axis(Axis(1), |r| r.dot(&r).sqrt());
    if norms.iter().any(|&n| !(n > 0.0)) {
        return Err(Error::ZeroNorm(what));
    }
    let unit = &m / &norms.view().insert_axis(Axis(1));
    Ok((unit, norms))
}

/// Margin-adjusted target cosine and its derivative with respect to the
/// raw cosine. Past `cos(pi - m)` the hard-example linear surrogate
/// `cos - m sin(m)` keeps the target logit monotone.
pub fn margin_target(cos: f64, margin: f64) -> (f64, f64) {
    let (cos_m, sin_m) = (margin.cos(), margin.sin());
    let threshold = (PI - margin).cos();
    if cos > threshold {
        let inside = cos > -1.0 + COS_CLAMP && cos < 1.0 - COS_CLAMP;
        let c = cos.clamp(-1.0 + COS_CLAMP, 1.0 - COS_CLAMP);
        let sin = (1.0 - c * c).sqrt();
        // the clamp only guards the sine; the cosine term stays exact
        let value = cos * cos_m - sin * sin_m;
        let deriv = if inside { cos_m + c * sin_m / sin } else { cos_m };
        (value, deriv)
    } else {
        (cos - (PI - margin).sin() * margin, 1.0)
    }
}

/// AAM-Softmax over a batch of embeddings (`N x D`).
pub fn aam_softmax_loss(
    embeddings: ArrayView2<'_, f64>,
    labels: &[usize],
    head: &AamHead,
    reduction: Reduction,
) -> Result<AamOutput> {
    let n = embeddings.nrows();
    if n == 0 || labels.len() != n {
        return Err(Error::Shape(format!("{n} embeddings but {} labels", labels.len())));
    }
    if embeddings.ncols() != head.weight.nrows() {
        return Err(Error::Shape(format!(
            "embedding dim {} does not match head dim {}",
            embeddings.ncols(),
            head.weight.nrows()
        )));
    }
    let classes = head.num_classes();
    if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::InvalidParam(format!("label {bad} out of range for {classes} classes")));
    }
    let (e_hat, e_norm) = unit_rows(embeddings, "embedding")?;
    let (w_hat_t, w_norm) = unit_rows(head.weight.t(), "class weight")?;
    let cos = e_hat.dot(&w_hat_t.t());

    let k = reduction.factor(n);
    let s = head.scale;
    let mut d_cos = Array2::zeros((n, classes));
    let mut loss = 0.0;
    let mut logits = vec![0.0; classes];
    for (i, &y) in labels.iter().enumerate() {
        let row = cos.row(i);
        let (target, target_deriv) = margin_target(row[y], head.margin);
        for (j, l) in logits.iter_mut().enumerate() {
            *l = s * if j == y { target } else { row[j] };
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = logits.iter().map(|l| (l - max).exp()).sum();
        loss += max + sum_exp.ln() - logits[y];
        for (j, &l) in logits.iter().enumerate() {
            let p = (l - max).exp() / sum_exp;
            let dz = p - if j == y { 1.0 } else { 0.0 };
            d_cos[[i, j]] = k * s * dz * if j == y { target_deriv } else { 1.0 };
        }
    }

    // cos_ij = e_hat_i . w_hat_j; project out the radial components.
    let g_e = d_cos.dot(&w_hat_t);
    let radial_e = (&g_e * &e_hat).sum_axis(Axis(1));
    let mut grad_emb = g_e - &e_hat * &radial_e.view().insert_axis(Axis(1));
    grad_emb /= &e_norm.view().insert_axis(Axis(1));

    let g_w = d_cos.t().dot(&e_hat);
    let radial_w = (&g_w * &w_hat_t).sum_axis(Axis(1));
    let mut grad_w_t = g_w - &w_hat_t * &radial_w.view().insert_axis(Axis(1));
    grad_w_t /= &w_norm.view().insert_axis(Axis(1));

    Ok(AamOutput {
        loss: loss * k,
        grad_emb,
        grad_weight: grad_w_t.reversed_axes().as_standard_layout().to_owned(),
    })
}

#[derive(Debug, Clone)]
pub struct CosineOutput {
    pub loss: f64,
    pub grad_v: Array2<f64>,
    pub grad_vp: Array2<f64>,
}

/// Negative cosine similarity between paired rows of `v` and `vp`.
pub fn cosine_loss(v: ArrayView2<'_, f64>, vp: ArrayView2<'_, f64>, reduction: Reduction) -> Result<CosineOutput> {
    if v.dim() != vp.dim() || v.nrows() == 0 {
        return Err(Error::Shape(format!(
            "cosine loss needs equal non-empty batches (got {:?} and {:?})",
            v.dim(),
            vp.dim()
        )));
    }
    let k = reduction.factor(v.nrows());
    let (u_hat, u_norm) = unit_rows(v, "x embedding")?;
    let (w_hat, w_norm) = unit_rows(vp, "x' embedding")?;
    // dot / sqrt(|v|^2 |v'|^2) is exactly +-1 for v' = +-v and 0 for exactly orthogonal rows
    let cos = Zip::from(v.rows())
        .and(vp.rows())
        .map_collect(|a, b| a.dot(&b) / (a.dot(&a) * b.dot(&b)).sqrt());
    let mut grad_v = Array2::zeros(v.dim());
    let mut grad_vp = Array2::zeros(v.dim());
    Zip::from(grad_v.rows_mut())
        .and(grad_vp.rows_mut())
        .and(u_hat.rows())
        .and(w_hat.rows())
        .and(&cos)
        .for_each(|mut gv, mut gp, u, w, &c| {
            gv.assign(&(&w - &(&u * c)));
            gp.assign(&(&u - &(&w * c)));
        });
    grad_v *= &u_norm.mapv(|n| -k / n).insert_axis(Axis(1));
    grad_vp *= &w_norm.mapv(|n| -k / n).insert_axis(Axis(1));
    Ok(CosineOutput {
        loss: -cos.sum() * k,
        grad_v,
        grad_vp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErlConfig {
    pub alpha: f64,
    pub reduction: Reduction,
}

impl Default for ErlConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            reduction: Reduction::Mean,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ErlOutput {
    pub total: f64,
    pub aam_x: f64,
    pub aam_xprime: f64,
    pub cos: f64,
    pub grad_x: Array2<f64>,
    pub grad_xprime: Array2<f64>,
    pub grad_weight: Array2<f64>,
}

/// `L = AAM(x) + AAM(x') + alpha * COS(x, x')`.
pub fn erl_loss(
    x_emb: ArrayView2<'_, f64>,
    xprime_emb: ArrayView2<'_, f64>,
    labels: &[usize],
    head: &AamHead,
    cfg: &ErlConfig,
) -> Result<ErlOutput> {
    if !(cfg.alpha >= 0.0) {
        return Err(Error::InvalidParam(format!("alpha must be >= 0 (got {})", cfg.alpha)));
    }
    let a = aam_softmax_loss(x_emb, labels, head, cfg.reduction)?;
    let b = aam_softmax_loss(xprime_emb, labels, head, cfg.reduction)?;
    let c = cosine_loss(x_emb, xprime_emb, cfg.reduction)?;
    Ok(ErlOutput {
        total: a.loss + b.loss + cfg.alpha * c.loss,
        aam_x: a.loss,
        aam_xprime: b.loss,
        cos: c.loss,
        grad_x: a.grad_emb + &(c.grad_v * cfg.alpha),
        grad_xprime: b.grad_emb + &(c.grad_vp * cfg.alpha),
        grad_weight: a.grad_weight + &b.grad_weight,
    })
}

/// Linear margin warm-up from 0 to `final_margin` over `warmup_steps`.
pub fn margin_schedule(step: u64, warmup_steps: u64, final_margin: f64) -> f64 {
    if warmup_steps == 0 || step >= warmup_steps {
        final_margin
    } else {
        final_margin * step as f64 / warmup_steps as f64
    }
}
