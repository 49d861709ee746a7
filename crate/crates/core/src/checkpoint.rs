//! Versioned plain-text checkpoints.
//!
//! Layout (one item per line):
//!
//! ```text
//! emosv-checkpoint v1
//! config <training configuration as one JSON object>
//! features <log-mel configuration as one JSON object>
//! epoch <u64>
//! step <u64>
//! speakers <u32> <u32> ...
//! rng <64 hex digits of seed> <stream u64> <word position u128>
//! tensor <name> <rows> <cols>
//! <rows * cols f64 values as 16-digit hex bit patterns, row-major, space separated>
//! ...
//! end
//! ```
//!
//! Tensors are the encoder tensors in `EncoderParams::tensor_names` order,
//! then `head.weight`, then (with momentum) the matching `velocity.*`
//! buffers. Floats are stored as raw bit patterns so a save/load round trip
//! is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsp::MelConfig;
use crate::encoder::EncoderParams;
use crate::error::{Error, Result};
use crate::objective::AamHead;
use crate::trainer::{TrainConfig, TrainState};

pub const MAGIC: &str = "emosv-checkpoint";
pub const VERSION: u32 = 1;

/// A training state together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub features: MelConfig,
    pub state: TrainState,
}

fn push_tensor(out: &mut String, name: &str, t: ndarray::ArrayView2<'_, f64>) {
    let _ = writeln!(out, "tensor {name} {} {}", t.nrows(), t.ncols());
    let words: Vec<String> = t.iter().map(|v| format!("{:016x}", v.to_bits())).collect();
    out.push_str(&words.join(" "));
    out.push('\n');
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let s = &self.state;
        let mut out = format!("{MAGIC} v{VERSION}\n");
        let _ = writeln!(out, "config {}", serde_json::to_string(&self.config).expect("plain data"));
        let _ = writeln!(out, "features {}", serde_json::to_string(&self.features).expect("plain data"));
        let _ = writeln!(out, "epoch {}", s.epoch);
        let _ = writeln!(out, "step {}", s.step);
        let speakers: Vec<String> = s.speakers.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "speakers {}", speakers.join(" "));
        let seed: String = s.rng.get_seed().iter().map(|b| format!("{b:02x}")).collect();
        let _ = writeln!(out, "rng {seed} {} {}", s.rng.get_stream(), s.rng.get_word_pos());
        let names = s.encoder.tensor_names();
        for (name, t) in names.iter().zip(s.encoder.tensors()) {
            push_tensor(&mut out, name, t);
        }
        push_tensor(&mut out, "head.weight", s.head.weight.view());
        if let Some((venc, vhead)) = &s.velocity {
            for (name, t) in names.iter().zip(venc.tensors()) {
                push_tensor(&mut out, &format!("velocity.{name}"), t);
            }
            push_tensor(&mut out, "velocity.head.weight", vhead.view());
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser {
            lines: text.lines().enumerate(),
        };
        let header = p.line()?.1;
        let version = header
            .strip_prefix(MAGIC)
            .and_then(|r| r.trim().strip_prefix('v'))
            .ok_or_else(|| Error::Checkpoint(format!("not a checkpoint (header {header:?})")))?;
        if version != VERSION.to_string() {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {version}; this build reads v{VERSION}"
            )));
        }
        let config: TrainConfig =
            serde_json::from_str(p.field("config")?).map_err(|e| Error::Checkpoint(format!("bad config: {e}")))?;
        config.validate()?;
        let features: MelConfig =
            serde_json::from_str(p.field("features")?).map_err(|e| Error::Checkpoint(format!("bad features: {e}")))?;
        let epoch = parse_num(p.field("epoch")?, "epoch")?;
        let step = parse_num(p.field("step")?, "step")?;
        let speakers = p
            .field("speakers")?
            .split_whitespace()
            .map(|w| parse_num(w, "speaker"))
            .collect::<Result<Vec<u32>>>()?;
        let rng = parse_rng(p.field("rng")?)?;

        let mut encoder = EncoderParams::zeros(config.encoder.clone())?;
        let names = encoder.tensor_names();
        let shapes: Vec<(usize, usize)> = encoder.tensors().iter().map(|t| t.dim()).collect();
        let mut tensors = Vec::with_capacity(names.len());
        for (name, &shape) in names.iter().zip(&shapes) {
            tensors.push(p.tensor(name, shape)?);
        }
        encoder = EncoderParams::from_tensors(config.encoder.clone(), tensors)?;
        let head_shape = (config.encoder.embed_dim, speakers.len());
        let head = AamHead::new(p.tensor("head.weight", head_shape)?, config.scale, config.margin)?;
        let velocity = if config.momentum > 0.0 {
            let mut venc = encoder.zero_grads();
            for ((name, &shape), dst) in names.iter().zip(&shapes).zip(venc.tensors_mut()) {
                let t = p.tensor(&format!("velocity.{name}"), shape)?;
                dst.copy_from_slice(t.as_slice().expect("standard layout"));
            }
            Some((venc, p.tensor("velocity.head.weight", head_shape)?))
        } else {
            None
        };
        let (n, last) = p.line()?;
        if last.trim() != "end" {
            return Err(Error::Checkpoint(format!("line {}: expected end marker", n + 1)));
        }
        Ok(Self {
            config,
            features,
            state: TrainState {
                encoder,
                head,
                step,
                epoch,
                rng,
                velocity,
                speakers,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), self.to_text().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

struct Parser<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Parser<'a> {
    fn line(&mut self) -> Result<(usize, &'a str)> {
        self.lines
            .next()
            .ok_or_else(|| Error::Checkpoint("unexpected end of file".into()))
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let (n, line) = self.line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            None if line == key => Ok(""),
            _ => Err(Error::Checkpoint(format!("line {}: expected field {key:?}", n + 1))),
        }
    }

    fn tensor(&mut self, name: &str, shape: (usize, usize)) -> Result<Array2<f64>> {
        let (n, head) = self.line()?;
        let expected = format!("tensor {name} {} {}", shape.0, shape.1);
        if head != expected {
            return Err(Error::Checkpoint(format!(
                "line {}: expected {expected:?}, found {head:?}",
                n + 1
            )));
        }
        let (n, body) = self.line()?;
        let values = body
            .split_whitespace()
            .map(|w| {
                u64::from_str_radix(w, 16)
                    .map(f64::from_bits)
                    .map_err(|_| Error::Checkpoint(format!("line {}: bad value {w:?}", n + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        Array2::from_shape_vec(shape, values)
            .map_err(|_| Error::Checkpoint(format!("line {}: tensor {name} has the wrong number of values", n + 1)))
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Checkpoint(format!("bad {what} {s:?}")))
}

fn parse_rng(s: &str) -> Result<ChaCha8Rng> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let [seed_hex, stream, pos] = parts[..] else {
        return Err(Error::Checkpoint("rng line needs seed, stream and word position".into()));
    };
    if seed_hex.len() != 64 {
        return Err(Error::Checkpoint("rng seed must have 64 hex digits".into()));
    }
    let mut seed = [0u8; 32];
    for (i, b) in seed.iter_mut().enumerate() {
        *b = u8::from_str_radix(&seed_hex[2 * i..2 * i + 2], 16).map_err(|_| Error::Checkpoint("bad rng seed".into()))?;
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(parse_num(stream, "rng stream")?);
    rng.set_word_pos(parse_num(pos, "rng word position")?);
    Ok(rng)
}
