//! End-to-end runs: train on one split, embed the other, score every trial
//! and report the EER grid.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::augment::Utterance;
use crate::dsp::{LogMel, MelConfig};
use crate::encoder::{Embedding, EncoderParams};
use crate::error::{Error, Result};
use crate::eval::{build_trials, cosine_score, pooled_eer, report_grid, Report, ScoredTrial, TestItem, Trial, TrialLimits};
use crate::objective::{ErlConfig, Reduction};
use crate::trainer::{embed_utterance, train, EpochLog, Masking, Objective, PairScheme, TrainConfig, TrainData, TrainState};

/// Embeds each utterance on its full length.
pub fn embed_all(encoder: &EncoderParams, logmel: &LogMel, utts: &[Utterance]) -> Result<Vec<Embedding>> {
    utts.iter().map(|u| embed_utterance(encoder, logmel, u)).collect()
}

/// Trial-construction view of single-emotion test utterances.
pub fn test_items(utts: &[Utterance]) -> Result<Vec<TestItem>> {
    utts.iter()
        .map(|u| {
            let emotion = u
                .emotions
                .only()
                .ok_or_else(|| Error::InvalidParam(format!("test utterance {} must carry one emotion", u.id)))?;
            Ok(TestItem {
                id: u.id.clone(),
                speaker: u.speaker,
                emotion,
            })
        })
        .collect()
}

/// Cosine-scores trials against embeddings keyed by utterance id.
pub fn score_trials<'a>(
    trials: impl IntoIterator<Item = &'a Trial>,
    embeddings: &HashMap<&str, &Embedding>,
) -> Result<Vec<ScoredTrial>> {
    trials
        .into_iter()
        .map(|t| {
            let get = |id: &str| {
                embeddings
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidParam(format!("no embedding for utterance {id:?}")))
            };
            let score = cosine_score(get(&t.enroll)?.view(), get(&t.test)?.view())?;
            Ok(ScoredTrial { trial: t.clone(), score })
        })
        .collect()
}

/// Whether a trial compares two different emotions.
pub fn is_cross_emotion(t: &Trial) -> bool {
    !t.bucket.is_same_emotion()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub report: Report,
    /// EER over the pooled scores of all trials.
    pub merged_eer: f64,
    /// EER over the pooled scores of cross-emotion trials only.
    pub cross_emotion_eer: f64,
    pub log: Vec<EpochLog>,
}

/// Scores a trained encoder on the test utterances.
pub fn evaluate(
    encoder: &EncoderParams,
    logmel: &LogMel,
    test: &[Utterance],
    limits: TrialLimits,
) -> Result<(Report, Vec<ScoredTrial>)> {
    let embs = embed_all(encoder, logmel, test)?;
    let map: HashMap<&str, &Embedding> = test.iter().map(|u| u.id.as_str()).zip(embs.iter()).collect();
    let trials = build_trials(&test_items(test)?, limits);
    let scored = score_trials(trials.merged(), &map)?;
    Ok((report_grid(&scored), scored))
}

/// Trains with `cfg` from scratch and evaluates on `test`.
pub fn run(data: &TrainData, test: &[Utterance], cfg: &TrainConfig, limits: TrialLimits) -> Result<(TrainState, RunSummary)> {
    run_from(data, test, cfg, None, limits)
}

/// Trains with `cfg`, starting from `start` restarted under `cfg` when
/// given, and evaluates on `test`.
pub fn run_from(
    data: &TrainData,
    test: &[Utterance],
    cfg: &TrainConfig,
    start: Option<&TrainState>,
    limits: TrialLimits,
) -> Result<(TrainState, RunSummary)> {
    let start = start.map(|s| s.clone().restart(data, cfg)).transpose()?;
    let (state, log) = train(data, cfg, start, |_, _| Ok(()))?;
    let (report, scored) = evaluate(&state.encoder, data.bank.logmel(), test, limits)?;
    let merged_eer = report
        .merged()
        .ok_or(Error::SingleClass {
            targets: 0,
            nontargets: 0,
        })?
        .eer;
    let cross_emotion_eer = pooled_eer(&scored, |b| !b.is_same_emotion())
        .ok_or(Error::SingleClass {
            targets: 0,
            nontargets: 0,
        })?
        .eer;
    Ok((
        state,
        RunSummary {
            report,
            merged_eer,
            cross_emotion_eer,
            log,
        },
    ))
}

/// Starting-model recipe for fine-tuning comparisons: `base` reduced to
/// plain mean-reduced AAM at learning rate 0.1 with margin 0.25, the margin
/// rising linearly over the first two epochs.
pub fn pretrain_config(base: &TrainConfig, data: &TrainData) -> TrainConfig {
    let steps_per_epoch = data.index.len().div_ceil(base.batch_size) as u64;
    TrainConfig {
        scheme: PairScheme::None,
        objective: Objective::Aam,
        masking: Masking::None,
        learning_rate: 0.1,
        margin: 0.25,
        margin_warmup_steps: 2 * steps_per_epoch,
        erl: ErlConfig {
            reduction: Reduction::Mean,
            ..base.erl
        },
        ..base.clone()
    }
}

/// Rebuilds the default mel front end used by the trainer for `cfg`.
pub fn mel_for(cfg: &TrainConfig, sample_rate: u32) -> MelConfig {
    MelConfig {
        sample_rate,
        n_mels: cfg.encoder.input_dim,
        ..MelConfig::default()
    }
}
