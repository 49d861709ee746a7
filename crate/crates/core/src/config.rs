//! Toolkit configuration: one TOML file with a section per stage. Every
//! key is optional and falls back to the defaults below.
//!
//! ```toml
//! [features]    # log-mel front end
//! [synth]       # synthetic corpus
//! [train]       # optimizer, augmentation, masking, loss, encoder
//! [trials]      # trial-list construction
//! [[ablate]]    # one table per ablation row
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::MelConfig;
use crate::error::{Error, Result};
use crate::eval::TrialLimits;
use crate::synth::SynthSpec;
use crate::trainer::{Masking, Objective, PairScheme, TrainConfig};

/// One row of an ablation grid: a named override of the training setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationRow {
    pub name: String,
    pub scheme: PairScheme,
    pub objective: Objective,
    #[serde(default = "no_masking")]
    pub masking: Masking,
}

fn no_masking() -> Masking {
    Masking::None
}

impl AblationRow {
    fn new(name: &str, scheme: PairScheme, objective: Objective, masking: Masking) -> Self {
        Self {
            name: name.into(),
            scheme,
            objective,
            masking,
        }
    }

    /// `base` with this row's scheme, objective and masking.
    pub fn apply(&self, base: &TrainConfig) -> TrainConfig {
        TrainConfig {
            scheme: self.scheme,
            objective: self.objective,
            masking: self.masking,
            ..base.clone()
        }
    }
}

/// Baseline, the three CopyPaste schemes, then the pair objective with no
/// masking, random masking and energy-aware masking.
pub fn default_ablation() -> Vec<AblationRow> {
    use Masking as M;
    use Objective as O;
    use PairScheme as P;
    vec![
        AblationRow::new("baseline", P::None, O::Aam, M::None),
        AblationRow::new("S-CP", P::Same, O::Aam, M::None),
        AblationRow::new("D-CP", P::Different, O::Aam, M::None),
        AblationRow::new("S+D-CP", P::Both, O::Aam, M::None),
        AblationRow::new("S-CP+ERL", P::Same, O::Erl, M::None),
        AblationRow::new("S-CP+ERL+RM", P::Same, O::Erl, M::Rm),
        AblationRow::new("S-CP+ERL+EM", P::Same, O::Erl, M::Em),
        AblationRow::new("S+D-CP+ERL", P::Both, O::Erl, M::None),
        AblationRow::new("S+D-CP+ERL+RM", P::Both, O::Erl, M::Rm),
        AblationRow::new("S+D-CP+ERL+EM", P::Both, O::Erl, M::Em),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    pub features: MelConfig,
    pub synth: SynthSpec,
    pub train: TrainConfig,
    pub trials: TrialLimits,
    pub ablate: Vec<AblationRow>,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        Self {
            features: MelConfig::default(),
            synth: SynthSpec::default(),
            train: TrainConfig::default(),
            trials: TrialLimits::default(),
            ablate: default_ablation(),
        }
    }
}

impl ToolkitConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is serializable")
    }

    /// Cross-section checks: the encoder input must match the feature bins.
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.train.encoder.input_dim != self.features.n_mels {
            return Err(Error::Config(format!(
                "train.encoder.input_dim ({}) must equal features.n_mels ({})",
                self.train.encoder.input_dim, self.features.n_mels
            )));
        }
        if self.features.sample_rate != self.synth.sample_rate {
            return Err(Error::Config(format!(
                "features.sample_rate ({}) must equal synth.sample_rate ({})",
                self.features.sample_rate, self.synth.sample_rate
            )));
        }
        for row in &self.ablate {
            row.apply(&self.train)
                .validate()
                .map_err(|e| Error::Config(format!("ablate row {:?}: {e}", row.name)))?;
        }
        Ok(())
    }
}
