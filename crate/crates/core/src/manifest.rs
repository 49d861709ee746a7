//! Corpus manifests: comma-separated with a header row
//! `utterance_id,audio_path,speaker,emotion,duration,split`.
//!
//! Relative audio paths resolve against the manifest's directory.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::augment::{Emotion, Utterance};
use crate::dsp::Waveform;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidParam(format!("unknown split {other:?}; allowed: train, test"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub utterance_id: String,
    pub audio_path: String,
    pub speaker: u32,
    pub emotion: Emotion,
    pub duration: f64,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
struct RawRow {
    utterance_id: String,
    audio_path: String,
    speaker: String,
    emotion: String,
    duration: String,
    split: String,
}

const HEADER: [&str; 6] = ["utterance_id", "audio_path", "speaker", "emotion", "duration", "split"];

impl Manifest {
    pub fn new(rows: Vec<ManifestRow>, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let m = Self {
            rows,
            base_dir: base_dir.into(),
        };
        m.validate()?;
        Ok(m)
    }

    /// Parses manifest text. Rows are numbered from 1 for the first data row.
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != HEADER {
            return Err(Error::Manifest {
                row: 0,
                msg: format!("header must be {}", HEADER.join(",")),
            });
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.deserialize::<RawRow>().enumerate() {
            let row = i + 1;
            let err = |msg: String| Error::Manifest { row, msg };
            let raw = rec.map_err(|e| err(e.to_string()))?;
            let speaker = raw
                .speaker
                .parse()
                .map_err(|_| err(format!("speaker must be a non-negative integer, got {:?}", raw.speaker)))?;
            let emotion = raw.emotion.parse::<Emotion>().map_err(|e| err(e.to_string()))?;
            let duration: f64 = raw
                .duration
                .parse()
                .map_err(|_| err(format!("bad duration {:?}", raw.duration)))?;
            if !(duration >= 0.0) {
                return Err(err(format!("duration must be non-negative, got {duration}")));
            }
            let split = raw.split.parse::<Split>().map_err(|e| err(e.to_string()))?;
            rows.push(ManifestRow {
                utterance_id: raw.utterance_id,
                audio_path: raw.audio_path,
                speaker,
                emotion,
                duration,
                split,
            });
        }
        Self::new(rows, base_dir)
    }

    /// Reads and validates a manifest; every referenced file must exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let m = Self::parse(&text, base)?;
        for (i, r) in m.rows.iter().enumerate() {
            if !m.resolve(r).exists() {
                return Err(Error::Manifest {
                    row: i + 1,
                    msg: format!("audio file {} not found", m.resolve(r).display()),
                });
            }
        }
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let mut split_of: BTreeMap<u32, (Split, usize)> = BTreeMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            let row = i + 1;
            if r.utterance_id.is_empty() || r.utterance_id.contains(char::is_whitespace) {
                return Err(Error::Manifest {
                    row,
                    msg: format!("utterance id {:?} must be non-empty without whitespace", r.utterance_id),
                });
            }
            if !seen.insert(r.utterance_id.as_str()) {
                return Err(Error::Manifest {
                    row,
                    msg: format!("duplicate utterance id {:?}", r.utterance_id),
                });
            }
            match split_of.get(&r.speaker) {
                Some(&(s, first)) if s != r.split => {
                    return Err(Error::Manifest {
                        row,
                        msg: format!(
                            "speaker {} appears in both splits (first seen in {s} at row {first})",
                            r.speaker
                        ),
                    })
                }
                Some(_) => {}
                None => {
                    split_of.insert(r.speaker, (r.split, row));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.utterance_id.as_str(),
                r.audio_path.as_str(),
                &r.speaker.to_string(),
                r.emotion.name(),
                &format!("{:?}", r.duration),
                &r.split.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), self.to_csv()?.as_bytes())
    }

    pub fn resolve(&self, row: &ManifestRow) -> PathBuf {
        let p = Path::new(&row.audio_path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn split(&self, split: Split) -> Vec<&ManifestRow> {
        self.rows.iter().filter(|r| r.split == split).collect()
    }

    pub fn speakers(&self, split: Split) -> BTreeSet<u32> {
        self.split(split).into_iter().map(|r| r.speaker).collect()
    }

    /// Loads audio for every row of `split` as utterances.
    pub fn utterances(&self, split: Split) -> Result<Vec<Utterance>> {
        self.split(split)
            .into_iter()
            .map(|r| {
                let wave = crate::io::read_wav(self.resolve(r))?;
                Ok(Utterance::new(r.utterance_id.clone(), r.speaker, r.emotion, wave))
            })
            .collect()
    }
}

/// Rows plus in-memory audio, as produced by the synthesizer.
pub fn utterances_from_rows(rows: &[(ManifestRow, Waveform)]) -> Vec<Utterance> {
    rows.iter()
        .map(|(r, w)| Utterance::new(r.utterance_id.clone(), r.speaker, r.emotion, w.clone()))
        .collect()
}
