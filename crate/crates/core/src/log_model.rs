//! Transition-log data model, JSONL ingestion and min-max normalization.
//!
//! A log is a sequence of episodes. Each line of the canonical file is one
//! record:
//!
//! ```text
//! {"episode":"e0","step":0,"state":[0.0,1.5],"fatal":false,"terminal":false}
//! ```
//!
//! Transitions are implicit between consecutive records of an episode.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Human-readable names of the state features, in state-vector order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct FeatureSchema {
    names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    features: Vec<String>,
}

impl TryFrom<RawSchema> for FeatureSchema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        FeatureSchema::new(raw.features)
    }
}

impl From<FeatureSchema> for RawSchema {
    fn from(schema: FeatureSchema) -> Self {
        RawSchema {
            features: schema.names,
        }
    }
}

impl FeatureSchema {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Schema("at least one feature is required".into()));
        }
        let mut seen = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Schema(format!("feature {i} has an empty name")));
            }
            if let Some(prev) = seen.insert(name.as_str(), i) {
                return Err(Error::Schema(format!(
                    "feature name '{name}' appears at positions {prev} and {i}"
                )));
            }
        }
        Ok(FeatureSchema { names })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Reads a sidecar schema file of the form `{"features": [...]}`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// One logged state. `state` is in raw environment units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    #[serde(rename = "episode")]
    pub episode_id: String,
    pub step: u64,
    pub state: Vec<f64>,
    pub fatal: bool,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub id: String,
    pub records: Vec<TransitionRecord>,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.records.iter().map(|r| r.state.as_slice())
    }
}

/// A validated log of episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLog {
    schema: FeatureSchema,
    episodes: Vec<Episode>,
}

impl TransitionLog {
    /// Validates every invariant of the log. Line numbers in errors count
    /// records in episode order starting at 1.
    pub fn new(schema: FeatureSchema, episodes: Vec<Episode>) -> Result<Self> {
        let mut line = 0;
        let mut ids = HashMap::new();
        for (idx, episode) in episodes.iter().enumerate() {
            if episode.records.is_empty() {
                return Err(Error::InvalidLog(format!(
                    "episode '{}' has no records",
                    episode.id
                )));
            }
            if ids.insert(episode.id.as_str(), idx).is_some() {
                return Err(Error::InvalidLog(format!(
                    "episode id '{}' appears twice",
                    episode.id
                )));
            }
            let mut check = EpisodeCheck::default();
            for record in &episode.records {
                line += 1;
                if record.episode_id != episode.id {
                    return Err(Error::InvalidLog(format!(
                        "record {line} belongs to episode '{}' but is stored under '{}'",
                        record.episode_id, episode.id
                    )));
                }
                check.accept(record, schema.dim(), line)?;
            }
        }
        Ok(TransitionLog { schema, episodes })
    }

    /// Builds a single-episode-per-entry log from raw state sequences.
    /// Nothing is fatal or terminal.
    pub fn from_state_sequences(
        schema: FeatureSchema,
        sequences: impl IntoIterator<Item = Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let episodes = sequences
            .into_iter()
            .enumerate()
            .map(|(i, states)| {
                let id = format!("e{i}");
                let records = states
                    .into_iter()
                    .enumerate()
                    .map(|(step, state)| TransitionRecord {
                        episode_id: id.clone(),
                        step: step as u64,
                        state,
                        fatal: false,
                        terminal: false,
                    })
                    .collect();
                Episode { id, records }
            })
            .collect();
        TransitionLog::new(schema, episodes)
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn episode(&self, id: &str) -> Option<&Episode> {
        self.episodes.iter().find(|e| e.id == id)
    }

    pub fn records(&self) -> impl Iterator<Item = &TransitionRecord> {
        self.episodes.iter().flat_map(|e| e.records.iter())
    }

    pub fn record_count(&self) -> usize {
        self.episodes.iter().map(Episode::len).sum()
    }

    pub fn fatal_count(&self) -> usize {
        self.records().filter(|r| r.fatal).count()
    }

    /// Records minus episodes.
    pub fn transition_count(&self) -> usize {
        self.episodes.iter().map(|e| e.len() - 1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    /// Keeps whole episodes in order until `max_transitions` is reached; the
    /// last kept episode may be cut short.
    pub fn truncated(&self, max_transitions: usize) -> TransitionLog {
        let mut budget = max_transitions;
        let mut episodes = Vec::new();
        for episode in &self.episodes {
            if budget == 0 {
                break;
            }
            let take = episode.len().min(budget + 1);
            budget -= take - 1;
            episodes.push(Episode {
                id: episode.id.clone(),
                records: episode.records[..take].to_vec(),
            });
        }
        TransitionLog {
            schema: self.schema.clone(),
            episodes,
        }
    }

    /// Parses the canonical line-delimited format. Episodes are ordered by
    /// first appearance; blank lines are skipped.
    pub fn read_jsonl(reader: impl BufRead, schema: FeatureSchema) -> Result<Self> {
        let mut episodes: Vec<Episode> = Vec::new();
        let mut by_id: HashMap<String, (usize, EpisodeCheck)> = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::MalformedRecord {
                line: line_no,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: TransitionRecord =
                serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                    line: line_no,
                    message: e.to_string(),
                })?;
            let (slot, check) = by_id.entry(record.episode_id.clone()).or_insert_with(|| {
                episodes.push(Episode {
                    id: record.episode_id.clone(),
                    records: Vec::new(),
                });
                (episodes.len() - 1, EpisodeCheck::default())
            });
            check.accept(&record, schema.dim(), line_no)?;
            episodes[*slot].records.push(record);
        }
        Ok(TransitionLog { schema, episodes })
    }

    pub fn ingest(path: impl AsRef<Path>, schema: FeatureSchema) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        TransitionLog::read_jsonl(BufReader::new(file), schema)
    }

    pub fn write_jsonl(&self, mut writer: impl Write) -> Result<()> {
        for record in self.records() {
            serde_json::to_writer(&mut writer, record)?;
            writer
                .write_all(b"\n")
                .map_err(|e| Error::io("<log writer>", e))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write_jsonl(&mut writer)?;
        writer.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Default)]
struct EpisodeCheck {
    next_step: u64,
    closed: bool,
}

impl EpisodeCheck {
    fn accept(&mut self, record: &TransitionRecord, dim: usize, line: usize) -> Result<()> {
        if record.state.len() != dim {
            return Err(Error::RecordDimension {
                line,
                expected: dim,
                found: record.state.len(),
            });
        }
        if let Some(bad) = record.state.iter().find(|v| !v.is_finite()) {
            return Err(Error::MalformedRecord {
                line,
                message: format!("non-finite state value {bad}"),
            });
        }
        if self.closed {
            return Err(Error::RecordAfterTerminal {
                line,
                episode: record.episode_id.clone(),
            });
        }
        if record.step != self.next_step {
            return Err(Error::NonConsecutiveStep {
                line,
                episode: record.episode_id.clone(),
                expected: self.next_step,
                found: record.step,
            });
        }
        if record.fatal && !record.terminal {
            return Err(Error::FatalNotTerminal { line });
        }
        self.next_step += 1;
        self.closed = record.terminal;
        Ok(())
    }
}

/// Per-dimension min-max bounds, in raw units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    bounds: Vec<(f64, f64)>,
}

impl Normalizer {
    pub fn from_bounds(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidGraph("normalizer has no dimensions".into()));
        }
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidGraph(format!(
                    "normalizer bounds for dimension {d} are invalid: ({lo}, {hi})"
                )));
            }
        }
        Ok(Normalizer { bounds })
    }

    /// Exact elementwise min/max over every state in the log.
    pub fn fit(log: &TransitionLog) -> Result<Self> {
        let mut records = log.records();
        let first = records.next().ok_or(Error::EmptyLog)?;
        let mut bounds: Vec<(f64, f64)> = first.state.iter().map(|&v| (v, v)).collect();
        for record in records {
            for (b, &v) in bounds.iter_mut().zip(&record.state) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        Ok(Normalizer { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn span(&self, d: usize) -> f64 {
        let (lo, hi) = self.bounds[d];
        hi - lo
    }

    /// Maps into `[0, 1]` per dimension, clamping out-of-range values.
    /// The flag reports whether any component was clamped.
    pub fn normalize_query(&self, raw: &[f64]) -> Result<(Vec<f64>, bool)> {
        if raw.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: raw.len(),
            });
        }
        let mut clamped = false;
        let out = raw
            .iter()
            .zip(&self.bounds)
            .map(|(&v, &(lo, hi))| {
                if hi == lo {
                    clamped |= v != lo;
                    return 0.0;
                }
                let t = (v - lo) / (hi - lo);
                if !(0.0..=1.0).contains(&t) {
                    clamped = true;
                }
                t.clamp(0.0, 1.0)
            })
            .collect();
        Ok((out, clamped))
    }

    pub fn normalize(&self, raw: &[f64]) -> Result<Vec<f64>> {
        self.normalize_query(raw).map(|(v, _)| v)
    }

    pub fn denormalize(&self, unit: &[f64]) -> Result<Vec<f64>> {
        if unit.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: unit.len(),
            });
        }
        Ok(unit
            .iter()
            .zip(&self.bounds)
            .map(|(&t, &(lo, hi))| lo + t * (hi - lo))
            .collect())
    }
}
