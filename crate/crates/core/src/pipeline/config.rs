//! Pipeline configuration file (TOML).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::graph::{PathMode, StratifyBy, TimeWindow};
use crate::ingest::{parse_timestamp, ArchiveSchema, CollectionFilter, Corpus};
use crate::sequel::SequelThresholds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub takedown: PathBuf,
    pub live: PathBuf,
    pub negative: Option<PathBuf>,
    pub suspension: Option<PathBuf>,
    /// Taxonomy rule file; the bundled Turkish rules when absent.
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaKind {
    #[default]
    Strict,
    PlatformArchive,
}

impl SchemaKind {
    pub fn schema(self) -> ArchiveSchema {
        match self {
            SchemaKind::Strict => ArchiveSchema::strict(),
            SchemaKind::PlatformArchive => ArchiveSchema::platform_archive(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    #[serde(default)]
    pub schema: SchemaKind,
    #[serde(default = "default_reject_rate")]
    pub max_reject_rate: f64,
    /// Drop follow-train tweets before interaction extraction.
    #[serde(default)]
    pub drop_follow_trains: bool,
    /// Collection filter for the live corpus.
    pub live_filter: Option<CollectionFilter>,
}

fn default_reject_rate() -> f64 {
    0.01
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self { schema: SchemaKind::Strict, max_reject_rate: 0.01, drop_follow_trains: false, live_filter: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    #[serde(default = "default_corpora")]
    pub corpora: Vec<Corpus>,
    #[serde(default)]
    pub path_mode: PathMode,
}

fn default_corpora() -> Vec<Corpus> {
    vec![Corpus::Takedown, Corpus::Live]
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self { corpora: default_corpora(), path_mode: PathMode::Exact }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub stratify_by: StratifyBy,
}

fn default_trials() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub name: String,
    pub start: String,
    pub end: String,
    /// Defaults to the graph corpora.
    pub corpora: Option<Vec<Corpus>>,
}

impl WindowConfig {
    pub fn window(&self) -> Result<TimeWindow, String> {
        let start: DateTime<Utc> = parse_timestamp(&self.start)?;
        let end: DateTime<Utc> = parse_timestamp(&self.end)?;
        if start >= end {
            return Err(format!("window `{}` is empty: start {} is not before end {}", self.name, self.start, self.end));
        }
        Ok(TimeWindow { start, end })
    }
}

/// Outputs of the external classifier, merged into the report when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    pub metrics: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Inputs,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub ingest: IngestConfig,
    #[serde(default)]
    pub thresholds: SequelThresholds,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub windows: Vec<WindowConfig>,
    pub classifier: Option<ClassifierConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let inputs = &mut self.inputs;
        resolve(base, &mut inputs.takedown);
        resolve(base, &mut inputs.live);
        for p in [&mut inputs.negative, &mut inputs.suspension, &mut inputs.rules].into_iter().flatten() {
            resolve(base, p);
        }
        if let Some(c) = &mut self.classifier {
            for p in [&mut c.metrics, &mut c.predictions].into_iter().flatten() {
                resolve(base, p);
            }
        }
        resolve(base, &mut self.output_dir);
    }

    /// Checks everything that can be checked before running. Classifier
    /// outputs may legitimately be missing and are not checked here.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        let inputs = &self.inputs;
        let required = [("takedown", Some(&inputs.takedown)), ("live", Some(&inputs.live))];
        let optional = [
            ("negative", inputs.negative.as_ref()),
            ("suspension", inputs.suspension.as_ref()),
            ("rules", inputs.rules.as_ref()),
        ];
        for (name, path) in required.into_iter().chain(optional) {
            if let Some(p) = path {
                if !p.is_file() {
                    return bad(format!("input `{name}` does not exist: {}", p.display()));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.ingest.max_reject_rate) {
            return bad(format!("max_reject_rate must be within [0, 1], got {}", self.ingest.max_reject_rate));
        }
        self.thresholds.validate().map_err(|e| PipelineError::Config(format!("thresholds: {e}")))?;
        if self.experiment.trials == 0 {
            return bad("experiment.trials must be at least 1".into());
        }
        if self.graph.corpora.is_empty() {
            return bad("graph.corpora must not be empty".into());
        }
        if let PathMode::Sampled { sources: 0, .. } = self.graph.path_mode {
            return bad("sampled path mode needs at least one source".into());
        }
        let mut names = BTreeSet::new();
        for w in &self.windows {
            if !names.insert(w.name.as_str()) {
                return bad(format!("duplicate window name `{}`", w.name));
            }
            w.window().map_err(|e| PipelineError::Config(format!("window `{}`: {e}", w.name)))?;
            if w.corpora.as_ref().is_some_and(Vec::is_empty) {
                return bad(format!("window `{}` has an empty corpus list", w.name));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[inputs]
takedown = "td.csv"
live = "live.jsonl"

[experiment]
seed = 7
"#;

    #[test]
    fn defaults_fill_in() {
        let c = PipelineConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.experiment.trials, 5);
        assert_eq!(c.graph.corpora, vec![Corpus::Takedown, Corpus::Live]);
        assert_eq!(c.ingest.max_reject_rate, 0.01);
        assert_eq!(c.thresholds, SequelThresholds::default());
        assert!(c.classifier.is_none());
    }

    #[test]
    fn seed_is_mandatory() {
        let text = MINIMAL.replace("seed = 7", "trials = 3");
        let err = PipelineConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[graph]\nmystery = 1\n");
        assert!(matches!(PipelineConfig::parse(&text), Err(PipelineError::Config(_))));
    }

    #[test]
    fn validation_catches_missing_files_and_bad_windows() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = PipelineConfig::parse(MINIMAL).unwrap();
        c.resolve_paths(dir.path());
        assert!(c.validate().unwrap_err().to_string().contains("takedown"));
        std::fs::write(dir.path().join("td.csv"), "").unwrap();
        std::fs::write(dir.path().join("live.jsonl"), "").unwrap();
        c.validate().unwrap();
        c.windows.push(WindowConfig {
            name: "jan".into(),
            start: "2020-02-01".into(),
            end: "2020-01-01".into(),
            corpora: None,
        });
        assert!(c.validate().unwrap_err().to_string().contains("jan"));
        c.windows[0].end = "2020-03-01".into();
        c.validate().unwrap();
        c.thresholds.username_low = 0.95;
        assert!(c.validate().is_err());
    }
}
