//! End-to-end orchestration: ingest → graph → taxonomy → sequels →
//! experiments, with cached stage outputs and report rendering.

mod cache;
mod config;
mod report;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{SecondsFormat, Utc};
use log::{info, warn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    build_graph, mean_delta_report, metrics_with, random_removal_baseline, remove_nodes, write_edge_list_csv,
    write_graphml, GraphScope, InteractionGraph, MeanMetrics, MetricsOptions, NodeCatalog, RemovalExperiment,
};
use crate::ingest::{
    apply_collection_filter, apply_suspension_snapshots, extract_interactions, is_follow_train,
    load_suspension_snapshots, parse_corpus_file, Corpus, InteractionEvent, SuspensionStatus, TweetKind, TweetRecord,
    UserDirectory, UserRecord,
};
use crate::sequel::{direct_sequels, write_sequel_csv, DirectSequels, InteractionIndex};
use crate::taxonomy::{
    apply_direct_sequels, label_accounts, partition_explicit, tally_by_type, write_labels_csv, AccountLabel,
    AccountType, RuleSet,
};

pub use cache::{sha256_bytes, sha256_file, stage_key, StageCache};
pub use config::{
    ClassifierConfig, ExperimentConfig, GraphConfig, IngestConfig, Inputs, PipelineConfig, SchemaKind, WindowConfig,
};
pub use report::{
    render_text, ClassifierSection, CorpusOverview, ExperimentRow, ExperimentTable, GraphRow, GraphSection,
    InputDigest, PredictionSummary, Provenance, Report, SequelSection, TaxonomySection, WindowRow,
    REPORT_SCHEMA_VERSION,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: String, message: String },
}

impl PipelineError {
    fn stage(stage: &str, message: impl ToString) -> Self {
        PipelineError::Stage { stage: stage.to_string(), message: message.to_string() }
    }

    /// 2 for validation failures, 3 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Stage { .. } => 3,
        }
    }
}

/// Parsed and filtered corpora.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestOutput {
    /// Takedown users, then live, then negative.
    pub users: Vec<UserRecord>,
    pub tweets: Vec<TweetRecord>,
    pub overview: BTreeMap<String, CorpusOverview>,
}

impl IngestOutput {
    pub fn users_of(&self, corpus: Corpus) -> Vec<UserRecord> {
        self.users.iter().filter(|u| u.corpus == corpus).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyOutput {
    /// One label per distinct user id, first occurrence wins.
    pub labels: Vec<AccountLabel>,
}

/// Whether a stage was recomputed or loaded from the stage cache.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageStatus {
    pub stage: &'static str,
    pub key: String,
    pub cached: bool,
}

const SAMPLE_REJECTIONS: usize = 10;

fn io_err(stage: &str, path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::stage(stage, format!("{}: {e}", path.display()))
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).expect("settings serialise")
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// One pipeline run over a validated configuration. Each stage runs at most
/// once per instance and at most once per distinct input across runs.
pub struct Pipeline {
    config: PipelineConfig,
    rules: RuleSet,
    rules_digest: InputDigest,
    inputs: BTreeMap<String, InputDigest>,
    cache: StageCache,
    stages: Vec<StageStatus>,
    keys: BTreeMap<&'static str, String>,
    ingest: Option<Arc<IngestOutput>>,
    events: Option<Arc<Vec<InteractionEvent>>>,
    full_graph: Option<Arc<InteractionGraph>>,
    graph: Option<Arc<GraphSection>>,
    taxonomy: Option<Arc<TaxonomyOutput>>,
    sequels: Option<Arc<DirectSequels>>,
    experiments: Option<Arc<ExperimentTable>>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let (rules, rules_digest) = match &config.inputs.rules {
            Some(path) => {
                let rules = RuleSet::load(path).map_err(|e| PipelineError::Config(e.to_string()))?;
                let sha256 = sha256_file(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
                (rules, InputDigest { file: file_name(path), sha256 })
            }
            None => {
                let rules = RuleSet::turkish_default();
                let sha256 = sha256_bytes(crate::taxonomy::DEFAULT_TURKISH_RULES.as_bytes());
                (rules, InputDigest { file: "<bundled tr-default>".into(), sha256 })
            }
        };
        let mut inputs = BTreeMap::new();
        let i = &config.inputs;
        for (name, path) in [
            ("takedown", Some(&i.takedown)),
            ("live", Some(&i.live)),
            ("negative", i.negative.as_ref()),
            ("suspension", i.suspension.as_ref()),
        ] {
            if let Some(p) = path {
                let sha256 = sha256_file(p).map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))?;
                inputs.insert(name.to_string(), InputDigest { file: file_name(p), sha256 });
            }
        }
        let cache = StageCache::new(config.output_dir.join("stages"));
        Ok(Self {
            config,
            rules,
            rules_digest,
            inputs,
            cache,
            stages: Vec::new(),
            keys: BTreeMap::new(),
            ingest: None,
            events: None,
            full_graph: None,
            graph: None,
            taxonomy: None,
            sequels: None,
            experiments: None,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn output_dir(&self) -> &Path {
        &self.config.output_dir
    }

    pub fn stages(&self) -> &[StageStatus] {
        &self.stages
    }

    fn cached<T, F>(&mut self, stage: &'static str, key: String, compute: F) -> Result<T, PipelineError>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce(&mut Self) -> Result<T, PipelineError>,
    {
        self.keys.insert(stage, key.clone());
        if let Some(v) = self.cache.load::<T>(stage, &key) {
            info!("stage {stage}: unchanged, loaded from cache");
            self.stages.push(StageStatus { stage, key, cached: true });
            return Ok(v);
        }
        info!("stage {stage}: running");
        let value = compute(self)?;
        self.cache.store(stage, &key, &value).map_err(|e| PipelineError::stage(stage, e))?;
        self.stages.push(StageStatus { stage, key, cached: false });
        Ok(value)
    }

    fn ingest_key(&self) -> String {
        let digests = json_bytes(&self.inputs);
        stage_key("ingest", &[&digests, &json_bytes(&self.config.ingest)])
    }

    pub fn ingest(&mut self) -> Result<Arc<IngestOutput>, PipelineError> {
        if let Some(v) = &self.ingest {
            return Ok(v.clone());
        }
        let key = self.ingest_key();
        let out = self.cached("ingest", key, |p| run_ingest(&p.config))?;
        let out = Arc::new(out);
        self.ingest = Some(out.clone());
        Ok(out)
    }

    fn events(&mut self) -> Result<Arc<Vec<InteractionEvent>>, PipelineError> {
        if let Some(v) = &self.events {
            return Ok(v.clone());
        }
        let ingest = self.ingest()?;
        let directory = UserDirectory::new(&ingest.users);
        let events: Vec<InteractionEvent> = extract_interactions(&ingest.tweets, &directory).collect();
        let events = Arc::new(events);
        self.events = Some(events.clone());
        Ok(events)
    }

    /// The interaction graph over the configured corpora, with explicit
    /// flags once labels are known.
    pub fn full_graph(&mut self) -> Result<Arc<InteractionGraph>, PipelineError> {
        if let Some(g) = &self.full_graph {
            return Ok(g.clone());
        }
        let ingest = self.ingest()?;
        let events = self.events()?;
        let catalog = NodeCatalog::new(&ingest.users);
        let scope = GraphScope::corpora(self.config.graph.corpora.iter().copied());
        let g = Arc::new(build_graph(events.iter(), &catalog, &scope));
        self.full_graph = Some(g.clone());
        Ok(g)
    }

    fn metrics_options(&self) -> MetricsOptions {
        MetricsOptions { path_mode: self.config.graph.path_mode }
    }

    pub fn graph(&mut self) -> Result<Arc<GraphSection>, PipelineError> {
        if let Some(v) = &self.graph {
            return Ok(v.clone());
        }
        self.ingest()?;
        let key = stage_key(
            "graph",
            &[
                self.keys["ingest"].as_bytes(),
                &json_bytes(&self.config.graph),
                &json_bytes(&self.config.windows),
            ],
        );
        let section = self.cached("graph", key, |p| {
            let options = p.metrics_options();
            let full = p.full_graph()?;
            let ingest = p.ingest()?;
            let events = p.events()?;
            let catalog = NodeCatalog::new(&ingest.users);
            let mut windows = Vec::new();
            for w in &p.config.windows {
                let window = w.window().map_err(|e| PipelineError::stage("graph", e))?;
                let corpora = w.corpora.clone().unwrap_or_else(|| p.config.graph.corpora.clone());
                let scope = GraphScope::corpora(corpora.iter().copied()).with_window(window);
                let g = build_graph(events.iter(), &catalog, &scope);
                windows.push(WindowRow {
                    name: w.name.clone(),
                    start: w.start.clone(),
                    end: w.end.clone(),
                    corpora: corpora.iter().map(|c| c.as_str().to_string()).collect(),
                    row: graph_row(&g, &options),
                });
            }
            Ok(GraphSection { full: graph_row(&full, &options), windows })
        })?;
        let section = Arc::new(section);
        self.graph = Some(section.clone());
        Ok(section)
    }

    pub fn taxonomy(&mut self) -> Result<Arc<TaxonomyOutput>, PipelineError> {
        if let Some(v) = &self.taxonomy {
            return Ok(v.clone());
        }
        self.ingest()?;
        let key = stage_key("taxonomy", &[self.keys["ingest"].as_bytes(), self.rules_digest.sha256.as_bytes()]);
        let out = self.cached("taxonomy", key, |p| {
            let ingest = p.ingest()?;
            let mut seen = HashSet::new();
            let labels = label_accounts(&ingest.users, &ingest.tweets, &p.rules)
                .into_iter()
                .filter(|l| seen.insert(l.user_id.clone()))
                .collect();
            Ok(TaxonomyOutput { labels })
        })?;
        let out = Arc::new(out);
        self.taxonomy = Some(out.clone());
        Ok(out)
    }

    pub fn sequels(&mut self) -> Result<Arc<DirectSequels>, PipelineError> {
        if let Some(v) = &self.sequels {
            return Ok(v.clone());
        }
        self.ingest()?;
        let key = stage_key("sequels", &[self.keys["ingest"].as_bytes(), &json_bytes(&self.config.thresholds)]);
        let out = self.cached("sequels", key, |p| {
            let ingest = p.ingest()?;
            let events = p.events()?;
            let index = InteractionIndex::new(events.iter());
            let takedown = ingest.users_of(Corpus::Takedown);
            let live = ingest.users_of(Corpus::Live);
            Ok(direct_sequels(&takedown, &live, &index, &p.config.thresholds))
        })?;
        let out = Arc::new(out);
        self.sequels = Some(out.clone());
        Ok(out)
    }

    /// Rule labels with matched live sequel accounts typed as sequels.
    pub fn final_labels(&mut self) -> Result<Vec<AccountLabel>, PipelineError> {
        let mut labels = self.taxonomy()?.labels.clone();
        let sequels = self.sequels()?;
        apply_direct_sequels(&mut labels, sequels.sequels().map(|c| c.live_user_id.as_str()));
        Ok(labels)
    }

    /// The full graph with each node's explicit flag set.
    pub fn labelled_graph(&mut self) -> Result<InteractionGraph, PipelineError> {
        let labels = self.final_labels()?;
        let mut g = (*self.full_graph()?).clone();
        let flags: HashMap<String, bool> = labels.iter().map(|l| (l.user_id.clone(), l.explicit)).collect();
        g.set_explicit_flags(&flags);
        Ok(g)
    }

    pub fn experiments(&mut self) -> Result<Arc<ExperimentTable>, PipelineError> {
        if let Some(v) = &self.experiments {
            return Ok(v.clone());
        }
        self.graph()?;
        self.taxonomy()?;
        self.sequels()?;
        let key = stage_key(
            "experiments",
            &[
                self.keys["graph"].as_bytes(),
                self.keys["taxonomy"].as_bytes(),
                self.keys["sequels"].as_bytes(),
                &json_bytes(&self.config.experiment),
            ],
        );
        let out = self.cached("experiments", key, |p| {
            let labels = p.final_labels()?;
            let graph = p.full_graph()?;
            let options = p.metrics_options();
            experiment_table(&graph, &labels, &p.config.experiment, &options)
        })?;
        let out = Arc::new(out);
        self.experiments = Some(out.clone());
        Ok(out)
    }

    pub fn taxonomy_section(&mut self) -> Result<TaxonomySection, PipelineError> {
        let ingest = self.ingest()?;
        let labels = self.final_labels()?;
        let graph = self.full_graph()?;
        let (explicit, implicit) = partition_explicit(graph.nodes().iter().map(|n| n.user_id.as_str()), &labels)
            .map_err(|e| PipelineError::stage("taxonomy", e))?;
        let corpus_of: HashMap<&str, Corpus> = ingest.users.iter().rev().map(|u| (u.user_id.as_str(), u.corpus)).collect();

        let mut section = TaxonomySection {
            rules: format!("{} v{}", self.rules.file().name, self.rules.file().version),
            explicit_nodes: explicit.len(),
            implicit_nodes: implicit.len(),
            ..Default::default()
        };
        for corpus in Corpus::ALL {
            let of_corpus: Vec<AccountLabel> =
                labels.iter().filter(|l| corpus_of.get(l.user_id.as_str()) == Some(&corpus)).cloned().collect();
            if of_corpus.is_empty() {
                continue;
            }
            let mut types: BTreeMap<String, u64> = BTreeMap::new();
            for t in AccountType::TYPED.into_iter().chain([AccountType::None]) {
                types.insert(t.as_str().to_string(), 0);
            }
            let mut memberships: BTreeMap<String, u64> = BTreeMap::new();
            for l in &of_corpus {
                *types.entry(l.account_type.as_str().to_string()).or_default() += 1;
                for m in &l.memberships {
                    *memberships.entry(m.to_string()).or_default() += 1;
                }
                section.group_mentions += u64::from(l.group_mention);
            }
            let tweets: Vec<TweetRecord> = ingest
                .tweets
                .iter()
                .filter(|t| corpus_of.get(t.author_id.as_str()) == Some(&corpus))
                .cloned()
                .collect();
            section.tweet_tally.insert(corpus.as_str().into(), tally_by_type(&of_corpus, &tweets));
            section.types_by_corpus.insert(corpus.as_str().into(), types);
            section.memberships_by_corpus.insert(corpus.as_str().into(), memberships);
        }
        Ok(section)
    }

    fn classifier_section(&self) -> Result<(ClassifierSection, BTreeMap<String, InputDigest>), PipelineError> {
        let mut digests = BTreeMap::new();
        let Some(cfg) = &self.config.classifier else {
            return Ok((ClassifierSection::Absent { reason: "not configured".into() }, digests));
        };
        let metrics_path = cfg.metrics.as_ref().filter(|p| p.is_file());
        let predictions_path = cfg.predictions.as_ref().filter(|p| p.is_file());
        if metrics_path.is_none() && predictions_path.is_none() {
            return Ok((ClassifierSection::Absent { reason: "classifier outputs not found".into() }, digests));
        }
        let stage = "classifier";
        let metrics = match metrics_path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| io_err(stage, p, e))?;
                let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| io_err(stage, p, e))?;
                digests.insert("classifier_metrics".into(), InputDigest { file: file_name(p), sha256: sha256_bytes(text.as_bytes()) });
                Some(value)
            }
            None => None,
        };
        let predictions = match predictions_path {
            Some(p) => {
                let sha256 = sha256_file(p).map_err(|e| io_err(stage, p, e))?;
                digests.insert("classifier_predictions".into(), InputDigest { file: file_name(p), sha256 });
                Some(self.summarise_predictions(p)?)
            }
            None => None,
        };
        Ok((ClassifierSection::Present { metrics, predictions }, digests))
    }

    fn summarise_predictions(&self, path: &Path) -> Result<PredictionSummary, PipelineError> {
        #[derive(Deserialize)]
        struct Row {
            user_id: String,
            #[allow(dead_code)]
            probability: f64,
            label: String,
        }
        let stage = "classifier";
        let ingest = self.ingest.as_ref().expect("ingest ran before the report");
        let live: HashMap<&str, SuspensionStatus> = ingest
            .users
            .iter()
            .filter(|u| u.corpus == Corpus::Live)
            .map(|u| (u.user_id.as_str(), u.suspension_status))
            .collect();
        let mut reader = csv::Reader::from_path(path).map_err(|e| io_err(stage, path, e))?;
        let mut s = PredictionSummary::default();
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| io_err(stage, path, e))?;
            let positive = matches!(row.label.trim().to_ascii_lowercase().as_str(), "1" | "positive" | "true");
            s.users += 1;
            s.predicted_positive += u64::from(positive);
            if live.get(row.user_id.as_str()).is_some_and(|st| st.suspended_by_t2()) {
                s.suspended_live += 1;
                s.suspended_live_detected += u64::from(positive);
            }
        }
        s.recall_on_suspended =
            (s.suspended_live > 0).then(|| s.suspended_live_detected as f64 / s.suspended_live as f64);
        Ok(s)
    }

    fn settings_digest(&self) -> String {
        let c = &self.config;
        let parts = [
            json_bytes(&c.ingest),
            json_bytes(&c.thresholds),
            json_bytes(&c.graph),
            json_bytes(&c.windows),
            json_bytes(&c.experiment),
        ];
        let refs: Vec<&[u8]> = parts.iter().map(Vec::as_slice).collect();
        stage_key("settings", &refs)
    }

    /// Runs every stage and assembles the report.
    pub fn report(&mut self) -> Result<Report, PipelineError> {
        let ingest = self.ingest()?;
        let graph = self.graph()?;
        let taxonomy = self.taxonomy_section()?;
        let sequels = self.sequels()?;
        let experiments = self.experiments()?;
        let (classifier, classifier_inputs) = self.classifier_section()?;
        let mut inputs = self.inputs.clone();
        inputs.extend(classifier_inputs);
        let exp = &self.config.experiment;
        Ok(Report {
            schema_version: REPORT_SCHEMA_VERSION,
            overview: ingest.overview.clone(),
            graph: (*graph).clone(),
            taxonomy,
            sequels: SequelSection {
                candidates: sequels.candidates.len(),
                sequel_pairs: sequels.sequels().count(),
                skipped_takedown: sequels.skipped_takedown.len(),
                skipped_live: sequels.skipped_live.len(),
                pairs: sequels.sequels().cloned().collect(),
            },
            experiments: (*experiments).clone(),
            classifier,
            provenance: Provenance {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                seed: exp.seed,
                trials: exp.trials,
                path_mode: self.config.graph.path_mode,
                thresholds: self.config.thresholds,
                inputs,
                rules: self.rules_digest.clone(),
                settings_sha256: self.settings_digest(),
                stage_keys: self.keys.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
                generated_at: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            },
        })
    }

    fn create_output(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), PipelineError> {
        fs::create_dir_all(self.output_dir()).map_err(|e| io_err("output", self.output_dir(), e))?;
        let path = self.output_dir().join(name);
        let file = File::create(&path).map_err(|e| io_err("output", &path, e))?;
        Ok((path, BufWriter::new(file)))
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, PipelineError> {
        let (path, mut out) = self.create_output(name)?;
        out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| io_err("output", &path, e))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, PipelineError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| PipelineError::stage("output", e))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// `graph.graphml` and `edges.csv`.
    pub fn write_graph_artifacts(&mut self) -> Result<Vec<PathBuf>, PipelineError> {
        let g = self.labelled_graph()?;
        let (gml, mut out) = self.create_output("graph.graphml")?;
        write_graphml(&g, &mut out).and_then(|_| out.flush()).map_err(|e| io_err("output", &gml, e))?;
        let (edges, mut out) = self.create_output("edges.csv")?;
        write_edge_list_csv(&g, &mut out).map_err(|e| io_err("output", &edges, e))?;
        Ok(vec![gml, edges])
    }

    pub fn write_labels(&mut self) -> Result<PathBuf, PipelineError> {
        let labels = self.final_labels()?;
        let (path, out) = self.create_output("labels.csv")?;
        write_labels_csv(&labels, out).map_err(|e| io_err("output", &path, e))?;
        Ok(path)
    }

    pub fn write_sequels(&mut self) -> Result<PathBuf, PipelineError> {
        let sequels = self.sequels()?;
        let (path, out) = self.create_output("sequels.csv")?;
        write_sequel_csv(&sequels.candidates, out).map_err(|e| io_err("output", &path, e))?;
        Ok(path)
    }

    /// Per-user corpus for the external classifier, one JSON object per
    /// line, ordered by corpus then user id.
    pub fn write_classify_export(&mut self) -> Result<PathBuf, PipelineError> {
        let ingest = self.ingest()?;
        let (path, mut out) = self.create_output("classify_corpus.jsonl")?;
        classify_export(&ingest.users, &ingest.tweets, &mut out)
            .and_then(|_| out.flush())
            .map_err(|e| io_err("classify-export", &path, e))?;
        Ok(path)
    }
}

fn graph_row(g: &InteractionGraph, options: &MetricsOptions) -> GraphRow {
    let mut nodes_by_corpus = BTreeMap::new();
    for n in g.nodes() {
        *nodes_by_corpus.entry(n.corpus.as_str().to_string()).or_default() += 1;
    }
    GraphRow { nodes_by_corpus, total_weight: g.total_weight(), build: g.stats, metrics: metrics_with(g, options) }
}

fn run_ingest(config: &PipelineConfig) -> Result<IngestOutput, PipelineError> {
    let stage = "ingest";
    let schema = config.ingest.schema.schema();
    let inputs = &config.inputs;
    let sources = [
        (Corpus::Takedown, Some(&inputs.takedown)),
        (Corpus::Live, Some(&inputs.live)),
        (Corpus::Negative, inputs.negative.as_ref()),
    ];
    let mut users = Vec::new();
    let mut tweets = Vec::new();
    let mut overview = BTreeMap::new();
    for (corpus, path) in sources {
        let Some(path) = path else { continue };
        let parsed = parse_corpus_file(path, &schema, corpus).map_err(|e| io_err(stage, path, e))?;
        for r in parsed.report.rejections.iter().take(SAMPLE_REJECTIONS) {
            warn!("{}: row {} rejected: {}", path.display(), r.row, r.reason);
        }
        parsed
            .report
            .check_reject_rate(config.ingest.max_reject_rate)
            .map_err(|e| io_err(stage, path, e))?;
        let mut o = CorpusOverview {
            rows_read: parsed.report.rows_read,
            rejected_rows: parsed.report.rejected(),
            rejection_samples: parsed.report.rejections.iter().take(SAMPLE_REJECTIONS).cloned().collect(),
            user_conflicts: parsed.report.user_conflicts,
            ..Default::default()
        };
        let mut corpus_users = parsed.users;
        let mut corpus_tweets = parsed.tweets;
        if let (Corpus::Live, Some(filter)) = (corpus, &config.ingest.live_filter) {
            let before = corpus_users.len();
            corpus_users = apply_collection_filter(corpus_users, filter);
            o.filtered_users = (before - corpus_users.len()) as u64;
            let kept: HashSet<&str> = corpus_users.iter().map(|u| u.user_id.as_str()).collect();
            corpus_tweets.retain(|t| kept.contains(t.author_id.as_str()));
        }
        o.follow_trains = corpus_tweets.iter().filter(|t| is_follow_train(t)).count() as u64;
        if config.ingest.drop_follow_trains {
            corpus_tweets.retain(|t| !is_follow_train(t));
            o.follow_trains_dropped = o.follow_trains;
        }
        overview.insert(corpus.as_str().to_string(), o);
        users.extend(corpus_users);
        tweets.extend(corpus_tweets);
    }
    if let Some(path) = &inputs.suspension {
        let obs = load_suspension_snapshots(path).map_err(|e| io_err(stage, path, e))?;
        apply_suspension_snapshots(&mut users, &obs);
    }

    let mut tweet_stats: HashMap<&str, (u64, [u64; 4])> = HashMap::new();
    let mut spans: BTreeMap<Corpus, (String, String)> = BTreeMap::new();
    let corpus_of: HashMap<&str, Corpus> = users.iter().rev().map(|u| (u.user_id.as_str(), u.corpus)).collect();
    let mut per_corpus_kinds: BTreeMap<Corpus, [u64; 4]> = BTreeMap::new();
    for t in &tweets {
        let entry = tweet_stats.entry(t.author_id.as_str()).or_default();
        entry.0 += 1;
        let k = match t.kind {
            TweetKind::Original => 0,
            TweetKind::Retweet => 1,
            TweetKind::Reply => 2,
            TweetKind::Quote => 3,
        };
        if let Some(&c) = corpus_of.get(t.author_id.as_str()) {
            per_corpus_kinds.entry(c).or_default()[k] += 1;
            let day = t.timestamp.format("%Y-%m-%d").to_string();
            let span = spans.entry(c).or_insert_with(|| (day.clone(), day.clone()));
            if day < span.0 {
                span.0 = day.clone();
            }
            if day > span.1 {
                span.1 = day;
            }
        }
    }
    let mut seen: BTreeSet<(Corpus, &str)> = BTreeSet::new();
    for u in &users {
        if !seen.insert((u.corpus, u.user_id.as_str())) {
            continue;
        }
        let o = overview.get_mut(u.corpus.as_str()).expect("corpus parsed");
        o.users += 1;
        o.users_with_tweets += u64::from(tweet_stats.contains_key(u.user_id.as_str()));
        match u.suspension_status {
            SuspensionStatus::Active => o.active_users += 1,
            SuspensionStatus::SuspendedT1 => o.suspended_t1 += 1,
            SuspensionStatus::SuspendedT2 => o.suspended_t2 += 1,
            SuspensionStatus::Unknown => {}
        }
    }
    for (c, kinds) in per_corpus_kinds {
        let o = overview.get_mut(c.as_str()).expect("corpus parsed");
        o.originals = kinds[0];
        o.retweets = kinds[1];
        o.replies = kinds[2];
        o.quotes = kinds[3];
        o.tweets = kinds.iter().sum();
        if let Some((first, last)) = spans.remove(&c) {
            o.first_tweet = Some(first);
            o.last_tweet = Some(last);
        }
    }
    Ok(IngestOutput { users, tweets, overview })
}

fn absent_row(name: &str, reason: &str) -> ExperimentRow {
    ExperimentRow {
        name: name.into(),
        set_size: 0,
        metrics: None,
        trials: Vec::new(),
        deltas: None,
        absent_reason: Some(reason.into()),
    }
}

/// The five-row network experiment: the full graph, the graph restricted to
/// implicit and to explicit nodes, and seeded random node sets of the same
/// sizes and corpus composition, each with percent changes against the
/// full graph.
pub fn experiment_table(
    graph: &InteractionGraph,
    labels: &[AccountLabel],
    experiment: &ExperimentConfig,
    options: &MetricsOptions,
) -> Result<ExperimentTable, PipelineError> {
    let stage = "experiments";
    let (explicit, implicit) = partition_explicit(graph.nodes().iter().map(|n| n.user_id.as_str()), labels)
        .map_err(|e| PipelineError::stage(stage, e))?;
    let full = MeanMetrics::of(&[metrics_with(graph, options)]).expect("one element");
    let with_delta = |name: &str, set_size: usize, metrics: MeanMetrics, trials| ExperimentRow {
        name: name.into(),
        set_size,
        deltas: Some(mean_delta_report(&full, &metrics)),
        metrics: Some(metrics),
        trials,
        absent_reason: None,
    };

    let mut rows = vec![with_delta("full", graph.node_count(), full.clone(), Vec::new())];
    for (name, kept, removed, kind) in
        [("implicit_only", &implicit, &explicit, "implicit"), ("explicit_only", &explicit, &implicit, "explicit")]
    {
        if kept.is_empty() {
            rows.push(absent_row(name, &format!("no {kind} nodes")));
            continue;
        }
        let m = MeanMetrics::of(&[metrics_with(&remove_nodes(graph, removed), options)]).expect("one element");
        rows.push(with_delta(name, kept.len(), m, Vec::new()));
    }
    for (name, target, kind) in [("random_implicit", &implicit, "implicit"), ("random_explicit", &explicit, "explicit")] {
        if target.is_empty() {
            rows.push(absent_row(name, &format!("no {kind} nodes to size the sample")));
            continue;
        }
        let exp = RemovalExperiment {
            target_set: target.clone(),
            trials: experiment.trials,
            seed: experiment.seed,
            stratify_by: experiment.stratify_by,
        };
        let baseline = random_removal_baseline(graph, &exp, options).map_err(|e| PipelineError::stage(stage, e))?;
        let trials = baseline.trials.into_iter().map(|t| t.metrics).collect();
        let mean = baseline.mean.expect("at least one trial");
        rows.push(with_delta(name, target.len(), mean, trials));
    }
    Ok(ExperimentTable { seed: experiment.seed, trials: experiment.trials, stratify_by: experiment.stratify_by, rows })
}

#[derive(Debug, Serialize)]
struct ExportRecord<'a> {
    user_id: &'a str,
    corpus: Corpus,
    /// `positive` for takedown and suspended live accounts, `negative` for
    /// the negative corpus, absent otherwise.
    label: Option<&'static str>,
    suspension_status: SuspensionStatus,
    tweets: Vec<&'a str>,
}

/// Writes the classifier input corpus: per user, the tweet texts in
/// timestamp order.
pub fn classify_export<W: Write>(users: &[UserRecord], tweets: &[TweetRecord], mut out: W) -> std::io::Result<()> {
    let mut by_author: HashMap<&str, Vec<&TweetRecord>> = HashMap::new();
    for t in tweets {
        by_author.entry(t.author_id.as_str()).or_default().push(t);
    }
    let mut order: Vec<&UserRecord> = users.iter().collect();
    order.sort_by(|a, b| a.corpus.cmp(&b.corpus).then_with(|| a.user_id.cmp(&b.user_id)));
    order.dedup_by(|a, b| a.corpus == b.corpus && a.user_id == b.user_id);
    for u in order {
        let mut own = by_author.get(u.user_id.as_str()).cloned().unwrap_or_default();
        own.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.tweet_id.cmp(&b.tweet_id)));
        let label = match u.corpus {
            Corpus::Takedown => Some("positive"),
            Corpus::Negative => Some("negative"),
            Corpus::Live if u.suspension_status.suspended_by_t2() => Some("positive"),
            Corpus::Live => None,
        };
        let record = ExportRecord {
            user_id: &u.user_id,
            corpus: u.corpus,
            label,
            suspension_status: u.suspension_status,
            tweets: own.iter().map(|t| t.text.as_str()).collect(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Everything a full run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub report_path: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub stages: Vec<StageStatus>,
}

/// Runs all stages and writes `report.json`, `report.txt`, the graph
/// exports, labels and sequel pairs into the output directory.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    let mut pipeline = Pipeline::new(config.clone())?;
    let report = pipeline.report()?;
    let report_path = pipeline.write_text("report.json", &report.to_json())?;
    let mut artifacts = vec![pipeline.write_text("report.txt", &render_text(&report))?];
    artifacts.extend(pipeline.write_graph_artifacts()?);
    artifacts.push(pipeline.write_labels()?);
    artifacts.push(pipeline.write_sequels()?);
    Ok(RunOutput { report, report_path, artifacts, stages: pipeline.stages().to_vec() })
}
