//! Forensics toolkit for state-linked information-operation account archives.
//!
//! The crate is organised around the analysis stages:
//!
//! * [`ingest`] parses takedown archives and live-collected corpora into
//!   normalised [`ingest::UserRecord`] / [`ingest::TweetRecord`] values and
//!   extracts interaction events.
//! * [`graph`] builds the directed weighted interaction graph, computes
//!   density / diameter / average path length, and runs targeted and
//!   stratified-random node removal experiments.
//! * [`taxonomy`] labels accounts (main / retweet / backup / sequel, national
//!   and group membership) from declarative rule files and partitions nodes
//!   into explicit and implicit sets.
//! * [`sequel`] scores cross-corpus account pairs and applies the sequel
//!   threshold rule.
//! * [`pipeline`] wires the stages together and renders reports.

pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod sequel;
pub mod taxonomy;
pub mod text;

pub use graph::{GraphMetrics, InteractionGraph};
pub use ingest::{Corpus, SuspensionStatus, TweetKind, TweetRecord, UserRecord};
pub use taxonomy::{AccountLabel, AccountType};
