//! Archive ingestion: parsing, follow-train detection, interaction
//! extraction and collection filters.

mod archive;
mod filter;
mod follow_train;
mod interactions;
mod records;
mod snowball;
mod suspension;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use archive::{
    collect_rows, format_bracketed_list, format_timestamp, parse_bracketed_list, parse_corpus_file, parse_date,
    parse_jsonl_corpus, parse_takedown_archive, parse_timestamp, resolve_quoted_authors, write_archive_csv,
    ArchiveSchema, Column, CsvArchiveReader, IngestReport, JsonlCorpusReader, ParsedArchive, Rejection, RowResult,
};
pub use filter::{apply_collection_filter, CollectionFilter};
pub use follow_train::{detect_follow_train, is_follow_train, MentionStats};
pub use interactions::{extract_interactions, InteractionEvent, InteractionKind, UserDirectory};
pub use records::{normalize_hashtag, Corpus, SuspensionStatus, TweetKind, TweetRecord, UserRecord};
pub use snowball::{plan_snowball, PlatformClient, SnowballError};
pub use suspension::{apply_suspension_snapshots, load_suspension_snapshots, SuspensionObservation};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown column `{0}` in header")]
    UnknownColumn(String),
    #[error("required column `{0}` missing from header")]
    MissingColumn(String),
    #[error("header: {0}")]
    Header(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{rejected} of {rows} rows rejected (limit {max_rate})")]
    TooManyRejections { rejected: u64, rows: u64, max_rate: f64 },
    #[error("suspension snapshot row {row}: {reason}")]
    Snapshot { row: u64, reason: String },
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io { path: path.to_path_buf(), source }
    }
}
