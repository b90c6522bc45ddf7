//! Cross-corpus sequel account matching.

mod matcher;
mod similarity;

pub use matcher::{
    best_match, classify_sequel, common_interactions, direct_sequels, score_pair, write_sequel_csv, DirectSequels,
    InteractionIndex, LiveCorpusIndex, RuleFired, SequelCandidate, SequelThresholds, SimilarityScores,
};
pub use similarity::{gestalt_matches, gestalt_ratio, lcs_len, ratio_upper_bound, username_ratio};
