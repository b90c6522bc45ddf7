use super::records::TweetRecord;
use crate::text::is_word_char;

/// Token counts behind the follow-train rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MentionStats {
    pub mentions: usize,
    pub tokens: usize,
}

impl MentionStats {
    /// Tokens are maximal whitespace-separated substrings; a mention is a
    /// token starting with `@` followed by at least one word character.
    pub fn of(text: &str) -> Self {
        let mut stats = MentionStats::default();
        for tok in text.split_whitespace() {
            stats.tokens += 1;
            let mut chars = tok.chars();
            if chars.next() == Some('@') && chars.next().is_some_and(is_word_char) {
                stats.mentions += 1;
            }
        }
        stats
    }
}

/// At least five mentions and a mention-to-token ratio strictly above 0.8.
pub fn detect_follow_train(text: &str) -> bool {
    let MentionStats { mentions, tokens } = MentionStats::of(text);
    // mentions / tokens > 4/5, in integers
    mentions >= 5 && 5 * mentions > 4 * tokens
}

pub fn is_follow_train(tweet: &TweetRecord) -> bool {
    detect_follow_train(&tweet.text)
}
