use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::text::fold_turkish;

/// Which collection an account came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corpus {
    Takedown,
    Live,
    Negative,
}

impl Corpus {
    pub const ALL: [Corpus; 3] = [Corpus::Takedown, Corpus::Live, Corpus::Negative];

    pub fn as_str(self) -> &'static str {
        match self {
            Corpus::Takedown => "takedown",
            Corpus::Live => "live",
            Corpus::Negative => "negative",
        }
    }
}

impl fmt::Display for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Corpus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "takedown" => Ok(Corpus::Takedown),
            "live" => Ok(Corpus::Live),
            "negative" => Ok(Corpus::Negative),
            other => Err(format!("unknown corpus `{other}`")),
        }
    }
}

/// Platform suspension state. `SuspendedT1` accounts were already suspended
/// at the first suspension check; `SuspendedT2` accounts were first seen
/// suspended at a later check. Anything suspended at t1 is also suspended at
/// t2, see [`SuspensionStatus::suspended_by_t2`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SuspensionStatus {
    Active,
    SuspendedT1,
    SuspendedT2,
    #[default]
    Unknown,
}

impl SuspensionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SuspensionStatus::Active => "active",
            SuspensionStatus::SuspendedT1 => "suspended_t1",
            SuspensionStatus::SuspendedT2 => "suspended_t2",
            SuspensionStatus::Unknown => "unknown",
        }
    }

    pub fn suspended_by_t1(self) -> bool {
        self == SuspensionStatus::SuspendedT1
    }

    pub fn suspended_by_t2(self) -> bool {
        matches!(self, SuspensionStatus::SuspendedT1 | SuspensionStatus::SuspendedT2)
    }
}

impl fmt::Display for SuspensionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    /// Absent when the archive hashed the account.
    pub screen_name: Option<String>,
    pub display_name: Option<String>,
    pub profile_description: Option<String>,
    pub follower_count: u64,
    pub following_count: u64,
    pub account_creation_date: NaiveDate,
    pub account_language: Option<String>,
    pub corpus: Corpus,
    pub suspension_status: SuspensionStatus,
}

impl UserRecord {
    pub fn creation_year(&self) -> i32 {
        self.account_creation_date.year()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.user_id.is_empty() {
            return Err("empty user id".into());
        }
        if let Some(name) = &self.screen_name {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(format!("invalid screen name `{name}`"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TweetKind {
    Original,
    Retweet,
    Reply,
    Quote,
}

impl TweetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TweetKind::Original => "original",
            TweetKind::Retweet => "retweet",
            TweetKind::Reply => "reply",
            TweetKind::Quote => "quote",
        }
    }
}

/// One post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    pub text: String,
    pub timestamp: DateTime<Utc>,
    pub kind: TweetKind,
    /// Mentioned user ids from the archive's structured mention column.
    pub target_user_ids: Vec<String>,
    /// Lowercased `@handles` scanned from the text. Only filled when the
    /// structured mention column was empty for this row; resolved to user ids
    /// at interaction extraction.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mention_handles: Vec<String>,
    pub retweeted_user_id: Option<String>,
    pub replied_to_user_id: Option<String>,
    pub quoted_tweet_id: Option<String>,
    /// Author of `quoted_tweet_id`, when that tweet is known.
    pub quoted_user_id: Option<String>,
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
    pub language: Option<String>,
}

impl TweetRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.tweet_id.is_empty() {
            return Err("empty tweet id".into());
        }
        if self.author_id.is_empty() {
            return Err("empty author id".into());
        }
        match self.kind {
            TweetKind::Retweet if self.retweeted_user_id.is_none() => {
                return Err("retweet without retweeted user id".into())
            }
            TweetKind::Reply if self.replied_to_user_id.is_none() => {
                return Err("reply without replied-to user id".into())
            }
            _ => {}
        }
        if let Some(bad) = self.hashtags.iter().find(|h| **h != normalize_hashtag(h)) {
            return Err(format!("hashtag `{bad}` is not normalised"));
        }
        Ok(())
    }
}

/// Hashtags are stored without the leading `#` and case-folded.
pub fn normalize_hashtag(raw: &str) -> String {
    fold_turkish(raw.trim().trim_start_matches('#'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suspension_t1_is_subset_of_t2() {
        for s in [
            SuspensionStatus::Active,
            SuspensionStatus::SuspendedT1,
            SuspensionStatus::SuspendedT2,
            SuspensionStatus::Unknown,
        ] {
            if s.suspended_by_t1() {
                assert!(s.suspended_by_t2());
            }
        }
    }

    #[test]
    fn hashtag_normalisation() {
        assert_eq!(normalize_hashtag("#MilliHesaplarBurada"), "millihesaplarburada");
        assert_eq!(normalize_hashtag("İSTANBUL"), "istanbul");
    }

    #[test]
    fn screen_name_rules() {
        let mut u = UserRecord {
            user_id: "1".into(),
            screen_name: Some("a b".into()),
            display_name: None,
            profile_description: None,
            follower_count: 0,
            following_count: 0,
            account_creation_date: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            account_language: None,
            corpus: Corpus::Live,
            suspension_status: SuspensionStatus::Unknown,
        };
        assert!(u.validate().is_err());
        u.screen_name = Some(String::new());
        assert!(u.validate().is_err());
        u.screen_name = Some("ab".into());
        assert!(u.validate().is_ok());
    }
}
