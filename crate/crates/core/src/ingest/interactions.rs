use std::collections::{HashMap, HashSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::records::{TweetRecord, UserRecord};
use crate::text::fold_ascii;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    Mention,
    Retweet,
    Reply,
    Quote,
}

impl InteractionKind {
    pub const ALL: [InteractionKind; 4] =
        [InteractionKind::Mention, InteractionKind::Retweet, InteractionKind::Reply, InteractionKind::Quote];

    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::Mention => "mention",
            InteractionKind::Retweet => "retweet",
            InteractionKind::Reply => "reply",
            InteractionKind::Quote => "quote",
        }
    }
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One directed user-to-user interaction carried by one tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub source: String,
    pub target: String,
    pub kind: InteractionKind,
    pub timestamp: DateTime<Utc>,
    pub tweet_id: String,
    /// Target is not a known account of any loaded corpus.
    pub external: bool,
}

/// Known accounts, used to flag external targets and to resolve text-scanned
/// `@handles` to user ids.
#[derive(Debug, Clone, Default)]
pub struct UserDirectory {
    ids: HashSet<String>,
    by_handle: HashMap<String, String>,
}

impl UserDirectory {
    pub fn new<'a>(users: impl IntoIterator<Item = &'a UserRecord>) -> Self {
        let mut dir = UserDirectory::default();
        for u in users {
            dir.ids.insert(u.user_id.clone());
            if let Some(name) = &u.screen_name {
                dir.by_handle.entry(fold_ascii(name)).or_insert_with(|| u.user_id.clone());
            }
        }
        dir
    }

    pub fn contains(&self, user_id: &str) -> bool {
        self.ids.contains(user_id)
    }

    pub fn resolve_handle(&self, handle: &str) -> Option<&str> {
        self.by_handle.get(&fold_ascii(handle)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Events of one tweet: one per present retweet / reply / quote target, then
/// one mention event per distinct mentioned user other than the author, the
/// reply target and the retweeted author.
///
/// Unresolvable text handles become `@handle` targets flagged external.
pub fn tweet_interactions(tweet: &TweetRecord, directory: &UserDirectory) -> Vec<InteractionEvent> {
    let event = |target: String, kind: InteractionKind| {
        let external = !directory.contains(&target);
        InteractionEvent {
            source: tweet.author_id.clone(),
            target,
            kind,
            timestamp: tweet.timestamp,
            tweet_id: tweet.tweet_id.clone(),
            external,
        }
    };

    let mut events = Vec::new();
    let typed = [
        (&tweet.retweeted_user_id, InteractionKind::Retweet),
        (&tweet.replied_to_user_id, InteractionKind::Reply),
        (&tweet.quoted_user_id, InteractionKind::Quote),
    ];
    for (target, kind) in typed {
        if let Some(t) = target {
            events.push(event(t.clone(), kind));
        }
    }

    let mut seen: HashSet<&str> = HashSet::new();
    seen.insert(tweet.author_id.as_str());
    if let Some(t) = &tweet.replied_to_user_id {
        seen.insert(t);
    }
    if let Some(t) = &tweet.retweeted_user_id {
        seen.insert(t);
    }
    let resolved: Vec<String> = tweet
        .mention_handles
        .iter()
        .map(|h| directory.resolve_handle(h).map_or_else(|| format!("@{h}"), str::to_string))
        .collect();
    for target in tweet.target_user_ids.iter().chain(resolved.iter()) {
        if seen.insert(target.as_str()) {
            events.push(event(target.clone(), InteractionKind::Mention));
        }
    }
    events
}

/// Lazily maps a tweet stream to its interaction events, in tweet order.
pub fn extract_interactions<'a, I>(
    tweets: I,
    directory: &'a UserDirectory,
) -> impl Iterator<Item = InteractionEvent> + 'a
where
    I: IntoIterator<Item = &'a TweetRecord>,
    I::IntoIter: 'a,
{
    tweets.into_iter().flat_map(move |t| tweet_interactions(t, directory))
}
