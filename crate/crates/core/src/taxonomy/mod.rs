//! Account taxonomy: role types, national and group membership, and the
//! explicit / implicit node partition.

mod rules;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{TweetKind, TweetRecord, UserRecord};
use crate::text::{fold_turkish, nfc};

pub use rules::{
    AccountType, LabelRule, MatchKind, RuleFile, RuleSet, RuleYield, TargetField, DEFAULT_TURKISH_RULES,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("rule file: {0}")]
    Rules(String),
    #[error("node `{0}` has no label")]
    Unlabeled(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    National,
    Group(String),
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Membership::National => f.write_str("national"),
            Membership::Group(g) => write!(f, "group:{g}"),
        }
    }
}

/// Rule id recorded when a label comes from the sequel matcher rather than
/// from profile text.
pub const DIRECT_SEQUEL_RULE: &str = "direct_sequel";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountLabel {
    pub user_id: String,
    pub account_type: AccountType,
    pub memberships: BTreeSet<Membership>,
    /// A "(do not) add to groups" style phrase matched.
    pub group_mention: bool,
    pub explicit: bool,
    /// Every rule that hit, in rule-file order.
    pub matched_rules: Vec<String>,
}

impl AccountLabel {
    pub fn unlabeled(user_id: &str) -> Self {
        Self {
            user_id: user_id.to_string(),
            account_type: AccountType::None,
            memberships: BTreeSet::new(),
            group_mention: false,
            explicit: false,
            matched_rules: Vec::new(),
        }
    }

    fn refresh_explicit(&mut self) {
        self.explicit = self.account_type != AccountType::None || !self.memberships.is_empty() || self.group_mention;
    }
}

struct PreparedField {
    folded: String,
    raw: String,
}

impl PreparedField {
    fn new(text: Option<&str>) -> Option<Self> {
        let text = text.filter(|t| !t.trim().is_empty())?;
        Some(Self { folded: fold_turkish(text), raw: nfc(text) })
    }
}

/// Applies every rule to one account. Among matched role rules the type
/// ranked first in the rule set's `type_priority` wins; memberships
/// accumulate. Tweets, when given, feed `tweet_hashtags` rules.
pub fn classify_account(user: &UserRecord, rules: &RuleSet, tweets: Option<&[&TweetRecord]>) -> AccountLabel {
    let description = PreparedField::new(user.profile_description.as_deref());
    let display = PreparedField::new(user.display_name.as_deref());
    let hashtags: Vec<String> = tweets
        .map(|ts| {
            let set: BTreeSet<&String> = ts.iter().flat_map(|t| t.hashtags.iter()).collect();
            set.into_iter().cloned().collect()
        })
        .unwrap_or_default();

    let mut label = AccountLabel::unlabeled(&user.user_id);
    let mut best_type: Option<(usize, AccountType)> = None;
    for compiled in &rules.compiled {
        let rule = &compiled.rule;
        let hit = rule.fields.iter().any(|field| match field {
            TargetField::ProfileDescription => {
                description.as_ref().is_some_and(|f| compiled.matches_text(&f.folded, &f.raw))
            }
            TargetField::DisplayName => display.as_ref().is_some_and(|f| compiled.matches_text(&f.folded, &f.raw)),
            TargetField::TweetHashtags => compiled.matches_hashtags(&hashtags),
        });
        if !hit {
            continue;
        }
        label.matched_rules.push(rule.id.clone());
        match &rule.yields {
            RuleYield::AccountType(t) => {
                let rank = rules.priority_of(*t);
                if best_type.map_or(true, |(r, _)| rank < r) {
                    best_type = Some((rank, *t));
                }
            }
            RuleYield::National => {
                label.memberships.insert(Membership::National);
            }
            RuleYield::Group(name) => {
                label.memberships.insert(Membership::Group(name.clone()));
            }
            RuleYield::GroupMention => label.group_mention = true,
        }
    }
    label.account_type = best_type.map_or(AccountType::None, |(_, t)| t);
    label.refresh_explicit();
    label
}

/// Groups whose phrase or emoji marker appears in the display name or the
/// profile description.
pub fn detect_group_membership(user: &UserRecord, rules: &RuleSet) -> BTreeSet<String> {
    let fields: Vec<PreparedField> = [user.display_name.as_deref(), user.profile_description.as_deref()]
        .into_iter()
        .filter_map(PreparedField::new)
        .collect();
    let mut groups = BTreeSet::new();
    for compiled in &rules.compiled {
        if let RuleYield::Group(name) = &compiled.rule.yields {
            if fields.iter().any(|f| compiled.matches_text(&f.folded, &f.raw)) {
                groups.insert(name.clone());
            }
        }
    }
    groups
}

/// Labels every user; tweets are grouped by author for hashtag rules.
pub fn label_accounts(users: &[UserRecord], tweets: &[TweetRecord], rules: &RuleSet) -> Vec<AccountLabel> {
    let mut by_author: HashMap<&str, Vec<&TweetRecord>> = HashMap::new();
    for t in tweets {
        by_author.entry(t.author_id.as_str()).or_default().push(t);
    }
    users
        .iter()
        .map(|u| {
            let own = by_author.get(u.user_id.as_str()).map(Vec::as_slice);
            classify_account(u, rules, Some(own.unwrap_or(&[])))
        })
        .collect()
}

/// Marks matched live sequel accounts. A sequel match outranks the other
/// role types, following the default priority.
pub fn apply_direct_sequels<'a>(labels: &mut [AccountLabel], sequel_ids: impl IntoIterator<Item = &'a str>) {
    let ids: BTreeSet<&str> = sequel_ids.into_iter().collect();
    for label in labels.iter_mut().filter(|l| ids.contains(l.user_id.as_str())) {
        label.account_type = AccountType::Sequel;
        label.matched_rules.push(DIRECT_SEQUEL_RULE.to_string());
        label.refresh_explicit();
    }
}

/// Splits `nodes` into (explicit, implicit). Every node needs a label.
pub fn partition_explicit<'a>(
    nodes: impl IntoIterator<Item = &'a str>,
    labels: &[AccountLabel],
) -> Result<(BTreeSet<String>, BTreeSet<String>), TaxonomyError> {
    let by_id: HashMap<&str, &AccountLabel> = labels.iter().map(|l| (l.user_id.as_str(), l)).collect();
    let mut explicit = BTreeSet::new();
    let mut implicit = BTreeSet::new();
    let mut total = 0usize;
    for node in nodes {
        total += 1;
        let label = by_id.get(node).ok_or_else(|| TaxonomyError::Unlabeled(node.to_string()))?;
        if label.explicit {
            explicit.insert(node.to_string());
        } else {
            implicit.insert(node.to_string());
        }
    }
    assert!(explicit.is_disjoint(&implicit), "partition overlaps");
    assert_eq!(explicit.len() + implicit.len(), total, "partition lost or duplicated nodes");
    Ok((explicit, implicit))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeTally {
    pub users: u64,
    pub total_tweets: u64,
    pub retweets: u64,
    pub originals: u64,
    /// `retweets / total * 100`, rounded to one decimal; absent without tweets.
    pub percent_retweets: Option<f64>,
}

/// Tweet statistics per account type (including `none`), plus an `all` row
/// over every tweet. Tweets by unlabelled authors only count towards `all`.
pub fn tally_by_type(labels: &[AccountLabel], tweets: &[TweetRecord]) -> BTreeMap<String, TypeTally> {
    let types: HashMap<&str, AccountType> = labels.iter().map(|l| (l.user_id.as_str(), l.account_type)).collect();
    let mut table: BTreeMap<String, TypeTally> = BTreeMap::new();
    for t in AccountType::TYPED.into_iter().chain([AccountType::None]) {
        table.insert(t.as_str().to_string(), TypeTally::default());
    }
    table.insert("all".into(), TypeTally::default());
    for l in labels {
        table.get_mut(l.account_type.as_str()).expect("type row").users += 1;
    }
    table.get_mut("all").expect("all row").users = labels.len() as u64;
    for tweet in tweets {
        let is_rt = tweet.kind == TweetKind::Retweet;
        let mut rows = vec!["all"];
        if let Some(t) = types.get(tweet.author_id.as_str()) {
            rows.push(t.as_str());
        }
        for row in rows {
            let entry = table.get_mut(row).expect("row exists");
            entry.total_tweets += 1;
            if is_rt {
                entry.retweets += 1;
            } else {
                entry.originals += 1;
            }
        }
    }
    for entry in table.values_mut() {
        entry.percent_retweets = (entry.total_tweets > 0).then(|| {
            crate::graph::round_half_up(entry.retweets as f64 / entry.total_tweets as f64 * 100.0, 1)
        });
    }
    table
}

pub fn write_labels_csv<W: Write>(labels: &[AccountLabel], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_id", "account_type", "memberships", "explicit", "matched_rules"])?;
    for l in labels {
        let memberships: Vec<String> = l.memberships.iter().map(ToString::to_string).collect();
        w.write_record([
            l.user_id.clone(),
            l.account_type.to_string(),
            memberships.join(";"),
            l.explicit.to_string(),
            l.matched_rules.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
