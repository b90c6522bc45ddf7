//! Rule files and the matchers behind them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TaxonomyError;
use crate::text::{fold_turkish, is_word_char, nfc};

/// The mutually exclusive account roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AccountType {
    Main,
    Retweet,
    Backup,
    Sequel,
    #[default]
    None,
}

impl AccountType {
    pub const TYPED: [AccountType; 4] = [AccountType::Main, AccountType::Retweet, AccountType::Backup, AccountType::Sequel];

    pub fn as_str(self) -> &'static str {
        match self {
            AccountType::Main => "main",
            AccountType::Retweet => "retweet",
            AccountType::Backup => "backup",
            AccountType::Sequel => "sequel",
            AccountType::None => "none",
        }
    }
}

impl fmt::Display for AccountType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccountType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "main" => Ok(AccountType::Main),
            "retweet" => Ok(AccountType::Retweet),
            "backup" => Ok(AccountType::Backup),
            "sequel" => Ok(AccountType::Sequel),
            "none" => Ok(AccountType::None),
            other => Err(format!("unknown account type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetField {
    ProfileDescription,
    DisplayName,
    TweetHashtags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Phrase,
    Declaration,
    Hashtag,
    Emoji,
    EmojiWrapped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleYield {
    AccountType(AccountType),
    National,
    Group(String),
    GroupMention,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRule {
    pub id: String,
    pub fields: Vec<TargetField>,
    #[serde(rename = "match")]
    pub kind: MatchKind,
    pub patterns: Vec<String>,
    pub yields: RuleYield,
}

/// A rule with its patterns pre-normalised for matching.
#[derive(Debug, Clone)]
pub(crate) struct CompiledRule {
    pub rule: LabelRule,
    needles: Vec<String>,
}

impl CompiledRule {
    fn new(rule: LabelRule) -> Self {
        let needles = rule
            .patterns
            .iter()
            .map(|p| match rule.kind {
                MatchKind::Phrase | MatchKind::Declaration => fold_turkish(p.trim()),
                MatchKind::Hashtag => fold_turkish(p.trim().trim_start_matches('#')),
                MatchKind::Emoji | MatchKind::EmojiWrapped => nfc(p),
            })
            .collect();
        Self { rule, needles }
    }

    /// `folded` is the field after [`fold_turkish`], `raw` after [`nfc`] only.
    pub fn matches_text(&self, folded: &str, raw: &str) -> bool {
        self.needles.iter().any(|needle| match self.rule.kind {
            MatchKind::Phrase => phrase_positions(folded, needle).next().is_some(),
            MatchKind::Declaration => {
                phrase_positions(folded, needle).any(|end| !points_to_other_account(&folded[end..]))
            }
            MatchKind::Hashtag => text_hashtags(folded).any(|tag| tag == needle),
            MatchKind::Emoji => raw.contains(needle.as_str()),
            MatchKind::EmojiWrapped => emoji_wrapped(raw, needle),
        })
    }

    /// Hashtags are already stored folded.
    pub fn matches_hashtags(&self, hashtags: &[String]) -> bool {
        self.rule.kind == MatchKind::Hashtag && hashtags.iter().any(|h| self.needles.iter().any(|n| h == n))
    }
}

/// End offsets of `needle` occurrences that start at a word boundary.
fn phrase_positions<'a>(hay: &'a str, needle: &'a str) -> impl Iterator<Item = usize> + 'a {
    hay.match_indices(needle).filter_map(move |(start, m)| {
        let boundary = hay[..start].chars().next_back().map_or(true, |c| !is_word_char(c));
        (boundary && !m.is_empty()).then_some(start + m.len())
    })
}

/// After a role phrase, `: @handle` (or `- @handle`, ...) names another
/// account's role rather than declaring this one's.
fn points_to_other_account(rest: &str) -> bool {
    let rest = rest.trim_start_matches(is_word_char);
    rest.trim_start_matches(|c: char| c.is_whitespace() || ":-=–—>→".contains(c)).starts_with('@')
}

fn text_hashtags(text: &str) -> impl Iterator<Item = &str> {
    text.split('#').skip(1).filter_map(|chunk| {
        let end = chunk.find(|c: char| !is_word_char(c)).unwrap_or(chunk.len());
        (end > 0).then(|| &chunk[..end])
    })
}

fn emoji_wrapped(raw: &str, emoji: &str) -> bool {
    let mut parts = raw.split(emoji);
    parts.next();
    let inner: Vec<&str> = parts.collect();
    // at least two occurrences, with text between some consecutive pair
    inner.len() >= 2 && inner[..inner.len() - 1].iter().any(|s| !s.trim().is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleFile {
    pub version: u32,
    pub name: String,
    #[serde(default = "default_priority")]
    pub type_priority: Vec<AccountType>,
    pub rules: Vec<LabelRule>,
}

fn default_priority() -> Vec<AccountType> {
    vec![AccountType::Sequel, AccountType::Backup, AccountType::Retweet, AccountType::Main]
}

/// Validated, compiled rule file.
#[derive(Debug, Clone)]
pub struct RuleSet {
    file: RuleFile,
    pub(crate) compiled: Vec<CompiledRule>,
}

pub const DEFAULT_TURKISH_RULES: &str = include_str!("../../rules/tr_default.toml");

impl RuleSet {
    pub fn new(file: RuleFile) -> Result<Self, TaxonomyError> {
        if file.version != 1 {
            return Err(TaxonomyError::Rules(format!("unsupported rule file version {}", file.version)));
        }
        if file.rules.is_empty() {
            return Err(TaxonomyError::Rules("rule file has no rules".into()));
        }
        let mut priority = file.type_priority.clone();
        priority.sort();
        priority.dedup();
        if priority.len() != file.type_priority.len() || file.type_priority.contains(&AccountType::None) {
            return Err(TaxonomyError::Rules("type_priority must list distinct account types".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for rule in &file.rules {
            if !seen.insert(rule.id.as_str()) {
                return Err(TaxonomyError::Rules(format!("duplicate rule id `{}`", rule.id)));
            }
            if rule.patterns.iter().all(|p| p.trim().is_empty()) || rule.fields.is_empty() {
                return Err(TaxonomyError::Rules(format!("rule `{}` needs fields and patterns", rule.id)));
            }
            if rule.fields.contains(&TargetField::TweetHashtags) && rule.kind != MatchKind::Hashtag {
                return Err(TaxonomyError::Rules(format!("rule `{}`: tweet_hashtags needs match = hashtag", rule.id)));
            }
            if let RuleYield::AccountType(t) = &rule.yields {
                if !file.type_priority.contains(t) {
                    return Err(TaxonomyError::Rules(format!("rule `{}` yields {t}, absent from type_priority", rule.id)));
                }
            }
        }
        let compiled = file.rules.iter().cloned().map(CompiledRule::new).collect();
        Ok(Self { file, compiled })
    }

    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let file: RuleFile = toml::from_str(text).map_err(|e| TaxonomyError::Rules(e.to_string()))?;
        Self::new(file)
    }

    pub fn load(path: &Path) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TaxonomyError::Rules(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn turkish_default() -> Self {
        Self::parse(DEFAULT_TURKISH_RULES).expect("bundled rule file is valid")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.file).expect("rule file serialises")
    }

    pub fn file(&self) -> &RuleFile {
        &self.file
    }

    pub fn rules(&self) -> &[LabelRule] {
        &self.file.rules
    }

    /// Lower is stronger.
    pub fn priority_of(&self, t: AccountType) -> usize {
        self.file.type_priority.iter().position(|p| *p == t).unwrap_or(usize::MAX)
    }
}
