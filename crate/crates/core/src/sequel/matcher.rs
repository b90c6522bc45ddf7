use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::similarity::{gestalt_ratio, ratio_upper_bound, username_ratio};
use crate::ingest::{InteractionEvent, UserRecord};
use crate::text::{fold_ascii, fold_turkish};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequelThresholds {
    pub username_high: f64,
    pub username_low: f64,
    pub bio_min: f64,
    pub name_min: f64,
    pub common_min: u64,
}

impl Default for SequelThresholds {
    fn default() -> Self {
        Self { username_high: 0.9, username_low: 0.6, bio_min: 0.5, name_min: 0.8, common_min: 2 }
    }
}

impl SequelThresholds {
    pub fn validate(&self) -> Result<(), String> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(format!("{name} must be in (0, 1], got {v}"))
            }
        };
        unit("username_high", self.username_high)?;
        unit("username_low", self.username_low)?;
        unit("bio_min", self.bio_min)?;
        unit("name_min", self.name_min)?;
        if self.username_high <= self.username_low {
            return Err("username_high must exceed username_low".into());
        }
        if self.common_min < 1 {
            return Err("common_min must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScores {
    pub username_ratio: f64,
    /// Absent when either profile description is missing.
    pub bio_ratio: Option<f64>,
    /// Absent when either display name is missing.
    pub name_ratio: Option<f64>,
    pub common_interactions: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleFired {
    HighUsername,
    LowUsernamePlusEvidence,
    None,
}

impl RuleFired {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleFired::HighUsername => "high_username",
            RuleFired::LowUsernamePlusEvidence => "low_username_plus_evidence",
            RuleFired::None => "none",
        }
    }
}

/// Username similarity above the high threshold, or above the low threshold
/// together with a similar bio, a similar display name, or enough shared
/// interaction partners. All comparisons are strict except the count.
pub fn classify_sequel(scores: &SimilarityScores, t: &SequelThresholds) -> (bool, RuleFired) {
    if scores.username_ratio > t.username_high {
        return (true, RuleFired::HighUsername);
    }
    if scores.username_ratio > t.username_low {
        let bio = scores.bio_ratio.is_some_and(|r| r > t.bio_min);
        let name = scores.name_ratio.is_some_and(|r| r > t.name_min);
        let common = scores.common_interactions >= t.common_min;
        if bio || name || common {
            return (true, RuleFired::LowUsernamePlusEvidence);
        }
    }
    (false, RuleFired::None)
}

/// Distinct interaction targets per user, all kinds pooled.
#[derive(Debug, Clone, Default)]
pub struct InteractionIndex {
    targets: HashMap<String, BTreeSet<String>>,
}

impl InteractionIndex {
    pub fn new<'a>(events: impl IntoIterator<Item = &'a InteractionEvent>) -> Self {
        let mut targets: HashMap<String, BTreeSet<String>> = HashMap::new();
        for e in events {
            if e.source != e.target {
                targets.entry(e.source.clone()).or_default().insert(e.target.clone());
            }
        }
        Self { targets }
    }

    pub fn targets(&self, user_id: &str) -> Option<&BTreeSet<String>> {
        self.targets.get(user_id)
    }
}

/// Third parties both `u` and `v` interacted with.
pub fn common_interactions(u: &str, v: &str, index: &InteractionIndex) -> u64 {
    let (Some(tu), Some(tv)) = (index.targets(u), index.targets(v)) else {
        warn!("no interactions indexed for {} or {}", u, v);
        return 0;
    };
    let (small, large) = if tu.len() <= tv.len() { (tu, tv) } else { (tv, tu) };
    small.iter().filter(|x| *x != u && *x != v && large.contains(*x)).count() as u64
}

/// Live accounts with a visible username, ready for scanning.
#[derive(Debug, Clone)]
pub struct LiveCorpusIndex<'a> {
    /// Sorted by (folded username, user id), so a strict-improvement scan
    /// resolves ties to the lexicographically smallest candidate.
    entries: Vec<(String, usize, &'a UserRecord)>,
    pub skipped: Vec<String>,
}

impl<'a> LiveCorpusIndex<'a> {
    pub fn new(users: &'a [UserRecord]) -> Self {
        let mut entries = Vec::new();
        let mut skipped = Vec::new();
        for u in users {
            match &u.screen_name {
                Some(name) if !name.is_empty() => {
                    let folded = fold_ascii(name);
                    let len = folded.chars().count();
                    entries.push((folded, len, u));
                }
                _ => skipped.push(u.user_id.clone()),
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.2.user_id.cmp(&b.2.user_id)));
        Self { entries, skipped }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Live account with the highest username ratio to `username`; `None` when
/// the live corpus has no visible usernames.
pub fn best_match<'a>(username: &str, live: &LiveCorpusIndex<'a>) -> Option<(&'a UserRecord, f64)> {
    let folded = fold_ascii(username);
    let len = folded.chars().count();
    let mut best: Option<(&'a UserRecord, f64)> = None;
    for (candidate, cand_len, user) in &live.entries {
        if let Some((_, score)) = best {
            // pairs that cannot beat the current best are skipped; equal
            // scores never replace an earlier (smaller) candidate anyway
            if ratio_upper_bound(len, *cand_len) <= score {
                continue;
            }
        }
        let r = username_ratio(&folded, candidate);
        if best.map_or(true, |(_, s)| r > s) {
            best = Some((user, r));
        }
    }
    best
}

fn optional_ratio(a: &Option<String>, b: &Option<String>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => Some(gestalt_ratio(&fold_turkish(a), &fold_turkish(b))),
        _ => None,
    }
}

/// Scores of one takedown/live pair.
pub fn score_pair(takedown: &UserRecord, live: &UserRecord, index: &InteractionIndex) -> SimilarityScores {
    let name = |u: &UserRecord| fold_ascii(u.screen_name.as_deref().unwrap_or(&u.user_id));
    SimilarityScores {
        username_ratio: username_ratio(&name(takedown), &name(live)),
        bio_ratio: optional_ratio(&takedown.profile_description, &live.profile_description),
        name_ratio: optional_ratio(&takedown.display_name, &live.display_name),
        common_interactions: common_interactions(&takedown.user_id, &live.user_id, index),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequelCandidate {
    pub takedown_user_id: String,
    pub live_user_id: String,
    pub takedown_username: Option<String>,
    pub live_username: Option<String>,
    pub scores: SimilarityScores,
    pub verdict: bool,
    pub rule_fired: RuleFired,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DirectSequels {
    /// One per takedown account with a visible username, by username ratio
    /// descending.
    pub candidates: Vec<SequelCandidate>,
    pub skipped_takedown: Vec<String>,
    pub skipped_live: Vec<String>,
}

impl DirectSequels {
    pub fn sequels(&self) -> impl Iterator<Item = &SequelCandidate> {
        self.candidates.iter().filter(|c| c.verdict)
    }
}

pub fn direct_sequels(
    takedown: &[UserRecord],
    live: &[UserRecord],
    index: &InteractionIndex,
    thresholds: &SequelThresholds,
) -> DirectSequels {
    let live_index = LiveCorpusIndex::new(live);
    let mut skipped_takedown = Vec::new();
    let mut named = Vec::new();
    for u in takedown {
        match &u.screen_name {
            Some(name) if !name.is_empty() => named.push((u, name)),
            _ => skipped_takedown.push(u.user_id.clone()),
        }
    }
    let mut candidates: Vec<SequelCandidate> = named
        .par_iter()
        .filter_map(|(td, name)| {
            let (lv, _) = best_match(name, &live_index)?;
            let scores = score_pair(td, lv, index);
            let (verdict, rule_fired) = classify_sequel(&scores, thresholds);
            Some(SequelCandidate {
                takedown_user_id: td.user_id.clone(),
                live_user_id: lv.user_id.clone(),
                takedown_username: td.screen_name.clone(),
                live_username: lv.screen_name.clone(),
                scores,
                verdict,
                rule_fired,
            })
        })
        .collect();
    candidates.sort_by(|a, b| {
        b.scores
            .username_ratio
            .total_cmp(&a.scores.username_ratio)
            .then_with(|| a.takedown_username.cmp(&b.takedown_username))
            .then_with(|| a.takedown_user_id.cmp(&b.takedown_user_id))
    });
    DirectSequels { candidates, skipped_takedown, skipped_live: live_index.skipped }
}

fn fmt3(x: f64) -> String {
    format!("{x:.3}")
}

/// CSV with one row per candidate; suppressed usernames fall back to the
/// user id.
pub fn write_sequel_csv<W: Write>(candidates: &[SequelCandidate], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "takedown_username",
        "live_username",
        "username_similarity",
        "bio_similarity",
        "name_similarity",
        "common_interactions",
        "verdict",
        "rule_fired",
    ])?;
    for c in candidates {
        w.write_record([
            c.takedown_username.clone().unwrap_or_else(|| c.takedown_user_id.clone()),
            c.live_username.clone().unwrap_or_else(|| c.live_user_id.clone()),
            fmt3(c.scores.username_ratio),
            c.scores.bio_ratio.map(fmt3).unwrap_or_default(),
            c.scores.name_ratio.map(fmt3).unwrap_or_default(),
            c.scores.common_interactions.to_string(),
            c.verdict.to_string(),
            c.rule_fired.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
