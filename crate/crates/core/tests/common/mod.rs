//! Fixtures and brute-force oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use chrono::NaiveDate;
use ioforensics::graph::{EdgeCounts, NodeInfo};
use ioforensics::sequel::{classify_sequel, common_interactions, InteractionIndex, SequelThresholds, SimilarityScores};
use ioforensics::text::{fold_ascii, fold_turkish};
use ioforensics::{Corpus, InteractionGraph, SuspensionStatus, UserRecord};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn user(id: &str, corpus: Corpus, screen: Option<&str>, display: Option<&str>, bio: Option<&str>) -> UserRecord {
    UserRecord {
        user_id: id.to_string(),
        screen_name: screen.map(str::to_string),
        display_name: display.map(str::to_string),
        profile_description: bio.map(str::to_string),
        follower_count: 0,
        following_count: 0,
        account_creation_date: NaiveDate::from_ymd_opt(2020, 6, 1).unwrap(),
        account_language: None,
        corpus,
        suspension_status: SuspensionStatus::Unknown,
    }
}

pub fn node_name(i: usize) -> String {
    format!("v{i:03}")
}

/// `n` nodes, alternating takedown / live, with edges drawn independently
/// with probability `p` (no self-loops).
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> InteractionGraph {
    let nodes = (0..n).map(|i| NodeInfo {
        user_id: node_name(i),
        corpus: if i % 2 == 0 { Corpus::Takedown } else { Corpus::Live },
        suspension_status: SuspensionStatus::Unknown,
        explicit: None,
    });
    let mut edges = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if s != t && rng.gen_bool(p) {
                let counts = EdgeCounts { mention: rng.gen_range(0..3), retweet: 1, reply: 0, quote: 0 };
                edges.push((node_name(s), node_name(t), counts));
            }
        }
    }
    InteractionGraph::from_parts(nodes, edges)
}

/// Graph metrics by adjacency matrix and Floyd–Warshall.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMetrics {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: f64,
    pub diameter: Option<u32>,
    pub avg_path_length: Option<f64>,
    pub component_size: usize,
}

pub fn apsp_oracle(g: &InteractionGraph) -> OracleMetrics {
    let ids: Vec<String> = g.nodes().iter().map(|n| n.user_id.clone()).collect();
    let n = ids.len();
    let index = |id: &str| ids.iter().position(|x| x == id).unwrap();
    let mut directed = vec![vec![false; n]; n];
    for (s, t, _) in g.edges() {
        directed[index(s)][index(t)] = true;
    }
    let m: usize = directed.iter().map(|row| row.iter().filter(|x| **x).count()).sum();
    let density = if n < 2 { 0.0 } else { m as f64 / (n as f64 * (n as f64 - 1.0)) };
    let mut out = OracleMetrics {
        node_count: n,
        edge_count: m,
        density,
        diameter: None,
        avg_path_length: None,
        component_size: n.min(1),
    };
    if n < 2 {
        return out;
    }
    const INF: u64 = u64::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if directed[i][j] || directed[j][i] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    // components from reachability; ties go to the one with the smallest member
    let mut best: Vec<usize> = Vec::new();
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&j| d[i][j] < INF).collect();
        for &j in &comp {
            assigned[j] = true;
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    out.component_size = best.len();
    if best.len() < 2 {
        return out;
    }
    let (mut sum, mut pairs, mut diameter) = (0u64, 0u64, 0u64);
    for (a, &i) in best.iter().enumerate() {
        for &j in &best[a + 1..] {
            sum += d[i][j];
            pairs += 1;
            diameter = diameter.max(d[i][j]);
        }
    }
    out.diameter = Some(diameter as u32);
    out.avg_path_length = Some(sum as f64 / pairs as f64);
    out
}

pub fn lcs_oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] { t[i - 1][j - 1] + 1 } else { t[i - 1][j].max(t[i][j - 1]) };
        }
    }
    t[a.len()][b.len()]
}

pub fn lcs_ratio_oracle(a: &str, b: &str) -> f64 {
    let total = a.chars().count() + b.chars().count();
    if total == 0 {
        1.0
    } else {
        (2 * lcs_oracle(a, b)) as f64 / total as f64
    }
}

/// Exhaustive block matcher: tries every (i, j) start and extends, keeping
/// the first longest block in (i, j) order, then recurses on both sides.
pub fn gestalt_oracle(a: &str, b: &str) -> f64 {
    fn matched(a: &[char], b: &[char]) -> usize {
        let mut best = (0, 0, 0);
        for i in 0..a.len() {
            for j in 0..b.len() {
                let mut k = 0;
                while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                    k += 1;
                }
                if k > best.2 {
                    best = (i, j, k);
                }
            }
        }
        let (i, j, k) = best;
        if k == 0 {
            return 0;
        }
        k + matched(&a[..i], &b[..j]) + matched(&a[i + k..], &b[j + k..])
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        1.0
    } else {
        (2 * matched(&a, &b)) as f64 / total as f64
    }
}

pub fn random_string<R: Rng>(rng: &mut R, alphabet: &[char], max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

/// Scores every takedown/live pair and applies the argmax-then-rule
/// procedure directly: best live username by ratio, ties to the smallest
/// (username, id), then the threshold rule.
pub fn all_pairs_sequel_oracle(
    takedown: &[UserRecord],
    live: &[UserRecord],
    index: &InteractionIndex,
    thresholds: &SequelThresholds,
) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for td in takedown {
        let Some(td_name) = &td.screen_name else { continue };
        let mut scored: Vec<(f64, String, String, &UserRecord)> = live
            .iter()
            .filter_map(|lv| {
                let name = fold_ascii(lv.screen_name.as_ref()?);
                Some((lcs_ratio_oracle(&fold_ascii(td_name), &name), name, lv.user_id.clone(), lv))
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)).then_with(|| a.2.cmp(&b.2)));
        let Some((ratio, _, _, lv)) = scored.first() else { continue };
        let ratio_of = |x: &Option<String>, y: &Option<String>| match (x, y) {
            (Some(x), Some(y)) if !x.is_empty() && !y.is_empty() => {
                Some(gestalt_oracle(&fold_turkish(x), &fold_turkish(y)))
            }
            _ => None,
        };
        let scores = SimilarityScores {
            username_ratio: *ratio,
            bio_ratio: ratio_of(&td.profile_description, &lv.profile_description),
            name_ratio: ratio_of(&td.display_name, &lv.display_name),
            common_interactions: common_interactions(&td.user_id, &lv.user_id, index),
        };
        if classify_sequel(&scores, thresholds).0 {
            out.insert((td.user_id.clone(), lv.user_id.clone()));
        }
    }
    out
}

/// A planted-sequel corpus: `planted` takedown accounts each get a live
/// successor produced by a known edit (suffix digits, inserted underscore,
/// dropped letter); the rest of both sides use disjoint alphabets so they
/// never match anything.
pub struct PlantedCorpus {
    pub takedown: Vec<UserRecord>,
    pub live: Vec<UserRecord>,
    pub planted: BTreeSet<(String, String)>,
}

pub fn planted_corpus<R: Rng>(rng: &mut R, users: usize, planted: usize) -> PlantedCorpus {
    let td_alpha: Vec<char> = "abcdefghijklm".chars().collect();
    let decoy_alpha: Vec<char> = "nopqrstuvwxyz".chars().collect();
    let word = |rng: &mut R, alpha: &[char], len: usize| -> String { (0..len).map(|_| *alpha.choose(rng).unwrap()).collect() };
    let mut takedown = Vec::new();
    let mut live = Vec::new();
    let mut truth = BTreeSet::new();
    let mut used = BTreeSet::new();
    for i in 0..users {
        let base = loop {
            let len = rng.gen_range(9..13);
            let w = word(rng, &td_alpha, len);
            if used.insert(w.clone()) {
                break w;
            }
        };
        let td_id = format!("t{i:03}");
        let digits: Vec<char> = "0123456789".chars().collect();
        let (bio, display) = if i < planted {
            (format!("{} {}", word(rng, &td_alpha, 6), word(rng, &td_alpha, 7)), base.to_uppercase())
        } else {
            // unplanted accounts share nothing but the username alphabet
            (word(rng, &digits, 10), word(rng, &digits, 8))
        };
        takedown.push(user(&td_id, Corpus::Takedown, Some(&base), Some(&display), Some(&bio)));
        let lv_id = format!("l{i:03}");
        if i < planted {
            let edited = match i % 3 {
                0 => format!("{base}{}", rng.gen_range(10..100)),
                1 => format!("{}_{}", &base[..4], &base[4..]),
                _ => format!("{}{}", &base[..base.len() - 1], rng.gen_range(0..10)),
            };
            live.push(user(&lv_id, Corpus::Live, Some(&edited), Some(&base.to_uppercase()), Some(&bio)));
            truth.insert((td_id, lv_id));
        } else {
            let len = rng.gen_range(6..12);
                        let decoy = word(rng, &decoy_alpha, len);
            let bio = word(rng, &decoy_alpha, 12);
            live.push(user(&lv_id, Corpus::Live, Some(&decoy), Some(&decoy), Some(&bio)));
        }
    }
    live.shuffle(rng);
    PlantedCorpus { takedown, live, planted: truth }
}

pub const TRIGGER_PHRASES: &[&str] = &[
    "ana hesap",
    "ana hesabım",
    "asıl hesap",
    "main account",
    "rt hesabı",
    "RT ACCOUNT",
    "retweet account",
    "yedek hesap",
    "YEDEK HESABIM",
    "backup account",
    "yeni hesap",
    "new account",
    "old one is suspended",
    "#MilliHesaplarBurada",
    "#MilliTakipMerkezi",
    "ENDERUN",
    "💢",
    "⭐Grup⭐",
    "gruplara ekle",
    "Ana Hesap: @someone",
];

pub const FILLER: &[&str] = &["Türkiye", "vatan", "sevdalısı", "İstanbul", "ılık", "hello", "—", "@x", "🇹🇷", "1923"];

/// Filler words with 0–4 trigger phrases spliced in.
pub fn random_description<R: Rng>(rng: &mut R) -> String {
    let mut parts: Vec<&str> = (0..rng.gen_range(0..6)).map(|_| *FILLER.choose(rng).unwrap()).collect();
    for _ in 0..rng.gen_range(0..=4) {
        let at = rng.gen_range(0..=parts.len());
        parts.insert(at, TRIGGER_PHRASES.choose(rng).unwrap());
    }
    parts.join(if rng.gen_bool(0.5) { " " } else { ". " })
}
