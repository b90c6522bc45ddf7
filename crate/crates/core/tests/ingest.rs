mod common;

use std::collections::{BTreeMap, HashSet};

use common::fixture;
use ioforensics::ingest::{
    apply_collection_filter, collect_rows, detect_follow_train, extract_interactions, parse_jsonl_corpus,
    parse_takedown_archive, write_archive_csv, ArchiveSchema, CollectionFilter, CsvArchiveReader, InteractionKind,
    UserDirectory,
};
use ioforensics::{Corpus, TweetKind, TweetRecord};
use proptest::prelude::*;

#[test]
fn takedown_fixture_parses_with_one_rejection() {
    let parsed = parse_takedown_archive(&fixture("takedown.csv"), &ArchiveSchema::strict(), Corpus::Takedown).unwrap();
    assert_eq!(parsed.users.len(), 30);
    assert_eq!(parsed.tweets.len(), 269);
    assert_eq!(parsed.report.rows_read, 270);
    assert_eq!(parsed.report.rejections.len(), 1);
    assert!(parsed.report.rejections[0].reason.contains("retweet"));
    parsed.report.check_reject_rate(0.01).unwrap();
    assert!(parsed.report.check_reject_rate(0.001).is_err());
    // hashed identities are suppressed
    let hashed: Vec<_> = parsed.users.iter().filter(|u| u.screen_name.is_none()).map(|u| &u.user_id).collect();
    assert_eq!(hashed, ["1029", "1030"]);
}

#[test]
fn live_fixture_parses_cleanly() {
    let parsed = parse_jsonl_corpus(&fixture("live.jsonl"), Corpus::Live).unwrap();
    assert_eq!(parsed.users.len(), 30);
    assert_eq!(parsed.tweets.len(), 288);
    assert!(parsed.report.rejections.is_empty());
    assert!(parsed.users.iter().all(|u| u.corpus == Corpus::Live));
    // rows without a structured mention list fall back to text handles
    assert!(parsed.tweets.iter().any(|t| !t.mention_handles.is_empty()));
}

#[test]
fn serialise_then_parse_reproduces_every_field() {
    for (corpus, parsed) in [
        (
            Corpus::Takedown,
            parse_takedown_archive(&fixture("takedown.csv"), &ArchiveSchema::strict(), Corpus::Takedown).unwrap(),
        ),
        (Corpus::Live, parse_jsonl_corpus(&fixture("live.jsonl"), Corpus::Live).unwrap()),
    ] {
        let mut buf = Vec::new();
        write_archive_csv(&mut buf, &parsed.users, &parsed.tweets).unwrap();
        let again = collect_rows(CsvArchiveReader::new(buf.as_slice(), &ArchiveSchema::strict(), corpus).unwrap());
        assert!(again.report.rejections.is_empty());
        assert_eq!(again.tweets, parsed.tweets);
        let mut a = parsed.users.clone();
        let mut b = again.users.clone();
        a.sort_by(|x, y| x.user_id.cmp(&y.user_id));
        b.sort_by(|x, y| x.user_id.cmp(&y.user_id));
        assert_eq!(a, b);
    }
}

/// Recount straight from the entity fields: one typed event per present
/// target, plus mentions deduplicated against author, reply target and
/// retweeted author.
fn recount(t: &TweetRecord, dir: &UserDirectory) -> BTreeMap<InteractionKind, usize> {
    let mut out = BTreeMap::new();
    for (target, kind) in [
        (&t.retweeted_user_id, InteractionKind::Retweet),
        (&t.replied_to_user_id, InteractionKind::Reply),
        (&t.quoted_user_id, InteractionKind::Quote),
    ] {
        if target.is_some() {
            *out.entry(kind).or_default() += 1;
        }
    }
    let mut excluded: HashSet<String> = [t.author_id.clone()].into();
    excluded.extend(t.replied_to_user_id.clone());
    excluded.extend(t.retweeted_user_id.clone());
    let mut mentioned: HashSet<String> = HashSet::new();
    for id in &t.target_user_ids {
        mentioned.insert(id.clone());
    }
    for h in &t.mention_handles {
        mentioned.insert(dir.resolve_handle(h).map_or_else(|| format!("@{h}"), str::to_string));
    }
    let n = mentioned.iter().filter(|m| !excluded.contains(*m)).count();
    if n > 0 {
        out.insert(InteractionKind::Mention, n);
    }
    out
}

#[test]
fn event_counts_match_a_per_tweet_recount() {
    let td = parse_takedown_archive(&fixture("takedown.csv"), &ArchiveSchema::strict(), Corpus::Takedown).unwrap();
    let lv = parse_jsonl_corpus(&fixture("live.jsonl"), Corpus::Live).unwrap();
    let users: Vec<_> = td.users.iter().chain(&lv.users).cloned().collect();
    let tweets: Vec<_> = td.tweets.iter().chain(&lv.tweets).cloned().collect();
    let dir = UserDirectory::new(&users);
    let events: Vec<_> = extract_interactions(&tweets, &dir).collect();

    let mut expected: BTreeMap<InteractionKind, usize> = BTreeMap::new();
    for t in &tweets {
        for (k, n) in recount(t, &dir) {
            *expected.entry(k).or_default() += n;
        }
    }
    let mut got: BTreeMap<InteractionKind, usize> = BTreeMap::new();
    for e in &events {
        *got.entry(e.kind).or_default() += 1;
    }
    assert_eq!(got, expected);
    assert_eq!(events.len(), expected.values().sum::<usize>());
    let retweets = tweets.iter().filter(|t| t.kind == TweetKind::Retweet).count();
    assert_eq!(got[&InteractionKind::Retweet], retweets);
    assert!(events.iter().filter(|e| e.kind == InteractionKind::Mention).all(|e| e.source != e.target));
}

#[test]
fn empty_stream_gives_no_events() {
    let dir = UserDirectory::new(&[]);
    assert_eq!(extract_interactions(&[], &dir).count(), 0);
}

#[test]
fn collection_filter_on_fixture() {
    let parsed = parse_jsonl_corpus(&fixture("live.jsonl"), Corpus::Live).unwrap();
    let filter = CollectionFilter { min_creation_year: 2020, excluded_user_ids: ["2030".to_string()].into() };
    let kept = apply_collection_filter(parsed.users.clone(), &filter);
    assert_eq!(kept.len(), 27);
    assert_eq!(apply_collection_filter(kept.clone(), &filter), kept);
}

fn token() -> impl Strategy<Value = String> {
    prop_oneof![
        "@[a-z0-9_]{1,6}".prop_map(|s| s),
        "[a-zçğıöşü]{1,6}".prop_map(|s| s),
        Just("@".to_string()),
        Just("@!".to_string()),
        Just("RT".to_string()),
    ]
}

proptest! {
    #[test]
    fn follow_train_ignores_token_order(tokens in proptest::collection::vec(token(), 0..15), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let text = tokens.join(" ");
        let mut shuffled = tokens.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(detect_follow_train(&text), detect_follow_train(&shuffled.join("  ")));
    }
}
