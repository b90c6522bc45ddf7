//! Takedown archive (CSV) and live corpus (JSON-lines) readers.
//!
//! Both formats share one column vocabulary. A row that cannot be turned into
//! a valid record becomes a [`Rejection`]; the stream never aborts on a bad
//! row. Header problems (unknown or missing columns) are hard errors.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, NaiveTime, Utc};
use log::debug;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::records::{normalize_hashtag, Corpus, SuspensionStatus, TweetKind, TweetRecord, UserRecord};
use super::IngestError;
use crate::text::scan_mentions;

/// Columns understood by the readers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    TweetId,
    UserId,
    UserDisplayName,
    UserScreenName,
    UserProfileDescription,
    FollowerCount,
    FollowingCount,
    AccountCreationDate,
    TweetTime,
    TweetText,
    IsRetweet,
    RetweetUserId,
    InReplyToUserId,
    QuotedTweetTweetId,
    UserMentions,
    Hashtags,
    Urls,
    TweetLanguage,
    AccountLanguage,
}

impl Column {
    pub const REQUIRED: [Column; 18] = [
        Column::TweetId,
        Column::UserId,
        Column::UserDisplayName,
        Column::UserScreenName,
        Column::UserProfileDescription,
        Column::FollowerCount,
        Column::FollowingCount,
        Column::AccountCreationDate,
        Column::TweetTime,
        Column::TweetText,
        Column::IsRetweet,
        Column::RetweetUserId,
        Column::InReplyToUserId,
        Column::QuotedTweetTweetId,
        Column::UserMentions,
        Column::Hashtags,
        Column::Urls,
        Column::TweetLanguage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::TweetId => "tweetid",
            Column::UserId => "userid",
            Column::UserDisplayName => "user_display_name",
            Column::UserScreenName => "user_screen_name",
            Column::UserProfileDescription => "user_profile_description",
            Column::FollowerCount => "follower_count",
            Column::FollowingCount => "following_count",
            Column::AccountCreationDate => "account_creation_date",
            Column::TweetTime => "tweet_time",
            Column::TweetText => "tweet_text",
            Column::IsRetweet => "is_retweet",
            Column::RetweetUserId => "retweet_userid",
            Column::InReplyToUserId => "in_reply_to_userid",
            Column::QuotedTweetTweetId => "quoted_tweet_tweetid",
            Column::UserMentions => "user_mentions",
            Column::Hashtags => "hashtags",
            Column::Urls => "urls",
            Column::TweetLanguage => "tweet_language",
            Column::AccountLanguage => "account_language",
        }
    }

    fn from_name(name: &str) -> Option<Column> {
        Column::REQUIRED
            .iter()
            .chain(std::iter::once(&Column::AccountLanguage))
            .copied()
            .find(|c| c.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }
}

const COLUMN_COUNT: usize = 19;

/// Declared column set of an archive. Columns in `ignored` are accepted in
/// the header and skipped; anything else outside the known vocabulary fails
/// header validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveSchema {
    pub ignored: Vec<String>,
}

impl Default for ArchiveSchema {
    fn default() -> Self {
        Self::strict()
    }
}

impl ArchiveSchema {
    /// Only the known columns.
    pub fn strict() -> Self {
        Self { ignored: Vec::new() }
    }

    /// Known columns plus the remaining columns published in platform
    /// information-operations archives.
    pub fn platform_archive() -> Self {
        let ignored = [
            "user_reported_location",
            "user_profile_url",
            "in_reply_to_tweetid",
            "quoted_tweet_userid",
            "retweet_tweetid",
            "latitude",
            "longitude",
            "quote_count",
            "reply_count",
            "like_count",
            "retweet_count",
            "poll_choices",
            "tweet_client_name",
        ];
        Self { ignored: ignored.iter().map(|s| s.to_string()).collect() }
    }

    /// Maps header names to column slots, rejecting unknown and missing columns.
    fn bind(&self, header: &[&str]) -> Result<[Option<usize>; COLUMN_COUNT], IngestError> {
        let mut slots = [None; COLUMN_COUNT];
        for (pos, raw) in header.iter().enumerate() {
            let name = raw.trim().trim_start_matches('\u{feff}');
            match Column::from_name(name) {
                Some(col) => slots[col.index()] = Some(pos),
                None if self.ignored.iter().any(|i| i == name) => {}
                None => return Err(IngestError::UnknownColumn(name.to_string())),
            }
        }
        for col in Column::REQUIRED {
            if slots[col.index()].is_none() {
                return Err(IngestError::MissingColumn(col.name().to_string()));
            }
        }
        Ok(slots)
    }
}

/// A row that could not be converted. `row` is the 1-based line number in
/// the source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub row: u64,
    pub reason: String,
}

/// Counters for one parsed source.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub tweets_accepted: u64,
    pub users: u64,
    /// Same user id seen with differing profile fields; last row wins.
    pub user_conflicts: u64,
    pub rejections: Vec<Rejection>,
}

impl IngestReport {
    pub fn rejected(&self) -> u64 {
        self.rejections.len() as u64
    }

    pub fn reject_rate(&self) -> f64 {
        if self.rows_read == 0 {
            0.0
        } else {
            self.rejected() as f64 / self.rows_read as f64
        }
    }

    /// Fails when more than `max_rate` of the rows were rejected.
    pub fn check_reject_rate(&self, max_rate: f64) -> Result<(), IngestError> {
        if self.reject_rate() > max_rate {
            return Err(IngestError::TooManyRejections {
                rejected: self.rejected(),
                rows: self.rows_read,
                max_rate,
            });
        }
        Ok(())
    }
}

/// Users (deduplicated, in order of first appearance), tweets and counters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParsedArchive {
    pub users: Vec<UserRecord>,
    pub tweets: Vec<TweetRecord>,
    pub report: IngestReport,
}

/// Accessor over one raw row, independent of the file format.
trait RawRow {
    fn text(&self, col: Column) -> Option<&str>;
    fn list(&self, col: Column) -> Result<Option<Vec<String>>, String>;
}

struct CsvRow<'a> {
    record: &'a csv::StringRecord,
    slots: &'a [Option<usize>; COLUMN_COUNT],
}

impl RawRow for CsvRow<'_> {
    fn text(&self, col: Column) -> Option<&str> {
        let pos = self.slots[col.index()]?;
        self.record.get(pos).filter(|s| !s.is_empty())
    }

    fn list(&self, col: Column) -> Result<Option<Vec<String>>, String> {
        self.text(col).map(parse_bracketed_list).transpose()
    }
}

struct JsonRow<'a> {
    object: &'a serde_json::Map<String, Value>,
    scratch: HashMap<Column, String>,
}

impl<'a> JsonRow<'a> {
    fn new(object: &'a serde_json::Map<String, Value>) -> Result<Self, String> {
        let mut scratch = HashMap::new();
        for (key, value) in object {
            let col = Column::from_name(key).ok_or_else(|| format!("unknown field `{key}`"))?;
            let rendered = match value {
                Value::Null => continue,
                Value::String(s) => s.clone(),
                Value::Bool(b) => b.to_string(),
                Value::Number(n) => n.to_string(),
                // list columns are read through `list`
                Value::Array(_) => continue,
                Value::Object(_) => return Err(format!("field `{key}` is an object")),
            };
            if !rendered.is_empty() {
                scratch.insert(col, rendered);
            }
        }
        Ok(Self { object, scratch })
    }
}

impl RawRow for JsonRow<'_> {
    fn text(&self, col: Column) -> Option<&str> {
        self.scratch.get(&col).map(String::as_str)
    }

    fn list(&self, col: Column) -> Result<Option<Vec<String>>, String> {
        match self.object.get(col.name()) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    other => Err(format!("`{}` holds non-scalar item {other}", col.name())),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(Value::String(s)) if s.is_empty() => Ok(None),
            Some(Value::String(s)) => parse_bracketed_list(s).map(Some),
            Some(other) => Err(format!("`{}` is not a list: {other}", col.name())),
        }
    }
}

/// Parses `[a, b]`, `['a', 'b']` or `[]`.
pub fn parse_bracketed_list(raw: &str) -> Result<Vec<String>, String> {
    let inner = raw
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| format!("expected bracketed list, got `{raw}`"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    Ok(inner
        .split(',')
        .map(|item| item.trim().trim_matches(|c| c == '\'' || c == '"').to_string())
        .filter(|s| !s.is_empty())
        .collect())
}

pub fn format_bracketed_list(items: &[String]) -> String {
    format!("[{}]", items.join(", "))
}

fn parse_bool(raw: Option<&str>) -> Result<bool, String> {
    match raw.map(|s| s.trim().to_ascii_lowercase()) {
        None => Ok(false),
        Some(s) if s == "true" || s == "1" => Ok(true),
        Some(s) if s == "false" || s == "0" => Ok(false),
        Some(s) => Err(format!("invalid boolean `{s}`")),
    }
}

fn parse_count(raw: Option<&str>, col: Column) -> Result<u64, String> {
    let raw = raw.ok_or_else(|| format!("missing {}", col.name()))?;
    raw.trim()
        .parse::<u64>()
        .map_err(|_| format!("invalid {} `{raw}`", col.name()))
}

/// Accepts `YYYY-MM-DD` or any timestamp form accepted by [`parse_timestamp`]
/// (its date part is used).
pub fn parse_date(raw: &str) -> Result<NaiveDate, String> {
    let raw = raw.trim();
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .or_else(|_| parse_timestamp(raw).map(|t| t.date_naive()))
        .map_err(|_| format!("invalid date `{raw}`"))
}

/// UTC timestamps; date-only values get midnight.
pub fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>, String> {
    let raw = raw.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(t.and_utc());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Ok(d.and_time(NaiveTime::MIN).and_utc());
    }
    Err(format!("invalid timestamp `{raw}`"))
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format("%Y-%m-%d %H:%M:%S").to_string()
}

/// Archives replace identifying fields of small accounts with the hashed
/// user id, or with a bare SHA-256 hex digest.
fn is_hashed(value: &str, user_id: &str) -> bool {
    let hex_digest = value.len() == 64 && value.bytes().all(|b| b.is_ascii_hexdigit());
    let echoes_hashed_id = value == user_id && !user_id.bytes().all(|b| b.is_ascii_digit());
    hex_digest || echoes_hashed_id
}

fn identity_field(row: &dyn RawRow, col: Column, user_id: &str) -> Option<String> {
    row.text(col).filter(|v| !is_hashed(v, user_id)).map(str::to_string)
}

fn convert_row(row: &dyn RawRow, corpus: Corpus) -> Result<(UserRecord, TweetRecord), String> {
    let user_id = row.text(Column::UserId).ok_or("missing userid")?.trim().to_string();
    let tweet_id = row.text(Column::TweetId).ok_or("missing tweetid")?.trim().to_string();

    let user = UserRecord {
        screen_name: identity_field(row, Column::UserScreenName, &user_id),
        display_name: identity_field(row, Column::UserDisplayName, &user_id),
        profile_description: row.text(Column::UserProfileDescription).map(str::to_string),
        follower_count: parse_count(row.text(Column::FollowerCount), Column::FollowerCount)?,
        following_count: parse_count(row.text(Column::FollowingCount), Column::FollowingCount)?,
        account_creation_date: parse_date(
            row.text(Column::AccountCreationDate).ok_or("missing account_creation_date")?,
        )?,
        account_language: row.text(Column::AccountLanguage).map(str::to_string),
        corpus,
        suspension_status: SuspensionStatus::Unknown,
        user_id,
    };
    user.validate()?;

    let text = row.text(Column::TweetText).unwrap_or_default().to_string();
    let is_retweet = parse_bool(row.text(Column::IsRetweet))?;
    let retweeted_user_id = row.text(Column::RetweetUserId).map(str::to_string);
    let replied_to_user_id = row.text(Column::InReplyToUserId).map(str::to_string);
    let quoted_tweet_id = row.text(Column::QuotedTweetTweetId).map(str::to_string);
    let kind = if is_retweet {
        TweetKind::Retweet
    } else if replied_to_user_id.is_some() {
        TweetKind::Reply
    } else if quoted_tweet_id.is_some() {
        TweetKind::Quote
    } else {
        TweetKind::Original
    };

    let (target_user_ids, mention_handles) = match row.list(Column::UserMentions)? {
        Some(ids) => (ids, Vec::new()),
        None => (Vec::new(), scan_mentions(&text)),
    };

    let tweet = TweetRecord {
        tweet_id,
        author_id: user.user_id.clone(),
        timestamp: parse_timestamp(row.text(Column::TweetTime).ok_or("missing tweet_time")?)?,
        kind,
        target_user_ids,
        mention_handles,
        retweeted_user_id,
        replied_to_user_id,
        quoted_tweet_id,
        quoted_user_id: None,
        hashtags: row
            .list(Column::Hashtags)?
            .unwrap_or_default()
            .iter()
            .map(|h| normalize_hashtag(h))
            .filter(|h| !h.is_empty())
            .collect(),
        urls: row.list(Column::Urls)?.unwrap_or_default(),
        language: row.text(Column::TweetLanguage).map(str::to_string),
        text,
    };
    tweet.validate()?;
    Ok((user, tweet))
}

/// Outcome of one data row.
pub type RowResult = Result<(UserRecord, TweetRecord), Rejection>;

/// Streaming reader over a takedown CSV.
pub struct CsvArchiveReader<R: Read> {
    reader: csv::Reader<R>,
    slots: [Option<usize>; COLUMN_COUNT],
    width: usize,
    corpus: Corpus,
    record: csv::StringRecord,
}

impl<R: Read> CsvArchiveReader<R> {
    pub fn new(source: R, schema: &ArchiveSchema, corpus: Corpus) -> Result<Self, IngestError> {
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
        let header = reader.headers().map_err(|e| IngestError::Header(e.to_string()))?.clone();
        let names: Vec<&str> = header.iter().collect();
        let slots = schema.bind(&names)?;
        Ok(Self { reader, slots, width: names.len(), corpus, record: csv::StringRecord::new() })
    }
}

impl<R: Read> Iterator for CsvArchiveReader<R> {
    type Item = RowResult;

    fn next(&mut self) -> Option<RowResult> {
        let line = self.reader.position().line() + 1;
        match self.reader.read_record(&mut self.record) {
            Ok(false) => None,
            Err(e) => {
                // the csv reader resynchronises at the next record
                let row = e.position().map(|p| p.line()).unwrap_or(line);
                Some(Err(Rejection { row, reason: e.to_string() }))
            }
            Ok(true) => {
                let row = self.record.position().map(|p| p.line()).unwrap_or(line);
                if self.record.len() != self.width {
                    return Some(Err(Rejection {
                        row,
                        reason: format!("expected {} fields, found {}", self.width, self.record.len()),
                    }));
                }
                let raw = CsvRow { record: &self.record, slots: &self.slots };
                Some(convert_row(&raw, self.corpus).map_err(|reason| Rejection { row, reason }))
            }
        }
    }
}

/// Streaming reader over a JSON-lines corpus (one tweet object per line,
/// field names as in the CSV header). Blank lines are skipped.
pub struct JsonlCorpusReader<R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: u64,
    corpus: Corpus,
}

impl<R: BufRead> JsonlCorpusReader<R> {
    pub fn new(source: R, corpus: Corpus) -> Self {
        Self { lines: source.lines(), line_no: 0, corpus }
    }
}

impl<R: BufRead> Iterator for JsonlCorpusReader<R> {
    type Item = RowResult;

    fn next(&mut self) -> Option<RowResult> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            let row = self.line_no;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(Rejection { row, reason: e.to_string() })),
            };
            if line.trim().is_empty() {
                continue;
            }
            let reject = |reason: String| Some(Err(Rejection { row, reason }));
            let value: Value = match serde_json::from_str(&line) {
                Ok(v) => v,
                Err(e) => return reject(format!("invalid json: {e}")),
            };
            let Value::Object(object) = value else {
                return reject("line is not a json object".into());
            };
            let raw = match JsonRow::new(&object) {
                Ok(r) => r,
                Err(reason) => return reject(reason),
            };
            return Some(convert_row(&raw, self.corpus).map_err(|reason| Rejection { row, reason }));
        }
    }
}

/// Collects a row stream into deduplicated users and tweets.
pub fn collect_rows(rows: impl Iterator<Item = RowResult>) -> ParsedArchive {
    let mut out = ParsedArchive::default();
    let mut user_pos: HashMap<String, usize> = HashMap::new();
    for result in rows {
        out.report.rows_read += 1;
        match result {
            Ok((user, tweet)) => {
                match user_pos.get(&user.user_id) {
                    Some(&i) => {
                        if out.users[i] != user {
                            debug!("user {} changed between rows; keeping latest", user.user_id);
                            out.report.user_conflicts += 1;
                            out.users[i] = user;
                        }
                    }
                    None => {
                        user_pos.insert(user.user_id.clone(), out.users.len());
                        out.users.push(user);
                    }
                }
                out.tweets.push(tweet);
            }
            Err(rejection) => {
                debug!("row {} rejected: {}", rejection.row, rejection.reason);
                out.report.rejections.push(rejection);
            }
        }
    }
    out.report.tweets_accepted = out.tweets.len() as u64;
    out.report.users = out.users.len() as u64;
    resolve_quoted_authors(&mut out.tweets);
    out
}

/// Fills `quoted_user_id` for quotes whose quoted tweet is in `tweets`.
pub fn resolve_quoted_authors(tweets: &mut [TweetRecord]) {
    let authors: HashMap<String, String> =
        tweets.iter().map(|t| (t.tweet_id.clone(), t.author_id.clone())).collect();
    for tweet in tweets.iter_mut() {
        if let Some(quoted) = &tweet.quoted_tweet_id {
            if let Some(author) = authors.get(quoted) {
                tweet.quoted_user_id = Some(author.clone());
            }
        }
    }
}

pub fn parse_takedown_archive(
    path: &Path,
    schema: &ArchiveSchema,
    corpus: Corpus,
) -> Result<ParsedArchive, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    let reader = CsvArchiveReader::new(BufReader::new(file), schema, corpus)?;
    Ok(collect_rows(reader))
}

pub fn parse_jsonl_corpus(path: &Path, corpus: Corpus) -> Result<ParsedArchive, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    Ok(collect_rows(JsonlCorpusReader::new(BufReader::new(file), corpus)))
}

/// Picks the reader from the file extension (`.jsonl` / `.json` → JSON-lines,
/// anything else → CSV).
pub fn parse_corpus_file(
    path: &Path,
    schema: &ArchiveSchema,
    corpus: Corpus,
) -> Result<ParsedArchive, IngestError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") | Some("ndjson") => parse_jsonl_corpus(path, corpus),
        _ => parse_takedown_archive(path, schema, corpus),
    }
}

/// Writes tweets back out in archive CSV layout, one row per tweet, joining
/// each tweet to its author in `users`. Hashed identities are written as
/// the hex SHA-256 of the user id, which the reader suppresses again.
pub fn write_archive_csv<W: Write>(
    out: W,
    users: &[UserRecord],
    tweets: &[TweetRecord],
) -> Result<(), IngestError> {
    let by_id: HashMap<&str, &UserRecord> = users.iter().map(|u| (u.user_id.as_str(), u)).collect();
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = Column::REQUIRED.iter().map(|c| c.name()).collect();
    header.push(Column::AccountLanguage.name());
    writer.write_record(&header)?;
    for tweet in tweets {
        let user = by_id
            .get(tweet.author_id.as_str())
            .ok_or_else(|| IngestError::Header(format!("tweet {} has no author record", tweet.tweet_id)))?;
        let mentions = if tweet.target_user_ids.is_empty() && !tweet.mention_handles.is_empty() {
            String::new()
        } else {
            format_bracketed_list(&tweet.target_user_ids)
        };
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        let identity = |v: &Option<String>| v.clone().unwrap_or_else(|| crate::pipeline::sha256_bytes(user.user_id.as_bytes()));
        writer.write_record([
            tweet.tweet_id.clone(),
            user.user_id.clone(),
            identity(&user.display_name),
            identity(&user.screen_name),
            opt(&user.profile_description),
            user.follower_count.to_string(),
            user.following_count.to_string(),
            user.account_creation_date.format("%Y-%m-%d").to_string(),
            format_timestamp(&tweet.timestamp),
            tweet.text.clone(),
            (tweet.kind == TweetKind::Retweet).to_string(),
            opt(&tweet.retweeted_user_id),
            opt(&tweet.replied_to_user_id),
            opt(&tweet.quoted_tweet_id),
            mentions,
            format_bracketed_list(&tweet.hashtags),
            format_bracketed_list(&tweet.urls),
            opt(&tweet.language),
            opt(&user.account_language),
        ])?;
    }
    writer.flush().map_err(|e| IngestError::Header(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "tweetid,userid,user_display_name,user_screen_name,user_profile_description,follower_count,following_count,account_creation_date,tweet_time,tweet_text,is_retweet,retweet_userid,in_reply_to_userid,quoted_tweet_tweetid,user_mentions,hashtags,urls,tweet_language";

    fn parse(body: &str) -> ParsedArchive {
        let data = format!("{HEADER}\n{body}");
        let reader = CsvArchiveReader::new(data.as_bytes(), &ArchiveSchema::strict(), Corpus::Takedown).unwrap();
        collect_rows(reader)
    }

    #[test]
    fn three_rows_two_users() {
        let parsed = parse(
            "1,10,Ali,ali,bio,5,6,2019-01-01,2020-01-02 10:00,hello,false,,,,[],[],[],tr\n\
             2,10,Ali,ali,bio,5,6,2019-01-01,2020-01-02 11:00,RT @veli: x,true,11,,,[11],[Gündem],[],tr\n\
             3,11,Veli,veli,,1,2,2020-02-01,2020-03-01 00:00:00,@ali selam,false,,10,,[10],[],[https://t.co/a],tr\n",
        );
        assert_eq!(parsed.users.len(), 2);
        assert_eq!(parsed.tweets.len(), 3);
        assert!(parsed.report.rejections.is_empty());
        assert_eq!(parsed.tweets[1].kind, TweetKind::Retweet);
        assert_eq!(parsed.tweets[1].hashtags, vec!["gündem"]);
        assert_eq!(parsed.tweets[2].kind, TweetKind::Reply);
        assert_eq!(parsed.users[1].profile_description, None);
    }

    #[test]
    fn retweet_without_target_is_rejected_not_fatal() {
        let parsed = parse(
            "1,10,Ali,ali,bio,5,6,2019-01-01,2020-01-02 10:00,hello,true,,,,[],[],[],tr\n\
             2,10,Ali,ali,bio,5,6,2019-01-01,2020-01-02 10:00,hello,false,,,,[],[],[],tr\n",
        );
        assert_eq!(parsed.tweets.len(), 1);
        assert_eq!(parsed.report.rejections.len(), 1);
        assert_eq!(parsed.report.rejections[0].row, 2);
        assert!(parsed.report.rejections[0].reason.contains("retweet"));
        assert_eq!(parsed.report.rows_read, 2);
    }

    #[test]
    fn unknown_column_is_a_header_error() {
        let data = format!("{HEADER},mystery\n");
        let err = CsvArchiveReader::new(data.as_bytes(), &ArchiveSchema::strict(), Corpus::Takedown)
            .err()
            .unwrap();
        assert!(matches!(err, IngestError::UnknownColumn(c) if c == "mystery"));
        let schema = ArchiveSchema { ignored: vec!["mystery".into()] };
        assert!(CsvArchiveReader::new(data.as_bytes(), &schema, Corpus::Takedown).is_ok());
    }

    #[test]
    fn missing_column_is_a_header_error() {
        let data = HEADER.replace(",tweet_language", "");
        let err = CsvArchiveReader::new(data.as_bytes(), &ArchiveSchema::strict(), Corpus::Takedown)
            .err()
            .unwrap();
        assert!(matches!(err, IngestError::MissingColumn(c) if c == "tweet_language"));
    }

    #[test]
    fn hashed_identities_become_absent() {
        let hashed = "a".repeat(64);
        let parsed = parse(&format!(
            "1,{hashed},{hashed},{hashed},bio,5,6,2019-01-01,2020-01-02 10:00,hi,false,,,,[],[],[],tr\n\
             2,ZmFrZWhhc2g=,ZmFrZWhhc2g=,ZmFrZWhhc2g=,,5,6,2019-01-01,2020-01-02 10:00,hi,false,,,,[],[],[],tr\n"
        ));
        assert_eq!(parsed.users.len(), 2);
        for u in &parsed.users {
            assert_eq!(u.screen_name, None);
            assert_eq!(u.display_name, None);
        }
    }

    #[test]
    fn malformed_rows_carry_reasons() {
        let parsed = parse(
            "1,10,Ali,ali,bio,x,6,2019-01-01,2020-01-02 10:00,hi,false,,,,[],[],[],tr\n\
             2,10,Ali,ali,bio,5,6,2019-13-01,2020-01-02 10:00,hi,false,,,,[],[],[],tr\n\
             3,10,Ali,ali,bio,5,6,2019-01-01,2020-01-02 10:00,hi,maybe,,,,[],[],[],tr\n\
             4,10,Ali,ali,bio,5,6,2019-01-01,2020-01-02 10:00,hi,false,,,,1 2,[],[],tr\n\
             5,10,Ali\n",
        );
        assert_eq!(parsed.tweets.len(), 0);
        let rows: Vec<u64> = parsed.report.rejections.iter().map(|r| r.row).collect();
        assert_eq!(rows, vec![2, 3, 4, 5, 6]);
        assert!(parsed.report.check_reject_rate(0.01).is_err());
    }

    #[test]
    fn text_mentions_used_when_column_empty() {
        let parsed = parse("1,10,Ali,ali,,5,6,2019-01-01,2020-01-02 10:00,@Veli @x_1 hi,false,,,,,[],[],tr\n");
        assert!(parsed.tweets[0].target_user_ids.is_empty());
        assert_eq!(parsed.tweets[0].mention_handles, vec!["veli", "x_1"]);
    }

    #[test]
    fn quotes_resolve_to_author() {
        let parsed = parse(
            "1,10,Ali,ali,,5,6,2019-01-01,2020-01-02 10:00,hi,false,,,,[],[],[],tr\n\
             2,11,Veli,veli,,5,6,2019-01-01,2020-01-02 10:00,look,false,,,1,[],[],[],tr\n\
             3,11,Veli,veli,,5,6,2019-01-01,2020-01-02 10:00,look,false,,,999,[],[],[],tr\n",
        );
        assert_eq!(parsed.tweets[1].kind, TweetKind::Quote);
        assert_eq!(parsed.tweets[1].quoted_user_id.as_deref(), Some("10"));
        assert_eq!(parsed.tweets[2].quoted_user_id, None);
    }

    #[test]
    fn jsonl_rows_accept_arrays_and_scalars() {
        let data = r##"{"tweetid": 1, "userid": "10", "user_display_name": "Ali", "user_screen_name": "ali", "user_profile_description": null, "follower_count": 5, "following_count": 6, "account_creation_date": "2020-02-01", "tweet_time": "2020-03-01T10:00:00Z", "tweet_text": "hi", "is_retweet": true, "retweet_userid": "11", "user_mentions": ["11"], "hashtags": ["#Milli"], "urls": []}

{"tweetid": 2, "bogus": 1}
not json
"##;
        let parsed = collect_rows(JsonlCorpusReader::new(data.as_bytes(), Corpus::Live));
        assert_eq!(parsed.tweets.len(), 1);
        assert_eq!(parsed.tweets[0].hashtags, vec!["milli"]);
        assert_eq!(parsed.users[0].corpus, Corpus::Live);
        let rows: Vec<u64> = parsed.report.rejections.iter().map(|r| r.row).collect();
        assert_eq!(rows, vec![3, 4]);
    }

    #[test]
    fn date_only_timestamps_get_midnight() {
        let t = parse_timestamp("2020-01-05").unwrap();
        assert_eq!(format_timestamp(&t), "2020-01-05 00:00:00");
        assert_eq!(parse_date("2020-01-05 13:00").unwrap(), NaiveDate::from_ymd_opt(2020, 1, 5).unwrap());
    }
}
