//! Trace parsing, fixed-window partitioning and commenter pre-filtering.
//!
//! A trace is a flat list of comment events. Records are grouped into
//! weekly snapshots (window length, anchor weekday and UTC offset are all
//! configurable) and each snapshot drops commenters who were active on a
//! single post only, since those reflect sporadic behavior rather than
//! discussion.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const SECS_PER_DAY: i64 = 86_400;

/// One comment event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RecordWire", into = "RecordWire")]
pub struct InteractionRecord {
    pub commenter: String,
    pub influencer: String,
    pub post: String,
    /// Unix seconds, UTC.
    pub timestamp: i64,
    pub text: Option<String>,
    pub is_reply: Option<bool>,
    /// Pre-scored sentiment in [-4, 4].
    pub sentiment: Option<i8>,
}

/// Wire shape shared by JSONL input and snapshot export.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RecordWire {
    commenter: String,
    influencer: String,
    post: String,
    ts: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    is_reply: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sentiment: Option<i8>,
}

impl TryFrom<RecordWire> for InteractionRecord {
    type Error = String;

    fn try_from(wire: RecordWire) -> std::result::Result<Self, String> {
        if wire.commenter.is_empty() || wire.influencer.is_empty() || wire.post.is_empty() {
            return Err("commenter, influencer and post must be non-empty".into());
        }
        if let Some(s) = wire.sentiment {
            if !(-4..=4).contains(&s) {
                return Err(format!("sentiment {s} outside [-4, 4]"));
            }
        }
        let timestamp = DateTime::parse_from_rfc3339(&wire.ts)
            .map_err(|e| format!("bad timestamp {:?}: {e}", wire.ts))?
            .timestamp();
        Ok(InteractionRecord {
            commenter: wire.commenter,
            influencer: wire.influencer,
            post: wire.post,
            timestamp,
            text: wire.text,
            is_reply: wire.is_reply,
            sentiment: wire.sentiment,
        })
    }
}

impl From<InteractionRecord> for RecordWire {
    fn from(rec: InteractionRecord) -> Self {
        RecordWire {
            commenter: rec.commenter,
            influencer: rec.influencer,
            post: rec.post,
            ts: format_ts(rec.timestamp),
            text: rec.text,
            is_reply: rec.is_reply,
            sentiment: rec.sentiment,
        }
    }
}

pub(crate) fn format_ts(timestamp: i64) -> String {
    Utc.timestamp_opt(timestamp, 0)
        .single()
        .map(|dt| dt.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| timestamp.to_string())
}

/// Weekday on which windows start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weekday {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl Weekday {
    fn days_from_monday(self) -> i64 {
        match self {
            Weekday::Monday => 0,
            Weekday::Tuesday => 1,
            Weekday::Wednesday => 2,
            Weekday::Thursday => 3,
            Weekday::Friday => 4,
            Weekday::Saturday => 5,
            Weekday::Sunday => 6,
        }
    }
}

impl std::str::FromStr for Weekday {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mon" | "monday" => Ok(Weekday::Monday),
            "tue" | "tuesday" => Ok(Weekday::Tuesday),
            "wed" | "wednesday" => Ok(Weekday::Wednesday),
            "thu" | "thursday" => Ok(Weekday::Thursday),
            "fri" | "friday" => Ok(Weekday::Friday),
            "sat" | "saturday" => Ok(Weekday::Saturday),
            "sun" | "sunday" => Ok(Weekday::Sunday),
            other => Err(Error::config(format!("unknown weekday {other:?}"))),
        }
    }
}

/// Fixed time-window specification. Defaults to Monday-anchored weeks in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_secs: i64,
    pub anchor: Weekday,
    pub utc_offset_secs: i32,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            window_secs: 7 * SECS_PER_DAY,
            anchor: Weekday::Monday,
            utc_offset_secs: 0,
        }
    }
}

impl WindowSpec {
    pub fn with_days(days: i64) -> Self {
        WindowSpec {
            window_secs: days * SECS_PER_DAY,
            ..WindowSpec::default()
        }
    }

    /// Absolute index of the window containing `timestamp`. Windows start at
    /// midnight of the anchor weekday in the configured offset; 1970-01-01
    /// was a Thursday, which pins the grid.
    fn absolute_window(&self, timestamp: i64) -> i64 {
        let local = timestamp + i64::from(self.utc_offset_secs);
        let origin = (4 + self.anchor.days_from_monday()) * SECS_PER_DAY;
        (local - origin).div_euclid(self.window_secs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_secs <= 0 {
            return Err(Error::config("window length must be positive"));
        }
        Ok(())
    }
}

/// All posts and commenter sets of one time window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub window_index: u32,
    /// post id -> influencer id.
    pub posts: BTreeMap<String, String>,
    /// post id -> unique commenters on that post.
    pub commenters_per_post: BTreeMap<String, BTreeSet<String>>,
    /// influencer id -> posts attributed to them.
    pub posts_by_influencer: BTreeMap<String, BTreeSet<String>>,
    /// Records retained in this window, in input order.
    pub comments: Vec<InteractionRecord>,
}

impl Snapshot {
    /// Sorted list of distinct commenters; the canonical vertex dictionary
    /// shared by the projection graph and the engagement table.
    pub fn commenter_index(&self) -> Vec<String> {
        let mut set = BTreeSet::new();
        for commenters in self.commenters_per_post.values() {
            for c in commenters {
                set.insert(c.clone());
            }
        }
        set.into_iter().collect()
    }

    pub fn post_count(&self) -> usize {
        self.posts.len()
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("snapshot serializes");
        out.push('\n');
        out
    }

    pub fn from_json(data: &str) -> Result<Snapshot> {
        serde_json::from_str(data).map_err(|e| Error::invalid(format!("bad snapshot json: {e}")))
    }
}

/// Input trace encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(TraceFormat::Jsonl),
            "csv" => Ok(TraceFormat::Csv),
            other => Err(Error::config(format!("unknown trace format {other:?}"))),
        }
    }
}

/// Parse result. Malformed lines are counted, never silently dropped.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub records: Vec<InteractionRecord>,
    pub malformed: usize,
    /// 1-based line number and message of the first malformed line.
    pub first_error: Option<(usize, String)>,
}

/// Parse a byte stream of interaction records.
///
/// In lenient mode malformed lines are counted and reported via the outcome;
/// with `strict` any malformed line aborts with the first offending line
/// number.
pub fn parse_records(
    reader: impl BufRead,
    format: TraceFormat,
    strict: bool,
) -> Result<ParseOutcome> {
    let outcome = match format {
        TraceFormat::Jsonl => parse_jsonl(reader)?,
        TraceFormat::Csv => parse_csv(reader)?,
    };
    if strict && outcome.malformed > 0 {
        let (line, message) = outcome.first_error.expect("malformed implies first_error");
        return Err(Error::Parse { line, message });
    }
    Ok(outcome)
}

fn parse_jsonl(reader: impl BufRead) -> Result<ParseOutcome> {
    let mut outcome = ParseOutcome::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<InteractionRecord>(&line) {
            Ok(rec) => outcome.records.push(rec),
            Err(e) => {
                outcome.malformed += 1;
                outcome
                    .first_error
                    .get_or_insert_with(|| (idx + 1, e.to_string()));
            }
        }
    }
    Ok(outcome)
}

fn parse_csv(reader: impl BufRead) -> Result<ParseOutcome> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: format!("unreadable csv header: {e}"),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required = |name: &str| {
        col(name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("csv header is missing required column {name:?}"),
        })
    };
    let c_commenter = required("commenter")?;
    let c_influencer = required("influencer")?;
    let c_post = required("post")?;
    let c_ts = required("ts")?;
    let c_text = col("text");
    let c_is_reply = col("is_reply");
    let c_sentiment = col("sentiment");

    let mut outcome = ParseOutcome::default();
    for row in csv_reader.records() {
        match row {
            Ok(record) => {
                let line = record
                    .position()
                    .map(|p| p.line() as usize)
                    .unwrap_or(outcome.records.len() + outcome.malformed + 2);
                match csv_row_to_record(
                    &record,
                    (c_commenter, c_influencer, c_post, c_ts),
                    (c_text, c_is_reply, c_sentiment),
                ) {
                    Ok(rec) => outcome.records.push(rec),
                    Err(message) => {
                        outcome.malformed += 1;
                        outcome.first_error.get_or_insert((line, message));
                    }
                }
            }
            Err(e) => {
                let line = e
                    .position()
                    .map(|p| p.line() as usize)
                    .unwrap_or(outcome.records.len() + outcome.malformed + 2);
                outcome.malformed += 1;
                outcome.first_error.get_or_insert((line, e.to_string()));
            }
        }
    }
    Ok(outcome)
}

fn csv_row_to_record(
    row: &csv::StringRecord,
    required: (usize, usize, usize, usize),
    optional: (Option<usize>, Option<usize>, Option<usize>),
) -> std::result::Result<InteractionRecord, String> {
    let field = |idx: usize| row.get(idx).unwrap_or("");
    let opt_field = |idx: Option<usize>| idx.map(field).filter(|v| !v.is_empty());

    let is_reply = match opt_field(optional.1) {
        None => None,
        Some(v) => match v.to_ascii_lowercase().as_str() {
            "true" | "1" => Some(true),
            "false" | "0" => Some(false),
            other => return Err(format!("bad is_reply value {other:?}")),
        },
    };
    let sentiment = match opt_field(optional.2) {
        None => None,
        Some(v) => Some(
            v.parse::<i8>()
                .map_err(|e| format!("bad sentiment {v:?}: {e}"))?,
        ),
    };
    let wire = RecordWire {
        commenter: field(required.0).to_string(),
        influencer: field(required.1).to_string(),
        post: field(required.2).to_string(),
        ts: field(required.3).to_string(),
        text: opt_field(optional.0).map(str::to_string),
        is_reply,
        sentiment,
    };
    wire.try_into()
}

/// Assign each record to its window and build per-window snapshots.
///
/// Windows are indexed 1..n in chronological order and empty windows are
/// omitted. A post attributed to two different influencers is invalid input.
pub fn window_partition(records: &[InteractionRecord], spec: &WindowSpec) -> Result<Vec<Snapshot>> {
    spec.validate()?;
    let mut windows: BTreeMap<i64, Vec<&InteractionRecord>> = BTreeMap::new();
    for rec in records {
        windows
            .entry(spec.absolute_window(rec.timestamp))
            .or_default()
            .push(rec);
    }

    let mut snapshots = Vec::with_capacity(windows.len());
    for (index, (_abs, recs)) in windows.into_iter().enumerate() {
        let mut snapshot = Snapshot {
            window_index: (index + 1) as u32,
            posts: BTreeMap::new(),
            commenters_per_post: BTreeMap::new(),
            posts_by_influencer: BTreeMap::new(),
            comments: Vec::with_capacity(recs.len()),
        };
        for rec in recs {
            match snapshot.posts.get(&rec.post) {
                Some(existing) if existing != &rec.influencer => {
                    return Err(Error::invalid(format!(
                        "post {:?} attributed to both {:?} and {:?}",
                        rec.post, existing, rec.influencer
                    )));
                }
                Some(_) => {}
                None => {
                    snapshot
                        .posts
                        .insert(rec.post.clone(), rec.influencer.clone());
                    snapshot
                        .posts_by_influencer
                        .entry(rec.influencer.clone())
                        .or_default()
                        .insert(rec.post.clone());
                }
            }
            snapshot
                .commenters_per_post
                .entry(rec.post.clone())
                .or_default()
                .insert(rec.commenter.clone());
            snapshot.comments.push(rec.clone());
        }
        snapshots.push(snapshot);
    }
    Ok(snapshots)
}

/// Remove commenters present in a single post only.
///
/// Applied once, not iterated to a fixed point: commenter membership counts
/// come from the unfiltered snapshot. Posts whose commenter set becomes
/// empty are dropped, as are influencers left without posts.
pub fn filter_single_post_commenters(snapshot: &Snapshot) -> Snapshot {
    let mut posts_per_commenter: BTreeMap<&str, usize> = BTreeMap::new();
    for commenters in snapshot.commenters_per_post.values() {
        for c in commenters {
            *posts_per_commenter.entry(c).or_default() += 1;
        }
    }
    let keep =
        |c: &str| posts_per_commenter.get(c).copied().unwrap_or(0) >= 2;

    let mut commenters_per_post = BTreeMap::new();
    for (post, commenters) in &snapshot.commenters_per_post {
        let kept: BTreeSet<String> = commenters
            .iter()
            .filter(|c| keep(c))
            .cloned()
            .collect();
        if !kept.is_empty() {
            commenters_per_post.insert(post.clone(), kept);
        }
    }

    let mut posts = BTreeMap::new();
    let mut posts_by_influencer: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for post in commenters_per_post.keys() {
        let influencer = snapshot.posts[post].clone();
        posts.insert(post.clone(), influencer.clone());
        posts_by_influencer
            .entry(influencer)
            .or_default()
            .insert(post.clone());
    }

    let comments = snapshot
        .comments
        .iter()
        .filter(|rec| keep(&rec.commenter) && commenters_per_post.contains_key(&rec.post))
        .cloned()
        .collect();

    Snapshot {
        window_index: snapshot.window_index,
        posts,
        commenters_per_post,
        posts_by_influencer,
        comments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn record(commenter: &str, post: &str, influencer: &str, ts: &str) -> InteractionRecord {
        InteractionRecord {
            commenter: commenter.into(),
            influencer: influencer.into(),
            post: post.into(),
            timestamp: DateTime::parse_from_rfc3339(ts).unwrap().timestamp(),
            text: None,
            is_reply: None,
            sentiment: None,
        }
    }

    #[test]
    fn parses_minimal_jsonl_line() {
        let input = r#"{"commenter":"c","influencer":"i","post":"p1","ts":"2018-09-03T10:00:00Z"}"#;
        let out = parse_records(Cursor::new(input), TraceFormat::Jsonl, true).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.malformed, 0);
        assert_eq!(out.records[0].commenter, "c");
        assert_eq!(out.records[0].text, None);
    }

    #[test]
    fn empty_stream_parses_to_nothing() {
        let out = parse_records(Cursor::new(""), TraceFormat::Jsonl, true).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.malformed, 0);
    }

    #[test]
    fn lenient_mode_counts_malformed_lines() {
        let input = concat!(
            r#"{"commenter":"a","influencer":"i","post":"p1","ts":"2018-09-03T10:00:00Z"}"#,
            "\n",
            "this is not json\n",
            r#"{"commenter":"b","influencer":"i","post":"p1","ts":"2018-09-03T11:00:00Z"}"#,
        );
        let out = parse_records(Cursor::new(input), TraceFormat::Jsonl, false).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.malformed, 1);
        assert_eq!(out.first_error.as_ref().unwrap().0, 2);
    }

    #[test]
    fn strict_mode_reports_first_bad_line() {
        let input = "not json\n";
        let err = parse_records(Cursor::new(input), TraceFormat::Jsonl, true).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_sentiment() {
        let input = r#"{"commenter":"c","influencer":"i","post":"p","ts":"2018-09-03T10:00:00Z","sentiment":7}"#;
        let out = parse_records(Cursor::new(input), TraceFormat::Jsonl, false).unwrap();
        assert_eq!(out.malformed, 1);
    }

    #[test]
    fn parses_csv_with_optional_fields() {
        let input = "commenter,influencer,post,ts,text,is_reply,sentiment\n\
                     a,i,p1,2018-09-03T10:00:00Z,\"ola, mundo\",true,3\n\
                     b,i,p1,2018-09-03T11:00:00Z,,,\n";
        let out = parse_records(Cursor::new(input), TraceFormat::Csv, true).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].text.as_deref(), Some("ola, mundo"));
        assert_eq!(out.records[0].is_reply, Some(true));
        assert_eq!(out.records[0].sentiment, Some(3));
        assert_eq!(out.records[1].text, None);
    }

    #[test]
    fn csv_missing_required_column_is_hard_error() {
        let input = "commenter,influencer,ts\na,i,2018-09-03T10:00:00Z\n";
        assert!(parse_records(Cursor::new(input), TraceFormat::Csv, false).is_err());
    }

    #[test]
    fn monday_to_sunday_shares_a_window() {
        let records = vec![
            record("a", "p1", "i", "2018-09-03T00:00:00Z"), // Monday
            record("b", "p2", "i", "2018-09-09T23:59:59Z"), // Sunday
        ];
        let snapshots = window_partition(&records, &WindowSpec::default()).unwrap();
        assert_eq!(snapshots.len(), 1);
        assert_eq!(snapshots[0].comments.len(), 2);
    }

    #[test]
    fn sunday_monday_boundary_splits_windows() {
        let records = vec![
            record("a", "p1", "i", "2018-09-09T12:00:00Z"), // Sunday
            record("b", "p2", "i", "2018-09-10T00:00:00Z"), // Monday
        ];
        let snapshots = window_partition(&records, &WindowSpec::default()).unwrap();
        assert_eq!(snapshots.len(), 2);
        assert_eq!(snapshots[0].window_index, 1);
        assert_eq!(snapshots[1].window_index, 2);
    }

    #[test]
    fn ten_weeks_yield_ten_snapshots_with_expected_counts() {
        // Week k (1-based) carries k records, all on its Wednesday.
        let mut records = Vec::new();
        for week in 0..10i64 {
            let ts = DateTime::parse_from_rfc3339("2018-09-05T12:00:00Z")
                .unwrap()
                .timestamp()
                + week * 7 * SECS_PER_DAY;
            for n in 0..=week {
                records.push(InteractionRecord {
                    commenter: format!("c{n}"),
                    influencer: "i".into(),
                    post: format!("w{week}p{n}"),
                    timestamp: ts,
                    text: None,
                    is_reply: None,
                    sentiment: None,
                });
            }
        }
        let snapshots = window_partition(&records, &WindowSpec::default()).unwrap();
        assert_eq!(snapshots.len(), 10);
        for (idx, snap) in snapshots.iter().enumerate() {
            assert_eq!(snap.window_index as usize, idx + 1);
            assert_eq!(snap.comments.len(), idx + 1);
        }
        let total: usize = snapshots.iter().map(|s| s.comments.len()).sum();
        assert_eq!(total, records.len());
    }

    #[test]
    fn conflicting_post_attribution_is_invalid() {
        let records = vec![
            record("a", "p1", "i", "2018-09-03T10:00:00Z"),
            record("b", "p1", "j", "2018-09-03T11:00:00Z"),
        ];
        assert!(window_partition(&records, &WindowSpec::default()).is_err());
    }

    #[test]
    fn filter_keeps_multi_post_commenters() {
        let records = vec![
            record("a", "p1", "i", "2018-09-03T10:00:00Z"),
            record("a", "p2", "i", "2018-09-03T11:00:00Z"),
            record("b", "p1", "i", "2018-09-03T12:00:00Z"),
            record("b", "p2", "i", "2018-09-03T13:00:00Z"),
        ];
        let snapshot = &window_partition(&records, &WindowSpec::default()).unwrap()[0];
        let filtered = filter_single_post_commenters(snapshot);
        assert_eq!(filtered.commenter_index(), vec!["a", "b"]);
        assert_eq!(filtered.comments.len(), 4);
    }

    #[test]
    fn repeat_comments_on_one_post_do_not_save_a_commenter() {
        // Five comments, all on the same post: a single C_p membership.
        let mut records: Vec<_> = (0..5)
            .map(|n| {
                let mut r = record("a", "p1", "i", "2018-09-03T10:00:00Z");
                r.timestamp += n;
                r
            })
            .collect();
        records.push(record("b", "p1", "i", "2018-09-03T10:00:00Z"));
        records.push(record("b", "p2", "i", "2018-09-03T10:00:00Z"));
        records.push(record("c", "p1", "i", "2018-09-03T10:00:00Z"));
        records.push(record("c", "p2", "i", "2018-09-03T10:00:00Z"));
        let snapshot = &window_partition(&records, &WindowSpec::default()).unwrap()[0];
        let filtered = filter_single_post_commenters(snapshot);
        assert!(!filtered.commenter_index().contains(&"a".to_string()));
        assert!(filtered.comments.iter().all(|r| r.commenter != "a"));
    }

    #[test]
    fn filter_fixture_ten_commenters_four_single_post() {
        // c0..c5 comment on two posts, s0..s3 on one each.
        let mut records = Vec::new();
        for n in 0..6 {
            records.push(record(&format!("c{n}"), "p1", "i", "2018-09-03T10:00:00Z"));
            records.push(record(&format!("c{n}"), "p2", "i", "2018-09-03T11:00:00Z"));
        }
        for n in 0..4 {
            records.push(record(&format!("s{n}"), "p1", "i", "2018-09-03T12:00:00Z"));
        }
        let snapshot = &window_partition(&records, &WindowSpec::default()).unwrap()[0];
        assert_eq!(snapshot.commenters_per_post["p1"].len(), 10);
        let filtered = filter_single_post_commenters(snapshot);
        assert_eq!(filtered.commenter_index().len(), 6);
        for commenters in filtered.commenters_per_post.values() {
            assert!(commenters.iter().all(|c| c.starts_with('c')));
        }
    }

    #[test]
    fn filtered_snapshot_satisfies_min_two_posts() {
        let records = vec![
            record("a", "p1", "i", "2018-09-03T10:00:00Z"),
            record("a", "p2", "i", "2018-09-03T11:00:00Z"),
            record("b", "p2", "i", "2018-09-03T12:00:00Z"),
            record("c", "p3", "j", "2018-09-03T13:00:00Z"),
        ];
        let snapshot = &window_partition(&records, &WindowSpec::default()).unwrap()[0];
        let filtered = filter_single_post_commenters(snapshot);
        let mut membership: BTreeMap<&str, usize> = BTreeMap::new();
        for commenters in filtered.commenters_per_post.values() {
            for c in commenters {
                *membership.entry(c).or_default() += 1;
            }
        }
        for (c, n) in membership {
            assert!(n >= 2, "commenter {c} appears in {n} posts");
        }
        // Posts left without commenters disappear along with their influencer.
        assert!(!filtered.posts.contains_key("p3"));
        assert!(!filtered.posts_by_influencer.contains_key("j"));
    }

    #[test]
    fn snapshot_roundtrips_through_json() {
        let records = vec![
            record("a", "p1", "i", "2018-09-03T10:00:00Z"),
            record("a", "p2", "i", "2018-09-03T11:00:00Z"),
            record("b", "p1", "i", "2018-09-03T12:00:00Z"),
            record("b", "p2", "i", "2018-09-03T13:00:00Z"),
        ];
        let snapshot = &window_partition(&records, &WindowSpec::default()).unwrap()[0];
        let json = snapshot.to_json();
        let parsed = Snapshot::from_json(&json).unwrap();
        assert_eq!(&parsed, snapshot);
        assert_eq!(parsed.to_json(), json);
    }

    #[test]
    fn anchor_weekday_moves_the_boundary() {
        let spec = WindowSpec {
            anchor: Weekday::Sunday,
            ..WindowSpec::default()
        };
        let records = vec![
            record("a", "p1", "i", "2018-09-08T12:00:00Z"), // Saturday
            record("b", "p2", "i", "2018-09-09T00:00:00Z"), // Sunday starts a new window
        ];
        let snapshots = window_partition(&records, &spec).unwrap();
        assert_eq!(snapshots.len(), 2);
    }
}
