//! Domain types shared by every module.
//!
//! Every type with an invariant is only constructible through a validating
//! constructor; serde deserialization goes through the same path.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::text;

/// Maximum tweet text length in Unicode scalar values.
pub const MAX_TEXT_CHARS: usize = 4000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("tweet_id must be non-empty")]
    EmptyTweetId,
    #[error("{0} must be non-empty")]
    EmptyField(&'static str),
    #[error("text exceeds {MAX_TEXT_CHARS} characters ({0})")]
    TextTooLong(usize),
    #[error("retweet_of must differ from tweet_id")]
    SelfRetweet,
    #[error("empty term")]
    EmptyTerm,
    #[error("invalid term {0:?}: hashtag and username terms must be a single word")]
    InvalidTerm(String),
    #[error("invalid profile id {0:?}: use 1-64 ASCII letters, digits, '-' or '_'")]
    InvalidProfileId(String),
    #[error("profile must track at least one term")]
    NoTerms,
    #[error("invalid time range: start {start} is after end {end}")]
    InvalidRange { start: DateTime<Utc>, end: DateTime<Utc> },
    #[error("crisis window must have start < end")]
    EmptyCrisisWindow,
    #[error("sentiment value {0} outside [-1, 1]")]
    SentimentOutOfRange(f64),
    #[error("sentiment with zero matched tokens must be 0")]
    ZeroHitNonZeroValue,
}

/// Half-open UTC time interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RangeRepr")]
pub struct TimeRange {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
}

#[derive(Deserialize)]
struct RangeRepr {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
}

impl TryFrom<RangeRepr> for TimeRange {
    type Error = ModelError;
    fn try_from(r: RangeRepr) -> Result<Self, Self::Error> {
        TimeRange::new(r.start, r.end)
    }
}

impl TimeRange {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self, ModelError> {
        if start > end {
            return Err(ModelError::InvalidRange { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.end
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }

    /// True when `other` lies entirely inside `self`.
    pub fn covers(&self, other: &TimeRange) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn intersect(&self, other: &TimeRange) -> TimeRange {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end).max(start);
        TimeRange { start, end }
    }
}

impl fmt::Display for TimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start.to_rfc3339(), self.end.to_rfc3339())
    }
}

/// Serializes timestamps as RFC 3339 with a `Z` suffix and second precision.
pub(crate) mod rfc3339 {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::Serializer;

    pub fn format(t: &DateTime<Utc>) -> String {
        t.to_rfc3339_opts(SecondsFormat::Secs, true)
    }

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(t))
    }

    pub mod option {
        use super::*;
        pub fn serialize<S: Serializer>(t: &Option<DateTime<Utc>>, s: S) -> Result<S::Ok, S::Error> {
            match t {
                Some(t) => s.serialize_str(&format(t)),
                None => s.serialize_none(),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Hashtag,
    Keyword,
    Username,
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TermKind::Hashtag => "hashtag",
            TermKind::Keyword => "keyword",
            TermKind::Username => "username",
        })
    }
}

/// A normalized tracked term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "TermRepr")]
pub struct TrackTerm {
    kind: TermKind,
    value: String,
}

#[derive(Deserialize)]
struct TermRepr {
    kind: TermKind,
    value: String,
}

impl TryFrom<TermRepr> for TrackTerm {
    type Error = ModelError;
    fn try_from(r: TermRepr) -> Result<Self, Self::Error> {
        normalize_term(r.kind, &r.value)
    }
}

/// Lowercases `raw` and strips the `#`/`@` sigil for hashtag/username terms.
/// Keywords keep inner whitespace (collapsed to single spaces) so phrases work.
pub fn normalize_term(kind: TermKind, raw: &str) -> Result<TrackTerm, ModelError> {
    let trimmed = raw.trim();
    let value = match kind {
        TermKind::Hashtag | TermKind::Username => {
            let sigil = if kind == TermKind::Hashtag { '#' } else { '@' };
            let bare = trimmed.trim_start_matches(sigil).to_lowercase();
            if bare.is_empty() {
                return Err(ModelError::EmptyTerm);
            }
            if !bare.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(ModelError::InvalidTerm(raw.to_owned()));
            }
            bare
        }
        TermKind::Keyword => {
            if text::tokenize(trimmed).is_empty() {
                return Err(ModelError::EmptyTerm);
            }
            trimmed.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
        }
    };
    Ok(TrackTerm { kind, value })
}

impl TrackTerm {
    pub fn new(kind: TermKind, raw: &str) -> Result<Self, ModelError> {
        normalize_term(kind, raw)
    }

    pub fn kind(&self) -> TermKind {
        self.kind
    }

    pub fn value(&self) -> &str {
        &self.value
    }
}

impl fmt::Display for TrackTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Hashtag => write!(f, "#{}", self.value),
            TermKind::Username => write!(f, "@{}", self.value),
            TermKind::Keyword => f.write_str(&self.value),
        }
    }
}

/// One monitored crisis: the terms to track and the period that scopes aggregates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr")]
pub struct TrackingProfile {
    profile_id: String,
    name: String,
    terms: Vec<TrackTerm>,
    crisis_window: TimeRange,
    active: bool,
}

#[derive(Deserialize)]
struct ProfileRepr {
    profile_id: String,
    name: String,
    terms: Vec<TrackTerm>,
    crisis_window: TimeRange,
    active: bool,
}

impl TryFrom<ProfileRepr> for TrackingProfile {
    type Error = ModelError;
    fn try_from(r: ProfileRepr) -> Result<Self, Self::Error> {
        TrackingProfile::new(r.profile_id, r.name, r.terms, r.crisis_window, r.active)
    }
}

/// Profile ids double as store directory names.
pub fn validate_profile_id(id: &str) -> Result<(), ModelError> {
    let ok =
        !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidProfileId(id.to_owned()))
    }
}

impl TrackingProfile {
    pub fn new(
        profile_id: impl Into<String>,
        name: impl Into<String>,
        terms: Vec<TrackTerm>,
        crisis_window: TimeRange,
        active: bool,
    ) -> Result<Self, ModelError> {
        let profile_id = profile_id.into();
        validate_profile_id(&profile_id)?;
        if terms.is_empty() {
            return Err(ModelError::NoTerms);
        }
        if crisis_window.is_empty() {
            return Err(ModelError::EmptyCrisisWindow);
        }
        let mut terms = terms;
        terms.sort();
        terms.dedup();
        Ok(Self {
            profile_id,
            name: name.into(),
            terms,
            crisis_window,
            active,
        })
    }

    pub fn profile_id(&self) -> &str {
        &self.profile_id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn terms(&self) -> &[TrackTerm] {
        &self.terms
    }

    pub fn crisis_window(&self) -> TimeRange {
        self.crisis_window
    }

    pub fn is_active(&self) -> bool {
        self.active
    }
}

/// Unvalidated tweet fields, as read from the wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetParts {
    pub tweet_id: String,
    pub created_at: DateTime<Utc>,
    pub author_id: String,
    pub author_handle: String,
    pub text: String,
    pub like_count: u64,
    pub retweet_count: u64,
    pub retweet_of: Option<String>,
}

/// One collected post. Hashtags and mentions are always derived from `text`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TweetRecord")]
pub struct Tweet {
    tweet_id: String,
    #[serde(serialize_with = "rfc3339::serialize")]
    created_at: DateTime<Utc>,
    author_id: String,
    author_handle: String,
    text: String,
    like_count: u64,
    retweet_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    retweet_of: Option<String>,
    mentions: Vec<String>,
    hashtags: Vec<String>,
    matched_terms: Vec<TrackTerm>,
}

/// Stored form of a tweet; derived fields are recomputed on load.
#[derive(Deserialize)]
struct TweetRecord {
    tweet_id: String,
    created_at: DateTime<Utc>,
    author_id: String,
    author_handle: String,
    text: String,
    like_count: u64,
    retweet_count: u64,
    #[serde(default)]
    retweet_of: Option<String>,
    #[serde(default)]
    matched_terms: Vec<TrackTerm>,
}

impl TryFrom<TweetRecord> for Tweet {
    type Error = ModelError;
    fn try_from(r: TweetRecord) -> Result<Self, Self::Error> {
        let tweet = Tweet::new(TweetParts {
            tweet_id: r.tweet_id,
            created_at: r.created_at,
            author_id: r.author_id,
            author_handle: r.author_handle,
            text: r.text,
            like_count: r.like_count,
            retweet_count: r.retweet_count,
            retweet_of: r.retweet_of,
        })?;
        Ok(tweet.with_matched_terms(r.matched_terms))
    }
}

impl Tweet {
    pub fn new(parts: TweetParts) -> Result<Self, ModelError> {
        if parts.tweet_id.is_empty() {
            return Err(ModelError::EmptyTweetId);
        }
        if parts.author_id.is_empty() {
            return Err(ModelError::EmptyField("author_id"));
        }
        let author_handle = parts.author_handle.trim_start_matches('@').to_owned();
        if author_handle.is_empty() {
            return Err(ModelError::EmptyField("author_handle"));
        }
        let len = parts.text.chars().count();
        if len > MAX_TEXT_CHARS {
            return Err(ModelError::TextTooLong(len));
        }
        if parts.retweet_of.as_deref() == Some(parts.tweet_id.as_str()) {
            return Err(ModelError::SelfRetweet);
        }
        let retweet_of = parts.retweet_of.filter(|id| !id.is_empty());
        Ok(Self {
            mentions: text::extract_mentions(&parts.text),
            hashtags: text::extract_hashtags(&parts.text),
            tweet_id: parts.tweet_id,
            created_at: parts.created_at.trunc_subsecs(0),
            author_id: parts.author_id,
            author_handle,
            text: parts.text,
            like_count: parts.like_count,
            retweet_count: parts.retweet_count,
            retweet_of,
            matched_terms: Vec::new(),
        })
    }

    pub fn with_matched_terms(mut self, mut terms: Vec<TrackTerm>) -> Self {
        terms.sort();
        terms.dedup();
        self.matched_terms = terms;
        self
    }

    pub fn tweet_id(&self) -> &str {
        &self.tweet_id
    }

    pub fn created_at(&self) -> DateTime<Utc> {
        self.created_at
    }

    pub fn author_id(&self) -> &str {
        &self.author_id
    }

    pub fn author_handle(&self) -> &str {
        &self.author_handle
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn like_count(&self) -> u64 {
        self.like_count
    }

    pub fn retweet_count(&self) -> u64 {
        self.retweet_count
    }

    pub fn retweet_of(&self) -> Option<&str> {
        self.retweet_of.as_deref()
    }

    pub fn is_retweet(&self) -> bool {
        self.retweet_of.is_some()
    }

    pub fn mentions(&self) -> &[String] {
        &self.mentions
    }

    pub fn hashtags(&self) -> &[String] {
        &self.hashtags
    }

    pub fn matched_terms(&self) -> &[TrackTerm] {
        &self.matched_terms
    }

    pub fn to_parts(&self) -> TweetParts {
        TweetParts {
            tweet_id: self.tweet_id.clone(),
            created_at: self.created_at,
            author_id: self.author_id.clone(),
            author_handle: self.author_handle.clone(),
            text: self.text.clone(),
            like_count: self.like_count,
            retweet_count: self.retweet_count,
            retweet_of: self.retweet_of.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

/// Values strictly beyond this magnitude are labeled positive/negative.
pub const LABEL_THRESHOLD: f64 = 0.1;

impl SentimentLabel {
    pub fn from_value(value: f64) -> Self {
        if value > LABEL_THRESHOLD {
            SentimentLabel::Positive
        } else if value < -LABEL_THRESHOLD {
            SentimentLabel::Negative
        } else {
            SentimentLabel::Neutral
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SentimentScore {
    value: f64,
    label: SentimentLabel,
    matched_tokens: u32,
}

impl SentimentScore {
    pub const NEUTRAL: SentimentScore = SentimentScore {
        value: 0.0,
        label: SentimentLabel::Neutral,
        matched_tokens: 0,
    };

    pub fn new(value: f64, matched_tokens: u32) -> Result<Self, ModelError> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(ModelError::SentimentOutOfRange(value));
        }
        if matched_tokens == 0 && value != 0.0 {
            return Err(ModelError::ZeroHitNonZeroValue);
        }
        Ok(Self {
            // normalizes -0.0
            value: value + 0.0,
            label: SentimentLabel::from_value(value),
            matched_tokens,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn label(&self) -> SentimentLabel {
        self.label
    }

    pub fn matched_tokens(&self) -> u32 {
        self.matched_tokens
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentHistogram {
    pub negative: u64,
    pub neutral: u64,
    pub positive: u64,
}

impl SentimentHistogram {
    pub fn add(&mut self, label: SentimentLabel) {
        match label {
            SentimentLabel::Negative => self.negative += 1,
            SentimentLabel::Neutral => self.neutral += 1,
            SentimentLabel::Positive => self.positive += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.negative + self.neutral + self.positive
    }
}

/// Per-day dashboard overview.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyAggregate {
    date: chrono::NaiveDate,
    tweet_count: u64,
    retweet_count: u64,
    unique_authors: u64,
    sentiment_mean: Option<f64>,
    sentiment_histogram: SentimentHistogram,
}

impl DailyAggregate {
    pub(crate) fn new(
        date: chrono::NaiveDate,
        retweet_count: u64,
        unique_authors: u64,
        sentiment_sum: f64,
        histogram: SentimentHistogram,
    ) -> Self {
        let tweet_count = histogram.total();
        debug_assert!(retweet_count <= tweet_count && unique_authors <= tweet_count);
        Self {
            date,
            tweet_count,
            retweet_count,
            unique_authors,
            sentiment_mean: mean(sentiment_sum, tweet_count),
            sentiment_histogram: histogram,
        }
    }

    pub fn date(&self) -> chrono::NaiveDate {
        self.date
    }

    pub fn tweet_count(&self) -> u64 {
        self.tweet_count
    }

    pub fn retweet_count(&self) -> u64 {
        self.retweet_count
    }

    pub fn unique_authors(&self) -> u64 {
        self.unique_authors
    }

    pub fn sentiment_mean(&self) -> Option<f64> {
        self.sentiment_mean
    }

    pub fn sentiment_histogram(&self) -> SentimentHistogram {
        self.sentiment_histogram
    }
}

pub(crate) fn mean(sum: f64, count: u64) -> Option<f64> {
    (count > 0).then(|| (sum / count as f64).clamp(-1.0, 1.0))
}

/// Sentiment over one UTC day, or over a whole window for the crisis summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentSeriesPoint {
    #[serde(skip_serializing_if = "Option::is_none")]
    date: Option<chrono::NaiveDate>,
    mean: Option<f64>,
    tweet_count: u64,
    histogram: SentimentHistogram,
}

impl SentimentSeriesPoint {
    pub(crate) fn new(date: Option<chrono::NaiveDate>, sum: f64, histogram: SentimentHistogram) -> Self {
        let tweet_count = histogram.total();
        Self {
            date,
            mean: mean(sum, tweet_count),
            tweet_count,
            histogram,
        }
    }

    /// `None` for window summaries.
    pub fn date(&self) -> Option<chrono::NaiveDate> {
        self.date
    }

    pub fn mean(&self) -> Option<f64> {
        self.mean
    }

    pub fn tweet_count(&self) -> u64 {
        self.tweet_count
    }

    pub fn histogram(&self) -> SentimentHistogram {
        self.histogram
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WeeklyAggregate {
    iso_year: i32,
    iso_week: u32,
    tweet_count: u64,
}

impl WeeklyAggregate {
    pub(crate) fn new(iso_year: i32, iso_week: u32, tweet_count: u64) -> Self {
        debug_assert!((1..=53).contains(&iso_week));
        Self {
            iso_year,
            iso_week,
            tweet_count,
        }
    }

    pub fn iso_year(&self) -> i32 {
        self.iso_year
    }

    pub fn iso_week(&self) -> u32 {
        self.iso_week
    }

    pub fn tweet_count(&self) -> u64 {
        self.tweet_count
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendingEntry {
    tweet_id: String,
    engagement: f64,
    rank: u32,
}

impl TrendingEntry {
    pub(crate) fn new(tweet_id: String, engagement: f64, rank: u32) -> Self {
        Self {
            tweet_id,
            engagement,
            rank,
        }
    }

    pub fn tweet_id(&self) -> &str {
        &self.tweet_id
    }

    pub fn engagement(&self) -> f64 {
        self.engagement
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DescriptiveStats {
    total_tweets: u64,
    total_retweets: u64,
    unique_authors: u64,
    total_mentions: u64,
    #[serde(serialize_with = "rfc3339::option::serialize")]
    first_tweet_at: Option<DateTime<Utc>>,
    #[serde(serialize_with = "rfc3339::option::serialize")]
    last_tweet_at: Option<DateTime<Utc>>,
}

impl DescriptiveStats {
    pub(crate) fn new(
        total_tweets: u64,
        total_retweets: u64,
        unique_authors: u64,
        total_mentions: u64,
        first_tweet_at: Option<DateTime<Utc>>,
        last_tweet_at: Option<DateTime<Utc>>,
    ) -> Self {
        debug_assert!(total_retweets <= total_tweets);
        debug_assert!(first_tweet_at <= last_tweet_at);
        Self {
            total_tweets,
            total_retweets,
            unique_authors,
            total_mentions,
            first_tweet_at,
            last_tweet_at,
        }
    }

    pub fn total_tweets(&self) -> u64 {
        self.total_tweets
    }

    pub fn total_retweets(&self) -> u64 {
        self.total_retweets
    }

    pub fn unique_authors(&self) -> u64 {
        self.unique_authors
    }

    pub fn total_mentions(&self) -> u64 {
        self.total_mentions
    }

    pub fn first_tweet_at(&self) -> Option<DateTime<Utc>> {
        self.first_tweet_at
    }

    pub fn last_tweet_at(&self) -> Option<DateTime<Utc>> {
        self.last_tweet_at
    }
}

/// Why a record was not stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    ParseFailure,
    MissingId,
    MissingField,
    BadTimestamp,
    NegativeCount,
    InvalidField,
    NoMatch,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::ParseFailure => "parse_failure",
            RejectReason::MissingId => "missing_id",
            RejectReason::MissingField => "missing_field",
            RejectReason::BadTimestamp => "bad_timestamp",
            RejectReason::NegativeCount => "negative_count",
            RejectReason::InvalidField => "invalid_field",
            RejectReason::NoMatch => "no_match",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// 1-based position of the record in its source.
    pub record: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tweet_id: Option<String>,
    pub reason: RejectReason,
}

/// Outcome totals of one ingest run; `read = accepted + duplicate + rejected`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    read_count: u64,
    accepted_count: u64,
    duplicate_count: u64,
    rejected_count: u64,
    rejected_by_reason: BTreeMap<RejectReason, u64>,
    rejections: Vec<Rejection>,
}

impl IngestReport {
    pub fn record_accepted(&mut self) {
        self.read_count += 1;
        self.accepted_count += 1;
    }

    pub fn record_duplicate(&mut self) {
        self.read_count += 1;
        self.duplicate_count += 1;
    }

    pub fn record_rejected(&mut self, rejection: Rejection) {
        self.read_count += 1;
        self.rejected_count += 1;
        *self.rejected_by_reason.entry(rejection.reason).or_default() += 1;
        self.rejections.push(rejection);
    }

    pub fn read_count(&self) -> u64 {
        self.read_count
    }

    pub fn accepted_count(&self) -> u64 {
        self.accepted_count
    }

    pub fn duplicate_count(&self) -> u64 {
        self.duplicate_count
    }

    pub fn rejected_count(&self) -> u64 {
        self.rejected_count
    }

    pub fn rejected_by_reason(&self) -> &BTreeMap<RejectReason, u64> {
        &self.rejected_by_reason
    }

    pub fn rejections(&self) -> &[Rejection] {
        &self.rejections
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
