//! The newline-delimited JSON record format shared by replay files and the
//! streaming endpoint.
//!
//! Required keys: `tweet_id`, `created_at` (RFC 3339), `author_id`,
//! `author_handle`, `text`, `like_count`, `retweet_count`. Optional:
//! `retweet_of`. Unknown keys are ignored.

use chrono::{DateTime, Utc};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::model::{rfc3339, RejectReason, Tweet, TweetParts};

/// One record pulled from a source, before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    /// 1-based position within the source.
    pub position: u64,
    pub body: RawBody,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawBody {
    Object(Map<String, Value>),
    /// The line was not a JSON object.
    Malformed(String),
}

impl RawRecord {
    pub fn parse(position: u64, line: &str) -> Self {
        let body = match serde_json::from_str::<Value>(line) {
            Ok(Value::Object(map)) => RawBody::Object(map),
            Ok(other) => RawBody::Malformed(format!("expected a JSON object, found {}", kind_of(&other))),
            Err(e) => RawBody::Malformed(e.to_string()),
        };
        Self { position, body }
    }

    /// The `tweet_id` field when present as a non-empty string.
    pub fn tweet_id(&self) -> Option<&str> {
        match &self.body {
            RawBody::Object(map) => map.get("tweet_id").and_then(Value::as_str).filter(|s| !s.is_empty()),
            RawBody::Malformed(_) => None,
        }
    }
}

fn kind_of(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// A validation failure with the field that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invalid {
    pub reason: RejectReason,
    pub detail: String,
}

impl Invalid {
    fn new(reason: RejectReason, detail: impl Into<String>) -> Self {
        Self {
            reason,
            detail: detail.into(),
        }
    }
}

fn required_str<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a str, Invalid> {
    match map.get(key) {
        None | Some(Value::Null) => Err(Invalid::new(RejectReason::MissingField, format!("missing {key}"))),
        Some(Value::String(s)) => Ok(s),
        Some(other) => Err(Invalid::new(
            RejectReason::InvalidField,
            format!("{key} must be a string, found {}", kind_of(other)),
        )),
    }
}

fn required_count(map: &Map<String, Value>, key: &str) -> Result<u64, Invalid> {
    match map.get(key) {
        None | Some(Value::Null) => Err(Invalid::new(RejectReason::MissingField, format!("missing {key}"))),
        Some(Value::Number(n)) => {
            if let Some(v) = n.as_u64() {
                Ok(v)
            } else if n.as_i64().is_some_and(|v| v < 0) || n.as_f64().is_some_and(|v| v < 0.0) {
                Err(Invalid::new(RejectReason::NegativeCount, format!("{key} is negative")))
            } else {
                Err(Invalid::new(
                    RejectReason::InvalidField,
                    format!("{key} must be an integer"),
                ))
            }
        }
        Some(other) => Err(Invalid::new(
            RejectReason::InvalidField,
            format!("{key} must be an integer, found {}", kind_of(other)),
        )),
    }
}

/// Validates and normalizes one raw record.
pub fn validate_tweet(raw: &RawRecord) -> Result<Tweet, Invalid> {
    let map = match &raw.body {
        RawBody::Object(map) => map,
        RawBody::Malformed(msg) => return Err(Invalid::new(RejectReason::ParseFailure, msg.clone())),
    };
    let tweet_id = match map.get("tweet_id") {
        None | Some(Value::Null) => return Err(Invalid::new(RejectReason::MissingId, "missing tweet_id")),
        Some(Value::String(s)) if s.is_empty() => return Err(Invalid::new(RejectReason::MissingId, "empty tweet_id")),
        Some(Value::String(s)) => s.clone(),
        Some(other) => {
            return Err(Invalid::new(
                RejectReason::InvalidField,
                format!("tweet_id must be a string, found {}", kind_of(other)),
            ))
        }
    };
    let created_raw = match required_str(map, "created_at") {
        Ok(s) => s,
        Err(e) if e.reason == RejectReason::MissingField => return Err(e),
        Err(e) => return Err(Invalid::new(RejectReason::BadTimestamp, e.detail)),
    };
    let created_at = DateTime::parse_from_rfc3339(created_raw)
        .map_err(|e| Invalid::new(RejectReason::BadTimestamp, format!("created_at: {e}")))?
        .with_timezone(&Utc);
    let like_count = required_count(map, "like_count")?;
    let retweet_count = required_count(map, "retweet_count")?;
    let retweet_of = match map.get("retweet_of") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => {
            return Err(Invalid::new(
                RejectReason::InvalidField,
                format!("retweet_of must be a string, found {}", kind_of(other)),
            ))
        }
    };
    let parts = TweetParts {
        tweet_id,
        created_at,
        author_id: required_str(map, "author_id")?.to_owned(),
        author_handle: required_str(map, "author_handle")?.to_owned(),
        text: required_str(map, "text")?.to_owned(),
        like_count,
        retweet_count,
        retweet_of,
    };
    Tweet::new(parts).map_err(|e| Invalid::new(RejectReason::InvalidField, e.to_string()))
}

/// Serializable wire form; key order is fixed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WireRecord {
    pub tweet_id: String,
    #[serde(serialize_with = "rfc3339::serialize")]
    pub created_at: DateTime<Utc>,
    pub author_id: String,
    pub author_handle: String,
    pub text: String,
    pub like_count: u64,
    pub retweet_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retweet_of: Option<String>,
}

impl From<TweetParts> for WireRecord {
    fn from(p: TweetParts) -> Self {
        Self {
            tweet_id: p.tweet_id,
            created_at: p.created_at,
            author_id: p.author_id,
            author_handle: p.author_handle,
            text: p.text,
            like_count: p.like_count,
            retweet_count: p.retweet_count,
            retweet_of: p.retweet_of,
        }
    }
}

impl From<&Tweet> for WireRecord {
    fn from(t: &Tweet) -> Self {
        t.to_parts().into()
    }
}

impl WireRecord {
    /// One line of the replay format, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("wire record serializes")
    }
}
