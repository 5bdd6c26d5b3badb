use std::fmt;
use std::str::FromStr;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Utc};

use super::{StoreError, TweetKey};

/// Opaque pagination token: URL-safe base64 of the last key returned.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cursor(TweetKey);

impl Cursor {
    pub(crate) fn new(key: TweetKey) -> Self {
        Self(key)
    }

    pub(crate) fn key(&self) -> &TweetKey {
        &self.0
    }

    pub fn encode(&self) -> String {
        let raw = format!("{}:{}", self.0.created_at.timestamp(), self.0.tweet_id);
        URL_SAFE_NO_PAD.encode(raw)
    }

    pub fn decode(s: &str) -> Result<Self, StoreError> {
        let bytes = URL_SAFE_NO_PAD.decode(s).map_err(|_| StoreError::InvalidCursor)?;
        let raw = String::from_utf8(bytes).map_err(|_| StoreError::InvalidCursor)?;
        let (secs, id) = raw.split_once(':').ok_or(StoreError::InvalidCursor)?;
        let secs: i64 = secs.parse().map_err(|_| StoreError::InvalidCursor)?;
        let created_at = DateTime::<Utc>::from_timestamp(secs, 0).ok_or(StoreError::InvalidCursor)?;
        if id.is_empty() {
            return Err(StoreError::InvalidCursor);
        }
        Ok(Self(TweetKey {
            created_at,
            tweet_id: id.to_owned(),
        }))
    }
}

impl fmt::Display for Cursor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl FromStr for Cursor {
    type Err = StoreError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Cursor::decode(s)
    }
}
