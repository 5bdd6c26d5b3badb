//! Collection pipeline: source → validation → term filter → store.

mod matcher;
mod replay;
pub mod stream;

pub use matcher::{match_terms, TermMatcher};
pub use replay::{open_replay_source, ReplaySource};
pub use stream::{open_stream_source, BackoffPolicy, StreamConfig, StreamHandle, StreamSource, StreamStatus};

use crate::model::{IngestReport, RejectReason, Rejection, TrackingProfile, Tweet};
use crate::store::{InsertOutcome, Store, StoreError};
use crate::wire::{validate_tweet, RawRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Replay,
    Stream,
}

#[derive(Debug, thiserror::Error)]
pub enum SourceError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("stream authentication rejected (HTTP {0})")]
    Auth(u16),
    #[error("stream endpoint refused the request (HTTP {0})")]
    Refused(u16),
    #[error("stream configuration: {0}")]
    Config(String),
    #[error("gave up after {0} consecutive connection failures")]
    Exhausted(u32),
}

/// Pull interface over raw records. Replay sources end at end of file; stream
/// sources end when closed or after a fatal error.
pub trait TweetSource {
    fn kind(&self) -> SourceKind;

    /// The next record, `Some(Err(_))` for a fatal source failure, `None` at end.
    fn next_record(&mut self) -> Option<Result<RawRecord, SourceError>>;
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("profile {0} is not active")]
    InactiveProfile(String),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// An aborted ingest with everything counted before the failure.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct IngestFailure {
    pub report: IngestReport,
    #[source]
    pub error: IngestError,
}

const REPLAY_BATCH: usize = 512;

/// Validates every record from `source`, keeps those matching at least one
/// profile term and stores them. Re-seen tweet ids count as duplicates and do
/// not update stored tweets.
pub fn run_ingest(
    source: &mut dyn TweetSource,
    profile: &TrackingProfile,
    store: &Store,
) -> Result<IngestReport, Box<IngestFailure>> {
    let mut report = IngestReport::default();
    if !profile.is_active() {
        return Err(Box::new(IngestFailure {
            report,
            error: IngestError::InactiveProfile(profile.profile_id().to_owned()),
        }));
    }
    let matcher = TermMatcher::new(profile);
    let batch_size = match source.kind() {
        SourceKind::Replay => REPLAY_BATCH,
        SourceKind::Stream => 1,
    };
    let mut batch: Vec<Tweet> = Vec::with_capacity(batch_size);

    let flush = |batch: &mut Vec<Tweet>, report: &mut IngestReport| -> Result<(), StoreError> {
        if batch.is_empty() {
            return Ok(());
        }
        let outcomes = store.insert_batch(profile.profile_id(), std::mem::take(batch))?;
        for outcome in outcomes {
            match outcome {
                InsertOutcome::Inserted => report.record_accepted(),
                InsertOutcome::Duplicate => report.record_duplicate(),
            }
        }
        Ok(())
    };

    while let Some(item) = source.next_record() {
        let raw = match item {
            Ok(raw) => raw,
            Err(e) => {
                if let Err(store_err) = flush(&mut batch, &mut report) {
                    return Err(Box::new(IngestFailure {
                        report,
                        error: store_err.into(),
                    }));
                }
                return Err(Box::new(IngestFailure {
                    report,
                    error: e.into(),
                }));
            }
        };
        let tweet = match validate_tweet(&raw) {
            Ok(t) => t,
            Err(invalid) => {
                log::debug!("record {} rejected: {}", raw.position, invalid.detail);
                report.record_rejected(Rejection {
                    record: raw.position,
                    tweet_id: raw.tweet_id().map(str::to_owned),
                    reason: invalid.reason,
                });
                continue;
            }
        };
        let matched = matcher.matches(&tweet);
        if matched.is_empty() {
            report.record_rejected(Rejection {
                record: raw.position,
                tweet_id: Some(tweet.tweet_id().to_owned()),
                reason: RejectReason::NoMatch,
            });
            continue;
        }
        batch.push(tweet.with_matched_terms(matched));
        if batch.len() >= batch_size {
            if let Err(e) = flush(&mut batch, &mut report) {
                return Err(Box::new(IngestFailure {
                    report,
                    error: e.into(),
                }));
            }
        }
    }
    if let Err(e) = flush(&mut batch, &mut report) {
        return Err(Box::new(IngestFailure {
            report,
            error: e.into(),
        }));
    }
    Ok(report)
}

/// In-memory source over pre-parsed lines; handy for tests and adapters.
#[derive(Debug, Clone)]
pub struct VecSource {
    records: std::vec::IntoIter<RawRecord>,
}

impl VecSource {
    pub fn from_lines<S: AsRef<str>>(lines: impl IntoIterator<Item = S>) -> Self {
        let records: Vec<RawRecord> = lines
            .into_iter()
            .filter(|l| !l.as_ref().trim().is_empty())
            .enumerate()
            .map(|(i, l)| RawRecord::parse(i as u64 + 1, l.as_ref().trim()))
            .collect();
        Self {
            records: records.into_iter(),
        }
    }
}

impl TweetSource for VecSource {
    fn kind(&self) -> SourceKind {
        SourceKind::Replay
    }

    fn next_record(&mut self) -> Option<Result<RawRecord, SourceError>> {
        self.records.next().map(Ok)
    }
}
