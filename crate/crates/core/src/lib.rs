//! Tweet collection, storage and crisis analytics.
//!
//! [`ingest`] pulls records from a replay file or a live stream, validates them
//! and keeps those matching a [`TrackingProfile`]'s terms. [`store`] persists
//! tweets per profile in an append-only log with a time-ordered index.
//! [`analytics`] computes the dashboard figures from a store snapshot.

pub mod analytics;
pub mod corpus;
pub mod ingest;
pub mod model;
pub mod store;
pub mod text;
pub mod wire;

pub use analytics::{AnalyticsError, Analyzer, EngagementWeights, Lexicon};
pub use model::{
    normalize_term, DailyAggregate, DescriptiveStats, IngestReport, ModelError, RejectReason, Rejection,
    SentimentHistogram, SentimentLabel, SentimentScore, SentimentSeriesPoint, TermKind, TimeRange, TrackTerm,
    TrackingProfile, TrendingEntry, Tweet, TweetParts, WeeklyAggregate,
};
pub use store::{Cursor, Page, Store, StoreError, SyncPolicy};
