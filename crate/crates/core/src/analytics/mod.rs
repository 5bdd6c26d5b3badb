//! Dashboard figures computed from a store snapshot.
//!
//! Daily figures are scoped by the profile's crisis window; the other figures
//! take an explicit window. Retweets count toward sentiment and every
//! aggregate like any other tweet.

pub mod aggregate;
pub mod lexicon;
pub mod sentiment;
pub mod trending;

use std::sync::Arc;

use chrono::NaiveDate;

pub use crate::text::tokenize;
pub use lexicon::{Lexicon, LexiconError};
pub use sentiment::score_sentiment;
pub use trending::{engagement, EngagementWeights, InvalidWeights};

use crate::model::{
    DailyAggregate, DescriptiveStats, SentimentSeriesPoint, TimeRange, TrackingProfile, TrendingEntry, Tweet,
    WeeklyAggregate,
};
use crate::store::Store;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("window {window} is not inside the crisis window {crisis}")]
    OutsideCrisisWindow { window: TimeRange, crisis: TimeRange },
    #[error("date {date} is outside the crisis window {crisis}")]
    DateOutsideWindow { date: NaiveDate, crisis: TimeRange },
    #[error("k must be at least 1")]
    InvalidK,
}

/// Analytics bound to one lexicon. Stateless otherwise; share freely.
#[derive(Debug, Clone)]
pub struct Analyzer {
    lexicon: Arc<Lexicon>,
}

impl Analyzer {
    pub fn new(lexicon: Arc<Lexicon>) -> Self {
        Self { lexicon }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Daily sentiment over `window`, which must lie inside the crisis window.
    pub fn sentiment_series(
        &self,
        store: &Store,
        profile: &TrackingProfile,
        window: TimeRange,
    ) -> Result<Vec<SentimentSeriesPoint>, AnalyticsError> {
        let crisis = profile.crisis_window();
        if !crisis.covers(&window) {
            return Err(AnalyticsError::OutsideCrisisWindow { window, crisis });
        }
        let tweets = store.scan(profile.profile_id(), window);
        Ok(aggregate::sentiment_series(&tweets, window, &self.lexicon))
    }

    /// Sentiment summary over the whole crisis window.
    pub fn crisis_sentiment(&self, store: &Store, profile: &TrackingProfile) -> SentimentSeriesPoint {
        self.window_sentiment(store, profile, profile.crisis_window())
    }

    /// Sentiment summary over `window`, clipped to the crisis window.
    pub fn window_sentiment(
        &self,
        store: &Store,
        profile: &TrackingProfile,
        window: TimeRange,
    ) -> SentimentSeriesPoint {
        let window = window.intersect(&profile.crisis_window());
        let tweets = store.scan(profile.profile_id(), window);
        aggregate::sentiment_summary(&tweets, window, &self.lexicon)
    }

    pub fn daily_overview(
        &self,
        store: &Store,
        profile: &TrackingProfile,
        date: NaiveDate,
    ) -> Result<DailyAggregate, AnalyticsError> {
        let crisis = profile.crisis_window();
        let range = aggregate::day_range(date, crisis);
        if range.is_empty() {
            return Err(AnalyticsError::DateOutsideWindow { date, crisis });
        }
        let tweets = store.scan(profile.profile_id(), range);
        Ok(aggregate::daily_aggregate(&tweets, date, crisis, &self.lexicon))
    }

    pub fn weekly_counts(&self, store: &Store, profile: &TrackingProfile, window: TimeRange) -> Vec<WeeklyAggregate> {
        let tweets = store.scan(profile.profile_id(), window);
        aggregate::weekly_counts(&tweets, window)
    }

    pub fn trending(
        &self,
        store: &Store,
        profile: &TrackingProfile,
        window: TimeRange,
        k: usize,
        weights: &EngagementWeights,
    ) -> Result<Vec<TrendingEntry>, AnalyticsError> {
        Ok(self
            .trending_tweets(store, profile, window, k, weights)?
            .into_iter()
            .map(|(e, _)| e)
            .collect())
    }

    /// Like [`Analyzer::trending`], with the ranked tweets attached.
    pub fn trending_tweets(
        &self,
        store: &Store,
        profile: &TrackingProfile,
        window: TimeRange,
        k: usize,
        weights: &EngagementWeights,
    ) -> Result<Vec<(TrendingEntry, Arc<Tweet>)>, AnalyticsError> {
        if k == 0 {
            return Err(AnalyticsError::InvalidK);
        }
        let tweets = store.scan(profile.profile_id(), window);
        Ok(trending::top_k(&tweets, window, k, weights))
    }

    pub fn descriptive_stats(&self, store: &Store, profile: &TrackingProfile, window: TimeRange) -> DescriptiveStats {
        let tweets = store.scan(profile.profile_id(), window);
        aggregate::descriptive_stats(&tweets, window)
    }
}
