//! Per-day, per-week and whole-window rollups over a tweet snapshot.
//!
//! All functions take tweets already restricted to the window of interest and
//! in any order; calendar days and ISO weeks are UTC.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use chrono::{Datelike, Duration, NaiveDate};

use crate::analytics::lexicon::Lexicon;
use crate::analytics::sentiment::score_sentiment;
use crate::model::{
    DailyAggregate, DescriptiveStats, SentimentHistogram, SentimentSeriesPoint, TimeRange, Tweet, WeeklyAggregate,
};

/// Every UTC calendar day that intersects `window`, ascending.
pub fn days_in(window: TimeRange) -> Vec<NaiveDate> {
    if window.is_empty() {
        return Vec::new();
    }
    let first = window.start().date_naive();
    let last = (window.end() - Duration::nanoseconds(1)).date_naive();
    first.iter_days().take_while(|d| *d <= last).collect()
}

/// `[day 00:00, next day 00:00)` intersected with `window`.
pub fn day_range(day: NaiveDate, window: TimeRange) -> TimeRange {
    let start = day.and_hms_opt(0, 0, 0).expect("midnight").and_utc();
    let end = start + Duration::days(1);
    TimeRange::new(start, end).expect("day is ordered").intersect(&window)
}

#[derive(Default)]
struct SentimentAcc {
    sum: f64,
    histogram: SentimentHistogram,
}

impl SentimentAcc {
    fn add(&mut self, tweet: &Tweet, lexicon: &Lexicon) {
        let s = score_sentiment(tweet.text(), lexicon);
        self.sum += s.value();
        self.histogram.add(s.label());
    }
}

/// One point per day of `window`, including days without tweets.
pub fn sentiment_series(tweets: &[Arc<Tweet>], window: TimeRange, lexicon: &Lexicon) -> Vec<SentimentSeriesPoint> {
    let mut by_day: BTreeMap<NaiveDate, SentimentAcc> = BTreeMap::new();
    for t in tweets.iter().filter(|t| window.contains(t.created_at())) {
        by_day.entry(t.created_at().date_naive()).or_default().add(t, lexicon);
    }
    days_in(window)
        .into_iter()
        .map(|day| {
            let acc = by_day.remove(&day).unwrap_or_default();
            SentimentSeriesPoint::new(Some(day), acc.sum, acc.histogram)
        })
        .collect()
}

/// Single summary over every tweet in `window`.
pub fn sentiment_summary(tweets: &[Arc<Tweet>], window: TimeRange, lexicon: &Lexicon) -> SentimentSeriesPoint {
    let mut acc = SentimentAcc::default();
    for t in tweets.iter().filter(|t| window.contains(t.created_at())) {
        acc.add(t, lexicon);
    }
    SentimentSeriesPoint::new(None, acc.sum, acc.histogram)
}

/// Aggregate for `day`, counting only tweets that fall inside `window`.
pub fn daily_aggregate(tweets: &[Arc<Tweet>], day: NaiveDate, window: TimeRange, lexicon: &Lexicon) -> DailyAggregate {
    let range = day_range(day, window);
    let mut acc = SentimentAcc::default();
    let mut retweets = 0u64;
    let mut authors = HashSet::new();
    for t in tweets.iter().filter(|t| range.contains(t.created_at())) {
        acc.add(t, lexicon);
        retweets += u64::from(t.is_retweet());
        authors.insert(t.author_id());
    }
    DailyAggregate::new(day, retweets, authors.len() as u64, acc.sum, acc.histogram)
}

/// Tweet totals for every ISO week overlapping `window`, chronological.
pub fn weekly_counts(tweets: &[Arc<Tweet>], window: TimeRange) -> Vec<WeeklyAggregate> {
    let mut weeks: BTreeMap<(i32, u32), u64> = BTreeMap::new();
    for day in days_in(window) {
        let w = day.iso_week();
        weeks.entry((w.year(), w.week())).or_default();
    }
    for t in tweets.iter().filter(|t| window.contains(t.created_at())) {
        let w = t.created_at().iso_week();
        *weeks.entry((w.year(), w.week())).or_default() += 1;
    }
    weeks
        .into_iter()
        .map(|((year, week), count)| WeeklyAggregate::new(year, week, count))
        .collect()
}

pub fn descriptive_stats(tweets: &[Arc<Tweet>], window: TimeRange) -> DescriptiveStats {
    let mut total = 0u64;
    let mut retweets = 0u64;
    let mut mentions = 0u64;
    let mut authors = HashSet::new();
    let mut first = None;
    let mut last = None;
    for t in tweets.iter().filter(|t| window.contains(t.created_at())) {
        total += 1;
        retweets += u64::from(t.is_retweet());
        mentions += t.mentions().len() as u64;
        authors.insert(t.author_id());
        let at = t.created_at();
        first = Some(first.map_or(at, |f: chrono::DateTime<chrono::Utc>| f.min(at)));
        last = Some(last.map_or(at, |l: chrono::DateTime<chrono::Utc>| l.max(at)));
    }
    DescriptiveStats::new(total, retweets, authors.len() as u64, mentions, first, last)
}
