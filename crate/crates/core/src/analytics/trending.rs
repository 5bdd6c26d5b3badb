//! Engagement scoring and top-k selection for trending tweets.
//!
//! Ranking compares an exact integer key rather than the floating-point
//! score. The weight ratio is snapped to a grid of `RATIO_GRID` steps, so
//! multiplying both weights by the same positive constant cannot reorder
//! results through rounding. The grid is `lcm(1..=20)`, which represents any
//! ratio `a : b` with `a + b <= 20` (including the 2:1 default) exactly.

use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::{TimeRange, TrendingEntry, Tweet};

const RATIO_GRID: u64 = 232_792_560;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("engagement weights must be finite and > 0 (got retweet {retweet}, like {like})")]
pub struct InvalidWeights {
    pub retweet: f64,
    pub like: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightsRepr")]
pub struct EngagementWeights {
    w_retweet: f64,
    w_like: f64,
}

#[derive(Deserialize)]
struct WeightsRepr {
    w_retweet: f64,
    w_like: f64,
}

impl TryFrom<WeightsRepr> for EngagementWeights {
    type Error = InvalidWeights;
    fn try_from(r: WeightsRepr) -> Result<Self, Self::Error> {
        EngagementWeights::new(r.w_retweet, r.w_like)
    }
}

impl Default for EngagementWeights {
    fn default() -> Self {
        Self {
            w_retweet: 2.0,
            w_like: 1.0,
        }
    }
}

impl EngagementWeights {
    pub fn new(w_retweet: f64, w_like: f64) -> Result<Self, InvalidWeights> {
        let ok = |w: f64| w.is_finite() && w > 0.0;
        if ok(w_retweet) && ok(w_like) {
            Ok(Self { w_retweet, w_like })
        } else {
            Err(InvalidWeights {
                retweet: w_retweet,
                like: w_like,
            })
        }
    }

    pub fn w_retweet(&self) -> f64 {
        self.w_retweet
    }

    pub fn w_like(&self) -> f64 {
        self.w_like
    }

    /// Integer weights proportional to the real ones, summing to the grid size.
    fn grid_weights(&self) -> (u128, u128) {
        let share = self.w_retweet / (self.w_retweet + self.w_like);
        let p = (share * RATIO_GRID as f64).round().clamp(1.0, (RATIO_GRID - 1) as f64) as u64;
        (u128::from(p), u128::from(RATIO_GRID - p))
    }
}

/// `w_retweet * retweet_count + w_like * like_count`.
pub fn engagement(tweet: &Tweet, weights: &EngagementWeights) -> f64 {
    weights.w_retweet * tweet.retweet_count() as f64 + weights.w_like * tweet.like_count() as f64
}

/// Trending order: higher engagement first, then later `created_at`, then
/// `tweet_id` ascending.
fn compare(a: &(u128, &Arc<Tweet>), b: &(u128, &Arc<Tweet>)) -> Ordering {
    b.0.cmp(&a.0)
        .then_with(|| b.1.created_at().cmp(&a.1.created_at()))
        .then_with(|| a.1.tweet_id().cmp(b.1.tweet_id()))
}

/// Top `k` tweets of `window` with their entries, best first.
pub fn top_k(
    tweets: &[Arc<Tweet>],
    window: TimeRange,
    k: usize,
    weights: &EngagementWeights,
) -> Vec<(TrendingEntry, Arc<Tweet>)> {
    if k == 0 {
        return Vec::new();
    }
    let (wr, wl) = weights.grid_weights();
    let mut keyed: Vec<(u128, &Arc<Tweet>)> = tweets
        .iter()
        .filter(|t| window.contains(t.created_at()))
        .map(|t| {
            let key = wr * u128::from(t.retweet_count()) + wl * u128::from(t.like_count());
            (key, t)
        })
        .collect();
    if keyed.len() > k {
        keyed.select_nth_unstable_by(k - 1, compare);
        keyed.truncate(k);
    }
    keyed.sort_unstable_by(compare);
    keyed
        .into_iter()
        .enumerate()
        .map(|(i, (_, t))| {
            let rank = u32::try_from(i + 1).expect("k fits u32");
            (
                TrendingEntry::new(t.tweet_id().to_owned(), engagement(t, weights), rank),
                Arc::clone(t),
            )
        })
        .collect()
}
