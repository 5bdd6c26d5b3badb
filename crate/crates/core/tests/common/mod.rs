//! Random fixtures and brute-force oracles shared by the integration tests.
//!
//! The oracles deliberately avoid the library's aggregation code: each one
//! rescans the full tweet list per output row and recomputes sentiment with a
//! linear lexicon lookup.
#![allow(dead_code)]

use std::collections::BTreeSet;

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc};
use crisiswatch_core::analytics::tokenize;
use crisiswatch_core::wire::{validate_tweet, RawRecord, WireRecord};
use crisiswatch_core::{normalize_term, Lexicon, TermKind, TimeRange, TrackingProfile, Tweet};
use rand::seq::SliceRandom;
use rand::Rng;

pub const MEAN_TOL: f64 = 1e-12;

pub fn utc(secs: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(secs, 0).unwrap()
}

/// A profile tracking `#measles`, `@cityhealth` and "measles outbreak" whose
/// crisis window starts at a random second and spans 3 to 40 days.
pub fn random_profile<R: Rng>(rng: &mut R, id: &str) -> TrackingProfile {
    let start = utc(1_704_067_200 + rng.gen_range(0..365 * 86_400));
    let end = start + Duration::seconds(rng.gen_range(3 * 86_400..40 * 86_400));
    TrackingProfile::new(
        id,
        "Random crisis",
        vec![
            normalize_term(TermKind::Hashtag, "measles").unwrap(),
            normalize_term(TermKind::Username, "cityhealth").unwrap(),
            normalize_term(TermKind::Keyword, "measles outbreak").unwrap(),
        ],
        TimeRange::new(start, end).unwrap(),
        true,
    )
    .unwrap()
}

const WORDS: [&str; 24] = [
    "good", "safe", "thanks", "calm", "worried", "panic", "fear", "fever", "rash", "crisis", "deadly", "hope",
    "clinic", "school", "update", "cases", "county", "doses", "the", "a", "parents", "today", "GOOD", "Panic!",
];
const MATCHERS: [&str; 5] = [
    "#measles",
    "#Measles",
    "@cityhealth",
    "measles outbreak",
    "MEASLES  Outbreak",
];

/// `n` matching records whose timestamps cover the profile's crisis window
/// plus a day of margin on each side, so some fall outside it. Day boundaries
/// and the window edges are hit on purpose.
pub fn random_lines<R: Rng>(rng: &mut R, n: usize, profile: &TrackingProfile) -> Vec<String> {
    let w = profile.crisis_window();
    let lo = w.start().timestamp() - 86_400;
    let hi = w.end().timestamp() + 86_400;
    let authors = rng.gen_range(1..=(n as u32 / 3).max(2));
    let mut lines = Vec::with_capacity(n);
    for i in 0..n {
        let secs = match rng.gen_range(0..20) {
            0 => w.start().timestamp(),
            1 => w.end().timestamp() - 1,
            2 => w.end().timestamp(),
            3 => {
                let t = rng.gen_range(lo..hi);
                t - t.rem_euclid(86_400) - rng.gen_range(0..2)
            }
            _ => rng.gen_range(lo..hi),
        };
        let mut words: Vec<&str> = (0..rng.gen_range(0..8)).map(|_| *WORDS.choose(rng).unwrap()).collect();
        words.insert(rng.gen_range(0..=words.len()), MATCHERS.choose(rng).unwrap());
        for _ in 0..rng.gen_range(0..3) {
            words.push(["@who", "@cdcgov", "@mayor"].choose(rng).unwrap());
        }
        let author = rng.gen_range(0..authors);
        let record = WireRecord {
            tweet_id: format!("t{i}"),
            created_at: utc(secs),
            author_id: format!("a{author}"),
            author_handle: format!("h{author}"),
            text: words.join(" "),
            like_count: rng.gen_range(0..50),
            retweet_count: rng.gen_range(0..25),
            retweet_of: (i > 0 && rng.gen_bool(0.2)).then(|| format!("t{}", rng.gen_range(0..i))),
        };
        lines.push(record.to_line());
    }
    lines
}

pub fn parse_lines(lines: &[String]) -> Vec<Tweet> {
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| validate_tweet(&RawRecord::parse(i as u64 + 1, l)).unwrap())
        .collect()
}

/// Sentiment by linear lookup: `(value, label, hits)` with label
/// `-1`/`0`/`1`.
pub fn oracle_score(text: &str, lex: &Lexicon) -> (f64, i8, u32) {
    let mut sum = 0i64;
    let mut hits = 0u32;
    for tok in tokenize(text) {
        if let Some((_, v)) = lex.iter().find(|(w, _)| *w == tok) {
            sum += i64::from(v);
            hits += 1;
        }
    }
    if hits == 0 {
        return (0.0, 0, 0);
    }
    let value = (sum as f64 / f64::from(hits) / 5.0).clamp(-1.0, 1.0);
    let label = if value > 0.1 {
        1
    } else if value < -0.1 {
        -1
    } else {
        0
    };
    (value, label, hits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleDay {
    pub date: NaiveDate,
    pub tweets: u64,
    pub retweets: u64,
    pub authors: u64,
    pub mean: Option<f64>,
    /// negative, neutral, positive
    pub histogram: [u64; 3],
}

fn in_window(t: &Tweet, w: TimeRange) -> bool {
    w.start() <= t.created_at() && t.created_at() < w.end()
}

pub fn oracle_dates(w: TimeRange) -> Vec<NaiveDate> {
    let mut out = Vec::new();
    if w.start() >= w.end() {
        return out;
    }
    let mut d = w.start().date_naive();
    let last = utc(w.end().timestamp() - 1).date_naive();
    while d <= last {
        out.push(d);
        d = d.succ_opt().unwrap();
    }
    out
}

pub fn oracle_day(tweets: &[Tweet], date: NaiveDate, w: TimeRange, lex: &Lexicon) -> OracleDay {
    let mut day = OracleDay {
        date,
        tweets: 0,
        retweets: 0,
        authors: 0,
        mean: None,
        histogram: [0; 3],
    };
    let mut authors = BTreeSet::new();
    let mut sum = 0.0;
    for t in tweets {
        if !in_window(t, w) || t.created_at().date_naive() != date {
            continue;
        }
        day.tweets += 1;
        if t.retweet_of().is_some() {
            day.retweets += 1;
        }
        authors.insert(t.author_id().to_owned());
        let (v, label, _) = oracle_score(t.text(), lex);
        sum += v;
        day.histogram[(label + 1) as usize] += 1;
    }
    day.authors = authors.len() as u64;
    if day.tweets > 0 {
        day.mean = Some(sum / day.tweets as f64);
    }
    day
}

pub fn oracle_series(tweets: &[Tweet], w: TimeRange, lex: &Lexicon) -> Vec<OracleDay> {
    oracle_dates(w)
        .into_iter()
        .map(|d| oracle_day(tweets, d, w, lex))
        .collect()
}

pub fn oracle_weekly(tweets: &[Tweet], w: TimeRange) -> Vec<(i32, u32, u64)> {
    let mut weeks: Vec<(i32, u32)> = Vec::new();
    for d in oracle_dates(w) {
        let key = (d.iso_week().year(), d.iso_week().week());
        if !weeks.contains(&key) {
            weeks.push(key);
        }
    }
    weeks
        .into_iter()
        .map(|(y, wk)| {
            let n = tweets
                .iter()
                .filter(|t| in_window(t, w))
                .filter(|t| {
                    let iw = t.created_at().date_naive().iso_week();
                    (iw.year(), iw.week()) == (y, wk)
                })
                .count();
            (y, wk, n as u64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStats {
    pub total: u64,
    pub retweets: u64,
    pub authors: u64,
    pub mentions: u64,
    pub first: Option<DateTime<Utc>>,
    pub last: Option<DateTime<Utc>>,
}

pub fn oracle_stats(tweets: &[Tweet], w: TimeRange) -> OracleStats {
    let inside: Vec<&Tweet> = tweets.iter().filter(|t| in_window(t, w)).collect();
    let mut sorted: Vec<DateTime<Utc>> = inside.iter().map(|t| t.created_at()).collect();
    sorted.sort();
    OracleStats {
        total: inside.len() as u64,
        retweets: inside.iter().filter(|t| t.retweet_of().is_some()).count() as u64,
        authors: inside.iter().map(|t| t.author_id()).collect::<BTreeSet<_>>().len() as u64,
        mentions: inside.iter().map(|t| count_mentions(t.text())).sum(),
        first: sorted.first().copied(),
        last: sorted.last().copied(),
    }
}

/// `@name` occurrences not preceded by a word character.
fn count_mentions(text: &str) -> u64 {
    let chars: Vec<char> = text.chars().collect();
    let word = |c: char| c.is_alphanumeric() || c == '_';
    (0..chars.len())
        .filter(|&i| chars[i] == '@')
        .filter(|&i| i == 0 || !word(chars[i - 1]))
        .filter(|&i| chars.get(i + 1).is_some_and(|&c| word(c)))
        .count() as u64
}

/// Full sort by `(engagement desc, created_at desc, tweet_id asc)`, first `k`.
pub fn oracle_trending(tweets: &[Tweet], w: TimeRange, k: usize, w_rt: u64, w_like: u64) -> Vec<(String, u64)> {
    let mut all: Vec<(u64, DateTime<Utc>, String)> = tweets
        .iter()
        .filter(|t| in_window(t, w))
        .map(|t| {
            (
                w_rt * t.retweet_count() + w_like * t.like_count(),
                t.created_at(),
                t.tweet_id().to_owned(),
            )
        })
        .collect();
    all.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    all.into_iter().take(k).map(|(e, _, id)| (id, e)).collect()
}

pub fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= MEAN_TOL,
        _ => false,
    }
}
