//! Synthetic measles-outbreak replay corpus.
//!
//! Output is a pure function of [`CorpusSpec`]: the same spec always yields the
//! same bytes. Every record carries `#measles` (in varying case) so it matches
//! the default profile, and the text vocabulary is drawn from a short list whose
//! lexicon valences are known, keeping sentiment outcomes easy to check by hand.

use std::io::{self, Write};

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::wire::WireRecord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSpec {
    pub seed: u64,
    pub days: u32,
    pub per_day: u32,
    /// First UTC day of the corpus.
    pub start: NaiveDate,
}

impl CorpusSpec {
    pub fn new(seed: u64, days: u32, per_day: u32) -> Self {
        Self {
            seed,
            days,
            per_day,
            start: default_start(),
        }
    }

    pub fn total(&self) -> u64 {
        u64::from(self.days) * u64::from(self.per_day)
    }
}

/// Monday 2024-03-04.
pub fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 3, 4).expect("valid date")
}

const TAGS: [&str; 4] = ["#measles", "#Measles", "#MEASLES", "#mEasles"];
const EXTRA_TAGS: [&str; 4] = ["#vaccines", "#publichealth", "#outbreak", "#mmr"];
const MENTIONS: [&str; 3] = ["@cityhealth", "@who", "@cdcgov"];

/// Words with lexicon entries (see `data/lexicon-en.tsv`).
const SENTIMENT_WORDS: [&str; 16] = [
    "good",
    "safe",
    "thanks",
    "calm",
    "recovered",
    "hope",
    "vaccinated",
    "worried",
    "outbreak",
    "panic",
    "fear",
    "misinformation",
    "fever",
    "rash",
    "scared",
    "crisis",
];

/// Words without lexicon entries.
const FILLER: [&str; 16] = [
    "clinic", "school", "update", "cases", "county", "hospital", "children", "parents", "doses", "report", "today",
    "week", "nurses", "symptoms", "spread", "mmr",
];

const AUTHORS: u32 = 400;

/// Streams the corpus to `out` as newline-delimited records.
pub fn write_corpus(spec: &CorpusSpec, out: &mut dyn Write) -> io::Result<u64> {
    let mut n = 0;
    for record in generate(spec) {
        out.write_all(record.to_line().as_bytes())?;
        out.write_all(b"\n")?;
        n += 1;
    }
    Ok(n)
}

/// Records in chronological order, ids `"{seed}-{index}"`.
pub fn generate(spec: &CorpusSpec) -> impl Iterator<Item = WireRecord> + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let day0 = Utc.from_utc_datetime(&spec.start.and_hms_opt(0, 0, 0).expect("midnight"));
    let mut index: u64 = 0;
    (0..spec.days).flat_map(move |d| {
        let base = day0 + Duration::days(i64::from(d));
        let mut offsets: Vec<i64> = (0..spec.per_day).map(|_| rng.gen_range(0..86_400)).collect();
        offsets.sort_unstable();
        let day: Vec<WireRecord> = offsets
            .into_iter()
            .map(|secs| {
                let record = record(&mut rng, spec.seed, index, base + Duration::seconds(secs));
                index += 1;
                record
            })
            .collect();
        day
    })
}

fn record(rng: &mut ChaCha8Rng, seed: u64, index: u64, created_at: chrono::DateTime<Utc>) -> WireRecord {
    let author = rng.gen_range(0..AUTHORS);
    let mut words: Vec<&str> = Vec::new();
    for _ in 0..rng.gen_range(3..9) {
        if rng.gen_bool(0.35) {
            words.push(SENTIMENT_WORDS.choose(rng).expect("non-empty"));
        } else {
            words.push(FILLER.choose(rng).expect("non-empty"));
        }
    }
    let tag = *TAGS.choose(rng).expect("non-empty");
    words.insert(rng.gen_range(0..=words.len()), tag);
    if rng.gen_bool(0.3) {
        words.push(EXTRA_TAGS.choose(rng).expect("non-empty"));
    }
    if rng.gen_bool(0.25) {
        words.insert(0, MENTIONS.choose(rng).expect("non-empty"));
    }
    let retweet_of = (index > 0 && rng.gen_bool(0.2)).then(|| format!("{seed}-{}", rng.gen_range(0..index)));
    let like_count = skewed(rng, 2_000);
    let retweet_count = skewed(rng, 500);
    WireRecord {
        tweet_id: format!("{seed}-{index}"),
        created_at,
        author_id: format!("u{author}"),
        author_handle: format!("user{author}"),
        text: words.join(" "),
        like_count,
        retweet_count,
        retweet_of,
    }
}

/// Heavy-tailed counts: most tweets get little engagement, a few get a lot.
fn skewed(rng: &mut ChaCha8Rng, max: u64) -> u64 {
    let u: f64 = rng.gen();
    (u.powi(4) * max as f64) as u64
}
